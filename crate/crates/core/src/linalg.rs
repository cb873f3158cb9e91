//! Dense linear algebra used by the cohomology and geometry modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative cutoff for numerical rank: singular values below
/// `RANK_RTOL * max(sigma_max, reference)` count as zero, where `reference`
/// is the scale of the data the matrix was assembled from. Without the
/// reference a matrix made entirely of round-off would be assigned full rank.
pub const RANK_RTOL: f64 = 1e-10;

struct Decomposition {
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    v_t: DMatrix<f64>,
    cutoff: f64,
}

fn decompose(a: &DMatrix<f64>, reference: f64) -> Decomposition {
    // Padding with zero rows yields the full right singular basis, which the
    // kernel computation needs when the matrix is wide.
    let (r, c) = a.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let sigma = svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0_f64, f64::max);
    Decomposition {
        u: svd.u.expect("u requested"),
        sigma,
        v_t: svd.v_t.expect("v_t requested"),
        cutoff: RANK_RTOL * smax.max(reference),
    }
}

fn significant(d: &Decomposition, i: usize) -> bool {
    d.sigma[i] > d.cutoff && d.sigma[i] > 0.0
}

/// Numerical rank with cutoff `1e-10 * sigma_max`.
pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    numerical_rank_scaled(a, 0.0)
}

/// Numerical rank with cutoff `1e-10 * max(sigma_max, reference)`.
pub fn numerical_rank_scaled(a: &DMatrix<f64>, reference: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let d = decompose(a, reference);
    (0..d.sigma.len()).filter(|&i| significant(&d, i)).count()
}

/// Orthonormal basis of the numerical kernel, one vector per column.
pub fn kernel_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    kernel_basis_scaled(a, 0.0)
}

pub fn kernel_basis_scaled(a: &DMatrix<f64>, reference: f64) -> DMatrix<f64> {
    let c = a.ncols();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(c, c);
    }
    let d = decompose(a, reference);
    let cols: Vec<DVector<f64>> =
        (0..d.sigma.len()).filter(|&i| !significant(&d, i)).map(|i| d.v_t.row(i).transpose()).collect();
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space.
pub fn image_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    image_basis_scaled(a, 0.0)
}

pub fn image_basis_scaled(a: &DMatrix<f64>, reference: f64) -> DMatrix<f64> {
    let r = a.nrows();
    if r == 0 || a.ncols() == 0 {
        return DMatrix::zeros(r, 0);
    }
    let d = decompose(a, reference);
    let cols: Vec<DVector<f64>> =
        (0..d.sigma.len()).filter(|&i| significant(&d, i)).map(|i| d.u.column(i).rows(0, r).into_owned()).collect();
    if cols.is_empty() {
        DMatrix::zeros(r, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `a x = b` and the residual norm.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let (r, c) = a.shape();
    if c == 0 || r == 0 {
        return (DVector::zeros(c), b.norm());
    }
    let d = decompose(a, 0.0);
    let rows = d.u.nrows();
    let mut b_ext = DVector::zeros(rows);
    b_ext.rows_mut(0, r).copy_from(b);
    let mut x = DVector::zeros(c);
    for i in 0..d.sigma.len() {
        if significant(&d, i) {
            let coeff = d.u.column(i).dot(&b_ext) / d.sigma[i];
            x += d.v_t.row(i).transpose() * coeff;
        }
    }
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Smallest singular value of a matrix with at least as many rows as columns.
pub fn smallest_singular_value(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return f64::INFINITY;
    }
    if a.nrows() < a.ncols() {
        return 0.0;
    }
    a.clone().singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Maximum absolute entry.
pub fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Matrix exponential.
pub fn matrix_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().exp()
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Repeated Denman-Beavers square roots bring the argument close to the
/// identity, where `log A = 2 atanh((A - I)(A + I)^-1)` converges quickly.
pub fn matrix_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::MalformedInput("logarithm of a non-square matrix".into()));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut y = a.clone();
    let mut squarings = 0u32;
    while (&y - &id).norm() > 0.25 {
        if squarings > 60 {
            return Err(Error::UserFunction("matrix logarithm did not converge".into()));
        }
        y = sqrt_denman_beavers(&y)?;
        squarings += 1;
    }
    let sum = &y + &id;
    let inv = sum.try_inverse().ok_or_else(|| Error::UserFunction("matrix logarithm: singular argument".into()))?;
    let z = (&y - &id) * inv;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut acc = z.clone();
    for k in 1..60 {
        term = &term * &z2;
        let contrib = &term / (2 * k + 1) as f64;
        acc += &contrib;
        if contrib.norm() < 1e-18 * acc.norm().max(1e-300) {
            break;
        }
    }
    Ok(acc * 2.0 * f64::powi(2.0, squarings as i32))
}

fn sqrt_denman_beavers(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::UserFunction("matrix square root: singular iterate".into()))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::UserFunction("matrix square root: singular iterate".into()))?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let step = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if step <= 1e-15 * y.norm() {
            return Ok(y);
        }
    }
    Err(Error::UserFunction("matrix square root did not converge".into()))
}
