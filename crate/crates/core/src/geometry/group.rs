use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{GroupAction, LieAlgebraDesc, ModuleActionDesc, ValidationReport, Violation, DEFAULT_TOL_ALG};
use crate::error::{malformed, Error, Result};
use crate::linalg;

/// Default closeness tolerance for group elements (scaled by the matrix norm).
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;
/// Residual allowed when expanding a tangent matrix in the algebra basis.
pub const TANGENT_TOL: f64 = 1e-6;

type ExpFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;
type LogFn = dyn Fn(&DMatrix<f64>) -> Result<DVector<f64>> + Send + Sync;

/// A matrix Lie group given by a realization of its Lie algebra as `d x d`
/// real matrices.
#[derive(Clone)]
pub struct MatrixGroupDesc {
    name: String,
    embed_dim: usize,
    algebra: LieAlgebraDesc,
    basis: Vec<DMatrix<f64>>,
    // pseudo-inverse of the d^2 x n matrix of flattened basis matrices
    basis_pinv: DMatrix<f64>,
    basis_flat: DMatrix<f64>,
    membership_tol: f64,
    exp: Option<Arc<ExpFn>>,
    log: Option<Arc<LogFn>>,
}

impl fmt::Debug for MatrixGroupDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixGroupDesc")
            .field("name", &self.name)
            .field("embed_dim", &self.embed_dim)
            .field("dim", &self.algebra.dim())
            .finish_non_exhaustive()
    }
}

impl MatrixGroupDesc {
    /// Builds a group from basis matrices; their commutators must reproduce
    /// the structure constants of `algebra`.
    pub fn new(name: impl Into<String>, algebra: LieAlgebraDesc, basis: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = algebra.dim();
        if basis.len() != n {
            return Err(malformed(format!("{} basis matrices for a {n}-dimensional algebra", basis.len())));
        }
        let d = basis.first().map(|b| b.nrows()).unwrap_or(1);
        if basis.iter().any(|b| b.shape() != (d, d)) {
            return Err(malformed("basis matrices must be square and of equal size"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let comm = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let mut expect = DMatrix::zeros(d, d);
                for (k, b) in basis.iter().enumerate() {
                    expect += b * algebra.c(i, j, k);
                }
                let r = linalg::max_abs((comm - expect).iter().cloned());
                if r > DEFAULT_TOL_ALG {
                    return Err(malformed(format!(
                        "commutator of basis matrices {i},{j} does not match the structure constants (residual {r:e})"
                    )));
                }
            }
        }
        let basis_flat = if n == 0 {
            DMatrix::zeros(d * d, 0)
        } else {
            DMatrix::from_columns(&basis.iter().map(|b| DVector::from_column_slice(b.as_slice())).collect::<Vec<_>>())
        };
        if n > 0 && linalg::numerical_rank(&basis_flat) < n {
            return Err(malformed("basis matrices are linearly dependent"));
        }
        let basis_pinv = if n == 0 {
            DMatrix::zeros(0, d * d)
        } else {
            basis_flat.clone().pseudo_inverse(1e-12).map_err(|e| malformed(format!("pseudo-inverse failed: {e}")))?
        };
        Ok(Self {
            name: name.into(),
            embed_dim: d,
            algebra,
            basis,
            basis_pinv,
            basis_flat,
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
            exp: None,
            log: None,
        })
    }

    /// Replaces the generic matrix exponential with a closed form.
    pub fn with_exp<F>(mut self, f: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.exp = Some(Arc::new(f));
        self
    }

    /// Replaces the generic principal logarithm with a closed form.
    pub fn with_log<F>(mut self, f: F) -> Self
    where
        F: Fn(&DMatrix<f64>) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        self.log = Some(Arc::new(f));
        self
    }

    pub fn with_membership_tol(mut self, tol: f64) -> Self {
        self.membership_tol = tol;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn algebra(&self) -> &LieAlgebraDesc {
        &self.algebra
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn membership_tol(&self) -> f64 {
        self.membership_tol
    }

    /// Closeness tolerance for elements of size `norm`.
    pub fn scaled_tol(&self, norm: f64) -> f64 {
        self.membership_tol * norm.max(1.0)
    }

    pub fn identity(&self) -> DMatrix<f64> {
        DMatrix::identity(self.embed_dim, self.embed_dim)
    }

    /// Realizes algebra coordinates as a matrix.
    pub fn to_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.embed_dim, self.embed_dim);
        for (xi, b) in x.iter().zip(&self.basis) {
            if *xi != 0.0 {
                out += b * *xi;
            }
        }
        out
    }

    /// Expands an algebra matrix in the basis by least squares.
    pub fn decompose(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        let flat = DVector::from_column_slice(x.as_slice());
        let coeffs = &self.basis_pinv * &flat;
        let residual = (&self.basis_flat * &coeffs - &flat).norm();
        if residual > TANGENT_TOL * flat.norm().max(1.0) {
            return Err(Error::TangentDecomposition { residual });
        }
        Ok(coeffs)
    }

    pub fn exp(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.exp {
            Some(f) => f(x),
            None => linalg::matrix_exp(&self.to_matrix(x)),
        }
    }

    /// Principal logarithm in algebra coordinates, valid near the identity.
    pub fn log(&self, g: &DMatrix<f64>) -> Result<DVector<f64>> {
        match &self.log {
            Some(f) => f(g),
            None => self.decompose(&linalg::matrix_log(g)?),
        }
    }

    pub fn inverse(&self, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        g.clone().try_inverse().ok_or_else(|| Error::UserFunction("group element is singular".into()))
    }

    /// Distance of `g` from `h` relative to the tolerance scale.
    pub fn close(&self, g: &DMatrix<f64>, h: &DMatrix<f64>) -> bool {
        (g - h).norm() <= self.scaled_tol(g.norm())
    }

    /// `Ad_g` in the algebra basis.
    pub fn adjoint_matrix(&self, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let g_inv = self.inverse(g)?;
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (j, b) in self.basis.iter().enumerate() {
            out.set_column(j, &self.decompose(&(g * b * &g_inv))?);
        }
        Ok(out)
    }

    /// Conjugation action on the algebra, for the adjoint module.
    pub fn adjoint_action(&self) -> GroupAction {
        let group = self.clone();
        GroupAction::Linear(Arc::new(move |g: &DMatrix<f64>| {
            group.adjoint_matrix(g).unwrap_or_else(|_| DMatrix::from_element(group.dim(), group.dim(), f64::NAN))
        }))
    }

    /// `g -> exp(rho(log g))`, defined on the image of the principal logarithm.
    pub fn exp_rho_action(&self, rho: &[DMatrix<f64>]) -> GroupAction {
        let group = self.clone();
        let rho = rho.to_vec();
        GroupAction::Linear(Arc::new(move |g: &DMatrix<f64>| {
            let m = rho.first().map(|r| r.nrows()).unwrap_or(0);
            match group.log(g) {
                Ok(x) => {
                    let mut gen = DMatrix::zeros(m, m);
                    for (xi, r) in x.iter().zip(&rho) {
                        gen += r * *xi;
                    }
                    linalg::matrix_exp(&gen)
                }
                Err(_) => DMatrix::from_element(m, m, f64::NAN),
            }
        }))
    }

    /// Compares the derivative of the group action along `exp(t e_i)` at
    /// `t = 0` with `rho[i]`, by central differences.
    pub fn check_action_compatibility(&self, module: &ModuleActionDesc, tol: f64) -> Result<ValidationReport> {
        let n = self.dim();
        if module.rho().len() != n {
            return Err(malformed("module and group dimensions differ"));
        }
        let h = 1e-4;
        let mut report = ValidationReport::default();
        for i in 0..n {
            let e = {
                let mut v = DVector::zeros(n);
                v[i] = 1.0;
                v
            };
            let at = |t: f64| module.action_matrix(&self.exp(&(&e * t)));
            let deriv = (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h);
            let r = linalg::max_abs((deriv - &module.rho()[i]).iter().cloned());
            report.max_residual = report.max_residual.max(r);
            if r > tol {
                report.violations.push(Violation::Compatibility { i, residual: r });
            }
        }
        Ok(report)
    }

    /// `R^n` as unipotent `(n+1) x (n+1)` translation matrices.
    pub fn translations(n: usize) -> Self {
        let d = n + 1;
        let basis = (0..n)
            .map(|i| {
                let mut b = DMatrix::zeros(d, d);
                b[(i, n)] = 1.0;
                b
            })
            .collect();
        Self::new(format!("R^{n}"), LieAlgebraDesc::abelian(n), basis)
            .expect("translation basis is valid")
            .with_exp(move |x| {
                let mut g = DMatrix::identity(d, d);
                for i in 0..n {
                    g[(i, n)] = x[i];
                }
                g
            })
            .with_log(move |g| Ok(DVector::from_fn(n, |i, _| g[(i, n)])))
    }

    /// The torus `T^n = R^n / Z^n` as block-diagonal rotations; the basis
    /// vector `e_i` generates a full turn of the `i`-th circle over `[0, 1]`.
    pub fn torus(n: usize) -> Self {
        let d = 2 * n;
        let basis = (0..n)
            .map(|i| {
                let mut b = DMatrix::zeros(d, d);
                b[(2 * i, 2 * i + 1)] = -2.0 * PI;
                b[(2 * i + 1, 2 * i)] = 2.0 * PI;
                b
            })
            .collect();
        Self::new(format!("T^{n}"), LieAlgebraDesc::abelian(n), basis)
            .expect("torus basis is valid")
            .with_exp(move |x| {
                let mut g = DMatrix::zeros(d, d);
                for i in 0..n {
                    let (s, c) = (2.0 * PI * x[i]).sin_cos();
                    g[(2 * i, 2 * i)] = c;
                    g[(2 * i, 2 * i + 1)] = -s;
                    g[(2 * i + 1, 2 * i)] = s;
                    g[(2 * i + 1, 2 * i + 1)] = c;
                }
                g
            })
            .with_log(move |g| {
                Ok(DVector::from_fn(n, |i, _| g[(2 * i + 1, 2 * i)].atan2(g[(2 * i, 2 * i)]) / (2.0 * PI)))
            })
    }

    /// `SU(2)` as unit quaternions acting on `R^4` by left multiplication,
    /// with basis `{i, j, k}`.
    pub fn su2() -> Self {
        let basis = vec![
            quaternion_left(0.0, 1.0, 0.0, 0.0),
            quaternion_left(0.0, 0.0, 1.0, 0.0),
            quaternion_left(0.0, 0.0, 0.0, 1.0),
        ];
        Self::new("SU(2)", LieAlgebraDesc::su2_quaternion(), basis)
            .expect("quaternion basis is valid")
            .with_exp(|x| {
                let r = x.norm();
                if r == 0.0 {
                    return DMatrix::identity(4, 4);
                }
                let k = r.sin() / r;
                quaternion_left(r.cos(), k * x[0], k * x[1], k * x[2])
            })
            .with_log(|g| {
                // first column of L(q) is q itself
                let (a, v) = (g[(0, 0)], DVector::from_vec(vec![g[(1, 0)], g[(2, 0)], g[(3, 0)]]));
                let r = v.norm();
                if r == 0.0 {
                    return Ok(DVector::zeros(3));
                }
                Ok(v * (r.atan2(a) / r))
            })
    }

    /// `SO(3)` with basis the infinitesimal rotations about the coordinate axes.
    pub fn so3() -> Self {
        let l = |i: usize| {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            let mut m = DMatrix::zeros(3, 3);
            m[(b, a)] = 1.0;
            m[(a, b)] = -1.0;
            m
        };
        Self::new("SO(3)", LieAlgebraDesc::so3(), vec![l(0), l(1), l(2)]).expect("rotation basis is valid")
    }

    /// The Heisenberg group as unipotent upper triangular `3 x 3` matrices.
    pub fn heisenberg() -> Self {
        let e = |r: usize, c: usize| {
            let mut m = DMatrix::zeros(3, 3);
            m[(r, c)] = 1.0;
            m
        };
        Self::new("Heis", LieAlgebraDesc::heisenberg3(), vec![e(0, 1), e(1, 2), e(0, 2)])
            .expect("heisenberg basis is valid")
    }
}

/// Matrix of left multiplication by the quaternion `a + bi + cj + dk` on `R^4`.
pub fn quaternion_left(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(4, 4, &[a, -b, -c, -d, b, a, -d, c, c, d, a, -b, d, -c, b, a])
}
