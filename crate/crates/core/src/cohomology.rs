//! Lie algebra cochains with Palais' differential, the assembled complex, and
//! pointwise evaluation of the smooth group coboundary.
//!
//! Component order: strictly increasing multi-indices in lexicographic order,
//! with the coefficient index varying fastest. Every matrix in this module uses
//! that order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{LieAlgebraDesc, ModuleActionDesc};
use crate::error::{malformed, Error, Result};
use crate::{linalg, par};

/// Lexicographically ordered strictly increasing multi-indices of a fixed length.
#[derive(Debug, Clone)]
pub struct MultiIndexBasis {
    indices: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl MultiIndexBasis {
    pub fn new(n: usize, k: usize) -> Self {
        let mut indices = Vec::new();
        let mut current = Vec::with_capacity(k);
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        if k <= n {
            rec(0, n, k, &mut current, &mut indices);
        }
        let lookup = indices.iter().enumerate().map(|(i, ix)| (ix.clone(), i)).collect();
        Self { indices, lookup }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.indices[i]
    }

    pub fn position(&self, sorted: &[usize]) -> Option<usize> {
        self.lookup.get(sorted).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.indices.iter().map(|v| v.as_slice())
    }
}

/// Sorts `ix` in place and returns the permutation sign, or `None` when an
/// index repeats.
pub fn sort_with_sign(ix: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..ix.len() {
        let mut j = i;
        while j > 0 && ix[j - 1] > ix[j] {
            ix.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if ix.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Binomial coefficient.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Alternating multilinear map `g^n -> a`, stored by its values on basis
/// multi-indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    degree: usize,
    alg_dim: usize,
    coeff_dim: usize,
    components: DVector<f64>,
}

impl Cochain {
    pub fn zero(degree: usize, alg_dim: usize, coeff_dim: usize) -> Self {
        let len = binomial(alg_dim, degree) * coeff_dim;
        Self { degree, alg_dim, coeff_dim, components: DVector::zeros(len) }
    }

    /// Builds a cochain from its flat component vector.
    pub fn from_components(degree: usize, alg_dim: usize, coeff_dim: usize, components: DVector<f64>) -> Result<Self> {
        let expected = binomial(alg_dim, degree) * coeff_dim;
        if components.len() != expected {
            return Err(malformed(format!(
                "degree-{degree} cochain on a {alg_dim}-dimensional algebra with {coeff_dim} coefficients needs {expected} components, got {}",
                components.len()
            )));
        }
        Ok(Self { degree, alg_dim, coeff_dim, components })
    }

    /// Builds a cochain from `(indices, value)` pairs; unsorted indices are
    /// sorted with the corresponding sign.
    pub fn from_entries(
        degree: usize,
        alg_dim: usize,
        coeff_dim: usize,
        entries: &[(Vec<usize>, DVector<f64>)],
    ) -> Result<Self> {
        let basis = MultiIndexBasis::new(alg_dim, degree);
        let mut out = Self::zero(degree, alg_dim, coeff_dim);
        for (ix, value) in entries {
            if ix.len() != degree || ix.iter().any(|&i| i >= alg_dim) {
                return Err(malformed(format!("invalid cochain index {ix:?}")));
            }
            if value.len() != coeff_dim {
                return Err(malformed(format!(
                    "cochain value at {ix:?} has length {}, expected {coeff_dim}",
                    value.len()
                )));
            }
            let mut sorted = ix.clone();
            let sign = sort_with_sign(&mut sorted)
                .ok_or_else(|| malformed(format!("repeated index in cochain entry {ix:?}")))?;
            let pos = basis.position(&sorted).expect("sorted index in basis");
            for a in 0..coeff_dim {
                out.components[pos * coeff_dim + a] = sign * value[a];
            }
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn alg_dim(&self) -> usize {
        self.alg_dim
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn components(&self) -> &DVector<f64> {
        &self.components
    }

    pub fn max_norm(&self) -> f64 {
        linalg::max_abs(self.components.iter().cloned())
    }

    /// Value on an arbitrary tuple of basis indices (zero on repeats).
    pub fn on_basis(&self, ix: &[usize]) -> DVector<f64> {
        let mut sorted = ix.to_vec();
        match sort_with_sign(&mut sorted) {
            None => DVector::zeros(self.coeff_dim),
            Some(sign) => {
                let pos = rank_of(&sorted, self.alg_dim);
                self.components.rows(pos * self.coeff_dim, self.coeff_dim) * sign
            }
        }
    }

    /// Value on arbitrary algebra vectors via the alternating multilinear extension.
    pub fn eval(&self, args: &[DVector<f64>]) -> Result<DVector<f64>> {
        if args.len() != self.degree {
            return Err(malformed(format!("degree-{} cochain given {} arguments", self.degree, args.len())));
        }
        if args.iter().any(|a| a.len() != self.alg_dim) {
            return Err(malformed("cochain argument has the wrong length"));
        }
        let mut out = DVector::zeros(self.coeff_dim);
        let basis = MultiIndexBasis::new(self.alg_dim, self.degree);
        let k = self.degree;
        for (pos, ix) in basis.iter().enumerate() {
            let minor = DMatrix::from_fn(k, k, |r, c| args[c][ix[r]]);
            let det = if k == 0 { 1.0 } else { minor.determinant() };
            if det != 0.0 {
                out += self.components.rows(pos * self.coeff_dim, self.coeff_dim) * det;
            }
        }
        Ok(out)
    }

    fn check_shape(&self, alg: &LieAlgebraDesc, module: &ModuleActionDesc) -> Result<()> {
        if self.alg_dim != alg.dim() || self.coeff_dim != module.coeff_dim() || module.rho().len() != alg.dim() {
            return Err(malformed(format!(
                "cochain on ({}, {}) does not match algebra dim {} and module dim {}",
                self.alg_dim,
                self.coeff_dim,
                alg.dim(),
                module.coeff_dim()
            )));
        }
        Ok(())
    }
}

impl std::ops::Add for &Cochain {
    type Output = Cochain;
    fn add(self, rhs: &Cochain) -> Cochain {
        assert_eq!(self.components.len(), rhs.components.len(), "cochain shapes differ");
        Cochain { components: &self.components + &rhs.components, ..self.clone() }
    }
}

impl std::ops::Sub for &Cochain {
    type Output = Cochain;
    fn sub(self, rhs: &Cochain) -> Cochain {
        assert_eq!(self.components.len(), rhs.components.len(), "cochain shapes differ");
        Cochain { components: &self.components - &rhs.components, ..self.clone() }
    }
}

impl std::ops::Mul<f64> for &Cochain {
    type Output = Cochain;
    fn mul(self, rhs: f64) -> Cochain {
        Cochain { components: &self.components * rhs, ..self.clone() }
    }
}

// Lexicographic rank of a sorted multi-index among k-subsets of 0..n.
fn rank_of(sorted: &[usize], n: usize) -> usize {
    let k = sorted.len();
    let mut rank = 0;
    let mut prev = 0;
    for (pos, &x) in sorted.iter().enumerate() {
        for skipped in prev..x {
            rank += binomial(n - skipped - 1, k - pos - 1);
        }
        prev = x + 1;
    }
    rank
}

/// Palais' formula, evaluated on every basis multi-index of degree `n + 1`.
pub fn apply_d(alg: &LieAlgebraDesc, module: &ModuleActionDesc, omega: &Cochain) -> Result<Cochain> {
    omega.check_shape(alg, module)?;
    let n = omega.degree;
    let ng = alg.dim();
    let m = omega.coeff_dim;
    let target = MultiIndexBasis::new(ng, n + 1);
    let mut out = Cochain::zero(n + 1, ng, m);
    let mut rest = Vec::with_capacity(n);
    for (pos, ix) in target.iter().enumerate() {
        let mut value = DVector::zeros(m);
        for i in 0..=n {
            rest.clear();
            rest.extend(ix.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &x)| x));
            let inner = omega.on_basis(&rest);
            let acted = &module.rho()[ix[i]] * inner;
            if i % 2 == 0 {
                value += acted;
            } else {
                value -= acted;
            }
        }
        for a in 0..=n {
            for b in (a + 1)..=n {
                let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                for k in 0..ng {
                    let c = alg.c(ix[a], ix[b], k);
                    if c == 0.0 {
                        continue;
                    }
                    rest.clear();
                    rest.push(k);
                    rest.extend(ix.iter().enumerate().filter(|&(p, _)| p != a && p != b).map(|(_, &x)| x));
                    value += omega.on_basis(&rest) * (sign * c);
                }
            }
        }
        out.components.rows_mut(pos * m, m).copy_from(&value);
    }
    Ok(out)
}

/// Max-norm of `d omega`.
pub fn cocycle_residual(alg: &LieAlgebraDesc, module: &ModuleActionDesc, omega: &Cochain) -> Result<f64> {
    Ok(apply_d(alg, module, omega)?.max_norm())
}

/// `d omega = 0` within `tol` (max-norm).
pub fn is_cocycle(alg: &LieAlgebraDesc, module: &ModuleActionDesc, omega: &Cochain, tol: f64) -> Result<bool> {
    Ok(cocycle_residual(alg, module, omega)? < tol)
}

/// Matrix of `d_n` in the component bases.
pub fn d_matrix(alg: &LieAlgebraDesc, module: &ModuleActionDesc, n: usize) -> Result<DMatrix<f64>> {
    let ng = alg.dim();
    let m = module.coeff_dim();
    if module.rho().len() != ng {
        return Err(malformed("module and algebra dimensions differ"));
    }
    let cols = binomial(ng, n) * m;
    let rows = binomial(ng, n + 1) * m;
    let columns = par::try_map_indexed(cols, |c| {
        let mut unit = DVector::zeros(cols);
        unit[c] = 1.0;
        let basis_cochain = Cochain::from_components(n, ng, m, unit)?;
        Ok::<_, Error>(apply_d(alg, module, &basis_cochain)?.components)
    })?;
    let mut out = DMatrix::zeros(rows, cols);
    for (c, col) in columns.iter().enumerate() {
        out.set_column(c, col);
    }
    Ok(out)
}

/// One degree of the Chevalley-Eilenberg complex.
#[derive(Debug, Clone)]
pub struct ComplexSlice {
    pub n: usize,
    /// Matrix of `d_n`; rows index degree `n + 1` components.
    pub d_matrix: DMatrix<f64>,
    /// Orthonormal basis of `ker d_n`, one column per vector.
    pub z_basis: DMatrix<f64>,
    /// Orthonormal basis of `im d_{n-1}`.
    pub b_basis: DMatrix<f64>,
    pub rank_d: usize,
    pub rank_prev: usize,
    pub alg_dim: usize,
    pub coeff_dim: usize,
}

impl ComplexSlice {
    pub fn cochain_dim(&self) -> usize {
        self.d_matrix.ncols()
    }

    pub fn cocycle_dim(&self) -> usize {
        self.z_basis.ncols()
    }

    pub fn coboundary_dim(&self) -> usize {
        self.b_basis.ncols()
    }

    pub fn betti(&self) -> usize {
        self.cocycle_dim().saturating_sub(self.coboundary_dim())
    }

    /// Cocycles spanning a complement of the coboundaries.
    pub fn representatives(&self) -> Vec<Cochain> {
        let rows = self.z_basis.nrows();
        if self.z_basis.ncols() == 0 {
            return Vec::new();
        }
        let mut projected = self.z_basis.clone();
        if self.b_basis.ncols() > 0 {
            for c in 0..projected.ncols() {
                let col = projected.column(c).into_owned();
                let (coef, _) = linalg::lstsq_min_norm(&self.b_basis, &col);
                let residual = col - &self.b_basis * coef;
                projected.set_column(c, &residual);
            }
        }
        let span = linalg::image_basis(&projected);
        debug_assert_eq!(span.nrows(), rows);
        span.column_iter()
            .map(|c| {
                Cochain::from_components(self.n, self.alg_dim, self.coeff_dim, c.into_owned())
                    .expect("shape follows the slice")
            })
            .collect()
    }
}

// Largest structure constant or action entry: the reference scale for rank
// decisions on matrices assembled from them.
fn data_scale(alg: &LieAlgebraDesc, module: &ModuleActionDesc) -> f64 {
    let rho = module.rho().iter().flat_map(|r| r.iter().cloned());
    linalg::max_abs(alg.constants().iter().cloned().chain(rho))
}

/// Assembles `d_n`, `ker d_n` and `im d_{n-1}`.
pub fn build_complex_slice(alg: &LieAlgebraDesc, module: &ModuleActionDesc, n: usize) -> Result<ComplexSlice> {
    let ng = alg.dim();
    if n > ng {
        return Err(malformed(format!("degree {n} exceeds algebra dimension {ng}")));
    }
    let scale = data_scale(alg, module);
    let d = d_matrix(alg, module, n)?;
    let z_basis = linalg::kernel_basis_scaled(&d, scale);
    let rank_d = linalg::numerical_rank_scaled(&d, scale);
    let (b_basis, rank_prev) = if n == 0 {
        (DMatrix::zeros(d.ncols(), 0), 0)
    } else {
        let prev = d_matrix(alg, module, n - 1)?;
        (linalg::image_basis_scaled(&prev, scale), linalg::numerical_rank_scaled(&prev, scale))
    };
    Ok(ComplexSlice { n, d_matrix: d, z_basis, b_basis, rank_d, rank_prev, alg_dim: ng, coeff_dim: module.coeff_dim() })
}

/// `dim H^n(g, a)`.
pub fn betti(alg: &LieAlgebraDesc, module: &ModuleActionDesc, n: usize) -> Result<usize> {
    Ok(build_complex_slice(alg, module, n)?.betti())
}

type GroupFn = dyn Fn(&[DMatrix<f64>]) -> Result<DVector<f64>> + Send + Sync;

/// A smooth `a`-valued function of `n` group elements.
#[derive(Clone)]
pub struct GroupCochainFn {
    degree: usize,
    coeff_dim: usize,
    eval: Arc<GroupFn>,
}

impl fmt::Debug for GroupCochainFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupCochainFn")
            .field("degree", &self.degree)
            .field("coeff_dim", &self.coeff_dim)
            .finish_non_exhaustive()
    }
}

impl GroupCochainFn {
    pub fn new<F>(degree: usize, coeff_dim: usize, eval: F) -> Self
    where
        F: Fn(&[DMatrix<f64>]) -> Result<DVector<f64>> + Send + Sync + 'static,
    {
        Self { degree, coeff_dim, eval: Arc::new(eval) }
    }

    pub fn zero(degree: usize, coeff_dim: usize) -> Self {
        Self::new(degree, coeff_dim, move |_| Ok(DVector::zeros(coeff_dim)))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn evaluate(&self, args: &[DMatrix<f64>]) -> Result<DVector<f64>> {
        if args.len() != self.degree {
            return Err(malformed(format!("degree-{} group cochain given {} arguments", self.degree, args.len())));
        }
        let v = (self.eval)(args)?;
        if v.len() != self.coeff_dim {
            return Err(Error::UserFunction(format!(
                "group cochain returned {} components, expected {}",
                v.len(),
                self.coeff_dim
            )));
        }
        Ok(v)
    }

    /// Largest `|f|` over the tuples obtained by replacing one argument of
    /// each sample with the identity.
    pub fn normalization_residual(&self, samples: &[Vec<DMatrix<f64>>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for tuple in samples {
            for j in 0..tuple.len() {
                let mut t = tuple.clone();
                let d = t[j].nrows();
                t[j] = DMatrix::identity(d, d);
                worst = worst.max(linalg::max_abs(self.evaluate(&t)?.iter().cloned()));
            }
        }
        Ok(worst)
    }
}

/// `(delta f)(g_1, ..., g_{n+1})`, computed in `a`.
pub fn apply_delta(module: &ModuleActionDesc, f: &GroupCochainFn, tuple: &[DMatrix<f64>]) -> Result<DVector<f64>> {
    let n = f.degree;
    if tuple.len() != n + 1 {
        return Err(malformed(format!(
            "coboundary of a degree-{n} cochain needs {} arguments, got {}",
            n + 1,
            tuple.len()
        )));
    }
    if f.coeff_dim != module.coeff_dim() {
        return Err(malformed("group cochain and module have different coefficient dimensions"));
    }
    let mut out = module.act_group(&tuple[0], &f.evaluate(&tuple[1..])?);
    for i in 0..n {
        let mut args: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        args.extend(tuple[..i].iter().cloned());
        args.push(&tuple[i] * &tuple[i + 1]);
        args.extend(tuple[i + 2..].iter().cloned());
        let v = f.evaluate(&args)?;
        if i % 2 == 0 {
            out -= v;
        } else {
            out += v;
        }
    }
    let last = f.evaluate(&tuple[..n])?;
    if (n + 1).is_multiple_of(2) {
        out += last;
    } else {
        out -= last;
    }
    Ok(out)
}

/// `delta f` as a cochain function of degree `n + 1`.
pub fn coboundary_fn(module: &ModuleActionDesc, f: &GroupCochainFn) -> GroupCochainFn {
    let module = module.clone();
    let inner = f.clone();
    GroupCochainFn::new(f.degree + 1, f.coeff_dim, move |args| apply_delta(&module, &inner, args))
}
