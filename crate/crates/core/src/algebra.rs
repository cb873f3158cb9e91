//! Finite-dimensional Lie algebras, coefficient modules and lattices.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{malformed, Error, Result};
use crate::linalg;

/// Default tolerance for algebraic identities (pure round-off).
pub const DEFAULT_TOL_ALG: f64 = 1e-9;
/// Default tolerance for lattice membership.
pub const DEFAULT_TOL_LAT: f64 = 1e-6;
/// A coefficient whose distance to the nearest integer lies in
/// `[tol, AMBIGUITY_FACTOR * tol)` is reported as indeterminate.
pub const AMBIGUITY_FACTOR: f64 = 10.0;

/// Coordinates of an element of `g` in the chosen basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector(pub DVector<f64>);

impl AlgebraVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(DVector::from_vec(coeffs))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// The `i`-th basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.0
    }
}

impl From<DVector<f64>> for AlgebraVector {
    fn from(v: DVector<f64>) -> Self {
        Self(v)
    }
}

/// A Lie algebra given by structure constants `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraDesc {
    labels: Vec<String>,
    // c[i][j][k] at (i * n + j) * n + k
    constants: Vec<f64>,
}

impl LieAlgebraDesc {
    /// Builds a descriptor from a flat `n*n*n` tensor in `(i, j, k)` row-major order.
    pub fn new(labels: Vec<String>, constants: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if constants.len() != n * n * n {
            return Err(malformed(format!(
                "structure constants have {} entries, expected {}^3 = {}",
                constants.len(),
                n,
                n * n * n
            )));
        }
        Ok(Self { labels, constants })
    }

    /// Builds a descriptor from a nested `n x n x n` array.
    pub fn from_nested(labels: Vec<String>, c: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = labels.len();
        if c.len() != n {
            return Err(malformed(format!("expected {n} slices, got {}", c.len())));
        }
        let mut flat = Vec::with_capacity(n * n * n);
        for (i, plane) in c.iter().enumerate() {
            if plane.len() != n {
                return Err(malformed(format!("slice {i} has {} rows, expected {n}", plane.len())));
            }
            for (j, row) in plane.iter().enumerate() {
                if row.len() != n {
                    return Err(malformed(format!("entry ({i},{j}) has length {}, expected {n}", row.len())));
                }
                flat.extend_from_slice(row);
            }
        }
        Self::new(labels, flat)
    }

    /// Builds a descriptor from sparse `(i, j, k, value)` entries with `i < j`;
    /// the antisymmetric partner `c[j][i][k] = -value` is filled in.
    pub fn from_sparse(labels: Vec<String>, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let n = labels.len();
        let mut constants = vec![0.0; n * n * n];
        for &(i, j, k, v) in entries {
            if i >= n || j >= n || k >= n {
                return Err(malformed(format!("index ({i},{j},{k}) out of range for dim {n}")));
            }
            constants[(i * n + j) * n + k] = v;
            constants[(j * n + i) * n + k] = -v;
        }
        Self::new(labels, constants)
    }

    /// Default labels `e1, ..., en`.
    pub fn default_labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("e{i}")).collect()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim();
        self.constants[(i * n + j) * n + k]
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    /// Sparse listing of the nonzero entries with `i < j`.
    pub fn sparse_entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let v = self.c(i, j, k);
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    /// Bracket of two basis vectors as a coordinate vector.
    pub fn basis_bracket(&self, i: usize, j: usize) -> DVector<f64> {
        let n = self.dim();
        DVector::from_iterator(n, (0..n).map(|k| self.c(i, j, k)))
    }

    /// Bracket of raw coordinate vectors; lengths must already match.
    pub(crate) fn bracket_raw(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += w * self.c(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of `ad(e_i)`: column `j` holds the coordinates of `[e_i, e_j]`.
    pub fn ad(&self, i: usize) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |k, j| self.c(i, j, k))
    }

    pub fn abelian(n: usize) -> Self {
        Self::from_sparse(Self::default_labels(n), &[]).expect("valid")
    }

    /// Three-dimensional Heisenberg algebra, `[e1, e2] = e3`.
    pub fn heisenberg3() -> Self {
        Self::from_sparse(Self::default_labels(3), &[(0, 1, 2, 1.0)]).expect("valid")
    }

    /// `sl(2)` in the basis `{h, e, f}`.
    pub fn sl2() -> Self {
        let labels = vec!["h".to_string(), "e".to_string(), "f".to_string()];
        Self::from_sparse(labels, &[(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)]).expect("valid")
    }

    /// `so(3)` / `su(2)` with `[e_i, e_j] = eps_ijk e_k`.
    pub fn so3() -> Self {
        Self::from_sparse(Self::default_labels(3), &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 1, -1.0)]).expect("valid")
    }

    /// `su(2)` in the quaternion basis `{i, j, k}` with `[i, j] = 2k` cyclically.
    pub fn su2_quaternion() -> Self {
        let labels = vec!["i".to_string(), "j".to_string(), "k".to_string()];
        Self::from_sparse(labels, &[(0, 1, 2, 2.0), (1, 2, 0, 2.0), (0, 2, 1, -2.0)]).expect("valid")
    }

    /// Direct sum `self + other` with the bases concatenated.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let n = a + b;
        let mut constants = vec![0.0; n * n * n];
        for i in 0..a {
            for j in 0..a {
                for k in 0..a {
                    constants[(i * n + j) * n + k] = self.c(i, j, k);
                }
            }
        }
        for i in 0..b {
            for j in 0..b {
                for k in 0..b {
                    constants[((a + i) * n + (a + j)) * n + (a + k)] = other.c(i, j, k);
                }
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self { labels, constants }
    }

    /// Structure constants in the basis `f_i = sum_j p[(j, i)] e_j`.
    pub fn change_of_basis(&self, p: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim();
        if p.shape() != (n, n) {
            return Err(malformed("change of basis matrix has the wrong shape"));
        }
        let p_inv = p.clone().try_inverse().ok_or_else(|| malformed("change of basis matrix is singular"))?;
        let mut constants = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let br = self.bracket_raw(&p.column(i).into_owned(), &p.column(j).into_owned());
                let coords = &p_inv * br;
                for k in 0..n {
                    constants[(i * n + j) * n + k] = coords[k];
                }
            }
        }
        Self::new(self.labels.clone(), constants)
    }
}

/// Matrix of a group element acting on the coefficients.
pub type ActionFn = dyn Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync;

/// The smooth `G`-action on the coefficient space, as a map from a group
/// element to the `m x m` matrix by which it acts.
#[derive(Clone, Default)]
pub enum GroupAction {
    #[default]
    Trivial,
    Linear(Arc<ActionFn>),
}

impl fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupAction::Trivial => write!(f, "Trivial"),
            GroupAction::Linear(_) => write!(f, "Linear(..)"),
        }
    }
}

/// Coefficient module `a` with the `g`-action `rho` and the `G`-action.
#[derive(Debug, Clone)]
pub struct ModuleActionDesc {
    coeff_dim: usize,
    rho: Vec<DMatrix<f64>>,
    group_action: GroupAction,
}

impl ModuleActionDesc {
    pub fn new(coeff_dim: usize, rho: Vec<DMatrix<f64>>, group_action: GroupAction) -> Result<Self> {
        for (i, r) in rho.iter().enumerate() {
            if r.shape() != (coeff_dim, coeff_dim) {
                return Err(malformed(format!("rho[{i}] has shape {:?}, expected {coeff_dim}x{coeff_dim}", r.shape())));
            }
        }
        Ok(Self { coeff_dim, rho, group_action })
    }

    /// Trivial action of an `alg_dim`-dimensional algebra on `R^m`.
    pub fn trivial(alg_dim: usize, coeff_dim: usize) -> Self {
        Self { coeff_dim, rho: vec![DMatrix::zeros(coeff_dim, coeff_dim); alg_dim], group_action: GroupAction::Trivial }
    }

    /// Adjoint module of `alg` on itself. The group action is left trivial;
    /// attach one with [`ModuleActionDesc::with_group_action`].
    pub fn adjoint(alg: &LieAlgebraDesc) -> Self {
        let n = alg.dim();
        Self { coeff_dim: n, rho: (0..n).map(|i| alg.ad(i)).collect(), group_action: GroupAction::Trivial }
    }

    pub fn with_group_action(mut self, action: GroupAction) -> Self {
        self.group_action = action;
        self
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn rho(&self) -> &[DMatrix<f64>] {
        &self.rho
    }

    pub fn group_action(&self) -> &GroupAction {
        &self.group_action
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.group_action, GroupAction::Trivial) && self.rho.iter().all(|r| r.iter().all(|&x| x == 0.0))
    }

    /// `X.v` for `X` in coordinates.
    pub fn act_algebra(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.coeff_dim);
        for (xi, r) in x.iter().zip(&self.rho) {
            if *xi != 0.0 {
                out += r * v * *xi;
            }
        }
        out
    }

    /// Matrix of the group element `g` acting on `a`.
    pub fn action_matrix(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.group_action {
            GroupAction::Trivial => DMatrix::identity(self.coeff_dim, self.coeff_dim),
            GroupAction::Linear(f) => f(g),
        }
    }

    /// `g.v`.
    pub fn act_group(&self, g: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        match &self.group_action {
            GroupAction::Trivial => v.clone(),
            GroupAction::Linear(f) => f(g) * v,
        }
    }
}

/// One violated identity.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Antisymmetry { i: usize, j: usize, k: usize, residual: f64 },
    Jacobi { i: usize, j: usize, k: usize, l: usize, residual: f64 },
    Homomorphism { i: usize, j: usize, residual: f64 },
    Compatibility { i: usize, residual: f64 },
}

impl Violation {
    pub fn residual(&self) -> f64 {
        match *self {
            Violation::Antisymmetry { residual, .. }
            | Violation::Jacobi { residual, .. }
            | Violation::Homomorphism { residual, .. }
            | Violation::Compatibility { residual, .. } => residual,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { i, j, k, residual } => {
                write!(f, "antisymmetry at ({i},{j},{k}): residual {residual:e}")
            }
            Violation::Jacobi { i, j, k, l, residual } => {
                write!(f, "jacobi at ({i},{j},{k},{l}): residual {residual:e}")
            }
            Violation::Homomorphism { i, j, residual } => {
                write!(f, "homomorphism at ({i},{j}): residual {residual:e}")
            }
            Violation::Compatibility { i, residual } => {
                write!(f, "group/algebra action mismatch along e{}: residual {residual:e}", i + 1)
            }
        }
    }
}

/// List of violated identities; empty means the object is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Largest residual seen over every checked identity, violated or not.
    pub max_residual: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks antisymmetry and the Jacobi identity of the structure constants.
pub fn validate_algebra(desc: &LieAlgebraDesc, tol_alg: f64) -> ValidationReport {
    let n = desc.dim();
    let mut report = ValidationReport::default();
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let r = (desc.c(i, j, k) + desc.c(j, i, k)).abs();
                report.max_residual = report.max_residual.max(r);
                if r > tol_alg {
                    report.violations.push(Violation::Antisymmetry { i, j, k, residual: r });
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut sum = 0.0;
                    for m in 0..n {
                        sum += desc.c(i, j, m) * desc.c(m, k, l)
                            + desc.c(j, k, m) * desc.c(m, i, l)
                            + desc.c(k, i, m) * desc.c(m, j, l);
                    }
                    let r = sum.abs();
                    report.max_residual = report.max_residual.max(r);
                    if r > tol_alg {
                        report.violations.push(Violation::Jacobi { i, j, k, l, residual: r });
                    }
                }
            }
        }
    }
    report
}

/// Checks that `rho` is a representation: `rho([e_i, e_j]) = [rho_i, rho_j]`.
pub fn validate_module(alg: &LieAlgebraDesc, module: &ModuleActionDesc, tol_alg: f64) -> Result<ValidationReport> {
    let n = alg.dim();
    if module.rho.len() != n {
        return Err(malformed(format!("module has {} action matrices, algebra has dimension {n}", module.rho.len())));
    }
    let mut report = ValidationReport::default();
    for i in 0..n {
        for j in (i + 1)..n {
            let commutator = &module.rho[i] * &module.rho[j] - &module.rho[j] * &module.rho[i];
            let mut image = DMatrix::zeros(module.coeff_dim, module.coeff_dim);
            for k in 0..n {
                let c = alg.c(i, j, k);
                if c != 0.0 {
                    image += &module.rho[k] * c;
                }
            }
            let r = linalg::max_abs((commutator - image).iter().cloned());
            report.max_residual = report.max_residual.max(r);
            if r > tol_alg {
                report.violations.push(Violation::Homomorphism { i, j, residual: r });
            }
        }
    }
    Ok(report)
}

/// `[x, y]`.
pub fn bracket(alg: &LieAlgebraDesc, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
    let n = alg.dim();
    if x.len() != n || y.len() != n {
        return Err(malformed(format!(
            "bracket arguments have lengths {} and {}, algebra has dimension {n}",
            x.len(),
            y.len()
        )));
    }
    Ok(AlgebraVector(alg.bracket_raw(&x.0, &y.0)))
}

/// Discrete subgroup `Gamma` of `a` spanned by linearly independent generators.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDesc {
    ambient_dim: usize,
    // one generator per column
    generators: DMatrix<f64>,
}

impl LatticeDesc {
    pub fn new(ambient_dim: usize, generators: Vec<DVector<f64>>) -> Result<Self> {
        Self::with_tolerance(ambient_dim, generators, DEFAULT_TOL_LAT)
    }

    pub fn with_tolerance(ambient_dim: usize, generators: Vec<DVector<f64>>, tol_lat: f64) -> Result<Self> {
        if generators.len() > ambient_dim {
            return Err(Error::InvalidLattice(format!(
                "{} generators in a {ambient_dim}-dimensional space",
                generators.len()
            )));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.len() != ambient_dim {
                return Err(malformed(format!("lattice generator {i} has length {}, expected {ambient_dim}", g.len())));
            }
        }
        let generators =
            if generators.is_empty() { DMatrix::zeros(ambient_dim, 0) } else { DMatrix::from_columns(&generators) };
        let smin = linalg::smallest_singular_value(&generators);
        if smin <= tol_lat {
            return Err(Error::InvalidLattice(format!(
                "generators are linearly dependent (smallest singular value {smin:e})"
            )));
        }
        Ok(Self { ambient_dim, generators })
    }

    /// `Gamma = {0}`.
    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, generators: DMatrix::zeros(ambient_dim, 0) }
    }

    /// `scale * Z^m`.
    pub fn scaled_integers(ambient_dim: usize, scale: f64) -> Result<Self> {
        let gens = (0..ambient_dim)
            .map(|i| {
                let mut v = DVector::zeros(ambient_dim);
                v[i] = scale;
                v
            })
            .collect();
        Self::new(ambient_dim, gens)
    }

    pub fn rank(&self) -> usize {
        self.generators.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> DVector<f64> {
        self.generators.column(i).into_owned()
    }

    /// Lattice spanned by `scale` times these generators.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        let gens = (0..self.rank()).map(|i| self.generator(i) * scale).collect();
        Self::new(self.ambient_dim, gens)
    }

    /// Representative of `v mod Gamma`: the component along the lattice span
    /// gets coefficients in `[0, 1)`. Coefficients within `snap_tol` of an
    /// integer are reduced to zero.
    pub fn reduce(&self, v: &DVector<f64>, snap_tol: f64) -> DVector<f64> {
        if self.rank() == 0 {
            return v.clone();
        }
        let (k, _) = linalg::lstsq_min_norm(&self.generators, v);
        let shift = DVector::from_iterator(
            k.len(),
            k.iter().map(|&x| if (x - x.round()).abs() < snap_tol { x.round() } else { x.floor() }),
        );
        v - &self.generators * shift
    }
}

/// Outcome of a lattice membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeVerdict {
    Member,
    NonMember,
    Indeterminate,
}

impl fmt::Display for LatticeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeVerdict::Member => "member",
            LatticeVerdict::NonMember => "non-member",
            LatticeVerdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub verdict: LatticeVerdict,
    /// Nearest integer coefficients in the generator basis.
    pub coefficients: Vec<i64>,
    /// `|v - sum k_i gamma_i|` for the rounded coefficients.
    pub residual: f64,
    /// Least-squares residual, i.e. the distance of `v` from the lattice span.
    pub span_residual: f64,
    /// Largest distance of a real coefficient from its nearest integer.
    pub max_fraction: f64,
}

impl Membership {
    pub fn is_member(&self) -> bool {
        self.verdict == LatticeVerdict::Member
    }
}

/// Tests `v in Gamma` by least squares against the generators followed by
/// integer rounding.
pub fn lattice_member(lat: &LatticeDesc, v: &DVector<f64>, tol_lat: f64) -> Result<Membership> {
    if v.len() != lat.ambient_dim {
        return Err(malformed(format!(
            "vector has length {}, lattice lives in dimension {}",
            v.len(),
            lat.ambient_dim
        )));
    }
    let (real, span_residual) = linalg::lstsq_min_norm(&lat.generators, v);
    let coefficients: Vec<i64> = real.iter().map(|x| x.round() as i64).collect();
    let max_fraction = linalg::max_abs(real.iter().map(|x| x - x.round()));
    let rounded = DVector::from_iterator(coefficients.len(), coefficients.iter().map(|&k| k as f64));
    let residual = (v - &lat.generators * rounded).norm();
    let band = AMBIGUITY_FACTOR * tol_lat;
    let worst = span_residual.max(max_fraction);
    let verdict = if span_residual < tol_lat && max_fraction < tol_lat {
        LatticeVerdict::Member
    } else if worst < band {
        LatticeVerdict::Indeterminate
    } else {
        LatticeVerdict::NonMember
    };
    Ok(Membership { verdict, coefficients, residual, span_residual, max_fraction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn heis3_and_sl2_are_valid() {
        assert!(validate_algebra(&LieAlgebraDesc::heisenberg3(), DEFAULT_TOL_ALG).is_valid());
        assert!(validate_algebra(&LieAlgebraDesc::sl2(), DEFAULT_TOL_ALG).is_valid());
        assert!(validate_algebra(&LieAlgebraDesc::so3(), DEFAULT_TOL_ALG).is_valid());
        assert!(validate_algebra(&LieAlgebraDesc::su2_quaternion(), DEFAULT_TOL_ALG).is_valid());
    }

    #[test]
    fn symmetric_entry_violates_antisymmetry() {
        let idx = |i: usize, j: usize, k: usize| (i * 3 + j) * 3 + k;
        let mut c = vec![0.0; 27];
        c[idx(0, 1, 2)] = 1.0;
        c[idx(1, 0, 2)] = 1.0;
        let alg = LieAlgebraDesc::new(LieAlgebraDesc::default_labels(3), c).unwrap();
        let report = validate_algebra(&alg, DEFAULT_TOL_ALG);
        assert!(report.violations.iter().any(|x| matches!(x, Violation::Antisymmetry { i: 0, j: 1, k: 2, .. })));
    }

    #[test]
    fn shape_mismatch_is_malformed() {
        let err = LieAlgebraDesc::new(LieAlgebraDesc::default_labels(2), vec![0.0; 7]).unwrap_err();
        assert!(matches!(err, Error::MalformedInput(_)));
        let ragged = vec![vec![vec![0.0, 0.0], vec![0.0]], vec![vec![0.0, 0.0], vec![0.0, 0.0]]];
        assert!(LieAlgebraDesc::from_nested(LieAlgebraDesc::default_labels(2), &ragged).is_err());
    }

    #[test]
    fn zero_dimensional_algebra() {
        let alg = LieAlgebraDesc::abelian(0);
        assert!(validate_algebra(&alg, DEFAULT_TOL_ALG).is_valid());
        let z = AlgebraVector::zeros(0);
        assert!(bracket(&alg, &z, &z).unwrap().is_empty());
    }

    #[test]
    fn brackets_of_presets() {
        let h = LieAlgebraDesc::heisenberg3();
        let e3 = bracket(&h, &AlgebraVector::basis(3, 0), &AlgebraVector::basis(3, 1)).unwrap();
        assert_eq!(e3, AlgebraVector::basis(3, 2));
        let sl2 = LieAlgebraDesc::sl2();
        let hh = bracket(&sl2, &AlgebraVector::basis(3, 1), &AlgebraVector::basis(3, 2)).unwrap();
        assert_eq!(hh, AlgebraVector::basis(3, 0));
        assert!(bracket(&sl2, &AlgebraVector::zeros(2), &AlgebraVector::zeros(3)).is_err());
    }

    #[test]
    fn module_checks() {
        let sl2 = LieAlgebraDesc::sl2();
        assert!(validate_module(&sl2, &ModuleActionDesc::trivial(3, 2), DEFAULT_TOL_ALG).unwrap().is_valid());
        assert!(validate_module(&sl2, &ModuleActionDesc::adjoint(&sl2), DEFAULT_TOL_ALG).unwrap().is_valid());
        // heis3 with rho1 = rho2 = J nilpotent and rho3 = identity: [J, J] = 0 != rho(e3)
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let module =
            ModuleActionDesc::new(2, vec![j.clone(), j, DMatrix::identity(2, 2)], GroupAction::Trivial).unwrap();
        let report = validate_module(&LieAlgebraDesc::heisenberg3(), &module, DEFAULT_TOL_ALG).unwrap();
        assert!(report.violations.iter().any(|x| matches!(x, Violation::Homomorphism { i: 0, j: 1, .. })));
        assert!(validate_module(&sl2, &ModuleActionDesc::trivial(2, 1), DEFAULT_TOL_ALG).is_err());
    }

    #[test]
    fn lattice_membership_examples() {
        let z = LatticeDesc::scaled_integers(1, 1.0).unwrap();
        let m = lattice_member(&z, &v(&[3.0]), DEFAULT_TOL_LAT).unwrap();
        assert!(m.is_member());
        assert_eq!(m.coefficients, vec![3]);
        let half = lattice_member(&z, &v(&[0.5]), DEFAULT_TOL_LAT).unwrap();
        assert_eq!(half.verdict, LatticeVerdict::NonMember);

        let lat = LatticeDesc::new(2, vec![v(&[1.0, 0.0]), v(&[0.0, 2.0])]).unwrap();
        let m = lattice_member(&lat, &v(&[2.0, 4.000000001]), 1e-6).unwrap();
        assert!(m.is_member());
        assert_eq!(m.coefficients, vec![2, 2]);
        assert!(m.residual < 1e-8);
    }

    #[test]
    fn ambiguity_band_is_indeterminate() {
        let z = LatticeDesc::scaled_integers(1, 1.0).unwrap();
        let m = lattice_member(&z, &v(&[1.0 + 3e-6]), 1e-6).unwrap();
        assert_eq!(m.verdict, LatticeVerdict::Indeterminate);
    }

    #[test]
    fn rank_zero_and_dependent_lattices() {
        let zero = LatticeDesc::zero(2);
        assert!(lattice_member(&zero, &v(&[0.0, 0.0]), 1e-6).unwrap().is_member());
        assert!(!lattice_member(&zero, &v(&[0.1, 0.0]), 1e-6).unwrap().is_member());
        let err = LatticeDesc::new(2, vec![v(&[1.0, 1.0]), v(&[2.0, 2.0])]).unwrap_err();
        assert!(matches!(err, Error::InvalidLattice(_)));
    }

    #[test]
    fn reduction_mod_lattice() {
        let two_z = LatticeDesc::scaled_integers(1, 2.0).unwrap();
        assert_relative_eq!(two_z.reduce(&v(&[1.0]), 1e-9)[0], 1.0);
        assert_relative_eq!(two_z.reduce(&v(&[5.0]), 1e-9)[0], 1.0);
        assert_relative_eq!(two_z.reduce(&v(&[-2.0]), 1e-9)[0], 0.0);
    }

    #[test]
    fn change_of_basis_preserves_validity() {
        let p = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 3.0]);
        let alg = LieAlgebraDesc::sl2().change_of_basis(&p).unwrap();
        assert!(validate_algebra(&alg, 1e-9).is_valid());
    }
}
