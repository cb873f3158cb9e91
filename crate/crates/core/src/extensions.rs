//! Abelian extensions from 2-cocycles: the twisted bracket on `g + a`, the
//! twisted product on `G x A`, and equivalence of extensions.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{validate_algebra, LatticeDesc, LieAlgebraDesc, ModuleActionDesc, DEFAULT_TOL_ALG};
use crate::cohomology::{self, Cochain, GroupCochainFn};
use crate::error::{malformed, Error, Result};
use crate::linalg;

/// Default tolerance for the coboundary test in [`are_equivalent`].
pub const DEFAULT_EQUIV_TOL: f64 = 1e-8;

/// The extension `g +_omega a` with its structure constants assembled.
///
/// Basis order of `total`: the basis of `g` followed by the basis of `a`.
#[derive(Debug, Clone)]
pub struct ExtensionAlgebra {
    pub base: LieAlgebraDesc,
    pub coeff: ModuleActionDesc,
    pub cocycle: Cochain,
    pub total: LieAlgebraDesc,
}

impl ExtensionAlgebra {
    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff.coeff_dim()
    }

    /// Embeds `(X, v)` into total coordinates.
    pub fn pair(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let (n, m) = (self.base_dim(), self.coeff_dim());
        let mut out = DVector::zeros(n + m);
        out.rows_mut(0, n).copy_from(x);
        out.rows_mut(n, m).copy_from(v);
        out
    }

    /// Projection onto the ideal `a`.
    pub fn pr(&self, z: &DVector<f64>) -> DVector<f64> {
        z.rows(self.base_dim(), self.coeff_dim()).into_owned()
    }

    /// Projection onto `g`.
    pub fn p(&self, z: &DVector<f64>) -> DVector<f64> {
        z.rows(0, self.base_dim()).into_owned()
    }

    pub fn bracket(&self, z: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        self.total.bracket_raw(z, w)
    }
}

fn assemble_total(alg: &LieAlgebraDesc, module: &ModuleActionDesc, omega: &Cochain) -> Result<LieAlgebraDesc> {
    let n = alg.dim();
    let m = module.coeff_dim();
    if omega.degree() != 2 {
        return Err(malformed(format!("extension cocycle must have degree 2, got {}", omega.degree())));
    }
    if omega.alg_dim() != n || omega.coeff_dim() != m || module.rho().len() != n {
        return Err(malformed("cocycle, algebra and module dimensions disagree"));
    }
    let d = n + m;
    let mut c = vec![0.0; d * d * d];
    let idx = |i: usize, j: usize, k: usize| (i * d + j) * d + k;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[idx(i, j, k)] = alg.c(i, j, k);
            }
            let w = omega.on_basis(&[i, j]);
            for a in 0..m {
                c[idx(i, j, n + a)] = w[a];
            }
        }
        let rho = &module.rho()[i];
        for b in 0..m {
            for a in 0..m {
                c[idx(i, n + b, n + a)] = rho[(a, b)];
                c[idx(n + b, i, n + a)] = -rho[(a, b)];
            }
        }
    }
    let mut labels = alg.labels().to_vec();
    labels.extend((1..=m).map(|a| format!("a{a}")));
    LieAlgebraDesc::new(labels, c)
}

/// Builds `g +_omega a`, rejecting `omega` unless `d omega = 0` within `tol`.
pub fn build_algebra_extension(
    alg: &LieAlgebraDesc,
    module: &ModuleActionDesc,
    omega: &Cochain,
    tol: f64,
) -> Result<ExtensionAlgebra> {
    let residual = cohomology::cocycle_residual(alg, module, omega)?;
    if residual >= tol {
        return Err(Error::NotACocycle { residual });
    }
    build_algebra_extension_forced(alg, module, omega)
}

/// Builds the bracket without the cocycle check. The result satisfies the
/// Jacobi identity exactly when `omega` is a cocycle.
pub fn build_algebra_extension_forced(
    alg: &LieAlgebraDesc,
    module: &ModuleActionDesc,
    omega: &Cochain,
) -> Result<ExtensionAlgebra> {
    let total = assemble_total(alg, module, omega)?;
    Ok(ExtensionAlgebra { base: alg.clone(), coeff: module.clone(), cocycle: omega.clone(), total })
}

/// Largest Jacobi residual of the assembled bracket.
pub fn jacobi_residual(ext: &ExtensionAlgebra) -> f64 {
    validate_algebra(&ext.total, f64::INFINITY).max_residual
}

/// Result of the coboundary test.
#[derive(Debug, Clone)]
pub struct Equivalence {
    pub equivalent: bool,
    /// Minimum-norm `lambda` with `d lambda = omega1 - omega2` when equivalent.
    pub witness: Option<Cochain>,
    pub residual: f64,
}

/// Decides whether `omega1 - omega2` is a coboundary.
pub fn are_equivalent(
    alg: &LieAlgebraDesc,
    module: &ModuleActionDesc,
    omega1: &Cochain,
    omega2: &Cochain,
    equiv_tol: f64,
) -> Result<Equivalence> {
    for omega in [omega1, omega2] {
        if omega.degree() != 2 {
            return Err(malformed("equivalence is decided for degree-2 cocycles"));
        }
        let r = cohomology::cocycle_residual(alg, module, omega)?;
        if r >= DEFAULT_TOL_ALG.max(equiv_tol) {
            return Err(Error::NotACocycle { residual: r });
        }
    }
    let diff = omega1 - omega2;
    let d1 = cohomology::d_matrix(alg, module, 1)?;
    let (lambda, residual) = linalg::lstsq_min_norm(&d1, diff.components());
    let equivalent = residual < equiv_tol;
    let witness =
        if equivalent { Some(Cochain::from_components(1, alg.dim(), module.coeff_dim(), lambda)?) } else { None };
    Ok(Equivalence { equivalent, witness, residual })
}

/// Matrix of `(X, v) -> (X, v + lambda(X))`, an isomorphism from
/// `g +_omega a` onto `g +_{omega - d lambda} a`.
pub fn equivalence_map(n: usize, m: usize, lambda: &Cochain) -> DMatrix<f64> {
    let mut phi = DMatrix::identity(n + m, n + m);
    for i in 0..n {
        let v = lambda.on_basis(&[i]);
        for a in 0..m {
            phi[(n + a, i)] = v[a];
        }
    }
    phi
}

/// Element `(g, a)` of `G x_f A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtElement {
    pub g: DMatrix<f64>,
    pub a: DVector<f64>,
}

impl ExtElement {
    pub fn new(g: DMatrix<f64>, a: DVector<f64>) -> Self {
        Self { g, a }
    }
}

/// Group law `(g1, a1)(g2, a2) = (g1 g2, a1 + g1.a2 + f(g1, g2))`.
#[derive(Debug, Clone)]
pub struct ExtensionGroupLaw {
    pub embed_dim: usize,
    pub coeff: ModuleActionDesc,
    pub cocycle_fn: GroupCochainFn,
    pub lattice: Option<LatticeDesc>,
}

const REDUCE_SNAP: f64 = 1e-9;

impl ExtensionGroupLaw {
    pub fn new(embed_dim: usize, coeff: ModuleActionDesc, cocycle_fn: GroupCochainFn) -> Result<Self> {
        if cocycle_fn.degree() != 2 || cocycle_fn.coeff_dim() != coeff.coeff_dim() {
            return Err(malformed("group law needs a degree-2 cochain with matching coefficients"));
        }
        Ok(Self { embed_dim, coeff, cocycle_fn, lattice: None })
    }

    pub fn with_lattice(mut self, lattice: LatticeDesc) -> Self {
        self.lattice = Some(lattice);
        self
    }

    fn reduce(&self, a: DVector<f64>) -> DVector<f64> {
        match &self.lattice {
            Some(l) => l.reduce(&a, REDUCE_SNAP),
            None => a,
        }
    }

    pub fn unit(&self) -> ExtElement {
        ExtElement::new(DMatrix::identity(self.embed_dim, self.embed_dim), DVector::zeros(self.coeff.coeff_dim()))
    }

    pub fn multiply(&self, p1: &ExtElement, p2: &ExtElement) -> Result<ExtElement> {
        let f = self.cocycle_fn.evaluate(&[p1.g.clone(), p2.g.clone()])?;
        let a = &p1.a + self.coeff.act_group(&p1.g, &p2.a) + f;
        Ok(ExtElement::new(&p1.g * &p2.g, self.reduce(a)))
    }

    /// `(g, a)^-1 = (g^-1, -g^-1.(a + f(g, g^-1)))`.
    pub fn inverse(&self, p: &ExtElement) -> Result<ExtElement> {
        let g_inv = p.g.clone().try_inverse().ok_or_else(|| malformed("group element is not invertible"))?;
        let f = self.cocycle_fn.evaluate(&[p.g.clone(), g_inv.clone()])?;
        let a = -self.coeff.act_group(&g_inv, &(&p.a + f));
        Ok(ExtElement::new(g_inv, self.reduce(a)))
    }

    /// `p q p^-1`.
    pub fn conjugate(&self, p: &ExtElement, q: &ExtElement) -> Result<ExtElement> {
        let pq = self.multiply(p, q)?;
        self.multiply(&pq, &self.inverse(p)?)
    }

    /// The section `g -> (g, 0)`.
    pub fn section(&self, g: &DMatrix<f64>) -> ExtElement {
        ExtElement::new(g.clone(), DVector::zeros(self.coeff.coeff_dim()))
    }
}

/// `group_multiply` as a free function.
pub fn group_multiply(law: &ExtensionGroupLaw, p1: &ExtElement, p2: &ExtElement) -> Result<ExtElement> {
    law.multiply(p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DEFAULT_TOL_ALG;
    use approx::assert_relative_eq;

    fn line(x: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, x, 0.0, 1.0])
    }

    fn s(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn abelian_plane_with_area_cocycle_is_heis3() {
        let r2 = LieAlgebraDesc::abelian(2);
        let module = ModuleActionDesc::trivial(2, 1);
        let omega = Cochain::from_entries(2, 2, 1, &[(vec![0, 1], s(1.0))]).unwrap();
        let ext = build_algebra_extension(&r2, &module, &omega, DEFAULT_TOL_ALG).unwrap();
        assert_eq!(ext.total.constants(), LieAlgebraDesc::heisenberg3().constants());
    }

    #[test]
    fn zero_cocycle_with_trivial_action_is_direct_sum() {
        let sl2 = LieAlgebraDesc::sl2();
        let module = ModuleActionDesc::trivial(3, 2);
        let ext = build_algebra_extension(&sl2, &module, &Cochain::zero(2, 3, 2), DEFAULT_TOL_ALG).unwrap();
        assert_eq!(ext.total.constants(), sl2.direct_sum(&LieAlgebraDesc::abelian(2)).constants());
    }

    #[test]
    fn non_cocycle_is_rejected_unless_forced() {
        let sl2 = LieAlgebraDesc::sl2();
        let module = ModuleActionDesc::adjoint(&sl2);
        let omega = Cochain::from_entries(2, 3, 3, &[(vec![0, 1], DVector::from_vec(vec![1.0, 0.0, 0.0]))]).unwrap();
        let err = build_algebra_extension(&sl2, &module, &omega, DEFAULT_TOL_ALG).unwrap_err();
        assert!(matches!(err, Error::NotACocycle { .. }));
        let forced = build_algebra_extension_forced(&sl2, &module, &omega).unwrap();
        assert!(jacobi_residual(&forced) > 1e-3);
    }

    #[test]
    fn products_on_the_line() {
        let module = ModuleActionDesc::trivial(1, 1);
        let direct = ExtensionGroupLaw::new(2, module.clone(), GroupCochainFn::zero(2, 1)).unwrap();
        let p = direct.multiply(&ExtElement::new(line(1.0), s(0.0)), &ExtElement::new(line(2.0), s(3.0))).unwrap();
        assert_relative_eq!(p.g[(0, 1)], 3.0);
        assert_relative_eq!(p.a[0], 3.0);

        let f = GroupCochainFn::new(2, 1, |g| Ok(DVector::from_element(1, g[0][(0, 1)] * g[1][(0, 1)])));
        let law = ExtensionGroupLaw::new(2, module, f).unwrap();
        let p = law.multiply(&ExtElement::new(line(1.0), s(0.0)), &ExtElement::new(line(2.0), s(3.0))).unwrap();
        assert_relative_eq!(p.g[(0, 1)], 3.0);
        assert_relative_eq!(p.a[0], 5.0);

        let q = ExtElement::new(line(-0.8), s(1.7));
        let prod = law.multiply(&q, &law.inverse(&q).unwrap()).unwrap();
        assert!((prod.g - DMatrix::identity(2, 2)).norm() < 1e-14);
        assert!(prod.a[0].abs() < 1e-14);
    }

    #[test]
    fn sl2_coboundary_gives_equivalent_extension() {
        let sl2 = LieAlgebraDesc::sl2();
        let module = ModuleActionDesc::trivial(3, 1);
        let lambda = Cochain::from_components(1, 3, 1, DVector::from_vec(vec![0.3, -1.2, 0.8])).unwrap();
        let omega = cohomology::apply_d(&sl2, &module, &lambda).unwrap();
        let zero = Cochain::zero(2, 3, 1);
        let eq = are_equivalent(&sl2, &module, &omega, &zero, DEFAULT_EQUIV_TOL).unwrap();
        assert!(eq.equivalent);
        let witness = eq.witness.unwrap();
        let back = cohomology::apply_d(&sl2, &module, &witness).unwrap();
        assert!((&back - &omega).max_norm() < 1e-12);

        // phi: g +_omega a -> g +_0 a is a Lie algebra isomorphism
        let e1 = build_algebra_extension(&sl2, &module, &omega, DEFAULT_TOL_ALG).unwrap();
        let e0 = build_algebra_extension(&sl2, &module, &zero, DEFAULT_TOL_ALG).unwrap();
        let phi = equivalence_map(3, 1, &witness);
        for i in 0..4 {
            for j in 0..4 {
                let (x, y) = (
                    DVector::from_fn(4, |k, _| (k == i) as u8 as f64),
                    DVector::from_fn(4, |k, _| (k == j) as u8 as f64),
                );
                let lhs = &phi * e1.bracket(&x, &y);
                let rhs = e0.bracket(&(&phi * &x), &(&phi * &y));
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn area_cocycle_on_plane_is_not_trivial() {
        let r2 = LieAlgebraDesc::abelian(2);
        let module = ModuleActionDesc::trivial(2, 1);
        let omega = Cochain::from_entries(2, 2, 1, &[(vec![0, 1], s(1.0))]).unwrap();
        let eq = are_equivalent(&r2, &module, &omega, &Cochain::zero(2, 2, 1), DEFAULT_EQUIV_TOL).unwrap();
        assert!(!eq.equivalent);
        assert_relative_eq!(eq.residual, 1.0, epsilon = 1e-12);
        assert!(eq.witness.is_none());
    }
}
