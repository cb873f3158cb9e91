//! The equivariant 2-form built from a Lie algebra 2-cocycle, its surface
//! integrals, the path cocycle and holonomy.

use nalgebra::{DMatrix, DVector};

use super::chain::{boundary_distance, sigma_chain, Domain, Surface2Chain};
use super::group::MatrixGroupDesc;
use super::path::{derivative, GroupPath, H_GEO};
use super::quadrature::{square_rule, triangle_rule};
use crate::algebra::{LatticeDesc, ModuleActionDesc};
use crate::cohomology::Cochain;
use crate::error::{malformed, Error, Result};
use crate::par;

/// Default number of Gauss-Legendre nodes per axis.
pub const DEFAULT_QUAD_ORDER: usize = 16;
/// Target accuracy of surface integrals at the default order.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// `omega^eq(g)(L_g X, L_g Y) = g.omega(X, Y)`.
#[derive(Debug, Clone)]
pub struct EquivariantForm {
    pub cocycle: Cochain,
    pub group: MatrixGroupDesc,
    pub module: ModuleActionDesc,
}

impl EquivariantForm {
    pub fn new(cocycle: Cochain, group: MatrixGroupDesc, module: ModuleActionDesc) -> Result<Self> {
        if cocycle.degree() != 2 {
            return Err(malformed("the equivariant form needs a degree-2 cocycle"));
        }
        if cocycle.alg_dim() != group.dim() || cocycle.coeff_dim() != module.coeff_dim() {
            return Err(malformed("cocycle, group and module dimensions disagree"));
        }
        Ok(Self { cocycle, group, module })
    }

    pub fn coeff_dim(&self) -> usize {
        self.module.coeff_dim()
    }

    /// Same form with the cocycle multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self { cocycle: &self.cocycle * k, ..self.clone() }
    }

    /// `omega(X, Y)` for coordinate vectors.
    pub fn omega(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.group.dim();
        let m = self.coeff_dim();
        let mut out = DVector::zeros(m);
        let mut pos = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let w = x[i] * y[j] - x[j] * y[i];
                if w != 0.0 {
                    out += self.cocycle.components().rows(pos * m, m) * w;
                }
                pos += 1;
            }
        }
        out
    }
}

/// Evaluates the form at `g` on tangent matrices `u`, `v`.
pub fn eval_equivariant(
    form: &EquivariantForm,
    g: &DMatrix<f64>,
    u: &DMatrix<f64>,
    v: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let group = &form.group;
    let g_inv = group.inverse(g)?;
    let x = group.decompose(&(&g_inv * u))?;
    let y = group.decompose(&(&g_inv * v))?;
    Ok(form.module.act_group(g, &form.omega(&x, &y)))
}

fn pulled_back(form: &EquivariantForm, patch: &super::chain::Patch, t: f64, s: f64) -> Result<DVector<f64>> {
    let g = patch.eval(t, s);
    let dt = derivative(|x| patch.eval(x, s), t, H_GEO);
    let ds = derivative(|y| patch.eval(t, y), s, H_GEO);
    eval_equivariant(form, &g, &dt, &ds)
}

/// `sum_k c_k int_{patch_k} omega^eq` by tensor Gauss-Legendre quadrature.
pub fn surface_integral(form: &EquivariantForm, chain: &Surface2Chain, quad_order: usize) -> Result<DVector<f64>> {
    let m = form.coeff_dim();
    let square = square_rule(quad_order);
    let triangle = triangle_rule(quad_order);
    let mut total = DVector::zeros(m);
    for (coefficient, patch) in &chain.patches {
        if *coefficient == 0 {
            continue;
        }
        let rule = match patch.domain {
            Domain::Square => &square,
            Domain::Simplex => &triangle,
        };
        let values = par::try_map_indexed(rule.len(), |i| {
            let (t, s) = rule.points[i];
            Ok::<_, Error>(pulled_back(form, patch, t, s)? * rule.weights[i])
        })?;
        total += par::pairwise_sum_vectors(&values, m) * (*coefficient as f64);
    }
    Ok(total)
}

/// `gamma(g1, g2) = int_sigma omega^eq` with `sigma(t, s) = g1(t) g2(s)`.
pub fn gamma_cocycle(
    form: &EquivariantForm,
    g1: &GroupPath,
    g2: &GroupPath,
    quad_order: usize,
) -> Result<DVector<f64>> {
    surface_integral(form, &sigma_chain(g1, g2), quad_order)
}

/// Holonomy around a loop as an element of `A = a / Gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct Holonomy {
    /// The bounding-surface integral in `a`.
    pub integral: DVector<f64>,
    /// Its representative mod `Gamma`.
    pub reduced: DVector<f64>,
}

/// Holonomy computed as the integral of the form over a bounding chain.
pub fn holonomy(
    form: &EquivariantForm,
    loop_path: &GroupPath,
    bounding: &Surface2Chain,
    lattice: &LatticeDesc,
    quad_order: usize,
) -> Result<Holonomy> {
    let group = &form.group;
    let closure = (loop_path.endpoint() - group.identity()).norm();
    let start = (loop_path.eval(0.0) - group.identity()).norm();
    if closure.max(start) > group.scaled_tol(1.0) {
        return Err(Error::NotALoop { distance: closure.max(start) });
    }
    let tol = group.membership_tol();
    let distance = boundary_distance(bounding, loop_path, tol);
    if distance > group.scaled_tol(group.identity().norm()) {
        return Err(Error::InvalidBoundingSurface { distance });
    }
    let integral = surface_integral(form, bounding, quad_order)?;
    let reduced = lattice.reduce(&integral, 1e-9);
    Ok(Holonomy { integral, reduced })
}
