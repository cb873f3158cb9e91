//! Differentiation of group-level data back to the Lie algebra: `D_2` of a
//! group cocycle, recovery of `omega` from the path cocycle, and the
//! curvature of the canonical connection.

use nalgebra::DVector;

use super::form::{gamma_cocycle, EquivariantForm};
use super::group::MatrixGroupDesc;
use super::path::GroupPath;
use crate::cohomology::GroupCochainFn;
use crate::error::{malformed, Result};
use crate::extensions::ExtensionAlgebra;

/// Default step for the mixed second differences.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
/// Accuracy expected from the mixed differences at the default step.
pub const DEFAULT_FD_TOL: f64 = 1e-5;

/// Mixed partial `d^2 F / dt ds` at the origin: central differences at `h`
/// and `2h` combined by one Richardson step.
fn mixed_partial<F>(f: F, h: f64) -> Result<DVector<f64>>
where
    F: Fn(f64, f64) -> Result<DVector<f64>>,
{
    let central =
        |h: f64| -> Result<DVector<f64>> { Ok((f(h, h)? - f(h, -h)? - f(-h, h)? + f(-h, -h)?) / (4.0 * h * h)) };
    let fine = central(h)?;
    let coarse = central(2.0 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// `(D_2 f)(X, Y) = d^2/dt ds [f(exp tX, exp sY) - f(exp tY, exp sX)]` at 0.
pub fn derivation_d2(
    group: &MatrixGroupDesc,
    f: &GroupCochainFn,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    if f.degree() != 2 {
        return Err(malformed("D_2 needs a degree-2 group cochain"));
    }
    if x.len() != group.dim() || y.len() != group.dim() {
        return Err(malformed("algebra vectors do not match the group dimension"));
    }
    mixed_partial(
        |t, s| {
            let direct = f.evaluate(&[group.exp(&(x * t)), group.exp(&(y * s))])?;
            let swapped = f.evaluate(&[group.exp(&(y * t)), group.exp(&(x * s))])?;
            Ok(direct - swapped)
        },
        h,
    )
}

/// `|D_2[gamma(g1, g2) - gamma(g2, g1)](X, Y) - omega(X, Y)|` for the paths
/// `g1(t) = exp(tau t X)`, `g2(s) = exp(sigma s Y)`, differentiated in
/// `(tau, sigma)`.
pub fn gamma_recovers_omega(
    form: &EquivariantForm,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h: f64,
    quad_order: usize,
) -> Result<f64> {
    let group = &form.group;
    if x.len() != group.dim() || y.len() != group.dim() {
        return Err(malformed("algebra vectors do not match the group dimension"));
    }
    let recovered = mixed_partial(
        |tau, sigma| {
            let g1 = GroupPath::one_parameter(group, &(x * tau));
            let g2 = GroupPath::one_parameter(group, &(y * sigma));
            Ok(gamma_cocycle(form, &g1, &g2, quad_order)? - gamma_cocycle(form, &g2, &g1, quad_order)?)
        },
        h,
    )?;
    Ok((recovered - form.omega(x, y)).norm())
}

/// Pulled-back curvature of the canonical connection at the identity,
/// `1/2 pr[(X,0),(Y,0)] - 1/2 pr[(Y,0),(X,0)]`, compared with `omega(X, Y)`.
pub fn connection_curvature_check(ext: &ExtensionAlgebra, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let n = ext.base_dim();
    if x.len() != n || y.len() != n {
        return Err(malformed("algebra vectors do not match the base dimension"));
    }
    let zero = DVector::zeros(ext.coeff_dim());
    let (sx, sy) = (ext.pair(x, &zero), ext.pair(y, &zero));
    let curvature = (ext.pr(&ext.bracket(&sx, &sy)) - ext.pr(&ext.bracket(&sy, &sx))) * 0.5;
    let omega = ext.cocycle.eval(&[x.clone(), y.clone()])?;
    Ok((curvature - omega).norm())
}
