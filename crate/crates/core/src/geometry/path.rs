use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::group::MatrixGroupDesc;
use crate::error::Result;

/// Tolerance for the periodicity of the left logarithmic derivative.
pub const DEFAULT_DERIV_TOL: f64 = 1e-6;
/// Step for numerical derivatives of paths and patches.
pub const H_GEO: f64 = 1e-5;

type PathFn = dyn Fn(f64) -> DMatrix<f64> + Send + Sync;

/// A based path `[0, 1] -> G`.
#[derive(Clone)]
pub struct GroupPath {
    eval: Arc<PathFn>,
    pub samples_hint: usize,
}

impl fmt::Debug for GroupPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupPath").field("samples_hint", &self.samples_hint).finish_non_exhaustive()
    }
}

/// Fourth-order central difference (one Richardson step on steps `h`, `2h`).
pub fn derivative<F>(f: F, t: f64, h: f64) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let near = f(t + h) - f(t - h);
    let far = f(t + 2.0 * h) - f(t - 2.0 * h);
    (near * 8.0 - far) / (12.0 * h)
}

impl GroupPath {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), samples_hint: 64 }
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        (self.eval)(t)
    }

    pub fn endpoint(&self) -> DMatrix<f64> {
        self.eval(1.0)
    }

    /// The constant path at the identity.
    pub fn constant_identity(embed_dim: usize) -> Self {
        Self::new(move |_| DMatrix::identity(embed_dim, embed_dim))
    }

    /// `t -> exp(c(t))` for a curve `c` in algebra coordinates.
    pub fn from_algebra_curve<F>(group: &MatrixGroupDesc, curve: F) -> Self
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        let group = group.clone();
        Self::new(move |t| group.exp(&curve(t)))
    }

    /// `t -> exp(t X)`.
    pub fn one_parameter(group: &MatrixGroupDesc, x: &DVector<f64>) -> Self {
        let x = x.clone();
        Self::from_algebra_curve(group, move |t| &x * t)
    }

    /// `d/dt` by fourth-order central differences.
    pub fn velocity(&self, t: f64) -> DMatrix<f64> {
        derivative(|u| self.eval(u), t, H_GEO)
    }

    /// `g(t)^-1 g'(t)` in algebra coordinates.
    pub fn log_derivative(&self, group: &MatrixGroupDesc, t: f64) -> Result<DVector<f64>> {
        let g_inv = group.inverse(&self.eval(t))?;
        group.decompose(&(g_inv * self.velocity(t)))
    }

    /// `|g(0) - 1|` and `|g^-1 g'(0) - g^-1 g'(1)|`.
    pub fn check(&self, group: &MatrixGroupDesc) -> Result<PathCheck> {
        let base_residual = (self.eval(0.0) - group.identity()).norm();
        let periodicity_residual = (self.log_derivative(group, 0.0)? - self.log_derivative(group, 1.0)?).norm();
        Ok(PathCheck { base_residual, periodicity_residual })
    }

    /// Whether `g(0) = g(1)` within the membership tolerance.
    pub fn is_closed(&self, group: &MatrixGroupDesc) -> bool {
        group.close(&self.eval(0.0), &self.eval(1.0))
    }

    /// Same path traversed backwards, translated so that it starts at the identity.
    pub fn reversed(&self) -> Self {
        let p = self.clone();
        let end_inv = p.endpoint().try_inverse().unwrap_or_else(|| p.endpoint());
        Self::new(move |t| &end_inv * p.eval(1.0 - t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCheck {
    pub base_residual: f64,
    pub periodicity_residual: f64,
}

impl PathCheck {
    pub fn is_valid(&self, group: &MatrixGroupDesc, deriv_tol: f64) -> bool {
        self.base_residual <= group.scaled_tol(1.0) && self.periodicity_residual <= deriv_tol
    }
}

/// `t -> g1(t) g2(t)`.
pub fn pointwise_product(g1: &GroupPath, g2: &GroupPath) -> GroupPath {
    let (a, b) = (g1.clone(), g2.clone());
    GroupPath { samples_hint: g1.samples_hint.max(g2.samples_hint), ..GroupPath::new(move |t| a.eval(t) * b.eval(t)) }
}

/// Reparameterization `[0, 1] -> [0, 1]` fixing the endpoints.
#[derive(Clone)]
pub struct Reparam(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl Reparam {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    pub fn apply(&self, u: f64) -> f64 {
        (self.0)(u)
    }
}

impl Default for Reparam {
    /// `u - sin(2 pi u) / (2 pi)`: smooth with vanishing derivative at both ends.
    fn default() -> Self {
        Self::new(|u| u - (2.0 * PI * u).sin() / (2.0 * PI))
    }
}

impl fmt::Debug for Reparam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Reparam(..)")
    }
}
