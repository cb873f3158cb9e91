//! Singular 2-chains in a matrix group and their boundary bookkeeping.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::group::MatrixGroupDesc;
use super::path::{GroupPath, Reparam};
use crate::error::{Error, Result};

/// Parameter domain of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[0, 1]^2` with coordinates `(u, v)`.
    Square,
    /// `{0 <= s <= t <= 1}` with coordinates `(t, s)`.
    Simplex,
}

type PatchFn = dyn Fn(f64, f64) -> DMatrix<f64> + Send + Sync;

/// A smooth map from a parameter domain into the group.
#[derive(Clone)]
pub struct Patch {
    pub domain: Domain,
    map: Arc<PatchFn>,
}

impl fmt::Debug for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Patch").field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl Patch {
    pub fn new<F>(domain: Domain, f: F) -> Self
    where
        F: Fn(f64, f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self { domain, map: Arc::new(f) }
    }

    pub fn eval(&self, t: f64, s: f64) -> DMatrix<f64> {
        (self.map)(t, s)
    }

    /// Oriented boundary edges, each as a map `[0, 1] -> domain`.
    fn edges(&self) -> Vec<fn(f64) -> (f64, f64)> {
        match self.domain {
            Domain::Square => vec![|l| (l, 0.0), |l| (1.0, l), |l| (1.0 - l, 1.0), |l| (0.0, 1.0 - l)],
            Domain::Simplex => vec![|l| (l, 0.0), |l| (1.0, l), |l| (1.0 - l, 1.0 - l)],
        }
    }
}

/// Formal integer combination of patches.
#[derive(Debug, Clone, Default)]
pub struct Surface2Chain {
    pub patches: Vec<(i64, Patch)>,
}

impl Surface2Chain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(patch: Patch) -> Self {
        Self { patches: vec![(1, patch)] }
    }

    pub fn push(&mut self, coefficient: i64, patch: Patch) {
        self.patches.push((coefficient, patch));
    }

    pub fn with(mut self, coefficient: i64, patch: Patch) -> Self {
        self.push(coefficient, patch);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Chain with every coefficient multiplied by `k`.
    pub fn scaled(&self, k: i64) -> Self {
        Self { patches: self.patches.iter().map(|(c, p)| (c * k, p.clone())).collect() }
    }

    /// Formal sum.
    pub fn plus(&self, other: &Self) -> Self {
        let mut patches = self.patches.clone();
        patches.extend(other.patches.iter().cloned());
        Self { patches }
    }

    /// Patch values on a midpoint grid of `per_axis^2` parameters each.
    pub fn sample_points(&self, per_axis: usize) -> Vec<DMatrix<f64>> {
        let mut out = Vec::new();
        for (_, p) in &self.patches {
            for a in 0..per_axis {
                for b in 0..per_axis {
                    let u = (a as f64 + 0.5) / per_axis as f64;
                    let v = (b as f64 + 0.5) / per_axis as f64;
                    let (t, s) = match p.domain {
                        Domain::Square => (u, v),
                        Domain::Simplex => (u, u * v),
                    };
                    out.push(p.eval(t, s));
                }
            }
        }
        out
    }
}

/// `sigma(t, s) = g1(t) g2(s)` on `{0 <= s <= t <= 1}`.
pub fn sigma_chain(g1: &GroupPath, g2: &GroupPath) -> Surface2Chain {
    let (a, b) = (g1.clone(), g2.clone());
    Surface2Chain::single(Patch::new(Domain::Simplex, move |t, s| a.eval(t) * b.eval(s)))
}

/// `pi(t, s) = g1(alpha(t (t - s))) g2(alpha(t s))` on `{0 <= s <= t <= 1}`
/// for two paths with a common endpoint.
///
/// The edge `t = 1` is `s -> g1(alpha(1 - s)) g2(alpha(s))`, which runs from
/// the common endpoint back to itself; it degenerates to a point (or a curve
/// traced forth and back) only for suitable path pairs.
pub fn pi_chain(group: &MatrixGroupDesc, g1: &GroupPath, g2: &GroupPath, alpha: &Reparam) -> Result<Surface2Chain> {
    let (e1, e2) = (g1.endpoint(), g2.endpoint());
    let distance = (&e1 - &e2).norm();
    if distance > group.scaled_tol(e1.norm()) {
        return Err(Error::NotALoop { distance });
    }
    let (a, b, alpha) = (g1.clone(), g2.clone(), alpha.clone());
    Ok(Surface2Chain::single(Patch::new(Domain::Simplex, move |t, s| {
        a.eval(alpha.apply(t * (t - s))) * b.eval(alpha.apply(t * s))
    })))
}

/// Boundary of a map `[0, 1]^3 -> G` as a chain of its six faces.
pub fn cube_boundary<F>(map: F) -> Surface2Chain
where
    F: Fn(f64, f64, f64) -> DMatrix<f64> + Send + Sync + 'static,
{
    let map = Arc::new(map);
    let mut chain = Surface2Chain::new();
    for axis in 0..3 {
        for (side, sign) in [(1.0, 1i64), (0.0, -1i64)] {
            let m = Arc::clone(&map);
            let orient = if axis % 2 == 0 { sign } else { -sign };
            chain.push(
                orient,
                Patch::new(Domain::Square, move |u, v| match axis {
                    0 => m(side, u, v),
                    1 => m(u, side, v),
                    _ => m(u, v, side),
                }),
            );
        }
    }
    chain
}

/// Number of samples taken along each boundary edge.
pub const EDGE_SAMPLES: usize = 9;

/// A sampled oriented boundary edge of one patch.
#[derive(Clone)]
pub struct Edge {
    pub patch: usize,
    pub side: usize,
    pub weight: i64,
    curve: Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>,
    samples: Vec<DMatrix<f64>>,
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Edge")
            .field("patch", &self.patch)
            .field("side", &self.side)
            .field("weight", &self.weight)
            .finish_non_exhaustive()
    }
}

impl Edge {
    pub fn eval(&self, l: f64) -> DMatrix<f64> {
        (self.curve)(l)
    }

    pub fn samples(&self) -> &[DMatrix<f64>] {
        &self.samples
    }

    fn is_degenerate(&self, tol: f64) -> bool {
        let first = &self.samples[0];
        self.samples.iter().all(|p| (p - first).norm() <= tol * first.norm().max(1.0))
    }

    fn matches(&self, other: &Edge, reversed: bool, tol: f64) -> bool {
        let n = self.samples.len();
        (0..n).all(|i| {
            let a = &self.samples[i];
            let b = if reversed { &other.samples[n - 1 - i] } else { &other.samples[i] };
            (a - b).norm() <= tol * a.norm().max(1.0)
        })
    }
}

fn all_edges(chain: &Surface2Chain) -> Vec<Edge> {
    let mut out = Vec::new();
    for (pi, (coefficient, patch)) in chain.patches.iter().enumerate() {
        if *coefficient == 0 {
            continue;
        }
        for (side, param) in patch.edges().into_iter().enumerate() {
            let p = patch.clone();
            let curve: Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync> = Arc::new(move |l| {
                let (a, b) = param(l);
                p.eval(a, b)
            });
            let samples = (0..EDGE_SAMPLES).map(|i| curve(i as f64 / (EDGE_SAMPLES - 1) as f64)).collect();
            out.push(Edge { patch: pi, side, weight: *coefficient, curve, samples });
        }
    }
    out
}

/// Boundary edges that do not cancel. Degenerate edges are dropped and the
/// remaining ones are grouped by geometric coincidence (in either direction);
/// groups with nonzero net weight are returned, represented by their first
/// edge carrying the net weight.
pub fn open_edges(chain: &Surface2Chain, tol: f64) -> Vec<Edge> {
    let mut classes: Vec<Edge> = Vec::new();
    for edge in all_edges(chain) {
        if edge.is_degenerate(tol) {
            continue;
        }
        let mut placed = false;
        for class in classes.iter_mut() {
            if class.matches(&edge, false, tol) {
                class.weight += edge.weight;
                placed = true;
                break;
            }
            if class.matches(&edge, true, tol) {
                class.weight -= edge.weight;
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(edge);
        }
    }
    classes.retain(|e| e.weight != 0);
    classes
}

/// Errors with [`Error::OpenChain`] unless every boundary edge cancels.
pub fn check_closed(chain: &Surface2Chain, tol: f64) -> Result<()> {
    let open = open_edges(chain, tol);
    if open.is_empty() {
        return Ok(());
    }
    let listing: Vec<String> =
        open.iter().map(|e| format!("patch {} side {} (net weight {})", e.patch, e.side, e.weight)).collect();
    Err(Error::OpenChain(listing.join(", ")))
}

// Distance from `p` to a curve on [0, 1]: coarse scan followed by a
// golden-section refinement around the best sample.
fn distance_to_curve<F>(p: &DMatrix<f64>, curve: F, scan: usize) -> f64
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let dist = |l: f64| (curve(l) - p).norm();
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for i in 0..=scan {
        let d = dist(i as f64 / scan as f64);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    let h = 1.0 / scan as f64;
    let (mut a, mut b) = (((best as f64 - 1.0) * h).max(0.0), ((best as f64 + 1.0) * h).min(1.0));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (dist(c), dist(d));
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = dist(d);
        }
    }
    best_d.min(fc).min(fd)
}

/// Largest sampled distance between the uncancelled boundary of `chain` and
/// the closed curve `loop_path`, measured in both directions.
pub fn boundary_distance(chain: &Surface2Chain, loop_path: &GroupPath, tol: f64) -> f64 {
    let open = open_edges(chain, tol);
    let loop_samples: Vec<DMatrix<f64>> = (0..=64).map(|i| loop_path.eval(i as f64 / 64.0)).collect();
    let loop_degenerate = loop_samples.iter().all(|p| (p - &loop_samples[0]).norm() <= tol * p.norm().max(1.0));
    if open.is_empty() {
        return if loop_degenerate { 0.0 } else { f64::INFINITY };
    }
    let mut worst: f64 = 0.0;
    for edge in &open {
        for p in edge.samples() {
            worst = worst.max(distance_to_curve(p, |l| loop_path.eval(l), 256));
        }
    }
    for p in &loop_samples {
        let d = open.iter().map(|e| distance_to_curve(p, |l| e.eval(l), 64)).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    worst
}
