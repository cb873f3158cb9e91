//! Gauss-Legendre rules on the unit square and on the triangle
//! `{0 <= s <= t <= 1}` (via the Duffy map `t = u, s = u v`).

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order.max(1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// A 2D rule: points `(t, s)` with weights.
#[derive(Debug, Clone)]
pub struct Rule2d {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl Rule2d {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Tensor rule on `[0, 1]^2`.
pub fn square_rule(order: usize) -> Rule2d {
    let (x, w) = gauss_legendre(order);
    let mut points = Vec::with_capacity(x.len() * x.len());
    let mut weights = Vec::with_capacity(x.len() * x.len());
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            points.push((*xi, *yj));
            weights.push(wi * wj);
        }
    }
    Rule2d { points, weights }
}

/// Collapsed tensor rule on `{0 <= s <= t <= 1}`.
pub fn triangle_rule(order: usize) -> Rule2d {
    let (x, w) = gauss_legendre(order);
    let mut points = Vec::with_capacity(x.len() * x.len());
    let mut weights = Vec::with_capacity(x.len() * x.len());
    for (u, wu) in x.iter().zip(&w) {
        for (v, wv) in x.iter().zip(&w) {
            points.push((*u, u * v));
            weights.push(wu * wv * u);
        }
    }
    Rule2d { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..20 {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert_relative_eq!(q, 1.0 / (deg as f64 + 1.0), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn triangle_area_and_moment() {
        let r = triangle_rule(8);
        assert_relative_eq!(r.weights.iter().sum::<f64>(), 0.5, epsilon = 1e-14);
        // int_0^1 int_0^t t s ds dt = 1/8
        let m: f64 = r.points.iter().zip(&r.weights).map(|((t, s), w)| w * t * s).sum();
        assert_relative_eq!(m, 0.125, epsilon = 1e-14);
        assert!(r.points.iter().all(|&(t, s)| 0.0 < s && s < t && t < 1.0));
    }
}
