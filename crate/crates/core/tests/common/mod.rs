#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use abext::algebra::{LieAlgebraDesc, ModuleActionDesc};
use abext::cohomology::Cochain;
use abext::geometry::chain::{Domain, Patch, Surface2Chain};
use abext::geometry::form::EquivariantForm;
use abext::geometry::group::{quaternion_left, MatrixGroupDesc};
use abext::geometry::path::GroupPath;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

pub fn dvec(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

// ---------------------------------------------------------------------------
// Exact Chevalley-Eilenberg oracle.
//
// Cochains are stored as full antisymmetric tensors indexed by every ordered
// tuple, and the differential is evaluated on every ordered tuple, so nothing
// here shares the sorted-index bookkeeping of the library.

type Q = Rational64;

fn q_of(x: f64) -> Q {
    let r = x.round();
    assert!((x - r).abs() < 1e-12, "oracle needs integer structure constants, got {x}");
    Q::from_integer(r as i64)
}

struct ExactAlgebra {
    n: usize,
    c: Vec<Q>,
    m: usize,
    rho: Vec<Vec<Q>>,
}

impl ExactAlgebra {
    fn new(alg: &LieAlgebraDesc, module: &ModuleActionDesc) -> Self {
        let n = alg.dim();
        let m = module.coeff_dim();
        let c = alg.constants().iter().map(|&x| q_of(x)).collect();
        let rho = module.rho().iter().map(|r| r.iter().map(|&x| q_of(x)).collect()).collect();
        Self { n, c, m, rho }
    }

    fn c(&self, i: usize, j: usize, k: usize) -> Q {
        self.c[(i * self.n + j) * self.n + k]
    }

    // column-major as stored by nalgebra
    fn rho(&self, i: usize, row: usize, col: usize) -> Q {
        self.rho[i][col * self.m + row]
    }
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn tuple_index(n: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &i| acc * n + i)
}

fn permutation_sign(t: &[usize]) -> Option<i64> {
    let mut sign = 1;
    for a in 0..t.len() {
        for b in (a + 1)..t.len() {
            if t[a] == t[b] {
                return None;
            }
            if t[a] > t[b] {
                sign = -sign;
            }
        }
    }
    Some(sign)
}

fn increasing(n: usize, k: usize) -> Vec<Vec<usize>> {
    tuples(n, k).into_iter().filter(|t| t.windows(2).all(|w| w[0] < w[1])).collect()
}

// Full tensor (length n^k * m) of the antisymmetric cochain whose value on
// the increasing tuple `basis` is the unit vector `e_a`.
fn basis_tensor(alg: &ExactAlgebra, k: usize, basis: &[usize], a: usize) -> Vec<Q> {
    let (n, m) = (alg.n, alg.m);
    let mut out = vec![Q::from_integer(0); n.pow(k as u32) * m];
    for t in tuples(n, k) {
        let mut sorted = t.clone();
        sorted.sort();
        if sorted == basis {
            if let Some(s) = permutation_sign(&t) {
                out[tuple_index(n, &t) * m + a] = Q::from_integer(s);
            }
        }
    }
    out
}

// (d w)(x_0, ..., x_k) on an ordered tuple of basis vectors, with w a full
// tensor of degree k.
fn d_on_tuple(alg: &ExactAlgebra, k: usize, w: &[Q], t: &[usize]) -> Vec<Q> {
    let (n, m) = (alg.n, alg.m);
    let zero = Q::from_integer(0);
    let mut out = vec![zero; m];
    let value = |args: &[usize]| -> Vec<Q> {
        let base = tuple_index(n, args) * m;
        w[base..base + m].to_vec()
    };
    for i in 0..=k {
        let rest: Vec<usize> = t.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &x)| x).collect();
        let inner = value(&rest);
        let sign = if i % 2 == 0 { 1 } else { -1 };
        for (row, slot) in out.iter_mut().enumerate() {
            let mut acc = zero;
            for (col, &w) in inner.iter().enumerate() {
                acc += alg.rho(t[i], row, col) * w;
            }
            *slot += acc * sign;
        }
    }
    for a in 0..=k {
        for b in (a + 1)..=k {
            let sign = if (a + b) % 2 == 0 { 1 } else { -1 };
            for l in 0..n {
                let c = alg.c(t[a], t[b], l);
                if c == zero {
                    continue;
                }
                let mut args = vec![l];
                args.extend(t.iter().enumerate().filter(|&(p, _)| p != a && p != b).map(|(_, &x)| x));
                let inner = value(&args);
                for row in 0..m {
                    out[row] += c * inner[row] * sign;
                }
            }
        }
    }
    out
}

// Matrix of d: C^k -> C^{k+1} in exact arithmetic, one column per basis
// cochain, rows indexed by (increasing (k+1)-tuple, coefficient).
fn exact_d(alg: &ExactAlgebra, k: usize) -> Vec<Vec<Q>> {
    let m = alg.m;
    let rows = increasing(alg.n, k + 1);
    let mut columns = Vec::new();
    for basis in increasing(alg.n, k) {
        for a in 0..m {
            let w = basis_tensor(alg, k, &basis, a);
            let mut col = Vec::with_capacity(rows.len() * m);
            for t in &rows {
                col.extend(d_on_tuple(alg, k, &w, t));
            }
            columns.push(col);
        }
    }
    columns
}

fn exact_rank(columns: &[Vec<Q>]) -> usize {
    if columns.is_empty() {
        return 0;
    }
    let rows = columns[0].len();
    // transpose into row-major for elimination
    let mut a: Vec<Vec<Q>> = (0..rows).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    let cols = columns.len();
    let zero = Q::from_integer(0);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][col] != zero) else { continue };
        a.swap(rank, p);
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && row[col] != zero {
                let f = row[col] / pivot_row[col];
                for (x, &p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `dim H^k` by exact elimination over the rationals.
pub fn exact_betti(alg: &LieAlgebraDesc, module: &ModuleActionDesc, k: usize) -> usize {
    let ex = ExactAlgebra::new(alg, module);
    let dim_ck = increasing(ex.n, k).len() * ex.m;
    let rank_k = exact_rank(&exact_d(&ex, k));
    let rank_prev = if k == 0 { 0 } else { exact_rank(&exact_d(&ex, k - 1)) };
    dim_ck - rank_k - rank_prev
}

// ---------------------------------------------------------------------------
// Geometry fixtures.

/// `omega(e_1, e_2) = c` on a two-dimensional group with trivial `R`.
pub fn area_form(group: MatrixGroupDesc, c: f64) -> EquivariantForm {
    let omega = Cochain::from_entries(2, 2, 1, &[(vec![0, 1], DVector::from_element(1, c))]).unwrap();
    EquivariantForm::new(omega, group, ModuleActionDesc::trivial(2, 1)).unwrap()
}

/// Unit-square patch `(u, v) -> exp(u e_1 + v e_2)`: the fundamental cycle on
/// `T^2`, an open square on `R^2`.
pub fn torus_fundamental(group: &MatrixGroupDesc) -> Surface2Chain {
    let g = group.clone();
    Surface2Chain::single(Patch::new(Domain::Square, move |u, v| g.exp(&dvec(&[u, v]))))
}

/// The fundamental cycle cut into four quarter squares.
pub fn torus_quartered(group: &MatrixGroupDesc) -> Surface2Chain {
    let mut chain = Surface2Chain::new();
    for (a, b) in [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)] {
        let g = group.clone();
        chain.push(1, Patch::new(Domain::Square, move |u, v| g.exp(&dvec(&[a + 0.5 * u, b + 0.5 * v]))));
    }
    chain
}

/// The unit pure quaternions, an equatorial 2-sphere in `SU(2) = S^3`.
pub fn su2_equatorial_sphere() -> Surface2Chain {
    Surface2Chain::single(Patch::new(Domain::Square, |u, v| {
        let (th, ph) = (PI * u, 2.0 * PI * v);
        quaternion_left(0.0, th.cos(), th.sin() * ph.cos(), th.sin() * ph.sin())
    }))
}

/// Smooth path `u -> exp(u v + a(u) d)` with
/// `a(u) = c_0 (1 - cos 2 pi u) + sum_{k >= 1} c_k sin(2 pi k u)`, so that
/// `a(0) = a(1) = 0` and the log-derivative is periodic.
pub fn wavy_path(group: &MatrixGroupDesc, v: &DVector<f64>, d: &DVector<f64>, coeffs: &[f64]) -> GroupPath {
    let (g, v, d, coeffs) = (group.clone(), v.clone(), d.clone(), coeffs.to_vec());
    GroupPath::new(move |u| {
        let a: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k == 0 { c * (1.0 - (2.0 * PI * u).cos()) } else { c * (2.0 * PI * k as f64 * u).sin() })
            .sum();
        g.exp(&(&v * u + &d * a))
    })
}

pub fn random_wave(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..3).map(|_| rng.gen_range(-0.25..0.25)).collect()
}

/// Heisenberg algebra acting on `R^2` through `e_1 -> E_12`.
pub fn heis3_on_plane() -> (LieAlgebraDesc, ModuleActionDesc) {
    let alg = LieAlgebraDesc::heisenberg3();
    let mut e12 = DMatrix::zeros(2, 2);
    e12[(0, 1)] = 1.0;
    let rho = vec![e12, DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)];
    let module = ModuleActionDesc::new(2, rho, Default::default()).unwrap();
    (alg, module)
}

/// Random element of the cocycle space `ker d_2`.
pub fn random_cocycle(rng: &mut ChaCha8Rng, alg: &LieAlgebraDesc, module: &ModuleActionDesc) -> Cochain {
    let slice = abext::cohomology::build_complex_slice(alg, module, 2).unwrap();
    let z = &slice.z_basis;
    let coeffs = random_vector(rng, z.ncols(), 1.0);
    Cochain::from_components(2, alg.dim(), module.coeff_dim(), z * coeffs).unwrap()
}

pub fn random_cochain(rng: &mut ChaCha8Rng, degree: usize, alg_dim: usize, coeff_dim: usize) -> Cochain {
    let len = abext::cohomology::binomial(alg_dim, degree) * coeff_dim;
    Cochain::from_components(degree, alg_dim, coeff_dim, random_vector(rng, len, 1.0)).unwrap()
}
