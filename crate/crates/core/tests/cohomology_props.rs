mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use abext::algebra::{LieAlgebraDesc, ModuleActionDesc};
use abext::cohomology::{betti, binomial, build_complex_slice, Cochain};
use common::*;

fn modules() -> Vec<(&'static str, LieAlgebraDesc, ModuleActionDesc)> {
    let (heis, heis_plane) = heis3_on_plane();
    let sl2 = LieAlgebraDesc::sl2();
    let so3 = LieAlgebraDesc::so3();
    vec![
        ("R^3 trivial", LieAlgebraDesc::abelian(3), ModuleActionDesc::trivial(3, 1)),
        ("heis3 trivial", heis.clone(), ModuleActionDesc::trivial(3, 1)),
        ("heis3 adjoint", heis.clone(), ModuleActionDesc::adjoint(&heis)),
        ("heis3 on R^2", heis, heis_plane),
        ("sl2 trivial", sl2.clone(), ModuleActionDesc::trivial(3, 1)),
        ("sl2 adjoint", sl2.clone(), ModuleActionDesc::adjoint(&sl2)),
        ("so3 adjoint", so3.clone(), ModuleActionDesc::adjoint(&so3)),
    ]
}

#[test]
fn betti_numbers_match_exact_oracle_in_every_degree() {
    for (name, alg, module) in modules() {
        for k in 0..=alg.dim() {
            let numeric = betti(&alg, &module, k).unwrap();
            let exact = exact_betti(&alg, &module, k);
            assert_eq!(numeric, exact, "{name}, degree {k}");
        }
    }
}

#[test]
fn known_betti_numbers() {
    let heis = LieAlgebraDesc::heisenberg3();
    let triv = ModuleActionDesc::trivial(3, 1);
    let got: Vec<usize> = (0..=3).map(|k| betti(&heis, &triv, k).unwrap()).collect();
    assert_eq!(got, vec![1, 2, 2, 1]);
    let sl2 = LieAlgebraDesc::sl2();
    let got: Vec<usize> = (0..=3).map(|k| betti(&sl2, &triv, k).unwrap()).collect();
    assert_eq!(got, vec![1, 0, 0, 1]);
}

#[test]
fn rank_nullity_on_every_slice() {
    for (name, alg, module) in modules() {
        for k in 0..alg.dim() {
            let s = build_complex_slice(&alg, &module, k).unwrap();
            assert_eq!(s.cocycle_dim() + s.rank_d, binomial(alg.dim(), k) * module.coeff_dim(), "{name}, degree {k}");
        }
    }
}

#[test]
fn degree_above_dimension_is_rejected() {
    assert!(build_complex_slice(&LieAlgebraDesc::abelian(2), &ModuleActionDesc::trivial(2, 1), 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn betti_is_basis_independent(which in 0usize..7, noise in prop::collection::vec(-0.4..0.4f64, 9), k in 0usize..4) {
        let (_, alg, module) = modules().swap_remove(which);
        let n = alg.dim();
        let p = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |r, c| noise[r * 3 + c]);
        prop_assume!(p.determinant().abs() > 0.1);
        let moved = alg.change_of_basis(&p).unwrap();
        // rho transforms with the basis: rho'(e'_j) = sum_i p_ij rho(e_i)
        let rho: Vec<DMatrix<f64>> = (0..n)
            .map(|j| (0..n).fold(DMatrix::zeros(module.coeff_dim(), module.coeff_dim()), |acc, i| acc + &module.rho()[i] * p[(i, j)]))
            .collect();
        let moved_module = ModuleActionDesc::new(module.coeff_dim(), rho, Default::default()).unwrap();
        prop_assert_eq!(betti(&alg, &module, k).unwrap(), betti(&moved, &moved_module, k).unwrap());
    }

    #[test]
    fn equal_arguments_give_exact_zero(seed in 0u64..1000, degree in 2usize..4, i in 0usize..3) {
        let mut r = rng(seed);
        let w = random_cochain(&mut r, degree, 4, 2);
        let x = random_vector(&mut r, 4, 1.0);
        let mut args: Vec<DVector<f64>> = (0..degree).map(|_| random_vector(&mut r, 4, 1.0)).collect();
        let j = (i + 1) % degree;
        let i = i % degree;
        prop_assume!(i != j);
        args[i] = x.clone();
        args[j] = x;
        prop_assert!(w.eval(&args).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn basis_evaluation_matches_components(seed in 0u64..1000) {
        let mut r = rng(seed);
        let w = random_cochain(&mut r, 2, 4, 1);
        let e = |i: usize| DVector::from_fn(4, |k, _| (k == i) as u8 as f64);
        prop_assert_eq!(w.eval(&[e(1), e(3)]).unwrap(), w.on_basis(&[1, 3]));
        prop_assert_eq!(w.eval(&[e(3), e(1)]).unwrap(), -w.on_basis(&[1, 3]));
    }
}

#[test]
fn representatives_are_cocycles_outside_the_coboundaries() {
    let heis = LieAlgebraDesc::heisenberg3();
    let module = ModuleActionDesc::trivial(3, 1);
    let slice = build_complex_slice(&heis, &module, 2).unwrap();
    let reps: Vec<Cochain> = slice.representatives();
    assert_eq!(reps.len(), 2);
    for w in &reps {
        assert!(abext::cohomology::cocycle_residual(&heis, &module, w).unwrap() < 1e-12);
    }
}
