mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use abext::algebra::{
    bracket, lattice_member, validate_algebra, validate_module, AlgebraVector, LatticeDesc, LatticeVerdict,
    LieAlgebraDesc, ModuleActionDesc, DEFAULT_TOL_ALG, DEFAULT_TOL_LAT,
};

fn presets() -> Vec<LieAlgebraDesc> {
    let heis = LieAlgebraDesc::heisenberg3();
    let sl2 = LieAlgebraDesc::sl2();
    vec![
        LieAlgebraDesc::abelian(3),
        heis.clone(),
        sl2.clone(),
        LieAlgebraDesc::so3(),
        LieAlgebraDesc::su2_quaternion(),
        sl2.direct_sum(&heis),
    ]
}

fn vector(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0..2.0f64, n).prop_map(DVector::from_vec)
}

fn algebra_and_vectors() -> impl Strategy<Value = (LieAlgebraDesc, Vec<DVector<f64>>)> {
    (0..presets().len(), prop::collection::vec(-0.3..0.3f64, 36)).prop_flat_map(|(i, noise)| {
        let alg = presets().swap_remove(i);
        let n = alg.dim();
        let p = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |r, c| noise[(r * n + c) % noise.len()]);
        let alg = alg.change_of_basis(&p).unwrap();
        (Just(alg), prop::collection::vec(vector(n), 5))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_holds_for_random_vectors((alg, vs) in algebra_and_vectors()) {
        let b = |x: &DVector<f64>, y: &DVector<f64>| bracket(&alg, &AlgebraVector(x.clone()), &AlgebraVector(y.clone())).unwrap().0;
        let (x, y, z) = (&vs[0], &vs[1], &vs[2]);
        let jac = b(x, &b(y, z)) + b(y, &b(z, x)) + b(z, &b(x, y));
        let n = alg.dim() as f64;
        prop_assert!(jac.amax() < n.powi(3) * DEFAULT_TOL_ALG, "Jacobi residual {}", jac.amax());
    }

    #[test]
    fn bracket_is_bilinear((alg, vs) in algebra_and_vectors(), a in -3.0..3.0f64, c in -3.0..3.0f64) {
        let b = |x: &DVector<f64>, y: &DVector<f64>| bracket(&alg, &AlgebraVector(x.clone()), &AlgebraVector(y.clone())).unwrap().0;
        let (x, xp, y) = (&vs[0], &vs[1], &vs[2]);
        let lhs = b(&(x * a + xp * c), y);
        let rhs = b(x, y) * a + b(xp, y) * c;
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn adjoint_of_valid_algebra_is_a_module((alg, _) in algebra_and_vectors()) {
        prop_assume!(validate_algebra(&alg, DEFAULT_TOL_ALG).is_valid());
        let report = validate_module(&alg, &ModuleActionDesc::adjoint(&alg), DEFAULT_TOL_ALG).unwrap();
        prop_assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn lattice_is_closed_under_addition(
        k1 in prop::collection::vec(-20i64..20, 3),
        k2 in prop::collection::vec(-20i64..20, 3),
        noise in prop::collection::vec(-0.4..0.4f64, 9),
    ) {
        let m = DMatrix::identity(3, 3) + DMatrix::from_vec(3, 3, noise);
        let gens: Vec<DVector<f64>> = m.column_iter().map(|c| c.into_owned()).collect();
        let lat = LatticeDesc::new(3, gens).unwrap();
        let to_v = |k: &[i64]| m.clone() * DVector::from_iterator(3, k.iter().map(|&x| x as f64));
        let (v, w) = (to_v(&k1), to_v(&k2));
        for u in [&v, &w, &(&v + &w)] {
            prop_assert_eq!(lattice_member(&lat, u, DEFAULT_TOL_LAT).unwrap().verdict, LatticeVerdict::Member);
        }
        let sum: Vec<i64> = k1.iter().zip(&k2).map(|(a, b)| a + b).collect();
        prop_assert_eq!(lattice_member(&lat, &(&v + &w), DEFAULT_TOL_LAT).unwrap().coefficients, sum);
    }
}

#[test]
fn every_generator_is_a_member_with_unit_coefficients() {
    let gens = vec![common::dvec(&[1.0, 0.5]), common::dvec(&[0.0, 2.0])];
    let lat = LatticeDesc::new(2, gens.clone()).unwrap();
    for (i, g) in gens.iter().enumerate() {
        let m = lattice_member(&lat, g, DEFAULT_TOL_LAT).unwrap();
        assert!(m.is_member());
        let expected: Vec<i64> = (0..2).map(|j| (i == j) as i64).collect();
        assert_eq!(m.coefficients, expected);
    }
}

#[test]
fn half_integer_is_not_a_member_and_near_miss_is_indeterminate() {
    let lat = LatticeDesc::scaled_integers(1, 1.0).unwrap();
    let half = lattice_member(&lat, &common::dvec(&[0.5]), DEFAULT_TOL_LAT).unwrap();
    assert_eq!(half.verdict, LatticeVerdict::NonMember);
    let near = lattice_member(&lat, &common::dvec(&[3.0 + 5.0 * DEFAULT_TOL_LAT]), DEFAULT_TOL_LAT).unwrap();
    assert_eq!(near.verdict, LatticeVerdict::Indeterminate);
}

#[test]
fn zero_dimensional_algebra_is_legal() {
    let alg = LieAlgebraDesc::abelian(0);
    assert!(validate_algebra(&alg, DEFAULT_TOL_ALG).is_valid());
    let x = AlgebraVector::zeros(0);
    assert_eq!(bracket(&alg, &x, &x).unwrap().len(), 0);
    let module = ModuleActionDesc::trivial(0, 2);
    assert!(validate_module(&alg, &module, DEFAULT_TOL_ALG).unwrap().is_valid());
}
