mod common;

use nalgebra::DVector;
use proptest::prelude::*;

use abext::algebra::ModuleActionDesc;
use abext::cohomology::GroupCochainFn;
use abext::geometry::chain::{check_closed, cube_boundary, Domain, Patch, Surface2Chain};
use abext::geometry::derivation::{derivation_d2, DEFAULT_FD_STEP, DEFAULT_FD_TOL};
use abext::geometry::form::{eval_equivariant, surface_integral, EquivariantForm, DEFAULT_QUAD_TOL};
use abext::geometry::group::MatrixGroupDesc;
use abext::geometry::path::{pointwise_product, GroupPath};
use common::*;

#[test]
fn quadrature_converges_at_gauss_rate() {
    // det of the Jacobian of (u, v) -> (e^u, v cos u) is e^u cos u
    let torus = MatrixGroupDesc::torus(2);
    let form = area_form(torus.clone(), 1.0);
    let g = torus.clone();
    let patch = Surface2Chain::single(Patch::new(Domain::Square, move |u, v| g.exp(&dvec(&[u.exp(), v * u.cos()]))));
    let exact = (1f64.exp() * (1f64.cos() + 1f64.sin()) - 1.0) / 2.0;
    let errors: Vec<f64> =
        [2usize, 4, 8, 16].iter().map(|&q| (surface_integral(&form, &patch, q).unwrap()[0] - exact).abs()).collect();
    for w in errors.windows(2) {
        if w[0] > 1e-9 {
            assert!(w[1] < w[0] / 100.0, "errors {errors:?}");
        }
    }
    assert!(errors[3] < DEFAULT_QUAD_TOL, "errors {errors:?}");
}

#[test]
fn pointwise_product_keeps_periodicity_only_in_the_abelian_case() {
    let torus = MatrixGroupDesc::torus(2);
    let a = GroupPath::one_parameter(&torus, &dvec(&[0.3, 1.1]));
    let b = wavy_path(&torus, &dvec(&[-0.5, 0.7]), &dvec(&[1.0, 0.2]), &[0.1, 0.2, -0.1]);
    let p = pointwise_product(&a, &b);
    assert!((p.endpoint() - a.endpoint() * b.endpoint()).amax() < 1e-15);
    assert!(p.check(&torus).unwrap().is_valid(&torus, 1e-6));

    // g(t) = exp(tX) exp(tY) has g^-1 g' = Ad(exp(-tY)) X + Y, which differs
    // between t = 0 and t = 1 unless exp(Y) commutes with X.
    let su2 = MatrixGroupDesc::su2();
    let (x, y) = (dvec(&[0.3, 0.1, -0.2]), dvec(&[-0.5, 0.7, 0.4]));
    let p = pointwise_product(&GroupPath::one_parameter(&su2, &x), &GroupPath::one_parameter(&su2, &y));
    assert!((p.eval(0.0) - su2.identity()).amax() < 1e-15);
    let ad = su2.adjoint_matrix(&su2.exp(&(-&y))).unwrap();
    let expected = (&ad * &x - &x).norm();
    let check = p.check(&su2).unwrap();
    assert!((check.periodicity_residual - expected).abs() < 1e-6);
    assert!(!check.is_valid(&su2, 1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adjoint_form_is_equivariant_and_antisymmetric(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let su2 = MatrixGroupDesc::su2();
        let module = ModuleActionDesc::adjoint(su2.algebra()).with_group_action(su2.adjoint_action());
        let w = random_cochain(&mut r, 2, 3, 3);
        let form = EquivariantForm::new(w, su2.clone(), module.clone()).unwrap();
        let g = su2.exp(&random_vector(&mut r, 3, 2.0));
        let (x, y) = (su2.to_matrix(&random_vector(&mut r, 3, 1.0)), su2.to_matrix(&random_vector(&mut r, 3, 1.0)));
        let lhs = eval_equivariant(&form, &g, &(&g * &x), &(&g * &y)).unwrap();
        let rhs = module.act_group(&g, &eval_equivariant(&form, &su2.identity(), &x, &y).unwrap());
        prop_assert!((&lhs - rhs).amax() < 1e-10);
        let swapped = eval_equivariant(&form, &g, &(&g * &y), &(&g * &x)).unwrap();
        prop_assert_eq!(swapped, -lhs);
    }

    #[test]
    fn cube_boundaries_on_the_torus_have_zero_period(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -2.0..2.0f64) {
        let torus = MatrixGroupDesc::torus(2);
        let form = area_form(torus.clone(), c);
        let g = torus.clone();
        let chain = cube_boundary(move |u, v, w| g.exp(&dvec(&[u * (1.0 + a * w), v + b * (u * w).sin()])));
        check_closed(&chain, 1e-9).unwrap();
        prop_assert!(surface_integral(&form, &chain, 16).unwrap()[0].abs() < DEFAULT_QUAD_TOL);
    }

    #[test]
    fn d2_is_antisymmetric_and_bilinear(seed in 0u64..10_000, s in -2.0..2.0f64) {
        let mut r = rng(seed);
        let plane = MatrixGroupDesc::translations(2);
        let f = GroupCochainFn::new(2, 1, |g| {
            let (x1, y1, x2, y2) = (g[0][(0, 2)], g[0][(1, 2)], g[1][(0, 2)], g[1][(1, 2)]);
            Ok(DVector::from_element(1, 2.0 * x1 * y2 - 0.5 * y1 * x2 + x1 * x1 * y2))
        });
        let (x, xp, y) = (random_vector(&mut r, 2, 1.0), random_vector(&mut r, 2, 1.0), random_vector(&mut r, 2, 1.0));
        let d = |u: &DVector<f64>, v: &DVector<f64>| derivation_d2(&plane, &f, u, v, DEFAULT_FD_STEP).unwrap()[0];
        prop_assert!((d(&x, &y) + d(&y, &x)).abs() < DEFAULT_FD_TOL);
        prop_assert!((d(&(&x * s + &xp), &y) - (s * d(&x, &y) + d(&xp, &y))).abs() < DEFAULT_FD_TOL);
    }
}
