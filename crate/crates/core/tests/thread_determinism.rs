#![cfg(feature = "parallel")]

mod common;

use abext::algebra::{LatticeDesc, ModuleActionDesc};
use abext::cohomology::Cochain;
use abext::geometry::form::{surface_integral, EquivariantForm};
use abext::geometry::group::MatrixGroupDesc;
use abext::geometry::path::GroupPath;
use abext::integrability::{check_integrability, pi1_cocycle, torus_lattice_loop, CycleSet};
use nalgebra::DVector;

use common::*;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn bits(v: &DVector<f64>) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn surface_integrals_do_not_depend_on_thread_count() {
    let group = MatrixGroupDesc::su2();
    let mut rng = rng(7);
    let omega = random_cochain(&mut rng, 2, 3, 2);
    let form = EquivariantForm::new(omega, group, ModuleActionDesc::trivial(3, 2)).unwrap();
    let sphere = su2_equatorial_sphere();
    let reference = bits(&in_pool(1, || surface_integral(&form, &sphere, 24).unwrap()));
    for threads in [2, 3, 8] {
        let v = in_pool(threads, || surface_integral(&form, &sphere, 24).unwrap());
        assert_eq!(bits(&v), reference, "{threads} threads");
    }
}

#[test]
fn integrability_reports_do_not_depend_on_thread_count() {
    let torus = MatrixGroupDesc::torus(2);
    let omega = Cochain::from_entries(2, 2, 1, &[(vec![0, 1], DVector::from_element(1, 0.37))]).unwrap();
    let form = EquivariantForm::new(omega, torus.clone(), ModuleActionDesc::trivial(2, 1)).unwrap();
    let cycles = CycleSet::new().with("whole", torus_fundamental(&torus)).with("quartered", torus_quartered(&torus));
    let lattice = LatticeDesc::scaled_integers(1, 0.37).unwrap();
    let loops: Vec<(String, GroupPath)> =
        [[1, 0], [0, 1], [1, -2]].iter().map(|m| (format!("{m:?}"), torus_lattice_loop(&torus, m).unwrap())).collect();

    let run = || {
        let report = check_integrability(&form, &cycles, &lattice, 16, 1e-6).unwrap();
        let table = pi1_cocycle(&form, &loops, &lattice, 12, 1e-6).unwrap();
        let periods: Vec<Vec<u64>> = report.generators.iter().map(|g| bits(&g.period)).collect();
        let commutators: Vec<Vec<u64>> = table.entries.iter().map(|e| bits(&e.commutator)).collect();
        (report.verdict, periods, commutators)
    };
    let reference = in_pool(1, run);
    for threads in [2, 5] {
        assert_eq!(in_pool(threads, run), reference, "{threads} threads");
    }
}
