//! Periods of the equivariant 2-form over user-supplied generators of
//! `H_2(G)`, the integrability verdict, and the cocycle on `pi_1(G)`.

use std::fmt;

use nalgebra::DVector;

use crate::algebra::{lattice_member, LatticeDesc, LatticeVerdict, Membership, DEFAULT_TOL_LAT};
use crate::error::{malformed, Error, Result};
use crate::geometry::chain::{check_closed, Surface2Chain};
use crate::geometry::form::{gamma_cocycle, surface_integral, EquivariantForm};
use crate::geometry::group::MatrixGroupDesc;
use crate::geometry::path::GroupPath;
use crate::par;

/// Named 2-cycles that the caller asserts generate `H_2(G)`.
///
/// Completeness of the list cannot be checked here; only closure of each
/// generator is.
#[derive(Debug, Clone, Default)]
pub struct CycleSet {
    pub generators: Vec<(String, Surface2Chain)>,
    /// Tolerance for matching boundary edges. `None` uses the group's
    /// membership tolerance.
    pub closure_tol: Option<f64>,
}

impl CycleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, cycle: Surface2Chain) -> Self {
        self.generators.push((name.into(), cycle));
        self
    }

    pub fn with_closure_tol(mut self, tol: f64) -> Self {
        self.closure_tol = Some(tol);
        self
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Checks that every generator's boundary cancels.
    pub fn check(&self, group: &MatrixGroupDesc) -> Result<()> {
        let tol = self.closure_tol.unwrap_or(group.membership_tol());
        for (name, cycle) in &self.generators {
            check_closed(cycle, tol).map_err(|e| match e {
                Error::OpenChain(detail) => Error::OpenChain(format!("generator '{name}': {detail}")),
                other => other,
            })?;
        }
        Ok(())
    }
}

/// `int_c omega^eq` over a closed 2-chain.
pub fn period(form: &EquivariantForm, cycle: &Surface2Chain, quad_order: usize) -> Result<DVector<f64>> {
    check_closed(cycle, form.group.membership_tol())?;
    surface_integral(form, cycle, quad_order)
}

/// Three-valued verdict of the integrability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Integrable,
    NotIntegrable,
    Indeterminate,
}

impl Verdict {
    /// Kleene conjunction: a definite failure wins over an undecided entry.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (NotIntegrable, _) | (_, NotIntegrable) => NotIntegrable,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Integrable,
        }
    }

    fn from_membership(v: LatticeVerdict) -> Verdict {
        match v {
            LatticeVerdict::Member => Verdict::Integrable,
            LatticeVerdict::NonMember => Verdict::NotIntegrable,
            LatticeVerdict::Indeterminate => Verdict::Indeterminate,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Integrable => "integrable",
            Verdict::NotIntegrable => "not-integrable",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorResult {
    pub name: String,
    pub period: DVector<f64>,
    /// `|period(q) - period(q/2)|`.
    pub error_estimate: f64,
    /// Lattice tolerance actually used, after inflation by the error estimate.
    pub tolerance: f64,
    pub membership: Membership,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub generators: Vec<GeneratorResult>,
    pub verdict: Verdict,
    pub quad_order: usize,
    /// Recorded because the generator list is taken on trust.
    pub assumption: String,
    pub pi1: Option<Pi1CocycleTable>,
}

impl IntegrabilityReport {
    pub fn with_pi1(mut self, table: Pi1CocycleTable) -> Self {
        self.pi1 = Some(table);
        self
    }
}

impl fmt::Display for IntegrabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(f, "quadrature order: {}", self.quad_order)?;
        writeln!(f, "assumption: {}", self.assumption)?;
        for g in &self.generators {
            writeln!(
                f,
                "  {}: period {} -> {} (coefficients {:?}, residual {:.3e}, error estimate {:.3e})",
                g.name,
                fmt_vector(&g.period),
                g.membership.verdict,
                g.membership.coefficients,
                g.membership.residual,
                g.error_estimate
            )?;
        }
        if let Some(table) = &self.pi1 {
            write!(f, "{table}")?;
        }
        Ok(())
    }
}

fn fmt_vector(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Evaluates the criterion `int_c omega^eq in Gamma` for every generator.
///
/// Each period is computed at `quad_order` and at `quad_order / 2`; their
/// difference inflates `tol_lat` before the membership test.
pub fn check_integrability(
    form: &EquivariantForm,
    cycles: &CycleSet,
    lattice: &LatticeDesc,
    quad_order: usize,
    tol_lat: f64,
) -> Result<IntegrabilityReport> {
    if quad_order == 0 {
        return Err(malformed("quadrature order must be positive"));
    }
    if lattice.ambient_dim() != form.coeff_dim() {
        return Err(malformed("lattice and coefficient dimensions disagree"));
    }
    cycles.check(&form.group)?;
    let coarse_order = (quad_order / 2).max(1);
    let generators = par::try_map_indexed(cycles.len(), |i| {
        let (name, cycle) = &cycles.generators[i];
        let fine = surface_integral(form, cycle, quad_order)?;
        let coarse = surface_integral(form, cycle, coarse_order)?;
        let error_estimate = (&fine - coarse).amax();
        let tolerance = tol_lat + error_estimate;
        let membership = lattice_member(lattice, &fine, tolerance)?;
        Ok(GeneratorResult { name: name.clone(), period: fine, error_estimate, tolerance, membership })
    })?;
    let verdict =
        generators.iter().fold(Verdict::Integrable, |acc, g| acc.and(Verdict::from_membership(g.membership.verdict)));
    Ok(IntegrabilityReport {
        generators,
        verdict,
        quad_order,
        assumption: "the supplied cycles generate H_2(G)".to_string(),
        pi1: None,
    })
}

/// [`check_integrability`] with the default lattice tolerance.
pub fn check_integrability_default(
    form: &EquivariantForm,
    cycles: &CycleSet,
    lattice: &LatticeDesc,
    quad_order: usize,
) -> Result<IntegrabilityReport> {
    check_integrability(form, cycles, lattice, quad_order, DEFAULT_TOL_LAT)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pi1Entry {
    pub first: usize,
    pub second: usize,
    pub gamma: DVector<f64>,
    pub gamma_swapped: DVector<f64>,
    /// `gamma(eta1, eta2) - gamma(eta2, eta1)`.
    pub commutator: DVector<f64>,
    /// The commutator mod `Gamma`.
    pub reduced: DVector<f64>,
    pub membership: Membership,
}

/// `gamma` restricted to pairs of loops representing elements of `pi_1(G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pi1CocycleTable {
    pub loops: Vec<String>,
    pub entries: Vec<Pi1Entry>,
}

impl Pi1CocycleTable {
    pub fn entry(&self, first: usize, second: usize) -> Option<&Pi1Entry> {
        self.entries.iter().find(|e| e.first == first && e.second == second)
    }
}

impl fmt::Display for Pi1CocycleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pi_1 commutators:")?;
        for e in &self.entries {
            writeln!(
                f,
                "  ({}, {}): commutator {} mod lattice {} ({})",
                self.loops[e.first],
                self.loops[e.second],
                fmt_vector(&e.commutator),
                fmt_vector(&e.reduced),
                e.membership.verdict
            )?;
        }
        Ok(())
    }
}

/// Straight-line lift of `m in Z^n` to the universal cover `R^n` of a torus,
/// pushed down to the loop `t -> exp(t m)`.
pub fn torus_lattice_loop(group: &MatrixGroupDesc, m: &[i64]) -> Result<GroupPath> {
    if m.len() != group.dim() {
        return Err(malformed(format!("lattice vector has length {}, group has dimension {}", m.len(), group.dim())));
    }
    let x = DVector::from_iterator(m.len(), m.iter().map(|&k| k as f64));
    Ok(GroupPath::one_parameter(group, &x))
}

/// Table of `gamma(eta_i, eta_j)` and its commutators for all ordered pairs
/// of the given loops.
pub fn pi1_cocycle(
    form: &EquivariantForm,
    loops: &[(String, GroupPath)],
    lattice: &LatticeDesc,
    quad_order: usize,
    tol_lat: f64,
) -> Result<Pi1CocycleTable> {
    let group = &form.group;
    for (_, path) in loops {
        let start = (path.eval(0.0) - group.identity()).norm();
        let end = (path.endpoint() - group.identity()).norm();
        if start.max(end) > group.scaled_tol(1.0) {
            return Err(Error::NotALoop { distance: start.max(end) });
        }
    }
    let k = loops.len();
    let gammas = par::try_map_indexed(k * k, |ix| {
        let (i, j) = (ix / k, ix % k);
        gamma_cocycle(form, &loops[i].1, &loops[j].1, quad_order)
    })?;
    let mut entries = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let gamma = gammas[i * k + j].clone();
            let gamma_swapped = gammas[j * k + i].clone();
            let commutator = &gamma - &gamma_swapped;
            let reduced = lattice.reduce(&commutator, tol_lat);
            let membership = lattice_member(lattice, &commutator, tol_lat)?;
            entries.push(Pi1Entry { first: i, second: j, gamma, gamma_swapped, commutator, reduced, membership });
        }
    }
    Ok(Pi1CocycleTable { loops: loops.iter().map(|(n, _)| n.clone()).collect(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ModuleActionDesc;
    use crate::cohomology::Cochain;
    use crate::geometry::chain::{Domain, Patch};
    use approx::assert_relative_eq;

    fn torus_form(c: f64) -> EquivariantForm {
        let omega = Cochain::from_entries(2, 2, 1, &[(vec![0, 1], DVector::from_element(1, c))]).unwrap();
        EquivariantForm::new(omega, MatrixGroupDesc::torus(2), ModuleActionDesc::trivial(2, 1)).unwrap()
    }

    fn fundamental(group: &MatrixGroupDesc) -> Surface2Chain {
        let g = group.clone();
        Surface2Chain::single(Patch::new(Domain::Square, move |u, v| g.exp(&DVector::from_vec(vec![u, v]))))
    }

    fn integers() -> LatticeDesc {
        LatticeDesc::scaled_integers(1, 1.0).unwrap()
    }

    #[test]
    fn torus_periods_and_verdicts() {
        for (c, expected) in [(1.0, Verdict::Integrable), (0.5, Verdict::NotIntegrable), (-3.0, Verdict::Integrable)] {
            let form = torus_form(c);
            let cycles = CycleSet::new().with("T2", fundamental(&form.group));
            let report = check_integrability_default(&form, &cycles, &integers(), 16).unwrap();
            assert_eq!(report.verdict, expected, "c = {c}");
            assert_relative_eq!(report.generators[0].period[0], c, epsilon = 1e-10);
        }
    }

    #[test]
    fn empty_generator_list_is_integrable() {
        let form = torus_form(0.3);
        let report = check_integrability_default(&form, &CycleSet::new(), &integers(), 16).unwrap();
        assert_eq!(report.verdict, Verdict::Integrable);
    }

    #[test]
    fn open_generator_is_rejected() {
        let form = torus_form(1.0);
        let g = form.group.clone();
        let half =
            Surface2Chain::single(Patch::new(Domain::Square, move |u, v| g.exp(&DVector::from_vec(vec![0.5 * u, v]))));
        let cycles = CycleSet::new().with("half", half);
        let err = check_integrability_default(&form, &cycles, &integers(), 8).unwrap_err();
        assert!(matches!(err, Error::OpenChain(ref msg) if msg.contains("half")));
    }

    #[test]
    fn verdict_conjunction_is_kleene() {
        use Verdict::*;
        assert_eq!(Integrable.and(Indeterminate), Indeterminate);
        assert_eq!(Indeterminate.and(NotIntegrable), NotIntegrable);
        assert_eq!(Integrable.and(Integrable), Integrable);
    }

    #[test]
    fn pi1_commutator_of_generators() {
        let form = torus_form(1.0);
        let loops = vec![
            ("m".to_string(), torus_lattice_loop(&form.group, &[1, 0]).unwrap()),
            ("n".to_string(), torus_lattice_loop(&form.group, &[0, 1]).unwrap()),
        ];
        let table =
            pi1_cocycle(&form, &loops, &LatticeDesc::scaled_integers(1, 2.0).unwrap(), 16, DEFAULT_TOL_LAT).unwrap();
        let e = table.entry(0, 1).unwrap();
        assert_relative_eq!(e.commutator[0], 1.0, epsilon = 1e-10);
        assert_eq!(e.membership.verdict, LatticeVerdict::NonMember);
        assert_relative_eq!(table.entry(1, 1).unwrap().commutator[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn open_loop_is_rejected() {
        let form = torus_form(1.0);
        let open = GroupPath::one_parameter(&form.group, &DVector::from_vec(vec![0.5, 0.0]));
        let err = pi1_cocycle(&form, &[("x".into(), open)], &integers(), 8, DEFAULT_TOL_LAT).unwrap_err();
        assert!(matches!(err, Error::NotALoop { .. }));
    }
}
