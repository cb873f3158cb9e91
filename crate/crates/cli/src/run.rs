//! Task dispatch. Each task turns a resolved document into a JSON result, a
//! few human-readable lines, warnings and an exit status.

use nalgebra::DVector;
use serde_json::{json, Value};

use abext::algebra::{validate_algebra, validate_module, LatticeVerdict, Membership, ValidationReport};
use abext::cohomology::{build_complex_slice, cocycle_residual};
use abext::extensions::{are_equivalent, build_algebra_extension, jacobi_residual};
use abext::geometry::{derivation_d2, gamma_cocycle, gamma_recovers_omega, EquivariantForm, DEFAULT_DERIV_TOL};
use abext::integrability::{check_integrability, pi1_cocycle, CycleSet, Pi1CocycleTable, Verdict};

use crate::document::{ProblemDocument, Task};
use crate::error::{CliError, EXIT_INDETERMINATE, EXIT_REJECTED};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub task: Task,
    pub results: Value,
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn new(task: Task) -> Self {
        Self { task, results: Value::Null, lines: Vec::new(), warnings: Vec::new(), exit_code: 0 }
    }
}

/// Dispatches the document's task.
pub fn run(doc: &ProblemDocument) -> Result<Outcome, CliError> {
    let task = doc.task.ok_or_else(|| CliError::Unresolved("no task given (set 'task' or pass --task)".into()))?;
    let mut out = Outcome::new(task);
    match task {
        Task::Validate => validate(doc, &mut out)?,
        Task::Cohomology => cohomology(doc, &mut out)?,
        Task::Extend => extend(doc, &mut out)?,
        Task::Equivalence => equivalence(doc, &mut out)?,
        Task::Gamma => gamma(doc, &mut out)?,
        Task::D2 => d2(doc, &mut out)?,
        Task::CheckIntegrability => integrability(doc, &mut out)?,
        Task::Pi1 => pi1(doc, &mut out)?,
    }
    Ok(out)
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("[{}]", parts.join(", "))
}

fn validation_json(r: &ValidationReport) -> Value {
    json!({
        "valid": r.is_valid(),
        "max_residual": r.max_residual,
        "violations": r.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    })
}

fn membership_json(m: &Membership) -> Value {
    json!({
        "verdict": m.verdict.to_string(),
        "coefficients": m.coefficients,
        "residual": m.residual,
        "span_residual": m.span_residual,
        "max_fraction": m.max_fraction,
    })
}

fn validate(doc: &ProblemDocument, out: &mut Outcome) -> Result<(), CliError> {
    let (alg, module) = doc.require_algebra()?;
    let tol = doc.options.tol_alg;
    let mut results = serde_json::Map::new();
    let mut all_valid = true;

    let a = validate_algebra(alg, tol);
    all_valid &= a.is_valid();
    out.lines.push(format!(
        "algebra ({}-dimensional): {} violation(s), max residual {:e}",
        alg.dim(),
        a.violations.len(),
        a.max_residual
    ));
    out.lines.extend(a.violations.iter().map(|v| format!("  {v}")));
    results.insert("algebra".into(), validation_json(&a));

    let m = validate_module(alg, module, tol)?;
    all_valid &= m.is_valid();
    out.lines.push(format!(
        "module (dimension {}): {} violation(s), max residual {:e}",
        module.coeff_dim(),
        m.violations.len(),
        m.max_residual
    ));
    out.lines.extend(m.violations.iter().map(|v| format!("  {v}")));
    results.insert("module".into(), validation_json(&m));

    if let Some(group) = &doc.group {
        // the finite-difference probe is only good to about 1e-8
        let g = group.check_action_compatibility(module, tol.max(1e-6))?;
        all_valid &= g.is_valid();
        out.lines.push(format!("group action: {} violation(s), max residual {:e}", g.violations.len(), g.max_residual));
        out.lines.extend(g.violations.iter().map(|v| format!("  {v}")));
        results.insert("group_action".into(), validation_json(&g));
    }

    for (key, cochain) in [("cocycle", &doc.cocycle), ("cocycle2", &doc.cocycle2)] {
        if let Some(c) = cochain {
            let r = cocycle_residual(alg, module, c)?;
            let ok = r < tol;
            all_valid &= ok;
            out.lines.push(format!(
                "{key} (degree {}): max |d omega| = {r:e} -> {}",
                c.degree(),
                if ok { "cocycle" } else { "not a cocycle" }
            ));
            results.insert(key.into(), json!({"degree": c.degree(), "residual": r, "is_cocycle": ok}));
        }
    }

    results.insert("valid".into(), json!(all_valid));
    out.results = Value::Object(results);
    if !all_valid {
        out.exit_code = EXIT_REJECTED;
    }
    Ok(())
}

fn cohomology(doc: &ProblemDocument, out: &mut Outcome) -> Result<(), CliError> {
    let (alg, module) = doc.require_algebra()?;
    let degrees: Vec<usize> = match doc.args.degree {
        Some(k) => vec![k],
        None => (0..=alg.dim()).collect(),
    };
    let mut slices = Vec::with_capacity(degrees.len());
    let mut betti = Vec::with_capacity(degrees.len());
    for &k in &degrees {
        let s = build_complex_slice(alg, module, k)?;
        out.lines.push(format!(
            "H^{k}: betti {} (cochains {}, cocycles {}, coboundaries {}, rank d_{k} {})",
            s.betti(),
            s.cochain_dim(),
            s.cocycle_dim(),
            s.coboundary_dim(),
            s.rank_d
        ));
        betti.push(s.betti());
        slices.push(json!({
            "degree": k,
            "betti": s.betti(),
            "cochain_dim": s.cochain_dim(),
            "cocycle_dim": s.cocycle_dim(),
            "coboundary_dim": s.coboundary_dim(),
            "rank_d": s.rank_d,
            "rank_prev": s.rank_prev,
        }));
    }
    out.results = json!({
        "algebra_dim": alg.dim(),
        "module_dim": module.coeff_dim(),
        "degrees": degrees,
        "betti": betti,
        "slices": slices,
    });
    Ok(())
}

fn extend(doc: &ProblemDocument, out: &mut Outcome) -> Result<(), CliError> {
    let (alg, module) = doc.require_algebra()?;
    let omega = doc.require_cocycle()?;
    let ext = build_algebra_extension(alg, module, omega, doc.options.tol_alg)?;
    let total = &ext.total;
    let brackets: Vec<Value> = total.sparse_entries().into_iter().map(|(i, j, k, v)| json!([i, j, k, v])).collect();
    let residual = jacobi_residual(&ext);
    out.lines.push(format!(
        "total algebra: dimension {} = {} + {}, {} nonzero bracket entries, Jacobi residual {residual:e}",
        total.dim(),
        ext.base_dim(),
        ext.coeff_dim(),
        brackets.len()
    ));
    for (i, j, k, v) in total.sparse_entries() {
        let l = total.labels();
        out.lines.push(format!("  [{}, {}] : {v} {}", l[i], l[j], l[k]));
    }
    out.results = json!({
        "algebra": {"dim": total.dim(), "labels": total.labels(), "brackets": brackets},
        "base_dim": ext.base_dim(),
        "coeff_dim": ext.coeff_dim(),
        "jacobi_residual": residual,
    });
    Ok(())
}

fn equivalence(doc: &ProblemDocument, out: &mut Outcome) -> Result<(), CliError> {
    let (alg, module) = doc.require_algebra()?;
    let w1 = doc.require_cocycle()?;
    let w2 =
        doc.cocycle2.as_ref().ok_or_else(|| CliError::Unresolved("equivalence needs a 'cocycle2' section".into()))?;
    let eq = are_equivalent(alg, module, w1, w2, doc.options.equiv_tol)?;
    out.lines.push(format!(
        "cocycle and cocycle2 are {} (least-squares residual {:e})",
        if eq.equivalent { "cohomologous" } else { "not cohomologous" },
        eq.residual
    ));
    if let Some(w) = &eq.witness {
        out.lines.push(format!("  witness lambda = {}", fmt_vec(w.components())));
    }
    out.results = json!({
        "equivalent": eq.equivalent,
        "residual": eq.residual,
        "witness": eq.witness.as_ref().map(|w| vec_json(w.components())),
    });
    Ok(())
}

fn equivariant_form(doc: &ProblemDocument) -> Result<EquivariantForm, CliError> {
    let group = doc.require_group()?;
    let (_, module) = doc.require_algebra()?;
    let omega = doc.require_cocycle()?;
    Ok(EquivariantForm::new(omega.clone(), group.clone(), module.clone())?)
}

fn gamma(doc: &ProblemDocument, out: &mut Outcome) -> Result<(), CliError> {
    let form = equivariant_form(doc)?;
    let (i, j) =
        doc.args.gamma_paths.ok_or_else(|| CliError::Unresolved("gamma needs args.paths = [first, second]".into()))?;
    let (n1, p1) = &doc.paths[i];
    let (n2, p2) = &doc.paths[j];
    for (name, p) in [(n1, p1), (n2, p2)] {
        let check = p.check(&form.group)?;
        if !check.is_valid(&form.group, DEFAULT_DERIV_TOL) {
            out.warnings.push(format!(
                "path '{name}' is not a based path with periodic log-derivative \
                 (base residual {:e}, periodicity residual {:e})",
                check.base_residual, check.periodicity_residual
            ));
        }
    }
    let q = doc.options.quad_order;
    let g12 = gamma_cocycle(&form, p1, p2, q)?;
    let g21 = gamma_cocycle(&form, p2, p1, q)?;
    let commutator = &g12 - &g21;
    out.lines.push(format!("gamma({n1}, {n2}) = {}", fmt_vec(&g12)));
    out.lines.push(format!("gamma({n2}, {n1}) = {}", fmt_vec(&g21)));
    out.lines.push(format!("commutator = {}", fmt_vec(&commutator)));
    let mut results = json!({
        "first": n1,
        "second": n2,
        "quad_order": q,
        "gamma": vec_json(&g12),
        "gamma_swapped": vec_json(&g21),
        "commutator": vec_json(&commutator),
    });
    if let Some(lattice) = &doc.lattice {
        let m = abext::algebra::lattice_member(lattice, &commutator, doc.options.tol_lat)?;
        out.lines.push(format!("commutator mod lattice: {}", m.verdict));
        if m.verdict == LatticeVerdict::Indeterminate {
            out.warnings.push("commutator lies in the ambiguity band of the lattice test".into());
            out.exit_code = EXIT_INDETERMINATE;
        }
        results["commutator_membership"] = membership_json(&m);
    }
    out.results = results;
    Ok(())
}

fn d2(doc: &ProblemDocument, out: &mut Outcome) -> Result<(), CliError> {
    let group = doc.require_group()?;
    let h = doc.options.fd_step;
    let n = group.dim();
    let basis = |i: usize| {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    };
    if let Some(f) = &doc.group_cocycle {
        if let (Some(x), Some(y)) = (&doc.args.x, &doc.args.y) {
            let v = derivation_d2(group, f, x, y, h)?;
            out.lines.push(format!("D2 f(X, Y) = {}", fmt_vec(&v)));
            out.results = json!({"source": "group_cocycle", "fd_step": h, "value": vec_json(&v)});
            return Ok(());
        }
        let mut values = vec![vec![DVector::zeros(f.coeff_dim()); n]; n];
        for (i, row) in values.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if i != j {
                    *cell = derivation_d2(group, f, &basis(i), &basis(j), h)?;
                }
            }
        }
        let asym = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (&values[i][j] + &values[j][i]).amax())
            .fold(0.0, f64::max);
        let components: Vec<Vec<Value>> = values.iter().map(|r| r.iter().map(vec_json).collect()).collect();
        let mut results = json!({
            "source": "group_cocycle",
            "fd_step": h,
            "components": components,
            "antisymmetry_residual": asym,
        });
        if f.coeff_dim() == 1 {
            let matrix: Vec<Vec<f64>> = values.iter().map(|r| r.iter().map(|v| v[0]).collect()).collect();
            out.lines.push("D2 f on basis pairs:".into());
            for row in &matrix {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:>14.10}")).collect();
                out.lines.push(format!("  {}", cells.join(" ")));
            }
            results["matrix"] = json!(matrix);
        } else {
            for (i, row) in values.iter().enumerate() {
                for (j, v) in row.iter().enumerate().skip(i + 1) {
                    out.lines.push(format!("D2 f(e{}, e{}) = {}", i + 1, j + 1, fmt_vec(v)));
                }
            }
        }
        out.lines.push(format!("antisymmetry residual {asym:e}"));
        out.results = results;
        return Ok(());
    }
    // no group cochain: check that D2 of gamma gives back the algebra cocycle
    let form = equivariant_form(doc)?;
    let q = doc.options.quad_order;
    let mut pairs = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let r = gamma_recovers_omega(&form, &basis(i), &basis(j), h, q)?;
            worst = worst.max(r);
            out.lines.push(format!("|D2 gamma(e{}, e{}) - omega| = {r:e}", i + 1, j + 1));
            pairs.push(json!({"pair": [i, j], "residual": r}));
        }
    }
    let ok = worst < doc.options.fd_tol;
    if !ok {
        out.warnings.push(format!("recovery residual {worst:e} exceeds fd_tol {:e}", doc.options.fd_tol));
    }
    out.results = json!({
        "source": "gamma",
        "fd_step": h,
        "quad_order": q,
        "pairs": pairs,
        "max_residual": worst,
        "recovers_omega": ok,
    });
    Ok(())
}

fn pi1_json(table: &Pi1CocycleTable) -> Value {
    let entries: Vec<Value> = table
        .entries
        .iter()
        .map(|e| {
            json!({
                "first": table.loops[e.first],
                "second": table.loops[e.second],
                "gamma": vec_json(&e.gamma),
                "gamma_swapped": vec_json(&e.gamma_swapped),
                "commutator": vec_json(&e.commutator),
                "reduced": vec_json(&e.reduced),
                "membership": membership_json(&e.membership),
            })
        })
        .collect();
    json!({"loops": table.loops, "entries": entries})
}

fn pi1_lines(table: &Pi1CocycleTable, lines: &mut Vec<String>) {
    for e in &table.entries {
        if e.first < e.second {
            lines.push(format!(
                "  [{}, {}]: commutator {} -> {}",
                table.loops[e.first],
                table.loops[e.second],
                fmt_vec(&e.commutator),
                e.membership.verdict
            ));
        }
    }
}

fn integrability(doc: &ProblemDocument, out: &mut Outcome) -> Result<(), CliError> {
    let form = equivariant_form(doc)?;
    let lattice = doc.require_lattice()?;
    let (q, tol) = (doc.options.quad_order, doc.options.tol_lat);
    let chosen: Vec<usize> = match &doc.args.cycles {
        Some(ix) => ix.clone(),
        None => (0..doc.cycles.len()).collect(),
    };
    let mut cycles = CycleSet::new();
    for i in chosen {
        let (name, chain) = &doc.cycles[i];
        cycles = cycles.with(name.clone(), chain.clone());
    }
    if cycles.is_empty() {
        out.warnings.push("no H_2 generators supplied; the verdict is vacuous".into());
    }
    let mut report = check_integrability(&form, &cycles, lattice, q, tol)?;
    for g in &report.generators {
        if g.error_estimate > tol {
            out.warnings.push(format!(
                "quadrature error estimate {:e} on '{}' inflated the lattice tolerance to {:e}",
                g.error_estimate, g.name, g.tolerance
            ));
        }
        if g.membership.verdict == LatticeVerdict::Indeterminate {
            out.warnings.push(format!("period of '{}' lies in the ambiguity band of the lattice test", g.name));
        }
    }
    if !doc.args.loops.is_empty() {
        let table = pi1_cocycle(&form, &doc.args.loops, lattice, q, tol)?;
        report = report.with_pi1(table);
    }
    out.lines.extend(report.to_string().lines().map(str::to_string));
    let generators: Vec<Value> = report
        .generators
        .iter()
        .map(|g| {
            json!({
                "name": g.name,
                "period": vec_json(&g.period),
                "error_estimate": g.error_estimate,
                "tolerance": g.tolerance,
                "membership": membership_json(&g.membership),
            })
        })
        .collect();
    let mut results = json!({
        "verdict": report.verdict.to_string(),
        "quad_order": report.quad_order,
        "assumption": report.assumption,
        "generators": generators,
    });
    if let Some(t) = &report.pi1 {
        results["pi1"] = pi1_json(t);
    }
    out.results = results;
    if report.verdict == Verdict::Indeterminate {
        out.exit_code = EXIT_INDETERMINATE;
    }
    Ok(())
}

fn pi1(doc: &ProblemDocument, out: &mut Outcome) -> Result<(), CliError> {
    let form = equivariant_form(doc)?;
    let lattice = doc.require_lattice()?;
    if doc.args.loops.is_empty() {
        return Err(CliError::Unresolved("pi1 needs args.loops or args.lattice_loops".into()));
    }
    let (q, tol) = (doc.options.quad_order, doc.options.tol_lat);
    let table = pi1_cocycle(&form, &doc.args.loops, lattice, q, tol)?;
    out.lines.push(format!("commutator table over {} loop(s), quadrature order {q}:", table.loops.len()));
    pi1_lines(&table, &mut out.lines);
    if table.entries.iter().any(|e| e.membership.verdict == LatticeVerdict::Indeterminate) {
        out.warnings.push("some commutators lie in the ambiguity band of the lattice test".into());
        out.exit_code = EXIT_INDETERMINATE;
    }
    out.results = pi1_json(&table);
    Ok(())
}
