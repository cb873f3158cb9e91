//! Problem documents: JSON text in, resolved library objects out.
//!
//! Parsing happens in two stages. Serde turns the text into the raw section
//! structs below (syntax and schema errors carry line and column), then
//! [`resolve`] builds library objects, compiles expressions and cross-checks
//! every dimension before anything is dispatched.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::sync::Arc;

use clap::ValueEnum;
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use abext::algebra::{GroupAction, LatticeDesc, LieAlgebraDesc, ModuleActionDesc, DEFAULT_TOL_ALG, DEFAULT_TOL_LAT};
use abext::cohomology::{Cochain, GroupCochainFn};
use abext::extensions::DEFAULT_EQUIV_TOL;
use abext::geometry::group::quaternion_left;
use abext::geometry::{
    Domain, GroupPath, MatrixGroupDesc, Patch, Surface2Chain, DEFAULT_FD_STEP, DEFAULT_FD_TOL, DEFAULT_QUAD_ORDER,
};
use abext::integrability::torus_lattice_loop;

use crate::error::CliError;
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Validate,
    Cohomology,
    Extend,
    Equivalence,
    Gamma,
    D2,
    CheckIntegrability,
    Pi1,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Validate => "validate",
            Task::Cohomology => "cohomology",
            Task::Extend => "extend",
            Task::Equivalence => "equivalence",
            Task::Gamma => "gamma",
            Task::D2 => "d2",
            Task::CheckIntegrability => "check-integrability",
            Task::Pi1 => "pi1",
        }
    }
}

// ---------------------------------------------------------------------------
// Raw sections, exactly as written in the document.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    task: Option<Task>,
    description: Option<String>,
    expected_exit: Option<i32>,
    algebra: Option<RawAlgebra>,
    module: Option<RawModule>,
    lattice: Option<RawLattice>,
    group: Option<RawGroup>,
    cocycle: Option<RawCochain>,
    cocycle2: Option<RawCochain>,
    group_cocycle: Option<RawGroupCochain>,
    #[serde(default)]
    paths: BTreeMap<String, RawPath>,
    #[serde(default)]
    cycles: Vec<RawCycle>,
    #[serde(default)]
    args: RawArgs,
    #[serde(default)]
    options: RawOptions,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebra {
    preset: Option<String>,
    /// Dimension for the `abelian` preset, or of a custom algebra.
    dim: Option<usize>,
    labels: Option<Vec<String>>,
    /// Sparse `[i, j, k, value]` entries meaning `[e_i, e_j] = value e_k + ...`.
    brackets: Option<Vec<(usize, usize, usize, f64)>>,
    /// Dense `c[i][j][k]`.
    constants: Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModule {
    preset: Option<String>,
    dim: Option<usize>,
    /// One row-major matrix per algebra basis vector.
    rho: Option<Vec<Vec<Vec<f64>>>>,
    group_action: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    generators: Option<Vec<Vec<f64>>>,
    /// `scale * Z^m`.
    scale: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    preset: Option<String>,
    n: Option<usize>,
    name: Option<String>,
    /// Row-major basis matrices of the realized algebra.
    basis: Option<Vec<Vec<Vec<f64>>>>,
    membership_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCochain {
    degree: Option<usize>,
    entries: Option<Vec<RawEntry>>,
    components: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    at: Vec<usize>,
    value: ScalarOrVector,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScalarOrVector {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ScalarOrVector {
    fn into_vec(self) -> Vec<f64> {
        match self {
            ScalarOrVector::Scalar(x) => vec![x],
            ScalarOrVector::Vector(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroupCochain {
    degree: Option<usize>,
    components: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    /// Algebra coordinates as expressions in `t`, mapped through `exp`.
    log: Option<Vec<String>>,
    /// Matrix entries as expressions in `t`.
    matrix: Option<Vec<Vec<String>>>,
    /// `t -> exp(t m)` for an integer vector `m`.
    lattice: Option<Vec<i64>>,
    /// `t -> exp(t X)`.
    direction: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCycle {
    name: String,
    preset: Option<String>,
    axes: Option<(usize, usize)>,
    patches: Option<Vec<RawPatch>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPatch {
    domain: Option<String>,
    coefficient: Option<i64>,
    log: Option<Vec<String>>,
    matrix: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArgs {
    degree: Option<usize>,
    paths: Option<Vec<String>>,
    x: Option<Vec<f64>>,
    y: Option<Vec<f64>>,
    cycles: Option<Vec<String>>,
    loops: Option<Vec<String>>,
    lattice_loops: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    quad_order: Option<usize>,
    tol_alg: Option<f64>,
    tol_lat: Option<f64>,
    equiv_tol: Option<f64>,
    fd_step: Option<f64>,
    fd_tol: Option<f64>,
}

// ---------------------------------------------------------------------------
// Resolved document.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub quad_order: usize,
    pub tol_alg: f64,
    pub tol_lat: f64,
    pub equiv_tol: f64,
    pub fd_step: f64,
    pub fd_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            quad_order: DEFAULT_QUAD_ORDER,
            tol_alg: DEFAULT_TOL_ALG,
            tol_lat: DEFAULT_TOL_LAT,
            equiv_tol: DEFAULT_EQUIV_TOL,
            fd_step: DEFAULT_FD_STEP,
            fd_tol: DEFAULT_FD_TOL,
        }
    }
}

/// Command-line overrides applied on top of the document.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub task: Option<Task>,
    pub quad_order: Option<usize>,
    /// Replaces the tolerance that decides the task's outcome.
    pub tol: Option<f64>,
    pub fd_step: Option<f64>,
}

impl Options {
    /// The tolerance `--tol` replaces for `task`.
    pub fn primary_tol_mut(&mut self, task: Task) -> &mut f64 {
        match task {
            Task::Validate | Task::Cohomology | Task::Extend => &mut self.tol_alg,
            Task::Equivalence => &mut self.equiv_tol,
            Task::D2 => &mut self.fd_tol,
            Task::Gamma | Task::CheckIntegrability | Task::Pi1 => &mut self.tol_lat,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Args {
    pub degree: Option<usize>,
    /// Indices into [`ProblemDocument::paths`].
    pub gamma_paths: Option<(usize, usize)>,
    pub x: Option<DVector<f64>>,
    pub y: Option<DVector<f64>>,
    /// Indices into [`ProblemDocument::cycles`]; all cycles when absent.
    pub cycles: Option<Vec<usize>>,
    /// Named loops for the pi_1 table, from `loops` and `lattice_loops`.
    pub loops: Vec<(String, GroupPath)>,
}

#[derive(Debug, Clone)]
pub struct ProblemDocument {
    pub task: Option<Task>,
    pub description: Option<String>,
    pub expected_exit: Option<i32>,
    pub algebra: Option<LieAlgebraDesc>,
    /// Present whenever `algebra` is; trivial `R` unless the document says otherwise.
    pub module: Option<ModuleActionDesc>,
    pub lattice: Option<LatticeDesc>,
    pub group: Option<MatrixGroupDesc>,
    pub cocycle: Option<Cochain>,
    pub cocycle2: Option<Cochain>,
    pub group_cocycle: Option<GroupCochainFn>,
    pub paths: Vec<(String, GroupPath)>,
    pub cycles: Vec<(String, Surface2Chain)>,
    pub args: Args,
    pub options: Options,
    /// Compact JSON with sorted keys; the basis of the inputs digest.
    pub canonical: String,
}

impl ProblemDocument {
    pub fn apply(&mut self, ov: &Overrides) -> Result<(), CliError> {
        if let Some(task) = ov.task {
            self.task = Some(task);
        }
        if let Some(q) = ov.quad_order {
            if q == 0 {
                return Err(CliError::Invalid("quadrature order must be positive".into()));
            }
            self.options.quad_order = q;
        }
        if let Some(h) = ov.fd_step {
            if h.is_nan() || h <= 0.0 {
                return Err(CliError::Invalid("finite-difference step must be positive".into()));
            }
            self.options.fd_step = h;
        }
        if let Some(tol) = ov.tol {
            if tol.is_nan() || tol <= 0.0 {
                return Err(CliError::Invalid("tolerance must be positive".into()));
            }
            let task = self.task.ok_or_else(|| CliError::Unresolved("--tol needs a task".into()))?;
            *self.options.primary_tol_mut(task) = tol;
        }
        Ok(())
    }

    pub fn require_algebra(&self) -> Result<(&LieAlgebraDesc, &ModuleActionDesc), CliError> {
        match (&self.algebra, &self.module) {
            (Some(a), Some(m)) => Ok((a, m)),
            _ => Err(CliError::Unresolved("this task needs an 'algebra' or 'group' section".into())),
        }
    }

    pub fn require_group(&self) -> Result<&MatrixGroupDesc, CliError> {
        self.group.as_ref().ok_or_else(|| CliError::Unresolved("this task needs a 'group' section".into()))
    }

    pub fn require_cocycle(&self) -> Result<&Cochain, CliError> {
        self.cocycle.as_ref().ok_or_else(|| CliError::Unresolved("this task needs a 'cocycle' section".into()))
    }

    pub fn require_lattice(&self) -> Result<&LatticeDesc, CliError> {
        self.lattice.as_ref().ok_or_else(|| CliError::Unresolved("this task needs a 'lattice' section".into()))
    }
}

/// Parses and resolves a document.
pub fn parse_document(text: &str) -> Result<ProblemDocument, CliError> {
    let raw: RawDocument = serde_json::from_str(text)?;
    let value: serde_json::Value = serde_json::from_str(text)?;
    let canonical = serde_json::to_string(&value)?;
    resolve(raw, canonical)
}

fn shape(msg: impl Into<String>) -> CliError {
    CliError::Shape(msg.into())
}

fn unresolved(msg: impl Into<String>) -> CliError {
    CliError::Unresolved(msg.into())
}

fn resolve(raw: RawDocument, canonical: String) -> Result<ProblemDocument, CliError> {
    let group = raw.group.map(|g| resolve_group(g, raw.algebra.as_ref())).transpose()?;
    let algebra = match (&raw.algebra, &group) {
        (Some(a), _) => Some(resolve_algebra(a)?),
        (None, Some(g)) => Some(g.algebra().clone()),
        (None, None) => None,
    };
    if let (Some(alg), Some(g)) = (&algebra, &group) {
        if alg.dim() != g.dim() {
            return Err(shape(format!("algebra has dimension {}, group has dimension {}", alg.dim(), g.dim())));
        }
        let differs = alg.constants().iter().zip(g.algebra().constants()).any(|(a, b)| (a - b).abs() > 1e-12);
        if differs {
            return Err(shape("the algebra section disagrees with the group's structure constants"));
        }
    }

    let module_given = raw.module.is_some();
    let module = match (&algebra, raw.module) {
        (Some(alg), Some(m)) => Some(resolve_module(m, alg, group.as_ref())?),
        (Some(alg), None) => Some(ModuleActionDesc::trivial(alg.dim(), 1)),
        (None, Some(_)) => return Err(unresolved("'module' needs an 'algebra' or 'group' section")),
        (None, None) => None,
    };
    let coeff_dim = module.as_ref().map(|m| m.coeff_dim());

    let lattice = match raw.lattice {
        Some(l) => {
            let m = coeff_dim.ok_or_else(|| unresolved("'lattice' needs an 'algebra' or 'group' section"))?;
            Some(resolve_lattice(l, m)?)
        }
        None => None,
    };

    let cochain = |c: Option<RawCochain>, section: &str| -> Result<Option<Cochain>, CliError> {
        match (c, &algebra, coeff_dim) {
            (None, _, _) => Ok(None),
            (Some(c), Some(alg), Some(m)) => resolve_cochain(c, alg.dim(), m, section).map(Some),
            (Some(_), _, _) => Err(unresolved(format!("'{section}' needs an 'algebra' or 'group' section"))),
        }
    };
    let cocycle = cochain(raw.cocycle, "cocycle")?;
    let cocycle2 = cochain(raw.cocycle2, "cocycle2")?;

    let group_cocycle = match raw.group_cocycle {
        Some(gc) => {
            let g = group.as_ref().ok_or_else(|| unresolved("'group_cocycle' needs a 'group' section"))?;
            let f = resolve_group_cochain(gc, g)?;
            if let (true, Some(m)) = (module_given, coeff_dim) {
                if m != f.coeff_dim() {
                    return Err(shape(format!(
                        "group_cocycle has {} components, the module has dimension {m}",
                        f.coeff_dim()
                    )));
                }
            }
            Some(f)
        }
        None => None,
    };

    let mut paths = Vec::with_capacity(raw.paths.len());
    for (name, p) in raw.paths {
        let g = group.as_ref().ok_or_else(|| unresolved("'paths' need a 'group' section"))?;
        let path = resolve_path(p, g, &format!("paths.{name}"))?;
        paths.push((name, path));
    }

    let mut cycles = Vec::with_capacity(raw.cycles.len());
    let mut seen = BTreeSet::new();
    for (i, c) in raw.cycles.into_iter().enumerate() {
        let g = group.as_ref().ok_or_else(|| unresolved("'cycles' need a 'group' section"))?;
        if !seen.insert(c.name.clone()) {
            return Err(CliError::Invalid(format!("cycle name '{}' is used twice", c.name)));
        }
        let name = c.name.clone();
        cycles.push((name, resolve_cycle(c, g, i)?));
    }

    let args = resolve_args(raw.args, algebra.as_ref(), group.as_ref(), &paths, &cycles)?;
    let options = resolve_options(raw.options)?;

    Ok(ProblemDocument {
        task: raw.task,
        description: raw.description,
        expected_exit: raw.expected_exit,
        algebra,
        module,
        lattice,
        group,
        cocycle,
        cocycle2,
        group_cocycle,
        paths,
        cycles,
        args,
        options,
        canonical,
    })
}

fn algebra_preset(name: &str, dim: Option<usize>) -> Result<LieAlgebraDesc, CliError> {
    Ok(match name {
        "abelian" => LieAlgebraDesc::abelian(dim.ok_or_else(|| shape("the abelian preset needs 'dim'"))?),
        "heisenberg3" | "heis3" => LieAlgebraDesc::heisenberg3(),
        "sl2" => LieAlgebraDesc::sl2(),
        "so3" => LieAlgebraDesc::so3(),
        "su2" => LieAlgebraDesc::su2_quaternion(),
        other => {
            return Err(unresolved(format!(
                "unknown algebra preset '{other}' (known: abelian, heisenberg3, sl2, so3, su2)"
            )))
        }
    })
}

fn resolve_algebra(raw: &RawAlgebra) -> Result<LieAlgebraDesc, CliError> {
    if let Some(p) = &raw.preset {
        if raw.brackets.is_some() || raw.constants.is_some() {
            return Err(CliError::Invalid("an algebra preset cannot also list structure constants".into()));
        }
        let alg = algebra_preset(p, raw.dim)?;
        if let Some(d) = raw.dim {
            if d != alg.dim() {
                return Err(shape(format!("preset '{p}' has dimension {}, 'dim' says {d}", alg.dim())));
            }
        }
        return match &raw.labels {
            Some(l) if l.len() != alg.dim() => {
                Err(shape(format!("{} labels for a {}-dimensional algebra", l.len(), alg.dim())))
            }
            Some(l) => Ok(LieAlgebraDesc::new(l.clone(), alg.constants().to_vec())?),
            None => Ok(alg),
        };
    }
    let n = match (raw.dim, &raw.labels) {
        (Some(d), Some(l)) if d != l.len() => {
            return Err(shape(format!("'dim' is {d} but {} labels are given", l.len())))
        }
        (Some(d), _) => d,
        (None, Some(l)) => l.len(),
        (None, None) => {
            raw.constants.as_ref().map(|c| c.len()).ok_or_else(|| shape("a custom algebra needs 'dim' or 'labels'"))?
        }
    };
    let labels = raw.labels.clone().unwrap_or_else(|| LieAlgebraDesc::default_labels(n));
    match (&raw.brackets, &raw.constants) {
        (Some(_), Some(_)) => Err(CliError::Invalid("give either 'brackets' or 'constants', not both".into())),
        (_, Some(c)) => {
            if c.len() != n || c.iter().any(|p| p.len() != n || p.iter().any(|r| r.len() != n)) {
                return Err(shape(format!("'constants' must be a {n} x {n} x {n} array")));
            }
            Ok(LieAlgebraDesc::from_nested(labels, c)?)
        }
        (brackets, None) => {
            let entries = brackets.as_deref().unwrap_or(&[]);
            Ok(LieAlgebraDesc::new(labels, complete_brackets(n, entries)?)?)
        }
    }
}

/// Dense constants from sparse entries. Every entry is kept as written and
/// its antisymmetric partner is filled in unless the document lists that
/// partner itself, so inconsistent input stays visible to validation.
fn complete_brackets(n: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Vec<f64>, CliError> {
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut c = vec![0.0; n * n * n];
    let mut explicit = BTreeSet::new();
    for (pos, &(i, j, k, v)) in entries.iter().enumerate() {
        if i >= n || j >= n || k >= n {
            return Err(shape(format!("brackets[{pos}] = [{i}, {j}, {k}, ...] is out of range for dimension {n}")));
        }
        c[idx(i, j, k)] = v;
        explicit.insert((i, j, k));
    }
    for &(i, j, k, v) in entries {
        if i != j && !explicit.contains(&(j, i, k)) {
            c[idx(j, i, k)] = -v;
        }
    }
    Ok(c)
}

fn row_major(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CliError> {
    let r = rows.len();
    let c = rows.first().map(|x| x.len()).unwrap_or(0);
    if rows.iter().any(|x| x.len() != c) {
        return Err(shape(format!("{what} has rows of different lengths")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn resolve_group(raw: RawGroup, algebra: Option<&RawAlgebra>) -> Result<MatrixGroupDesc, CliError> {
    let group = match (&raw.preset, &raw.basis) {
        (Some(_), Some(_)) => {
            return Err(CliError::Invalid("give either a group 'preset' or a 'basis', not both".into()))
        }
        (Some(p), None) => {
            let n = || raw.n.ok_or_else(|| shape(format!("group preset '{p}' needs 'n'")));
            match p.as_str() {
                "torus" => MatrixGroupDesc::torus(n()?),
                "translations" => MatrixGroupDesc::translations(n()?),
                "su2" => MatrixGroupDesc::su2(),
                "so3" => MatrixGroupDesc::so3(),
                "heisenberg" => MatrixGroupDesc::heisenberg(),
                other => {
                    return Err(unresolved(format!(
                        "unknown group preset '{other}' (known: torus, translations, su2, so3, heisenberg)"
                    )))
                }
            }
        }
        (None, Some(basis)) => {
            let alg =
                algebra.ok_or_else(|| unresolved("a group given by basis matrices needs an 'algebra' section"))?;
            let alg = resolve_algebra(alg)?;
            if basis.len() != alg.dim() {
                return Err(shape(format!("{} basis matrices for a {}-dimensional algebra", basis.len(), alg.dim())));
            }
            let mats = basis
                .iter()
                .enumerate()
                .map(|(i, b)| row_major(b, &format!("group.basis[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let d = mats.first().map(|m| m.nrows()).unwrap_or(0);
            if let Some(i) = mats.iter().position(|m| m.shape() != (d, d)) {
                return Err(shape(format!("group.basis[{i}] is not a {d} x {d} matrix")));
            }
            MatrixGroupDesc::new(raw.name.clone().unwrap_or_else(|| "G".into()), alg, mats)?
        }
        (None, None) => return Err(shape("the group section needs a 'preset' or a 'basis'")),
    };
    Ok(match raw.membership_tol {
        Some(t) if t > 0.0 => group.with_membership_tol(t),
        Some(_) => return Err(CliError::Invalid("membership_tol must be positive".into())),
        None => group,
    })
}

fn resolve_module(
    raw: RawModule,
    alg: &LieAlgebraDesc,
    group: Option<&MatrixGroupDesc>,
) -> Result<ModuleActionDesc, CliError> {
    let n = alg.dim();
    let base = match raw.preset.as_deref() {
        Some("adjoint") => {
            if raw.rho.is_some() {
                return Err(CliError::Invalid("the adjoint preset fixes rho; drop 'rho'".into()));
            }
            if let Some(d) = raw.dim {
                if d != n {
                    return Err(shape(format!("the adjoint module has dimension {n}, 'dim' says {d}")));
                }
            }
            ModuleActionDesc::adjoint(alg)
        }
        Some("trivial") | None if raw.rho.is_none() => ModuleActionDesc::trivial(n, raw.dim.unwrap_or(1)),
        None => {
            let rho = raw.rho.as_ref().expect("checked above");
            if rho.len() != n {
                return Err(shape(format!("module has {} rho matrices, the algebra has dimension {n}", rho.len())));
            }
            let mats = rho
                .iter()
                .enumerate()
                .map(|(i, r)| row_major(r, &format!("module.rho[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let m = raw.dim.unwrap_or_else(|| mats.first().map(|r| r.nrows()).unwrap_or(1));
            if let Some(i) = mats.iter().position(|r| r.shape() != (m, m)) {
                return Err(shape(format!("module.rho[{i}] is not a {m} x {m} matrix")));
            }
            ModuleActionDesc::new(m, mats, GroupAction::Trivial)?
        }
        Some("trivial") => return Err(CliError::Invalid("the trivial preset has rho = 0; drop 'rho'".into())),
        Some(other) => return Err(unresolved(format!("unknown module preset '{other}' (known: trivial, adjoint)"))),
    };
    let action = match raw.group_action.as_deref() {
        None if base.rho().iter().all(|r| r.iter().all(|&x| x == 0.0)) => None,
        None | Some("exp_rho") => group.map(|g| g.exp_rho_action(base.rho())),
        Some("adjoint") => {
            let g = group.ok_or_else(|| unresolved("group_action 'adjoint' needs a 'group' section"))?;
            if base.coeff_dim() != n {
                return Err(shape("group_action 'adjoint' needs a module of the algebra's dimension"));
            }
            Some(g.adjoint_action())
        }
        Some("trivial") => None,
        Some(other) => {
            return Err(unresolved(format!("unknown group_action '{other}' (known: trivial, exp_rho, adjoint)")))
        }
    };
    if raw.group_action.as_deref() == Some("exp_rho") && group.is_none() {
        return Err(unresolved("group_action 'exp_rho' needs a 'group' section"));
    }
    Ok(match action {
        Some(a) => base.with_group_action(a),
        None => base,
    })
}

fn resolve_lattice(raw: RawLattice, m: usize) -> Result<LatticeDesc, CliError> {
    match (raw.generators, raw.scale) {
        (Some(_), Some(_)) => Err(CliError::Invalid("give either lattice 'generators' or 'scale', not both".into())),
        (Some(gens), None) if gens.is_empty() => Ok(LatticeDesc::zero(m)),
        (Some(gens), None) => {
            if let Some(i) = gens.iter().position(|g| g.len() != m) {
                return Err(shape(format!(
                    "lattice.generators[{i}] has length {}, the module has dimension {m}",
                    gens[i].len()
                )));
            }
            Ok(LatticeDesc::new(m, gens.into_iter().map(DVector::from_vec).collect())?)
        }
        (None, Some(scale)) => Ok(LatticeDesc::scaled_integers(m, scale)?),
        (None, None) => Err(shape("the lattice section needs 'generators' or 'scale'")),
    }
}

fn resolve_cochain(raw: RawCochain, n: usize, m: usize, section: &str) -> Result<Cochain, CliError> {
    let degree = raw.degree.unwrap_or(2);
    if degree > n {
        return Err(shape(format!("{section} has degree {degree} on a {n}-dimensional algebra")));
    }
    match (raw.entries, raw.components) {
        (Some(_), Some(_)) => Err(CliError::Invalid(format!("{section}: give either 'entries' or 'components'"))),
        (None, Some(c)) => {
            let want = abext::cohomology::binomial(n, degree) * m;
            if c.len() != want {
                return Err(shape(format!("{section}.components has length {}, expected {want}", c.len())));
            }
            Ok(Cochain::from_components(degree, n, m, DVector::from_vec(c))?)
        }
        (entries, None) => {
            let mut out = Vec::new();
            for (pos, e) in entries.unwrap_or_default().into_iter().enumerate() {
                if e.at.len() != degree || e.at.iter().any(|&i| i >= n) {
                    return Err(shape(format!(
                        "{section}.entries[{pos}].at = {:?} is not a {degree}-tuple of indices below {n}",
                        e.at
                    )));
                }
                let value = e.value.into_vec();
                if value.len() != m {
                    return Err(shape(format!(
                        "{section}.entries[{pos}].value has length {}, the module has dimension {m}",
                        value.len()
                    )));
                }
                out.push((e.at, DVector::from_vec(value)));
            }
            Ok(Cochain::from_entries(degree, n, m, &out)?)
        }
    }
}

fn compile(src: &str, vars: &[&str], location: &str) -> Result<Expr, CliError> {
    Expr::parse(src, vars).map_err(|e| CliError::Expression {
        location: location.to_string(),
        column: e.column,
        message: e.message,
    })
}

const ARG_LETTERS: [&str; 4] = ["x", "y", "z", "w"];

fn resolve_group_cochain(raw: RawGroupCochain, group: &MatrixGroupDesc) -> Result<GroupCochainFn, CliError> {
    let degree = raw.degree.unwrap_or(2);
    if degree > ARG_LETTERS.len() {
        return Err(shape(format!("group cochains of degree {degree} are not supported (at most 4)")));
    }
    if raw.components.is_empty() {
        return Err(shape("group_cocycle needs at least one component"));
    }
    let n = group.dim();
    let names: Vec<String> =
        ARG_LETTERS[..degree].iter().flat_map(|l| (1..=n).map(move |i| format!("{l}{i}"))).collect();
    let vars: Vec<&str> = names.iter().map(String::as_str).collect();
    let exprs = raw
        .components
        .iter()
        .enumerate()
        .map(|(a, src)| compile(src, &vars, &format!("group_cocycle.components[{a}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let m = exprs.len();
    let g = group.clone();
    Ok(GroupCochainFn::new(degree, m, move |args: &[DMatrix<f64>]| {
        let mut vals = Vec::with_capacity(degree * n);
        for a in args {
            vals.extend(g.log(a)?.iter().copied());
        }
        Ok(DVector::from_iterator(m, exprs.iter().map(|e| e.eval(&vals))))
    }))
}

type MatrixMap = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Shared between paths (`vars = [t]`) and patches (`vars = [t, s]`).
fn compile_map(
    log: Option<Vec<String>>,
    matrix: Option<Vec<Vec<String>>>,
    group: &MatrixGroupDesc,
    vars: &[&str],
    location: &str,
) -> Result<MatrixMap, CliError> {
    match (log, matrix) {
        (Some(_), Some(_)) => Err(CliError::Invalid(format!("{location}: give either 'log' or 'matrix'"))),
        (Some(log), None) => {
            if log.len() != group.dim() {
                return Err(shape(format!(
                    "{location}.log has {} coordinates, the group has dimension {}",
                    log.len(),
                    group.dim()
                )));
            }
            let exprs = log
                .iter()
                .enumerate()
                .map(|(i, src)| compile(src, vars, &format!("{location}.log[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let g = group.clone();
            Ok(Arc::new(move |v: &[f64]| g.exp(&DVector::from_iterator(exprs.len(), exprs.iter().map(|e| e.eval(v))))))
        }
        (None, Some(rows)) => {
            let d = group.embed_dim();
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(shape(format!("{location}.matrix must be {d} x {d} to match the group embedding")));
            }
            let mut exprs = Vec::with_capacity(d * d);
            for (i, row) in rows.iter().enumerate() {
                for (j, src) in row.iter().enumerate() {
                    exprs.push(compile(src, vars, &format!("{location}.matrix[{i}][{j}]"))?);
                }
            }
            Ok(Arc::new(move |v: &[f64]| DMatrix::from_fn(d, d, |i, j| exprs[i * d + j].eval(v))))
        }
        (None, None) => Err(shape(format!("{location} needs 'log' or 'matrix'"))),
    }
}

fn resolve_path(raw: RawPath, group: &MatrixGroupDesc, location: &str) -> Result<GroupPath, CliError> {
    let given = [raw.log.is_some(), raw.matrix.is_some(), raw.lattice.is_some(), raw.direction.is_some()];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(CliError::Invalid(format!(
            "{location} needs exactly one of 'log', 'matrix', 'lattice', 'direction'"
        )));
    }
    if let Some(m) = raw.lattice {
        if m.len() != group.dim() {
            return Err(shape(format!(
                "{location}.lattice has length {}, the group has dimension {}",
                m.len(),
                group.dim()
            )));
        }
        return Ok(torus_lattice_loop(group, &m)?);
    }
    if let Some(x) = raw.direction {
        if x.len() != group.dim() {
            return Err(shape(format!(
                "{location}.direction has length {}, the group has dimension {}",
                x.len(),
                group.dim()
            )));
        }
        return Ok(GroupPath::one_parameter(group, &DVector::from_vec(x)));
    }
    let map = compile_map(raw.log, raw.matrix, group, &["t"], location)?;
    Ok(GroupPath::new(move |t| map(&[t])))
}

fn resolve_cycle(raw: RawCycle, group: &MatrixGroupDesc, pos: usize) -> Result<Surface2Chain, CliError> {
    let location = format!("cycles[{pos}] ('{}')", raw.name);
    match (raw.preset.as_deref(), raw.patches) {
        (Some(_), Some(_)) => Err(CliError::Invalid(format!("{location}: give either 'preset' or 'patches'"))),
        (Some("torus_plane"), None) => {
            let (i, j) = raw.axes.ok_or_else(|| shape(format!("{location}: torus_plane needs 'axes'")))?;
            let n = group.dim();
            if i >= n || j >= n || i == j {
                return Err(shape(format!("{location}: axes ({i}, {j}) must be two distinct indices below {n}")));
            }
            let g = group.clone();
            Ok(Surface2Chain::single(Patch::new(Domain::Square, move |t, s| {
                let mut x = DVector::zeros(n);
                x[i] = t;
                x[j] = s;
                g.exp(&x)
            })))
        }
        (Some("su2_sphere"), None) => {
            if group.embed_dim() != 4 || group.dim() != 3 {
                return Err(shape(format!("{location}: su2_sphere lives in the 4 x 4 realization of SU(2)")));
            }
            Ok(Surface2Chain::single(Patch::new(Domain::Square, |t, s| {
                let (th, ph) = (PI * t, 2.0 * PI * s);
                quaternion_left(0.0, th.cos(), th.sin() * ph.cos(), th.sin() * ph.sin())
            })))
        }
        (Some(other), None) => {
            Err(unresolved(format!("{location}: unknown cycle preset '{other}' (known: torus_plane, su2_sphere)")))
        }
        (None, Some(patches)) => {
            let mut chain = Surface2Chain::new();
            for (k, p) in patches.into_iter().enumerate() {
                let here = format!("{location}.patches[{k}]");
                let domain = match p.domain.as_deref() {
                    None | Some("square") => Domain::Square,
                    Some("simplex") => Domain::Simplex,
                    Some(other) => {
                        return Err(unresolved(format!("{here}: unknown domain '{other}' (known: square, simplex)")))
                    }
                };
                let map = compile_map(p.log, p.matrix, group, &["t", "s"], &here)?;
                chain.push(p.coefficient.unwrap_or(1), Patch::new(domain, move |t, s| map(&[t, s])));
            }
            Ok(chain)
        }
        (None, None) => Err(shape(format!("{location} needs 'preset' or 'patches'"))),
    }
}

fn resolve_args(
    raw: RawArgs,
    algebra: Option<&LieAlgebraDesc>,
    group: Option<&MatrixGroupDesc>,
    paths: &[(String, GroupPath)],
    cycles: &[(String, Surface2Chain)],
) -> Result<Args, CliError> {
    let path_index = |name: &str| {
        paths.iter().position(|(n, _)| n == name).ok_or_else(|| unresolved(format!("no path named '{name}'")))
    };
    let gamma_paths = match raw.paths {
        Some(p) if p.len() == 2 => Some((path_index(&p[0])?, path_index(&p[1])?)),
        Some(p) => return Err(shape(format!("args.paths names {} paths, gamma takes two", p.len()))),
        None => None,
    };
    let vector = |v: Option<Vec<f64>>, which: &str| -> Result<Option<DVector<f64>>, CliError> {
        match v {
            None => Ok(None),
            Some(v) => {
                let n = algebra.ok_or_else(|| unresolved(format!("args.{which} needs an algebra")))?.dim();
                if v.len() != n {
                    return Err(shape(format!("args.{which} has length {}, the algebra has dimension {n}", v.len())));
                }
                Ok(Some(DVector::from_vec(v)))
            }
        }
    };
    let x = vector(raw.x, "x")?;
    let y = vector(raw.y, "y")?;
    if x.is_some() != y.is_some() {
        return Err(CliError::Invalid("args.x and args.y go together".into()));
    }
    let cycles = match raw.cycles {
        Some(names) => Some(
            names
                .iter()
                .map(|name| {
                    cycles
                        .iter()
                        .position(|(n, _)| n == name)
                        .ok_or_else(|| unresolved(format!("no cycle named '{name}'")))
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let mut loops = Vec::new();
    for name in raw.loops.unwrap_or_default() {
        let i = path_index(&name)?;
        loops.push((name, paths[i].1.clone()));
    }
    for m in raw.lattice_loops.unwrap_or_default() {
        let g = group.ok_or_else(|| unresolved("args.lattice_loops need a 'group' section"))?;
        if m.len() != g.dim() {
            return Err(shape(format!(
                "lattice loop {m:?} has length {}, the group has dimension {}",
                m.len(),
                g.dim()
            )));
        }
        let label = format!("({})", m.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","));
        loops.push((label, torus_lattice_loop(g, &m)?));
    }
    Ok(Args { degree: raw.degree, gamma_paths, x, y, cycles, loops })
}

fn resolve_options(raw: RawOptions) -> Result<Options, CliError> {
    let d = Options::default();
    let positive = |v: Option<f64>, default: f64, name: &str| match v {
        Some(x) if x > 0.0 => Ok(x),
        Some(_) => Err(CliError::Invalid(format!("options.{name} must be positive"))),
        None => Ok(default),
    };
    let quad_order = match raw.quad_order {
        Some(0) => return Err(CliError::Invalid("options.quad_order must be positive".into())),
        Some(q) => q,
        None => d.quad_order,
    };
    Ok(Options {
        quad_order,
        tol_alg: positive(raw.tol_alg, d.tol_alg, "tol_alg")?,
        tol_lat: positive(raw.tol_lat, d.tol_lat, "tol_lat")?,
        equiv_tol: positive(raw.equiv_tol, d.equiv_tol, "equiv_tol")?,
        fd_step: positive(raw.fd_step, d.fd_step, "fd_step")?,
        fd_tol: positive(raw.fd_tol, d.fd_tol, "fd_tol")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antisymmetric_partner_is_filled() {
        let doc = parse_document(r#"{"algebra": {"dim": 3, "brackets": [[0, 1, 2, 1.0]]}}"#).unwrap();
        let alg = doc.algebra.unwrap();
        assert_eq!(alg.c(0, 1, 2), 1.0);
        assert_eq!(alg.c(1, 0, 2), -1.0);
    }

    #[test]
    fn explicit_partner_is_kept_as_written() {
        let doc = parse_document(r#"{"algebra": {"dim": 2, "brackets": [[0, 1, 0, 1.0], [1, 0, 0, 3.0]]}}"#).unwrap();
        let alg = doc.algebra.unwrap();
        assert_eq!(alg.c(1, 0, 0), 3.0);
    }

    #[test]
    fn json_errors_have_positions() {
        let err = parse_document("{\n  \"task\": \"validate\",\n  \"algebra\": {\"dim\": 2,}\n}").unwrap_err();
        match err {
            CliError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("expected a syntax error, got {other:?}"),
        }
        assert!(matches!(parse_document(r#"{"tsak": "validate"}"#), Err(CliError::Syntax { .. })));
        assert!(matches!(parse_document(r#"{"task": "frobnicate"}"#), Err(CliError::Syntax { .. })));
    }

    #[test]
    fn error_classes_are_distinct() {
        let unresolved = parse_document(r#"{"algebra": {"preset": "e8"}}"#).unwrap_err();
        assert_eq!(unresolved.class(), "unresolved-reference");
        let shape = parse_document(r#"{"algebra": {"preset": "sl2"}, "module": {"rho": [[[0]], [[0]]]}}"#).unwrap_err();
        assert_eq!(shape.class(), "shape-mismatch");
        let expr = parse_document(r#"{"group": {"preset": "torus", "n": 1}, "paths": {"a": {"log": ["t + u"]}}}"#)
            .unwrap_err();
        assert_eq!(expr.class(), "syntax");
        assert!(expr.to_string().contains("paths.a.log[0]"), "{expr}");
    }

    #[test]
    fn references_resolve() {
        let err = parse_document(
            r#"{"group": {"preset": "torus", "n": 2}, "paths": {"a": {"lattice": [1, 0]}}, "args": {"paths": ["a", "b"]}}"#,
        )
        .unwrap_err();
        assert_eq!(err, CliError::Unresolved("no path named 'b'".into()));
        let err = parse_document(r#"{"cocycle": {"entries": []}}"#).unwrap_err();
        assert_eq!(err.class(), "unresolved-reference");
    }

    #[test]
    fn algebra_defaults_from_group() {
        let doc = parse_document(r#"{"group": {"preset": "su2"}}"#).unwrap();
        assert_eq!(doc.algebra.unwrap().dim(), 3);
        assert_eq!(doc.module.unwrap().coeff_dim(), 1);
        let err = parse_document(r#"{"group": {"preset": "su2"}, "algebra": {"preset": "sl2"}}"#).unwrap_err();
        assert_eq!(err.class(), "shape-mismatch");
    }

    #[test]
    fn canonical_form_ignores_layout() {
        let a = parse_document(r#"{"task":"validate","algebra":{"preset":"sl2"}}"#).unwrap();
        let b = parse_document("{\n \"algebra\" : { \"preset\": \"sl2\" },\n \"task\": \"validate\"\n}").unwrap();
        assert_eq!(a.canonical, b.canonical);
    }

    #[test]
    fn tol_override_targets_the_task() {
        let mut doc =
            parse_document(r#"{"task": "check-integrability", "group": {"preset": "torus", "n": 2}}"#).unwrap();
        doc.apply(&Overrides { tol: Some(1e-3), ..Default::default() }).unwrap();
        assert_eq!(doc.options.tol_lat, 1e-3);
        assert_eq!(doc.options.tol_alg, DEFAULT_TOL_ALG);
    }
}
