use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::document::{parse_document, Overrides};
use crate::error::{CliError, ErrorInfo};
use crate::run::run;

/// Version of the machine-readable report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Everything one invocation produces. Apart from `timing`, the report is a
/// pure function of the document text and the overrides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub task: Option<String>,
    pub inputs_digest: String,
    pub status: &'static str,
    pub exit_code: i32,
    pub results: Value,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub timing: Timing,
    #[serde(skip)]
    pub lines: Vec<String>,
}

fn status_of(code: i32) -> &'static str {
    match code {
        0 => "ok",
        2 => "input-error",
        3 => "rejected",
        4 => "indeterminate",
        _ => "error",
    }
}

/// SHA-256 over the canonical document plus the effective overrides; raw
/// bytes when the text is not valid JSON.
pub fn inputs_digest(text: &str, ov: &Overrides) -> String {
    let mut h = Sha256::new();
    match serde_json::from_str::<Value>(text).and_then(|v| serde_json::to_string(&v)) {
        Ok(canonical) => h.update(canonical.as_bytes()),
        Err(_) => h.update(text.as_bytes()),
    }
    let task = ov.task.map(|t| t.name());
    h.update(format!("\ntask={task:?};quad_order={:?};tol={:?};fd_step={:?}", ov.quad_order, ov.tol, ov.fd_step));
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Parses, resolves and runs one document.
pub fn execute(text: &str, ov: &Overrides) -> RunReport {
    let start = Instant::now();
    let digest = inputs_digest(text, ov);
    // echo the task even when the document fails to resolve
    let mut task = ov
        .task
        .map(|t| t.name().to_string())
        .or_else(|| serde_json::from_str::<Value>(text).ok()?.get("task")?.as_str().map(str::to_string));
    let outcome = parse_document(text).and_then(|mut doc| {
        doc.apply(ov)?;
        task = doc.task.map(|t| t.name().to_string());
        run(&doc)
    });
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(o) => RunReport {
            schema_version: SCHEMA_VERSION,
            task,
            inputs_digest: digest,
            status: status_of(o.exit_code),
            exit_code: o.exit_code,
            results: o.results,
            warnings: o.warnings,
            error: None,
            timing: Timing { elapsed_ms },
            lines: o.lines,
        },
        Err(e) => error_report(task, digest, &e, elapsed_ms),
    }
}

pub fn error_report(task: Option<String>, digest: String, e: &CliError, elapsed_ms: f64) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        task,
        inputs_digest: digest,
        status: status_of(e.exit_code()),
        exit_code: e.exit_code(),
        results: Value::Null,
        warnings: Vec::new(),
        error: Some(e.info()),
        timing: Timing { elapsed_ms },
        lines: Vec::new(),
    }
}

impl RunReport {
    pub fn to_machine(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "task: {}", self.task.as_deref().unwrap_or("(none)"));
        for line in &self.lines {
            let _ = writeln!(s, "{line}");
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error [{}]: {}", e.class, e.message);
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(s, "warnings:");
            for w in &self.warnings {
                let _ = writeln!(s, "  - {w}");
            }
        }
        let _ = writeln!(s, "status: {} (exit {})", self.status, self.exit_code);
        let _ = writeln!(s, "inputs digest: {}", self.inputs_digest);
        let _ = writeln!(s, "elapsed: {:.1} ms", self.timing.elapsed_ms);
        s
    }
}
