use std::fmt;

use serde::Serialize;

/// Exit status for input errors: bad syntax, unknown names, shape mismatches.
pub const EXIT_INPUT: i32 = 2;
/// Exit status when a computation refuses its input, e.g. a non-cocycle.
pub const EXIT_REJECTED: i32 = 3;
/// Exit status when a verdict falls inside the ambiguity band.
pub const EXIT_INDETERMINATE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed document text, reported at its line and column.
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// Malformed expression string; `column` is inside the expression.
    Expression {
        location: String,
        column: usize,
        message: String,
    },
    /// A name, section or preset that the document refers to does not exist.
    Unresolved(String),
    /// Sections exist but their sizes disagree.
    Shape(String),
    /// Input the computational layer refused as malformed.
    Invalid(String),
    /// A computation rejected well-formed input.
    Rejected(String),
    Io(String),
}

impl CliError {
    /// Stable machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Syntax { .. } | CliError::Expression { .. } => "syntax",
            CliError::Unresolved(_) => "unresolved-reference",
            CliError::Shape(_) => "shape-mismatch",
            CliError::Invalid(_) => "invalid-input",
            CliError::Rejected(_) => "rejected",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Rejected(_) => EXIT_REJECTED,
            _ => EXIT_INPUT,
        }
    }

    pub fn info(&self) -> ErrorInfo {
        let (line, column) = match self {
            CliError::Syntax { line, column, .. } => (Some(*line), Some(*column)),
            CliError::Expression { column, .. } => (None, Some(*column)),
            _ => (None, None),
        };
        ErrorInfo { class: self.class(), message: self.to_string(), line, column }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Syntax { line, column, message } => write!(f, "line {line}, column {column}: {message}"),
            CliError::Expression { location, column, message } => {
                write!(f, "{location}: expression column {column}: {message}")
            }
            CliError::Unresolved(m) => write!(f, "unresolved reference: {m}"),
            CliError::Shape(m) => write!(f, "shape mismatch: {m}"),
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Rejected(m) => write!(f, "rejected: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<abext::Error> for CliError {
    fn from(e: abext::Error) -> Self {
        match e {
            abext::Error::MalformedInput(_) | abext::Error::InvalidLattice(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Rejected(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        // serde appends " at line L column C"; keep the bare message
        let text = e.to_string();
        let message = match text.rfind(" at line ") {
            Some(cut) => text[..cut].to_string(),
            None => text,
        };
        CliError::Syntax { line: e.line(), column: e.column(), message }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub class: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}
