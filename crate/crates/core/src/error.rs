use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::diagram::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("diagram failed validation ({} error(s))", .0.errors.len())]
    Invalid(ValidationReport),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{id}` is not a {expected} node")]
    WrongKind { id: String, expected: &'static str },
    #[error("node `{node}` has no state labelled `{label}`")]
    UnknownLabel { node: String, label: String },
    #[error("state index {index} out of range for node `{node}`")]
    StateOutOfRange { node: String, index: usize },
    #[error("assignment is missing node(s): {}", .0.join(", "))]
    PartialAssignment(Vec<String>),
    #[error("query depends on decision `{0}` which has not been decided")]
    AcausalQuery(String),
    #[error("evidence has zero probability")]
    ZeroEvidence,
    #[error("joint enumeration of {size:.3e} entries exceeds the cap of {cap:.3e}")]
    JointTooLarge { size: f64, cap: f64 },
    #[error("policy has no choice for reachable information state {state} of `{decision}`")]
    IncompletePolicy { decision: String, state: String },
    #[error("policy does not match diagram: {0}")]
    PolicyMismatch(String),
    #[error("simulation needs at least one run")]
    EmptyRun,
    #[error("threshold {0} is outside (0, 1]")]
    BadThreshold(f64),
    #[error("observing `{variable}` before `{decision}` is not causally admissible")]
    AcausalInfo { variable: String, decision: String },
    #[error("consultation cost must be 0 when not consulting: {0}")]
    BadConsCost(String),
    #[error("invalid scenario configuration: {0}")]
    BadConfig(String),
    #[error("formula for `{node}` produced non-finite value {value}")]
    BadFormulaValue { node: String, value: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable upper-case code used in diagnostics and by the C interface.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "INVALID_DIAGRAM",
            Error::UnknownNode(_) => "UNKNOWN_NODE",
            Error::WrongKind { .. } => "WRONG_KIND",
            Error::UnknownLabel { .. } => "UNKNOWN_LABEL",
            Error::StateOutOfRange { .. } => "STATE_OUT_OF_RANGE",
            Error::PartialAssignment(_) => "PARTIAL_ASSIGNMENT",
            Error::AcausalQuery(_) => "ACAUSAL_QUERY",
            Error::ZeroEvidence => "ZERO_EVIDENCE",
            Error::JointTooLarge { .. } => "JOINT_TOO_LARGE",
            Error::IncompletePolicy { .. } => "INCOMPLETE_POLICY",
            Error::PolicyMismatch(_) => "POLICY_MISMATCH",
            Error::EmptyRun => "EMPTY_RUN",
            Error::BadThreshold(_) => "BAD_THRESHOLD",
            Error::AcausalInfo { .. } => "ACAUSAL_INFO",
            Error::BadConsCost(_) => "BAD_CONS_COST",
            Error::BadConfig(_) => "BAD_CONFIG",
            Error::BadFormulaValue { .. } => "BAD_FORMULA_VALUE",
            Error::Parse(_) => "PARSE_ERROR",
            Error::Io { .. } => "IO_ERROR",
        }
    }

    /// Process exit code for the command-line tool: 1 model error, 2 I/O or
    /// parse error, 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io { .. } => 2,
            Error::JointTooLarge { .. } => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.errors.is_empty() && self.warnings.is_empty() {
            return writeln!(f, "ok: no errors, no warnings");
        }
        for issue in &self.errors {
            writeln!(
                f,
                "error   {:<18} {:<14} {}",
                issue.code, issue.node, issue.message
            )?;
        }
        for issue in &self.warnings {
            writeln!(
                f,
                "warning {:<18} {:<14} {}",
                issue.code, issue.node, issue.message
            )?;
        }
        writeln!(
            f,
            "{} error(s), {} warning(s)",
            self.errors.len(),
            self.warnings.len()
        )
    }
}
