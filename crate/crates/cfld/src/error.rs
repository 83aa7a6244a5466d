//! Crate error types.

use thiserror::Error;

/// Errors produced by instance handling, solvers and exporters.
#[derive(Debug, Error)]
pub enum CfldError {
    /// Instance data violates a construction invariant.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A fractional point violates the relaxed feasible region.
    #[error("invalid fractional point: {0}")]
    InvalidPoint(String),

    /// A solution does not belong to the feasible set (one level per open
    /// facility, binary entries, matching dimensions).
    #[error("infeasible solution: {0}")]
    InfeasibleSolution(String),

    /// Instance file carries an unknown schema tag.
    #[error("unsupported schema version {found:?} (expected {expected:?})")]
    SchemaVersion { found: String, expected: String },

    /// Instance or model file could not be parsed.
    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Exhaustive enumeration would exceed the configured cap.
    #[error("instance too large for oracle: {configurations} configurations exceed cap {cap}")]
    OracleTooLarge { configurations: u128, cap: u128 },

    /// Random placement could not satisfy the distance floor.
    #[error("instance generation failed: {0}")]
    GenerationFailed(String),

    /// Requested export format cannot represent the model.
    #[error("unsupported export: {0}")]
    UnsupportedExport(String),

    /// An assignment is missing a variable required by the model.
    #[error("assignment is missing variable {0:?}")]
    MissingVariable(String),

    /// A master or sub-solver failed while a higher-level algorithm was running.
    #[error("solver failure{}: {detail}", context_suffix(.context))]
    Solver {
        detail: String,
        /// Iteration or node context, when known.
        context: Option<String>,
    },

    /// External solver subprocess failure.
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" ({c})"),
        None => String::new(),
    }
}

/// Failures at the external-solver subprocess boundary, one variant per
/// distinct failure mode so callers can react differently to each.
#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("failed to spawn solver command {command:?}: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },

    #[error("solver command exited with {status}: {stderr}")]
    ChildFailed { status: String, stderr: String },

    #[error("solver command timed out after {limit_secs}s")]
    Timeout { limit_secs: f64 },

    #[error("solver produced no output file at {path}")]
    MissingOutput { path: String },

    #[error("unparseable solution line {line_no}: {line:?}")]
    BadSolutionLine { line_no: usize, line: String },

    #[error("adapter config error: {0}")]
    Config(String),

    #[error("external solution rejected: {0}")]
    Rejected(String),
}

impl CfldError {
    /// Attach iteration/node context to a solver failure.
    pub fn solver(detail: impl Into<String>) -> Self {
        CfldError::Solver {
            detail: detail.into(),
            context: None,
        }
    }

    pub fn solver_at(detail: impl Into<String>, context: impl Into<String>) -> Self {
        CfldError::Solver {
            detail: detail.into(),
            context: Some(context.into()),
        }
    }
}
