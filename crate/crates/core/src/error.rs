use thiserror::Error;

/// Errors raised by the laboratory. Each variant names the operation that failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: point outside the enlarged domain: {detail}")]
    Domain { op: &'static str, detail: String },
    #[error("{op}: exact and finite-difference evaluations disagree by {gap:e}")]
    Consistency { op: &'static str, gap: f64 },
    #[error("{op}: Newton iteration diverged from seed {seed:?}")]
    Solver { op: &'static str, seed: Vec<f64> },
    #[error("{op}: inconclusive: {detail}")]
    Inconclusive { op: &'static str, detail: String },
    #[error("{op}: spectral support leaves the enlarged domain")]
    Margin { op: &'static str },
    #[error("{op}: region exceeds grid coverage: {detail}")]
    Coverage { op: &'static str, detail: String },
    #[error("{op}: invalid parameter: {detail}")]
    Parameter { op: &'static str, detail: String },
    #[error("{op}: grid too coarse: {detail}")]
    Resolution { op: &'static str, detail: String },
    #[error("{op}: invalid input: {detail}")]
    Input { op: &'static str, detail: String },
    #[error("{op}: precondition failed: {detail}")]
    Precondition { op: &'static str, detail: String },
    #[error("{op}: no candidate satisfies the bound (best constant {best:e})")]
    Search { op: &'static str, best: f64 },
    #[error("{op}: usage error: {detail}")]
    Usage { op: &'static str, detail: String },
}

impl Error {
    /// The name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        let op = match self {
            Error::Domain { op, .. }
            | Error::Consistency { op, .. }
            | Error::Solver { op, .. }
            | Error::Inconclusive { op, .. }
            | Error::Margin { op }
            | Error::Coverage { op, .. }
            | Error::Parameter { op, .. }
            | Error::Resolution { op, .. }
            | Error::Input { op, .. }
            | Error::Precondition { op, .. }
            | Error::Search { op, .. }
            | Error::Usage { op, .. } => *op,
        };
        op.split("::").next().unwrap_or(op)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
