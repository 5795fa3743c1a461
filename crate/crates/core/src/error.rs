use thiserror::Error;

/// Errors raised by the metric kernels, environments, learners and the FQI harness.
///
/// The `Display` strings start with a stable kebab-case tag so callers (and the
/// CLI) can match on the failure class without parsing prose.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty-history: action history is empty")]
    EmptyHistory,
    #[error("dimension-mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("unequal-radius: {a} vs {b}")]
    UnequalRadius { a: f64, b: f64 },
    #[error("too-few-agents: need at least 2, got {0}")]
    TooFewAgents(usize),
    #[error("missing-channel: episode log lacks `{0}`")]
    MissingChannel(&'static str),
    #[error("no-logs: measurement needs at least one episode log")]
    NoLogs,
    #[error("unknown-scenario: `{0}`")]
    UnknownScenario(String),
    #[error("bad-params: {0}")]
    BadParams(String),
    #[error("illegal-action: agent {agent}: {reason}")]
    IllegalAction { agent: usize, reason: String },
    #[error("scope-below-attack-range: scope {scope} < attack range {attack_range}")]
    ScopeBelowAttackRange { scope: f64, attack_range: f64 },
    #[error("empty-batch: td update called without transitions")]
    EmptyBatch,
    #[error("bad-kernel: {0}")]
    BadKernel(String),
    #[error("support-mismatch: {0}")]
    SupportMismatch(String),
    #[error("invalid-distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid-argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// The stable tag at the front of the display string.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyHistory => "empty-history",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::UnequalRadius { .. } => "unequal-radius",
            Error::TooFewAgents(_) => "too-few-agents",
            Error::MissingChannel(_) => "missing-channel",
            Error::NoLogs => "no-logs",
            Error::UnknownScenario(_) => "unknown-scenario",
            Error::BadParams(_) => "bad-params",
            Error::IllegalAction { .. } => "illegal-action",
            Error::ScopeBelowAttackRange { .. } => "scope-below-attack-range",
            Error::EmptyBatch => "empty-batch",
            Error::BadKernel(_) => "bad-kernel",
            Error::SupportMismatch(_) => "support-mismatch",
            Error::InvalidDistribution(_) => "invalid-distribution",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
