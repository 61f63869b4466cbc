use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by ingestion, estimation, and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("invalid observation at index {index}: time is not finite")]
    InvalidObservation { index: usize },

    #[error("invalid bandwidth {value}: must be positive and finite")]
    InvalidBandwidth { value: f64 },

    #[error("invalid kernel parameter c = {c}: must be positive and finite")]
    InvalidKernelParameter { c: f64 },

    #[error("derivative order {p} not implemented")]
    DerivativeOrder { p: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("invalid grid: abscissae must be finite and strictly ascending")]
    InvalidGrid,

    #[error("reflection applies to density and derivative estimates")]
    ReflectKind,

    #[error("reflection requires the mirrored abscissa {missing} on the grid")]
    ReflectAsymmetric { missing: f64 },

    #[error("truncation applies to density estimates")]
    TruncateKind,

    #[error("degenerate estimate: truncated curve has zero mass")]
    DegenerateEstimate,

    #[error("flat pilot curvature: plug-in bandwidth undefined")]
    FlatCurvature,

    #[error("no risk mass at x = {x}: censoring survival is zero")]
    NoRiskMass { x: f64 },

    #[error("nonpositive pilot density ({value}): plug-in bandwidth undefined")]
    NonpositivePilot { value: f64 },

    #[error("csv: line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("estimator failed in every replication: {0}")]
    AllReplicationsFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
