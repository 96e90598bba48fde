use thiserror::Error;

/// Errors raised by the exact engine, the Monte Carlo layer and the scenario runner.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("process is not adapted at column {column}")]
    NotAdapted { column: usize },
    #[error("not a stopping time: {{T <= {index}}} is not measurable for stage {index}")]
    NotStoppingTime { index: usize },
    #[error("process is not a martingale (first failing step {step})")]
    NotMartingale { step: usize },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("singular denominator: {0}")]
    Singular(String),
    #[error("non-positive density: {0}")]
    NonPositive(String),
    #[error("representation gap at step {step}, block {block}")]
    RepresentationGap { step: usize, block: usize },
    #[error("default time is not honest: {0}")]
    NotHonest(String),
    #[error("measure fails the fragment martingale condition: {0}")]
    NotShMeasure(String),
    #[error("no covering of the after-default interval: {0}")]
    MissingCovering(String),
    #[error("monte carlo: {0}")]
    MonteCarlo(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
