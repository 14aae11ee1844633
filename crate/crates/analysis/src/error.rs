use thiserror::Error;

pub type Result<T, E = AnalysisError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("fit domain: {0}")]
    FitDomain(String),

    #[error("fit failed after {iterations} iterations (chi2 {chi2:.4e}): {message}")]
    Fit { message: String, iterations: usize, chi2: f64 },

    #[error("target {target:e} not reachable with distance <= {limit}")]
    Range { target: f64, limit: usize },

    #[error("ratio undefined: {numerator_failures} failures over {denominator_failures} (shots {shots})")]
    UndefinedRatio { numerator_failures: u64, denominator_failures: u64, shots: u64 },

    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: String, message: String },

    #[error(transparent)]
    Core(#[from] bm_core::Error),

    #[error(transparent)]
    Decode(#[from] bm_decode::DecodeError),
}
