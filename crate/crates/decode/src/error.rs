use thiserror::Error;

pub type Result<T, E = DecodeError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("infeasible syndrome: detector {detector} cannot be matched")]
    Infeasible { detector: usize },

    #[error("hyperedge with detectors {detectors:?} has no decomposition")]
    Undecomposed { detectors: Vec<u32> },

    #[error(transparent)]
    Core(#[from] bm_core::Error),
}
