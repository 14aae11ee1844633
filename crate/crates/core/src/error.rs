use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("capacity exceeded: {what} is {value}, limit {limit}")]
    Capacity { what: &'static str, value: usize, limit: usize },

    #[error("schedule conflict: qubit {qubit} used twice in slot {slot}")]
    ScheduleConflict { qubit: usize, slot: usize },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("mechanism flips observables {observables:?} without flipping any detector (noise site {site})")]
    UndetectableLogical { site: usize, observables: Vec<usize> },

    #[error("mechanism flips {count} detectors; at most 4 are supported")]
    TooManyDetectors { count: usize },

    #[error("no valid decomposition for mechanism with detectors {detectors:?}")]
    Decomposition { detectors: Vec<u32> },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
