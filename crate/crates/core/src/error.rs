use thiserror::Error;

/// Errors produced anywhere in the synthesis, simulation and sampling pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("requested n = {requested} exceeds the maximum supported ancilla count n = {max}")]
    Capacity { requested: i64, max: u32 },

    #[error("circuit needs {qubits} qubits, above the simulation cap of {cap} (override with --max-qubits)")]
    SimulationCap { qubits: usize, cap: usize },

    #[error("construction bug: internal ancillas not restored for outcome {outcome} (residual weight {residual:e})")]
    ConstructionBug { outcome: String, residual: f64 },

    #[error("repeat-until-success did not terminate within {cap} attempts")]
    Runaway { cap: u64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
