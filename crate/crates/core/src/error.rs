use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum QusoError {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("configuration has {got} bits but the network has {expected} edges")]
    ConfigurationLength { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("qubit {0} used more than once in a gate")]
    OverlappingQubits(usize),

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("cannot normalize: {0}")]
    Normalization(String),

    #[error("phase finding did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QusoError>;
