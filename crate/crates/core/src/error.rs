use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {count}-qubit register")]
    QubitIndex { index: usize, count: usize },

    #[error("classical bit index {index} out of range for a {count}-bit register")]
    ClbitIndex { index: usize, count: usize },

    #[error("matrix is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("instruction {index}: no decomposition rule for non-local `{kind}`")]
    UnsupportedGate { index: usize, kind: String },

    #[error("circuit already contains communication qubits; refusing to compile it twice")]
    AlreadyCompiled,

    #[error("distribution incomplete (gate_app = 0): {0}")]
    GateApp(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rewrite refused: {0}")]
    RewriteRefused(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Failure to produce a fully distributed circuit.
    pub fn is_compile_failure(&self) -> bool {
        matches!(self, Error::UnsupportedGate { .. } | Error::AlreadyCompiled | Error::GateApp(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
