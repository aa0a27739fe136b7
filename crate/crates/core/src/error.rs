use std::path::PathBuf;
use thiserror::Error;

/// Errors across the encryption, reduction and estimation layers.
#[derive(Debug, Error)]
pub enum EseError {
    #[error("bit length {expected} exceeds available data ({actual} bits)")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("degenerate key: a zero key would produce a zero pad")]
    DegenerateKey,

    #[error("invalid entropy bound: t = {t} exceeds message length n = {n}")]
    InvalidEntropy { t: u64, n: u64 },

    #[error("invalid parameters: {0}")]
    InvalidParameter(String),

    #[error(
        "invalid entropy estimate: entropy ratio {entropy_ratio} exceeds data ratio {data_ratio}"
    )]
    InvalidEstimate {
        entropy_ratio: f64,
        data_ratio: f64,
    },

    #[error("entropy estimate ({t} bits) exceeds payload ({n} bits); use whole-file OTP")]
    EstimateExceedsPayload { t: u64, n: u64 },

    #[error("insufficient key material: need {required} bits, have {available} bits")]
    InsufficientKeyMaterial { required: u64, available: u64 },

    #[error("no sparse irreducible found for degree {degree}; widen the search")]
    NoSparseIrreducible { degree: usize },

    #[error("malformed ciphertext container: {0}")]
    MalformedContainer(String),

    #[error("compressor `{name}` failed on {file}: {reason}")]
    Compressor {
        name: String,
        file: PathBuf,
        reason: String,
    },

    #[error("entropy heuristic broke down: mean - stddev = {0} is not positive")]
    HeuristicNotPositive(f64),

    #[error("system entropy source failure: {0}")]
    EntropySource(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EseError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EseError::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable process exit code per error class, used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            EseError::LengthMismatch { .. } | EseError::InvalidParameter(_) => 2,
            EseError::InsufficientKeyMaterial { .. } => 3,
            EseError::Io { .. } | EseError::EntropySource(_) => 4,
            EseError::Compressor { .. } | EseError::HeuristicNotPositive(_) => 5,
            EseError::DegenerateKey => 6,
            EseError::MalformedContainer(_) => 7,
            EseError::InvalidEntropy { .. }
            | EseError::InvalidEstimate { .. }
            | EseError::EstimateExceedsPayload { .. } => 8,
            EseError::NoSparseIrreducible { .. } => 9,
        }
    }
}
