use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("inputs live on different frequency lattices")]
    LatticeMismatch,

    #[error("ensemble stage mismatch: expected {expected}, got {actual}")]
    StageMismatch { expected: &'static str, actual: String },

    #[error("insufficient realizations: need at least {needed}, have {have}")]
    InsufficientRealizations { needed: usize, have: usize },

    #[error("under-resolved grid: {0}")]
    UnderResolved(String),

    #[error("temporal mode leaks outside the band: {fraction:.3e} of its norm is in the edge region")]
    ModeLeak { fraction: f64 },

    #[error("temporal mode not normalized: norm = {norm}")]
    ModeNotNormalized { norm: f64 },

    #[error("mismatched configuration for renormalization: {0}")]
    RenormalizationMismatch(String),

    #[error("ensemble dump decode error: {0}")]
    Decode(String),

    #[error("config error{}: {message}", location_suffix(.field, .line))]
    Config {
        field: Option<String>,
        line: Option<usize>,
        message: String,
    },

    #[error("imaginary residual {residual:.3e} exceeds tolerance in {context}")]
    ImaginaryResidual { context: &'static str, residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

fn location_suffix(field: &Option<String>, line: &Option<usize>) -> String {
    match (field, line) {
        (Some(f), Some(l)) => format!(" at `{f}` (line {l})"),
        (Some(f), None) => format!(" at `{f}`"),
        (None, Some(l)) => format!(" (line {l})"),
        (None, None) => String::new(),
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Serialize(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialize(err.to_string())
    }
}
