use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("vector has no positive magnitude")]
    ZeroVector,
    #[error("illuminant has a zero channel")]
    ZeroChannel,
    #[error("negative channel value {0}")]
    NegativeChannel(f64),
    #[error("image has no valid pixels")]
    NoValidPixels,
    #[error("empty input")]
    EmptyInput,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("negative angular error {0}")]
    NegativeError(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing image {0}")]
    MissingImage(PathBuf),
    #[error("invalid ground truth at line {0}")]
    InvalidGroundTruth(usize),
    #[error("empty image")]
    EmptyImage,
    #[error("every pixel was masked out")]
    AllPixelsInvalid,
    #[error("{entries} entries cannot be split into {folds} folds")]
    TooFewEntries { entries: usize, folds: usize },
    #[error("invalid image data: {0}")]
    ImageFormat(String),
    #[error("invalid model file: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error comes from numerical degeneracy rather than bad input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroVector | Error::ZeroChannel | Error::DegenerateInput(_) | Error::NegativeError(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
