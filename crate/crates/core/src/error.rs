use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image is {width}x{height}; at least 8x8 is required")]
    TooSmall { width: usize, height: usize },

    #[error("image is {width}x{height}; both dimensions must be multiples of 8")]
    NotBlockAligned { width: usize, height: usize },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("quality factor {0} is outside 1..=100")]
    QualityOutOfRange(i32),

    #[error("malformed JPEG: {0}")]
    MalformedJpeg(String),

    #[error("unsupported JPEG feature: {0}")]
    UnsupportedJpeg(String),

    #[error("N = {n} exceeds the {available} available blocks")]
    TooManyFixedBlocks { n: usize, available: usize },

    #[error("re-encryption requires the same k0 (old {old}, new {new})")]
    SeedMismatch { old: u64, new: u64 },

    #[error("feature length mismatch: need {needed}, got {got}")]
    LengthMismatch { needed: usize, got: usize },

    #[error("invalid feature file: {0}")]
    FeatureFormat(String),

    #[error("invalid key file: {0}")]
    KeyFile(String),

    #[error("invalid manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("corpus: {0}")]
    Corpus(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Decode(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
