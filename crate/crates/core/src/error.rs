use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {cause}", path.display())]
    Io { path: PathBuf, cause: io::Error },

    #[error("cannot read diagnosis file {}: {cause}", path.display())]
    Diagnosis { path: PathBuf, cause: io::Error },

    #[error("malformed WAV, chunk `{chunk}`: {message}")]
    Decode { chunk: String, message: String },

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("audio data chunk is empty")]
    EmptyAudio,

    #[error("insufficient duration: requested {requested:.3} s, available {available:.3} s")]
    InsufficientDuration { available: f64, requested: f64 },

    #[error("signal has {len} samples, fewer than one frame of {frame_length}")]
    InsufficientSamples { len: usize, frame_length: usize },

    #[error("manifest line {line}: {message}")]
    ManifestParse { line: u64, message: String },

    #[error("feature CSV line {line}: {message}")]
    FeatureParse { line: u64, message: String },

    #[error("mel filterbank is degenerate: {0}")]
    DegenerateFilterbank(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{} clip(s) too short for the requested windows:\n{}", .0.len(), list_lines(.0))]
    ClipsTooShort(Vec<String>),
}

fn list_lines(items: &[String]) -> String {
    items
        .iter()
        .map(|s| format!("  {s}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, cause: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause,
        }
    }

    pub(crate) fn decode(chunk: &str, message: impl Into<String>) -> Self {
        Error::Decode {
            chunk: chunk.to_string(),
            message: message.into(),
        }
    }

    /// Process exit status for a CLI run that failed with this error:
    /// 1 for I/O failures, 2 for configuration or data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
