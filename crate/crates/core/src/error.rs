use std::path::PathBuf;

/// Errors produced by the separation toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("signal too short: {len} samples, need at least {needed}")]
    SignalTooShort { len: usize, needed: usize },

    #[error("window schedule not invertible at sample {sample}")]
    WindowNotInvertible { sample: usize },

    #[error("degenerate covariance for output {output}{}", bin.map(|b| format!(" at bin {b}")).unwrap_or_default())]
    DegenerateCovariance { bin: Option<usize>, output: usize },

    #[error("demixing matrix at bin {bin} is singular")]
    SingularDemixing { bin: usize },

    #[error("degenerate reference set: {0}")]
    DegenerateReferences(String),

    #[error("cannot calibrate SNR: mixed signal on microphone {mic} is all zero")]
    CannotCalibrateSnr { mic: usize },

    #[error("wav error in {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("unsupported wav encoding in {path}: {detail}")]
    UnsupportedWav { path: PathBuf, detail: String },

    #[error("speech file {path}: {detail}")]
    SpeechFile { path: PathBuf, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
