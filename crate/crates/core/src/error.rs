use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("input of length {len} is shorter than {what} of size {size}")]
    InputTooShort {
        what: &'static str,
        len: usize,
        size: usize,
    },

    #[error("empty sequence")]
    EmptySequence,

    #[error("invalid dropout rate {0}; expected 0 <= rate < 1")]
    InvalidRate(f64),

    #[error("backward cache does not match layer: {0}")]
    CacheMismatch(String),

    #[error("target class {target} out of range for {classes} classes")]
    TargetOutOfRange { target: usize, classes: usize },

    #[error("prediction is not a probability distribution (sum {sum})")]
    NotNormalized { sum: f64 },

    #[error("fan size must be positive: {0}")]
    ZeroFan(&'static str),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("invalid model config: {0}")]
    InvalidConfig(String),

    #[error(
        "infeasible geometry: {input} samples -> conv {conv_len} -> pool {pooled_len}, \
         but {steps} recurrent steps are required"
    )]
    InfeasibleGeometry {
        input: usize,
        conv_len: usize,
        pooled_len: usize,
        steps: usize,
    },

    #[error("config line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),

    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("truncated WAV data: {0}")]
    TruncatedData(String),

    #[error("unrecognized emotion label {token:?} in {path}")]
    UnrecognizedLabel { token: String, path: String },

    #[error("directory not found: {0}")]
    MissingDirectory(PathBuf),

    #[error("class {0} has no clips")]
    EmptyClass(String),

    #[error("invalid split fractions: {0}")]
    BadFractions(String),

    #[error("label sequences differ in length: {truth} vs {predicted}")]
    LengthMismatch { truth: usize, predicted: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("empty label sequence")]
    EmptyLabels,

    #[error("class {0} has zero support")]
    ZeroSupport(usize),

    #[error("value {value} for {name} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("expected agreement is 1; kappa undefined")]
    DegenerateAgreement,

    #[error("empty confusion matrix")]
    EmptyMatrix,

    #[error("event at {timestamp} precedes last logged event at {last}")]
    OutOfOrder { timestamp: String, last: String },

    #[error("malformed event: {0}")]
    MalformedEvent(String),

    #[error("malformed report: {0}")]
    MalformedReport(String),

    #[error("unsupported format {0:?}; expected \"text\" or \"machine\"")]
    UnsupportedFormat(String),

    #[error("malformed parameter file: {0}")]
    MalformedParams(String),

    #[error("malformed manifest line {line}: {msg}")]
    MalformedManifest { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
