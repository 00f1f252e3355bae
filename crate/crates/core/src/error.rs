//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{key} = {value} outside [{lo}, {hi}]")]
    RangeViolation {
        key: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("channel tensor is all zero")]
    AllZeroChannel,

    #[error("power profile has no positive entry")]
    AllZeroProfile,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("need at least {needed} {what}, got {got}")]
    InsufficientData {
        needed: usize,
        got: usize,
        what: &'static str,
    },

    #[error("subband {subband} carries no energy")]
    ZeroSubband { subband: usize },

    #[error("bitstring length mismatch: expected {expected} bits, got {got}")]
    BitLengthMismatch { expected: usize, got: usize },

    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { found: [u8; 4], expected: [u8; 4] },

    #[error("unsupported format version {found}, expected {expected}")]
    BadVersion { found: u16, expected: u16 },

    #[error("file size mismatch: expected {expected_bytes} bytes, got {actual_bytes}")]
    SizeMismatch {
        expected_bytes: u64,
        actual_bytes: u64,
    },

    #[error("unknown key \"{key}\" at line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("duplicate key \"{key}\" at line {line}")]
    DuplicateKey { key: String, line: usize },

    #[error("missing required key \"{key}\"")]
    MissingKey { key: &'static str },

    #[error("malformed line {line}: {content}")]
    MalformedLine { line: usize, content: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
