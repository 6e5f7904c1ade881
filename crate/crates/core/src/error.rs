use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::primitives::SignatureSchemeId;

/// Errors raised by library operations. Verification outcomes are not
/// errors; those are reported as [`RejectReason`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown hash function id {0:#04x}")]
    UnknownHash(u8),
    #[error("unknown signature scheme id {0:#04x}")]
    UnknownScheme(u8),
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("toy primitive `{0}` is only available inside the game harness")]
    ToyRefused(String),
    #[error("scheme mismatch: expected {expected}, got {actual}")]
    SchemeMismatch {
        expected: SignatureSchemeId,
        actual: SignatureSchemeId,
    },
    #[error("refusing to sign an empty message")]
    EmptyMessage,
    #[error("signing failed: {0}")]
    Signing(&'static str),
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("event has {actual} components, configuration expects {expected}")]
    ComponentCount { expected: usize, actual: usize },
    #[error("event component {0} is empty")]
    EmptyComponent(usize),
    #[error("classical key supplied where a post-quantum key is required (CLASSICAL_ANCHOR_REFUSED)")]
    ClassicalKeyRefused,
    #[error("hybrid signing needs exactly one classical and one post-quantum key")]
    HybridKeyMix,
    #[error("empty batch")]
    EmptyBatch,
    #[error("index {index} out of range (length {len})")]
    OutOfRange { index: u64, len: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("record configuration {found} does not match segment configuration {expected} (CONFIG_MISMATCH)")]
    ConfigMismatch { expected: String, found: String },
    #[error("query budget of {0} Generate calls exhausted")]
    BudgetExceeded(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

/// Why a verification rejected. Every verifier in the crate returns
/// `Result<(), RejectReason>`; `Ok(())` is accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectReason {
    FieldMismatch,
    BadSignature,
    Malformed,
    BadClassicalSig,
    BadPqSig,
    BadProof,
    BadAnchorSig,
    BadWrapperSig,
    UnknownAnchor,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::FieldMismatch => "FIELD_MISMATCH",
            RejectReason::BadSignature => "BAD_SIGNATURE",
            RejectReason::Malformed => "MALFORMED",
            RejectReason::BadClassicalSig => "BAD_CLASSICAL_SIG",
            RejectReason::BadPqSig => "BAD_PQ_SIG",
            RejectReason::BadProof => "BAD_PROOF",
            RejectReason::BadAnchorSig => "BAD_ANCHOR_SIG",
            RejectReason::BadWrapperSig => "BAD_WRAPPER_SIG",
            RejectReason::UnknownAnchor => "UNKNOWN_ANCHOR",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

pub type Verdict = std::result::Result<(), RejectReason>;
