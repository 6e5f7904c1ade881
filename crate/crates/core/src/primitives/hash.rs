use std::fmt;
use std::str::FromStr;

use sha2::{Digest as _, Sha256};

use crate::error::{malformed, Error, Result};

/// One-byte domain separation tags prepended to every hash input.
pub mod tag {
    pub const FIELD: u8 = 0x01;
    pub const RECORD_MESSAGE: u8 = 0x02;
    pub const CHAIN: u8 = 0x03;
    pub const MERKLE_LEAF: u8 = 0x04;
    pub const MERKLE_NODE: u8 = 0x05;
    /// Re-sign digests and batch-anchor messages.
    pub const RESIGN: u8 = 0x06;
}

pub const MAX_DIGEST_LEN: usize = 32;

/// Registered hash functions.
///
/// `Sha256` (wire id `0x01`) is the production function. `Truncated`
/// keeps the first `bytes` bytes of the SHA-256 output and exists so the
/// security-game harness can exhibit collisions; its wire id is
/// `0xF0 + bytes`, so the 8-bit toy is `0xF1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HashFunctionId {
    Sha256,
    Truncated { bytes: u8 },
}

impl HashFunctionId {
    pub const TOY8: HashFunctionId = HashFunctionId::Truncated { bytes: 1 };
    pub const TOY16: HashFunctionId = HashFunctionId::Truncated { bytes: 2 };

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0x01 => Ok(HashFunctionId::Sha256),
            0xF1..=0xFF => Ok(HashFunctionId::Truncated { bytes: id - 0xF0 }),
            other => Err(Error::UnknownHash(other)),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            HashFunctionId::Sha256 => 0x01,
            HashFunctionId::Truncated { bytes } => 0xF0 + bytes,
        }
    }

    /// λ, in bits.
    pub fn output_bits(self) -> u32 {
        self.output_len() as u32 * 8
    }

    pub fn output_len(self) -> usize {
        match self {
            HashFunctionId::Sha256 => 32,
            HashFunctionId::Truncated { bytes } => bytes as usize,
        }
    }

    pub fn is_toy(self) -> bool {
        self.id() >= 0xF0
    }

    pub fn name(self) -> String {
        match self {
            HashFunctionId::Sha256 => "sha256".into(),
            HashFunctionId::Truncated { bytes } => format!("toy{}", bytes as u32 * 8),
        }
    }
}

impl fmt::Display for HashFunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for HashFunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "sha256" || lower == "sha-256" {
            return Ok(HashFunctionId::Sha256);
        }
        if let Some(bits) = lower.strip_prefix("toy") {
            if let Ok(bits) = bits.parse::<u32>() {
                if bits % 8 == 0 && (8..=120).contains(&bits) {
                    return Ok(HashFunctionId::Truncated {
                        bytes: (bits / 8) as u8,
                    });
                }
            }
        }
        Err(Error::UnknownName(s.to_string()))
    }
}

/// A hash output of up to 32 bytes. Length is set by the producing
/// [`HashFunctionId`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest {
    len: u8,
    bytes: [u8; MAX_DIGEST_LEN],
}

impl Digest {
    /// All-zero value of the function's output length (the chain IV).
    pub fn zero(hash_fn: HashFunctionId) -> Self {
        Digest {
            len: hash_fn.output_len() as u8,
            bytes: [0; MAX_DIGEST_LEN],
        }
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        if bytes.is_empty() || bytes.len() > MAX_DIGEST_LEN {
            return Err(malformed(format!("digest of {} bytes", bytes.len())));
        }
        let mut out = [0; MAX_DIGEST_LEN];
        out[..bytes.len()].copy_from_slice(bytes);
        Ok(Digest {
            len: bytes.len() as u8,
            bytes: out,
        })
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let raw = hex::decode(s.trim()).map_err(|e| malformed(format!("hex digest: {e}")))?;
        Self::from_slice(&raw)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.as_bytes())
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        self.as_bytes()
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// `H(tag || data)` truncated to the function's output length.
pub fn hash(hash_fn: HashFunctionId, domain_tag: u8, data: &[u8]) -> Digest {
    hash_parts(hash_fn, domain_tag, &[data])
}

/// Same as [`hash`] over the concatenation of `parts`, without building it.
pub fn hash_parts(hash_fn: HashFunctionId, domain_tag: u8, parts: &[&[u8]]) -> Digest {
    let mut h = Sha256::new();
    h.update([domain_tag]);
    for p in parts {
        h.update(p);
    }
    let full = h.finalize();
    let len = hash_fn.output_len();
    let mut bytes = [0; MAX_DIGEST_LEN];
    bytes[..len].copy_from_slice(&full[..len]);
    Digest { len: len as u8, bytes }
}

/// [`hash`] addressed by wire id.
pub fn hash_by_id(id: u8, domain_tag: u8, data: &[u8]) -> Result<Digest> {
    Ok(hash(HashFunctionId::from_id(id)?, domain_tag, data))
}
