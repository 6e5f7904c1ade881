//! Hash and signature registries.
//!
//! Everything above this module talks to primitives through
//! [`HashFunctionId`] and [`SignatureSchemeId`], both addressed on the wire by
//! a single byte. Ids `>= 0xF0` are deliberately weak toys used by the
//! security-game harness; production paths refuse them.

mod hash;
mod scheme;

pub use hash::{hash, hash_by_id, hash_parts, tag, Digest, HashFunctionId, MAX_DIGEST_LEN};
pub use scheme::{
    decode_public_key, decode_secret_key, encode_public_key, encode_secret_key, keygen, sign, verify_sig, KeyPair,
    PublicKey, SignatureSchemeId,
};
