use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use ed25519_dalek::{Signer as _, Verifier as _};
use fips205::traits::{KeyGen as _, SerDes as _, Signer as _, Verifier as _};
use libcrux_ml_dsa::{ml_dsa_65, ml_dsa_87};
use rand::RngCore;
use sha2::{Digest as _, Sha256};

use crate::error::{malformed, Error, Result};

/// Registered signature schemes with their one-byte wire codes.
///
/// | id   | scheme                         | sig B | pk B |
/// |------|--------------------------------|-------|------|
/// | 0x01 | Ed25519 (classical baseline)   | 64    | 32   |
/// | 0x02 | ML-DSA-65                      | 3309  | 1952 |
/// | 0x03 | ML-DSA-87                      | 4627  | 2592 |
/// | 0x04 | SLH-DSA-SHA2-128s              | 7856  | 32   |
/// | 0xF0 | toy: constant signature        | 64    | 32   |
/// | 0xF1+| toy: Ed25519 over a truncated message hash | 64 | 32 |
///
/// Ids at or above 0xF0 are toys and only usable inside the game harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignatureSchemeId {
    Ed25519,
    MlDsa65,
    MlDsa87,
    SlhDsaSha2_128s,
    /// Signs with all zeros; verification accepts any well-sized signature.
    ToyConstant,
    /// Ed25519 over the first `bytes` bytes of SHA-256(message); any two
    /// messages whose truncated digests agree share signatures.
    ToyTruncatedHash {
        bytes: u8,
    },
}

impl SignatureSchemeId {
    pub const GENUINE: [SignatureSchemeId; 4] = [
        SignatureSchemeId::Ed25519,
        SignatureSchemeId::MlDsa65,
        SignatureSchemeId::MlDsa87,
        SignatureSchemeId::SlhDsaSha2_128s,
    ];
    pub const TOY_HASH8: SignatureSchemeId = SignatureSchemeId::ToyTruncatedHash { bytes: 1 };

    pub fn from_id(id: u8) -> Result<Self> {
        Ok(match id {
            0x01 => SignatureSchemeId::Ed25519,
            0x02 => SignatureSchemeId::MlDsa65,
            0x03 => SignatureSchemeId::MlDsa87,
            0x04 => SignatureSchemeId::SlhDsaSha2_128s,
            0xF0 => SignatureSchemeId::ToyConstant,
            0xF1..=0xF4 => SignatureSchemeId::ToyTruncatedHash { bytes: id - 0xF0 },
            other => return Err(Error::UnknownScheme(other)),
        })
    }

    pub fn id(self) -> u8 {
        match self {
            SignatureSchemeId::Ed25519 => 0x01,
            SignatureSchemeId::MlDsa65 => 0x02,
            SignatureSchemeId::MlDsa87 => 0x03,
            SignatureSchemeId::SlhDsaSha2_128s => 0x04,
            SignatureSchemeId::ToyConstant => 0xF0,
            SignatureSchemeId::ToyTruncatedHash { bytes } => 0xF0 + bytes,
        }
    }

    pub fn sig_len(self) -> usize {
        match self {
            SignatureSchemeId::Ed25519 => 64,
            SignatureSchemeId::MlDsa65 => ml_dsa_65::MLDSA65Signature::len(),
            SignatureSchemeId::MlDsa87 => ml_dsa_87::MLDSA87Signature::len(),
            SignatureSchemeId::SlhDsaSha2_128s => fips205::slh_dsa_sha2_128s::SIG_LEN,
            SignatureSchemeId::ToyConstant | SignatureSchemeId::ToyTruncatedHash { .. } => 64,
        }
    }

    pub fn pk_len(self) -> usize {
        match self {
            SignatureSchemeId::Ed25519 => 32,
            SignatureSchemeId::MlDsa65 => ml_dsa_65::MLDSA65VerificationKey::len(),
            SignatureSchemeId::MlDsa87 => ml_dsa_87::MLDSA87VerificationKey::len(),
            SignatureSchemeId::SlhDsaSha2_128s => fips205::slh_dsa_sha2_128s::PK_LEN,
            SignatureSchemeId::ToyConstant | SignatureSchemeId::ToyTruncatedHash { .. } => 32,
        }
    }

    pub fn is_post_quantum(self) -> bool {
        matches!(
            self,
            SignatureSchemeId::MlDsa65 | SignatureSchemeId::MlDsa87 | SignatureSchemeId::SlhDsaSha2_128s
        )
    }

    pub fn is_toy(self) -> bool {
        self.id() >= 0xF0
    }

    /// Approximate single-core (sign/s, verify/s) reference figures used as
    /// estimator defaults. Toys have none.
    pub fn reference_rates(self) -> Option<(f64, f64)> {
        match self {
            SignatureSchemeId::Ed25519 => Some((35_000.0, 12_000.0)),
            SignatureSchemeId::MlDsa65 => Some((5_000.0, 12_000.0)),
            SignatureSchemeId::MlDsa87 => Some((3_000.0, 8_000.0)),
            SignatureSchemeId::SlhDsaSha2_128s => Some((5.0, 200.0)),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        match self {
            SignatureSchemeId::Ed25519 => "ed25519".into(),
            SignatureSchemeId::MlDsa65 => "ml-dsa-65".into(),
            SignatureSchemeId::MlDsa87 => "ml-dsa-87".into(),
            SignatureSchemeId::SlhDsaSha2_128s => "slh-dsa-128s".into(),
            SignatureSchemeId::ToyConstant => "toy-constant".into(),
            SignatureSchemeId::ToyTruncatedHash { bytes } => format!("toy-hash{}", bytes as u32 * 8),
        }
    }
}

impl fmt::Display for SignatureSchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SignatureSchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "ed25519" | "classical" => SignatureSchemeId::Ed25519,
            "ml-dsa-65" | "mldsa65" => SignatureSchemeId::MlDsa65,
            "ml-dsa-87" | "mldsa87" => SignatureSchemeId::MlDsa87,
            "slh-dsa-128s" | "slh-dsa-sha2-128s" | "slhdsa128s" => SignatureSchemeId::SlhDsaSha2_128s,
            "toy-constant" | "constant-sig" => SignatureSchemeId::ToyConstant,
            other => {
                let bits = other
                    .strip_prefix("toy-hash")
                    .and_then(|b| b.parse::<u32>().ok())
                    .filter(|b| b % 8 == 0 && (8..=32).contains(b))
                    .ok_or_else(|| Error::UnknownName(s.to_string()))?;
                SignatureSchemeId::ToyTruncatedHash {
                    bytes: (bits / 8) as u8,
                }
            }
        })
    }
}

enum SecretMaterial {
    Ed25519(ed25519_dalek::SigningKey),
    MlDsa65(Box<ml_dsa_65::MLDSA65SigningKey>),
    MlDsa87(Box<ml_dsa_87::MLDSA87SigningKey>),
    SlhDsa(Box<fips205::slh_dsa_sha2_128s::PrivateKey>),
    Constant,
}

enum ParsedPublic {
    Ed25519(ed25519_dalek::VerifyingKey),
    MlDsa65(Box<ml_dsa_65::MLDSA65VerificationKey>),
    MlDsa87(Box<ml_dsa_87::MLDSA87VerificationKey>),
    SlhDsa(Box<fips205::slh_dsa_sha2_128s::PublicKey>),
    Constant,
}

/// A verification key tagged with its scheme. The decoded form is cached on
/// first use.
pub struct PublicKey {
    scheme: SignatureSchemeId,
    bytes: Vec<u8>,
    parsed: OnceLock<Option<ParsedPublic>>,
}

impl PublicKey {
    pub fn from_bytes(scheme: SignatureSchemeId, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != scheme.pk_len() {
            return Err(malformed(format!(
                "{scheme} public key must be {} bytes, got {}",
                scheme.pk_len(),
                bytes.len()
            )));
        }
        Ok(PublicKey {
            scheme,
            bytes: bytes.to_vec(),
            parsed: OnceLock::new(),
        })
    }

    pub fn scheme(&self) -> SignatureSchemeId {
        self.scheme
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// First 8 bytes of SHA-256 over the key bytes.
    pub fn key_id(&self) -> [u8; 8] {
        let d = Sha256::digest(&self.bytes);
        let mut id = [0; 8];
        id.copy_from_slice(&d[..8]);
        id
    }

    fn parsed(&self) -> Option<&ParsedPublic> {
        self.parsed
            .get_or_init(|| parse_public(self.scheme, &self.bytes))
            .as_ref()
    }
}

fn parse_public(scheme: SignatureSchemeId, bytes: &[u8]) -> Option<ParsedPublic> {
    Some(match scheme {
        SignatureSchemeId::Ed25519 | SignatureSchemeId::ToyTruncatedHash { .. } => {
            ParsedPublic::Ed25519(ed25519_dalek::VerifyingKey::from_bytes(bytes.try_into().ok()?).ok()?)
        }
        SignatureSchemeId::MlDsa65 => {
            ParsedPublic::MlDsa65(Box::new(ml_dsa_65::MLDSA65VerificationKey::new(bytes.try_into().ok()?)))
        }
        SignatureSchemeId::MlDsa87 => {
            ParsedPublic::MlDsa87(Box::new(ml_dsa_87::MLDSA87VerificationKey::new(bytes.try_into().ok()?)))
        }
        SignatureSchemeId::SlhDsaSha2_128s => ParsedPublic::SlhDsa(Box::new(
            fips205::slh_dsa_sha2_128s::PublicKey::try_from_bytes(bytes.try_into().ok()?).ok()?,
        )),
        SignatureSchemeId::ToyConstant => ParsedPublic::Constant,
    })
}

impl Clone for PublicKey {
    fn clone(&self) -> Self {
        PublicKey {
            scheme: self.scheme,
            bytes: self.bytes.clone(),
            parsed: OnceLock::new(),
        }
    }
}

impl PartialEq for PublicKey {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme && self.bytes == other.bytes
    }
}

impl Eq for PublicKey {}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({}, {})", self.scheme, hex::encode(self.key_id()))
    }
}

/// A signing key pair. Every key is derived from a 32-byte master seed,
/// which is also the opaque secret-key encoding.
pub struct KeyPair {
    public: PublicKey,
    seed: [u8; 32],
    secret: SecretMaterial,
}

impl KeyPair {
    /// Rebuilds the pair from its 32-byte master seed.
    pub fn from_seed(scheme: SignatureSchemeId, seed: [u8; 32]) -> Self {
        let (secret, pk_bytes): (SecretMaterial, Vec<u8>) = match scheme {
            SignatureSchemeId::Ed25519 | SignatureSchemeId::ToyTruncatedHash { .. } => {
                let sk = ed25519_dalek::SigningKey::from_bytes(&seed);
                let pk = sk.verifying_key().to_bytes().to_vec();
                (SecretMaterial::Ed25519(sk), pk)
            }
            SignatureSchemeId::MlDsa65 => {
                let kp = ml_dsa_65::generate_key_pair(seed);
                (
                    SecretMaterial::MlDsa65(Box::new(kp.signing_key)),
                    kp.verification_key.as_slice().to_vec(),
                )
            }
            SignatureSchemeId::MlDsa87 => {
                let kp = ml_dsa_87::generate_key_pair(seed);
                (
                    SecretMaterial::MlDsa87(Box::new(kp.signing_key)),
                    kp.verification_key.as_slice().to_vec(),
                )
            }
            SignatureSchemeId::SlhDsaSha2_128s => {
                let part = |i: u8| -> [u8; 16] {
                    let d = Sha256::new().chain_update([i]).chain_update(seed).finalize();
                    d[..16].try_into().expect("16 of 32 bytes")
                };
                let (pk, sk) = fips205::slh_dsa_sha2_128s::KG::keygen_with_seeds(&part(0), &part(1), &part(2));
                (SecretMaterial::SlhDsa(Box::new(sk)), pk.into_bytes().to_vec())
            }
            SignatureSchemeId::ToyConstant => {
                let d = Sha256::new()
                    .chain_update(b"toy-constant")
                    .chain_update(seed)
                    .finalize();
                (SecretMaterial::Constant, d.to_vec())
            }
        };
        KeyPair {
            public: PublicKey {
                scheme,
                bytes: pk_bytes,
                parsed: OnceLock::new(),
            },
            seed,
            secret,
        }
    }

    pub fn scheme(&self) -> SignatureSchemeId {
        self.public.scheme
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.public
    }

    pub fn secret_key_bytes(&self) -> &[u8; 32] {
        &self.seed
    }
}

impl Clone for KeyPair {
    fn clone(&self) -> Self {
        KeyPair::from_seed(self.scheme(), self.seed)
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

/// Generates a key pair. With `rng_seed`, the pair is a deterministic
/// function of `(scheme, seed)`.
pub fn keygen(scheme: SignatureSchemeId, rng_seed: Option<&[u8]>) -> KeyPair {
    let seed: [u8; 32] = match rng_seed {
        Some(s) => Sha256::new()
            .chain_update(b"evtrail keygen")
            .chain_update([scheme.id()])
            .chain_update(s)
            .finalize()
            .into(),
        None => {
            let mut s = [0u8; 32];
            rand::rngs::OsRng.fill_bytes(&mut s);
            s
        }
    };
    KeyPair::from_seed(scheme, seed)
}

fn truncated_message(message: &[u8], bytes: u8) -> Vec<u8> {
    Sha256::digest(message)[..bytes as usize].to_vec()
}

/// Signs `message`. Signing is deterministic for every scheme and safe to
/// call from many threads on one key.
pub fn sign(kp: &KeyPair, message: &[u8]) -> Result<Vec<u8>> {
    if message.is_empty() {
        return Err(Error::EmptyMessage);
    }
    let sig = match (&kp.secret, kp.scheme()) {
        (SecretMaterial::Ed25519(sk), SignatureSchemeId::Ed25519) => sk.sign(message).to_bytes().to_vec(),
        (SecretMaterial::Ed25519(sk), SignatureSchemeId::ToyTruncatedHash { bytes }) => {
            sk.sign(&truncated_message(message, bytes)).to_bytes().to_vec()
        }
        // All-zero signing randomness is the deterministic variant.
        (SecretMaterial::MlDsa65(sk), _) => ml_dsa_65::sign(sk, message, b"", [0u8; 32])
            .map_err(|_| Error::Signing("ML-DSA-65"))?
            .as_slice()
            .to_vec(),
        (SecretMaterial::MlDsa87(sk), _) => ml_dsa_87::sign(sk, message, b"", [0u8; 32])
            .map_err(|_| Error::Signing("ML-DSA-87"))?
            .as_slice()
            .to_vec(),
        (SecretMaterial::SlhDsa(sk), _) => sk.try_sign(message, &[], false).map_err(Error::Signing)?.to_vec(),
        (SecretMaterial::Constant, _) => vec![0u8; kp.scheme().sig_len()],
        (SecretMaterial::Ed25519(_), other) => {
            return Err(Error::SchemeMismatch {
                expected: SignatureSchemeId::Ed25519,
                actual: other,
            })
        }
    };
    debug_assert_eq!(sig.len(), kp.scheme().sig_len());
    Ok(sig)
}

/// Verifies `signature` on `message`. Malformed lengths and undecodable
/// keys reject.
pub fn verify_sig(pk: &PublicKey, message: &[u8], signature: &[u8]) -> bool {
    if signature.len() != pk.scheme.sig_len() {
        return false;
    }
    let Some(parsed) = pk.parsed() else {
        return false;
    };
    match (parsed, pk.scheme) {
        (ParsedPublic::Ed25519(vk), scheme) => {
            let Ok(sig) = ed25519_dalek::Signature::from_slice(signature) else {
                return false;
            };
            match scheme {
                SignatureSchemeId::ToyTruncatedHash { bytes } => {
                    vk.verify(&truncated_message(message, bytes), &sig).is_ok()
                }
                _ => vk.verify(message, &sig).is_ok(),
            }
        }
        (ParsedPublic::MlDsa65(vk), _) => match signature.try_into() {
            Ok(sig) => ml_dsa_65::verify(vk, message, b"", &ml_dsa_65::MLDSA65Signature::new(sig)).is_ok(),
            Err(_) => false,
        },
        (ParsedPublic::MlDsa87(vk), _) => match signature.try_into() {
            Ok(sig) => ml_dsa_87::verify(vk, message, b"", &ml_dsa_87::MLDSA87Signature::new(sig)).is_ok(),
            Err(_) => false,
        },
        (ParsedPublic::SlhDsa(vk), _) => match signature.try_into() {
            Ok(sig) => vk.verify(message, sig, &[]),
            Err(_) => false,
        },
        (ParsedPublic::Constant, _) => true,
    }
}

const SECRET_MAGIC: &[u8; 4] = b"EVSK";
const PUBLIC_MAGIC: &[u8; 4] = b"EVPK";
const KEYFILE_VERSION: u8 = 0x01;

/// Secret key file: `"EVSK" | 0x01 | scheme id | 32-byte seed`.
pub fn encode_secret_key(kp: &KeyPair) -> Vec<u8> {
    let mut out = Vec::with_capacity(38);
    out.extend_from_slice(SECRET_MAGIC);
    out.push(KEYFILE_VERSION);
    out.push(kp.scheme().id());
    out.extend_from_slice(&kp.seed);
    out
}

pub fn decode_secret_key(bytes: &[u8]) -> Result<KeyPair> {
    if bytes.len() != 38 || &bytes[..4] != SECRET_MAGIC {
        return Err(malformed("not a secret key file"));
    }
    if bytes[4] != KEYFILE_VERSION {
        return Err(malformed(format!("secret key version {}", bytes[4])));
    }
    let scheme = SignatureSchemeId::from_id(bytes[5])?;
    let seed: [u8; 32] = bytes[6..].try_into().expect("length checked");
    Ok(KeyPair::from_seed(scheme, seed))
}

/// Public key file: `"EVPK" | 0x01 | scheme id | pk bytes`.
pub fn encode_public_key(pk: &PublicKey) -> Vec<u8> {
    let mut out = Vec::with_capacity(6 + pk.bytes.len());
    out.extend_from_slice(PUBLIC_MAGIC);
    out.push(KEYFILE_VERSION);
    out.push(pk.scheme.id());
    out.extend_from_slice(&pk.bytes);
    out
}

pub fn decode_public_key(bytes: &[u8]) -> Result<PublicKey> {
    if bytes.len() < 6 || &bytes[..4] != PUBLIC_MAGIC {
        return Err(malformed("not a public key file"));
    }
    if bytes[4] != KEYFILE_VERSION {
        return Err(malformed(format!("public key version {}", bytes[4])));
    }
    PublicKey::from_bytes(SignatureSchemeId::from_id(bytes[5])?, &bytes[6..])
}
