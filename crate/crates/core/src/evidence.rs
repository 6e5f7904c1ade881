//! Constant-size evidence records.
//!
//! An event is a fixed list of `k` raw components. Each component is hashed
//! under tag `0x01` into a field digest `f_j`; the concatenation
//! `x = f_0 || ... || f_{k-1}` is hashed under tag `0x02` into the message
//! `m`, and `m` is signed.
//!
//! Wire layout (bit-exact):
//!
//! ```text
//! byte 0      version (0x01)
//! byte 1      hash function id
//! byte 2      signature scheme id
//! byte 3      k
//! k * λ/8     field block x
//! sig_len     signature (length implied by the scheme id)
//! ```

use std::fmt;
use std::path::Path;

use base64::Engine as _;
use rand::{Rng, RngCore};

use crate::error::{malformed, Error, RejectReason, Result, Verdict};
use crate::primitives::{hash, sign, tag, verify_sig, Digest, HashFunctionId, KeyPair, PublicKey, SignatureSchemeId};

pub const RECORD_VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 4;
pub const DEFAULT_K: usize = 8;

/// Component names in field order for the default layout.
pub const COMPONENT_NAMES: [&str; DEFAULT_K] = [
    "context",
    "model",
    "code",
    "input",
    "output",
    "policy",
    "environment",
    "link_hint",
];

/// Index of the `output` component.
pub const OUTPUT: usize = 4;
/// Index of the `link_hint` component.
pub const LINK_HINT: usize = 7;

/// Name of component `j`; layouts wider than eight use `extra<j>`.
pub fn component_name(j: usize) -> String {
    COMPONENT_NAMES
        .get(j)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("extra{j}"))
}

/// A structured event: `k` named, non-empty raw-byte components in a fixed
/// order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EventDescription {
    components: Vec<Vec<u8>>,
}

impl EventDescription {
    pub fn new(components: Vec<Vec<u8>>) -> Result<Self> {
        if components.is_empty() || components.len() > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "an event needs 1..=255 components, got {}",
                components.len()
            )));
        }
        if let Some(j) = components.iter().position(|c| c.is_empty()) {
            return Err(Error::EmptyComponent(j));
        }
        Ok(EventDescription { components })
    }

    /// A random event with `k` components of 8..40 bytes each.
    pub fn random<R: RngCore + ?Sized>(rng: &mut R, k: usize) -> Self {
        let components = (0..k)
            .map(|_| {
                let len = rng.gen_range(8..40);
                let mut c = vec![0u8; len];
                rng.fill_bytes(&mut c);
                c
            })
            .collect();
        EventDescription { components }
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &[u8] {
        &self.components[j]
    }

    pub fn components(&self) -> &[Vec<u8>] {
        &self.components
    }

    /// Copy of this event with component `j` replaced.
    pub fn with_component(&self, j: usize, value: Vec<u8>) -> Result<Self> {
        if j >= self.k() {
            return Err(Error::OutOfRange {
                index: j as u64,
                len: self.k() as u64,
            });
        }
        let mut components = self.components.clone();
        components[j] = value;
        EventDescription::new(components)
    }

    /// Parses the line-oriented event format:
    ///
    /// ```text
    /// # comment
    /// context = text:job-42
    /// model   = hex:9f86d081
    /// code    = b64:aGVsbG8=
    /// input   = file:inputs/batch.csv
    /// ```
    ///
    /// Every one of the `k` component names must appear exactly once; line
    /// order does not matter. `file:` paths are relative to `base_dir`.
    pub fn parse_text(text: &str, k: usize, base_dir: Option<&Path>) -> Result<Self> {
        let mut slots: Vec<Option<Vec<u8>>> = vec![None; k];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| malformed(format!("line {}: expected `name = value`", lineno + 1)))?;
            let name = name.trim();
            let j = (0..k)
                .find(|&j| component_name(j) == name)
                .ok_or_else(|| malformed(format!("line {}: unknown component {name:?}", lineno + 1)))?;
            if slots[j].is_some() {
                return Err(malformed(format!("line {}: duplicate component {name:?}", lineno + 1)));
            }
            slots[j] = Some(decode_value(value.trim(), base_dir)?);
        }
        let components = slots
            .into_iter()
            .enumerate()
            .map(|(j, s)| s.ok_or_else(|| malformed(format!("missing component {:?}", component_name(j)))))
            .collect::<Result<Vec<_>>>()?;
        EventDescription::new(components)
    }

    /// Renders the event in the text format with hex values.
    pub fn to_text(&self) -> String {
        self.components
            .iter()
            .enumerate()
            .map(|(j, c)| format!("{} = hex:{}\n", component_name(j), hex::encode(c)))
            .collect()
    }
}

fn decode_value(value: &str, base_dir: Option<&Path>) -> Result<Vec<u8>> {
    let (kind, body) = value
        .split_once(':')
        .ok_or_else(|| malformed(format!("value {value:?} lacks a hex:/b64:/text:/file: prefix")))?;
    match kind {
        "hex" => hex::decode(body.trim()).map_err(|e| malformed(format!("hex value: {e}"))),
        "b64" | "base64" => base64::engine::general_purpose::STANDARD
            .decode(body.trim())
            .map_err(|e| malformed(format!("base64 value: {e}"))),
        "text" => Ok(body.as_bytes().to_vec()),
        "file" => {
            let path = Path::new(body.trim());
            let full = match base_dir {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.to_path_buf(),
            };
            Ok(std::fs::read(full)?)
        }
        other => Err(malformed(format!("unknown value kind {other:?}"))),
    }
}

impl fmt::Debug for EventDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (j, c) in self.components.iter().enumerate() {
            m.entry(&component_name(j), &hex::encode(c));
        }
        m.finish()
    }
}

/// Whether toy primitives may be used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    Production,
    /// Only the security-game harness runs under this policy.
    Harness,
}

impl Policy {
    pub fn admits_hash(self, hash_fn: HashFunctionId) -> bool {
        self == Policy::Harness || !hash_fn.is_toy()
    }

    pub fn admits_scheme(self, scheme: SignatureSchemeId) -> bool {
        self == Policy::Harness || !scheme.is_toy()
    }

    pub fn check_hash(self, hash_fn: HashFunctionId) -> Result<()> {
        if self.admits_hash(hash_fn) {
            Ok(())
        } else {
            Err(Error::ToyRefused(hash_fn.name()))
        }
    }

    pub fn check_scheme(self, scheme: SignatureSchemeId) -> Result<()> {
        if self.admits_scheme(scheme) {
            Ok(())
        } else {
            Err(Error::ToyRefused(scheme.name()))
        }
    }
}

/// Public parameters: hash function, field count, and toy policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EvidenceConfig {
    pub hash_fn: HashFunctionId,
    pub k: usize,
    pub policy: Policy,
}

impl EvidenceConfig {
    pub fn new(hash_fn: HashFunctionId, k: usize) -> Self {
        EvidenceConfig {
            hash_fn,
            k,
            policy: Policy::Production,
        }
    }

    pub fn harness(hash_fn: HashFunctionId, k: usize) -> Self {
        EvidenceConfig {
            hash_fn,
            k,
            policy: Policy::Harness,
        }
    }

    /// Checks `k` and the toy policy for the hash and `scheme`.
    pub fn check(&self, scheme: SignatureSchemeId) -> Result<()> {
        if self.k == 0 || self.k > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("k = {}", self.k)));
        }
        self.policy.check_hash(self.hash_fn)?;
        self.policy.check_scheme(scheme)
    }
}

impl Default for EvidenceConfig {
    fn default() -> Self {
        EvidenceConfig::new(HashFunctionId::Sha256, DEFAULT_K)
    }
}

/// The field block `x`: `k` digests of `λ/8` bytes each, stored
/// contiguously.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldBlock {
    hash_fn: HashFunctionId,
    k: u8,
    bytes: Vec<u8>,
}

impl FieldBlock {
    pub fn from_bytes(hash_fn: HashFunctionId, k: usize, bytes: Vec<u8>) -> Result<Self> {
        if k == 0 || k > u8::MAX as usize || bytes.len() != k * hash_fn.output_len() {
            return Err(malformed(format!(
                "field block of {} bytes for k = {k}, λ = {}",
                bytes.len(),
                hash_fn.output_bits()
            )));
        }
        Ok(FieldBlock {
            hash_fn,
            k: k as u8,
            bytes,
        })
    }

    pub fn hash_fn(&self) -> HashFunctionId {
        self.hash_fn
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn field(&self, j: usize) -> &[u8] {
        let w = self.hash_fn.output_len();
        &self.bytes[j * w..(j + 1) * w]
    }

    /// The encoding `x`.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// `m = H(0x02 || x)`, the message that gets signed.
    pub fn message(&self) -> Digest {
        hash(self.hash_fn, tag::RECORD_MESSAGE, &self.bytes)
    }
}

impl fmt::Debug for FieldBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FieldBlock({}, k={}, {})",
            self.hash_fn,
            self.k,
            hex::encode(&self.bytes)
        )
    }
}

/// `x = Fields(e)`: each component hashed under tag `0x01`.
pub fn fields_encode(e: &EventDescription, hash_fn: HashFunctionId) -> FieldBlock {
    let mut bytes = Vec::with_capacity(e.k() * hash_fn.output_len());
    for c in e.components() {
        bytes.extend_from_slice(hash(hash_fn, tag::FIELD, c).as_bytes());
    }
    FieldBlock {
        hash_fn,
        k: e.k() as u8,
        bytes,
    }
}

/// [`fields_encode`] with the component count checked against `cfg`.
pub fn fields_encode_checked(e: &EventDescription, cfg: &EvidenceConfig) -> Result<FieldBlock> {
    if e.k() != cfg.k {
        return Err(Error::ComponentCount {
            expected: cfg.k,
            actual: e.k(),
        });
    }
    Ok(fields_encode(e, cfg.hash_fn))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RecordHeader {
    pub version: u8,
    pub hash_fn: HashFunctionId,
    pub scheme: SignatureSchemeId,
    pub k: u8,
}

impl RecordHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        [self.version, self.hash_fn.id(), self.scheme.id(), self.k]
    }

    /// Serialized length of any record carrying this header.
    pub fn record_len(&self) -> usize {
        EvidenceRecord::encoded_len(self.hash_fn, self.scheme, self.k as usize)
    }
}

/// `Ev = (x, σ)` plus the 4-byte header.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EvidenceRecord {
    pub header: RecordHeader,
    pub field_block: FieldBlock,
    pub signature: Vec<u8>,
}

impl EvidenceRecord {
    /// `4 + k·λ/8 + sig_len`.
    pub fn encoded_len(hash_fn: HashFunctionId, scheme: SignatureSchemeId, k: usize) -> usize {
        HEADER_LEN + k * hash_fn.output_len() + scheme.sig_len()
    }

    /// Size of `(x, σ)` without the header.
    pub fn payload_len(hash_fn: HashFunctionId, scheme: SignatureSchemeId, k: usize) -> usize {
        k * hash_fn.output_len() + scheme.sig_len()
    }

    pub fn len(&self) -> usize {
        self.header.record_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.header.to_bytes());
        out.extend_from_slice(self.field_block.as_bytes());
        out.extend_from_slice(&self.signature);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(malformed(format!("record truncated to {} bytes", bytes.len())));
        }
        if bytes[0] != RECORD_VERSION {
            return Err(malformed(format!("unsupported record version {:#04x}", bytes[0])));
        }
        let hash_fn = HashFunctionId::from_id(bytes[1])?;
        let scheme = SignatureSchemeId::from_id(bytes[2])?;
        let k = bytes[3] as usize;
        if k == 0 {
            return Err(malformed("record with k = 0"));
        }
        let expected = Self::encoded_len(hash_fn, scheme, k);
        if bytes.len() != expected {
            return Err(malformed(format!(
                "record is {} bytes, header implies {expected}",
                bytes.len()
            )));
        }
        let split = HEADER_LEN + k * hash_fn.output_len();
        Ok(EvidenceRecord {
            header: RecordHeader {
                version: RECORD_VERSION,
                hash_fn,
                scheme,
                k: k as u8,
            },
            field_block: FieldBlock::from_bytes(hash_fn, k, bytes[HEADER_LEN..split].to_vec())?,
            signature: bytes[split..].to_vec(),
        })
    }
}

/// Generate: `x = Fields(e)`, `m = H(x)`, `σ = Sign(sk, m)`.
pub fn generate(kp: &KeyPair, e: &EventDescription, cfg: &EvidenceConfig) -> Result<EvidenceRecord> {
    cfg.check(kp.scheme())?;
    let field_block = fields_encode_checked(e, cfg)?;
    let signature = sign(kp, field_block.message().as_bytes())?;
    Ok(EvidenceRecord {
        header: RecordHeader {
            version: RECORD_VERSION,
            hash_fn: cfg.hash_fn,
            scheme: kp.scheme(),
            k: cfg.k as u8,
        },
        field_block,
        signature,
    })
}

/// Verify under the production policy.
pub fn verify(pk: &PublicKey, e: &EventDescription, record: &EvidenceRecord) -> Verdict {
    verify_with(Policy::Production, pk, e, record)
}

/// Accepts iff `Fields(e)` equals the record's field block byte for byte
/// and the signature verifies over `H(0x02 || x)`.
pub fn verify_with(policy: Policy, pk: &PublicKey, e: &EventDescription, record: &EvidenceRecord) -> Verdict {
    check_shape(policy, record)?;
    if e.k() != record.field_block.k() || fields_encode(e, record.header.hash_fn) != record.field_block {
        return Err(RejectReason::FieldMismatch);
    }
    check_signature(pk, record)
}

/// Signature half of [`verify`], for auditors that do not hold the raw
/// event.
pub fn verify_signature_only(policy: Policy, pk: &PublicKey, record: &EvidenceRecord) -> Verdict {
    check_shape(policy, record)?;
    check_signature(pk, record)
}

fn check_shape(policy: Policy, record: &EvidenceRecord) -> Verdict {
    let h = &record.header;
    if h.version != RECORD_VERSION
        || !policy.admits_hash(h.hash_fn)
        || !policy.admits_scheme(h.scheme)
        || record.field_block.hash_fn() != h.hash_fn
        || record.field_block.k() != h.k as usize
        || record.signature.len() != h.scheme.sig_len()
    {
        return Err(RejectReason::Malformed);
    }
    Ok(())
}

fn check_signature(pk: &PublicKey, record: &EvidenceRecord) -> Verdict {
    if pk.scheme() != record.header.scheme {
        return Err(RejectReason::BadSignature);
    }
    if verify_sig(pk, record.field_block.message().as_bytes(), &record.signature) {
        Ok(())
    } else {
        Err(RejectReason::BadSignature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::keygen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> EventDescription {
        EventDescription::new(
            COMPONENT_NAMES
                .iter()
                .map(|n| format!("fixture-{n}").into_bytes())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn default_field_block_is_256_bytes() {
        let x = fields_encode(&fixture(), HashFunctionId::Sha256);
        assert_eq!(x.as_bytes().len(), 256);
        assert_eq!(
            x.field(0),
            hash(HashFunctionId::Sha256, tag::FIELD, b"fixture-context").as_bytes()
        );
    }

    #[test]
    fn changing_output_changes_only_field_four() {
        let e = fixture();
        let e2 = e.with_component(OUTPUT, b"other output".to_vec()).unwrap();
        let a = fields_encode(&e, HashFunctionId::Sha256);
        let b = fields_encode(&e2, HashFunctionId::Sha256);
        let differing: Vec<usize> = (0..8).filter(|&j| a.field(j) != b.field(j)).collect();
        assert_eq!(differing, vec![4]);
        assert_eq!(a, fields_encode(&e, HashFunctionId::Sha256));
    }

    #[test]
    fn field_locality_over_random_events() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let e = EventDescription::random(&mut rng, 8);
            let j = rng.gen_range(0..8);
            let e2 = e.with_component(j, b"replacement".to_vec()).unwrap();
            let (a, b) = (
                fields_encode(&e, HashFunctionId::Sha256),
                fields_encode(&e2, HashFunctionId::Sha256),
            );
            for i in 0..8 {
                assert_eq!(a.field(i) != b.field(i), i == j, "field {i} after changing {j}");
            }
        }
    }

    #[test]
    fn record_sizes() {
        let e = fixture();
        let cfg = EvidenceConfig::default();
        let classical = generate(&keygen(SignatureSchemeId::Ed25519, Some(b"s")), &e, &cfg).unwrap();
        assert_eq!(classical.to_bytes().len(), 324);
        let pq = generate(&keygen(SignatureSchemeId::MlDsa65, Some(b"s")), &e, &cfg).unwrap();
        assert_eq!(pq.to_bytes().len(), 3569);
    }

    #[test]
    fn deterministic_generation() {
        let kp = keygen(SignatureSchemeId::Ed25519, Some(b"det"));
        let cfg = EvidenceConfig::default();
        let a = generate(&kp, &fixture(), &cfg).unwrap().to_bytes();
        let b = generate(&kp, &fixture(), &cfg).unwrap().to_bytes();
        assert_eq!(a, b);
    }

    #[test]
    fn verify_reasons() {
        let kp = keygen(SignatureSchemeId::Ed25519, Some(b"v"));
        let e = fixture();
        let rec = generate(&kp, &e, &EvidenceConfig::default()).unwrap();
        assert_eq!(verify(kp.public_key(), &e, &rec), Ok(()));

        let swapped = e.with_component(1, b"another model".to_vec()).unwrap();
        assert_eq!(
            verify(kp.public_key(), &swapped, &rec),
            Err(RejectReason::FieldMismatch)
        );

        let mut bad = rec.clone();
        bad.signature[10] ^= 0x01;
        assert_eq!(verify(kp.public_key(), &e, &bad), Err(RejectReason::BadSignature));

        let other = keygen(SignatureSchemeId::Ed25519, Some(b"other"));
        assert_eq!(verify(other.public_key(), &e, &rec), Err(RejectReason::BadSignature));

        let short = EventDescription::new(e.components()[..7].to_vec()).unwrap();
        assert_eq!(verify(kp.public_key(), &short, &rec), Err(RejectReason::FieldMismatch));
    }

    #[test]
    fn toys_refused_in_production() {
        let e = fixture();
        let toy = keygen(SignatureSchemeId::ToyConstant, Some(b"t"));
        assert!(matches!(
            generate(&toy, &e, &EvidenceConfig::default()),
            Err(Error::ToyRefused(_))
        ));
        let kp = keygen(SignatureSchemeId::Ed25519, Some(b"t"));
        let cfg = EvidenceConfig::new(HashFunctionId::TOY8, 8);
        assert!(matches!(generate(&kp, &e, &cfg), Err(Error::ToyRefused(_))));

        let harness = EvidenceConfig::harness(HashFunctionId::TOY8, 8);
        let rec = generate(&kp, &e, &harness).unwrap();
        assert_eq!(verify(kp.public_key(), &e, &rec), Err(RejectReason::Malformed));
        assert_eq!(verify_with(Policy::Harness, kp.public_key(), &e, &rec), Ok(()));
    }

    #[test]
    fn wrong_component_count_is_error() {
        let kp = keygen(SignatureSchemeId::Ed25519, Some(b"k"));
        let e = EventDescription::new(vec![b"a".to_vec(); 7]).unwrap();
        assert!(matches!(
            generate(&kp, &e, &EvidenceConfig::default()),
            Err(Error::ComponentCount { expected: 8, actual: 7 })
        ));
        assert!(matches!(
            EventDescription::new(vec![b"a".to_vec(), vec![]]),
            Err(Error::EmptyComponent(1))
        ));
    }

    #[test]
    fn deserialize_errors() {
        let kp = keygen(SignatureSchemeId::Ed25519, Some(b"d"));
        let bytes = generate(&kp, &fixture(), &EvidenceConfig::default())
            .unwrap()
            .to_bytes();
        assert_eq!(EvidenceRecord::from_bytes(&bytes).unwrap().to_bytes(), bytes);
        assert!(matches!(
            EvidenceRecord::from_bytes(&bytes[..3]),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            EvidenceRecord::from_bytes(&bytes[..300]),
            Err(Error::Malformed(_))
        ));
        let mut unknown = bytes.clone();
        unknown[2] = 0x7F;
        assert!(matches!(
            EvidenceRecord::from_bytes(&unknown),
            Err(Error::UnknownScheme(0x7F))
        ));
        let mut version = bytes.clone();
        version[0] = 0x02;
        assert!(matches!(EvidenceRecord::from_bytes(&version), Err(Error::Malformed(_))));
        let mut hash_id = bytes;
        hash_id[1] = 0x09;
        assert!(matches!(
            EvidenceRecord::from_bytes(&hash_id),
            Err(Error::UnknownHash(0x09))
        ));
    }

    #[test]
    fn text_format() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("model.bin"), b"\x00\x01weights").unwrap();
        let text = "\
# job 42
output = text:risk=0.3
context = text:job-42
model = file:model.bin
code = hex:c0de
input = b64:aW5wdXQ=
policy = text:irb-7
environment = hex:00ff
link_hint = text:genesis
";
        let e = EventDescription::parse_text(text, 8, Some(dir.path())).unwrap();
        assert_eq!(e.component(0), b"job-42");
        assert_eq!(e.component(1), b"\x00\x01weights");
        assert_eq!(e.component(2), [0xc0, 0xde]);
        assert_eq!(e.component(3), b"input");
        assert_eq!(e.component(OUTPUT), b"risk=0.3");
        assert_eq!(EventDescription::parse_text(&e.to_text(), 8, None).unwrap(), e);

        assert!(EventDescription::parse_text("context = text:a", 8, None).is_err());
        let dup = format!("{text}context = text:again\n");
        assert!(EventDescription::parse_text(&dup, 8, Some(dir.path())).is_err());
        assert!(EventDescription::parse_text("bogus = text:a", 8, None).is_err());
    }

    #[test]
    fn toy_hash_rebinding_search_finds_collisions() {
        // For each random event, search a replacement `output` component
        // with the same 8-bit field digest; count how often a second event
        // is accepted for the same record.
        let kp = keygen(SignatureSchemeId::Ed25519, Some(b"bind"));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut wins = [0usize; 2];
        for (slot, cfg) in [
            EvidenceConfig::harness(HashFunctionId::Sha256, 8),
            EvidenceConfig::harness(HashFunctionId::TOY8, 8),
        ]
        .iter()
        .enumerate()
        {
            let pairs = if slot == 0 { 1000 } else { 200 };
            for _ in 0..pairs {
                let e0 = EventDescription::random(&mut rng, 8);
                let rec = generate(&kp, &e0, cfg).unwrap();
                let target = rec.field_block.field(OUTPUT).to_vec();
                for attempt in 0u32..1000 {
                    let candidate = format!("alt-output-{attempt}").into_bytes();
                    if hash(cfg.hash_fn, tag::FIELD, &candidate).as_bytes() == target.as_slice() {
                        let e1 = e0.with_component(OUTPUT, candidate).unwrap();
                        if e1 != e0
                            && verify_with(Policy::Harness, kp.public_key(), &e0, &rec).is_ok()
                            && verify_with(Policy::Harness, kp.public_key(), &e1, &rec).is_ok()
                        {
                            wins[slot] += 1;
                            break;
                        }
                    }
                }
            }
        }
        assert_eq!(wins[0], 0);
        assert!(wins[1] as f64 / 200.0 > 0.9, "toy wins {}", wins[1]);
    }
}
