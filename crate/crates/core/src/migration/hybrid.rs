use std::fmt;

use crate::error::{malformed, Error, RejectReason, Result, Verdict};
use crate::evidence::{
    fields_encode, fields_encode_checked, EventDescription, EvidenceConfig, EvidenceRecord, FieldBlock, Policy,
    HEADER_LEN, RECORD_VERSION,
};
use crate::primitives::{sign, verify_sig, HashFunctionId, KeyPair, PublicKey, SignatureSchemeId};

/// Set in the version byte of hybrid records; plain records never carry it.
pub const HYBRID_FLAG: u8 = 0x80;

/// Four-bit suite codes packed into header byte 2 as `classical << 4 | pq`.
fn suite_code(s: SignatureSchemeId) -> Result<u8> {
    Ok(match s {
        SignatureSchemeId::Ed25519 => 0x1,
        SignatureSchemeId::MlDsa65 => 0x2,
        SignatureSchemeId::MlDsa87 => 0x3,
        SignatureSchemeId::SlhDsaSha2_128s => 0x4,
        SignatureSchemeId::ToyTruncatedHash { bytes: 1 } => 0xE,
        SignatureSchemeId::ToyConstant => 0xF,
        other => return Err(Error::InvalidParameter(format!("{other} has no hybrid suite code"))),
    })
}

fn from_suite_code(c: u8) -> Result<SignatureSchemeId> {
    Ok(match c {
        0x1 => SignatureSchemeId::Ed25519,
        0x2 => SignatureSchemeId::MlDsa65,
        0x3 => SignatureSchemeId::MlDsa87,
        0x4 => SignatureSchemeId::SlhDsaSha2_128s,
        0xE => SignatureSchemeId::TOY_HASH8,
        0xF => SignatureSchemeId::ToyConstant,
        other => return Err(malformed(format!("hybrid suite code {other:#x}"))),
    })
}

/// `(x, σ_class, σ_pq)`: both signatures cover the same `m = H(0x02 || x)`.
///
/// Wire layout: `0x81 | hash id | classical<<4 | pq | k | x | σ_class | σ_pq`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HybridEvidenceRecord {
    pub classical: SignatureSchemeId,
    pub pq: SignatureSchemeId,
    pub field_block: FieldBlock,
    pub sig_classical: Vec<u8>,
    pub sig_pq: Vec<u8>,
}

impl HybridEvidenceRecord {
    pub fn encoded_len(
        hash_fn: HashFunctionId,
        classical: SignatureSchemeId,
        pq: SignatureSchemeId,
        k: usize,
    ) -> usize {
        HEADER_LEN + k * hash_fn.output_len() + classical.sig_len() + pq.sig_len()
    }

    pub fn hash_fn(&self) -> HashFunctionId {
        self.field_block.hash_fn()
    }

    pub fn len(&self) -> usize {
        Self::encoded_len(self.hash_fn(), self.classical, self.pq, self.field_block.k())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let suite = suite_code(self.classical).expect("checked at construction") << 4
            | suite_code(self.pq).expect("checked at construction");
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&[
            RECORD_VERSION | HYBRID_FLAG,
            self.hash_fn().id(),
            suite,
            self.field_block.k() as u8,
        ]);
        out.extend_from_slice(self.field_block.as_bytes());
        out.extend_from_slice(&self.sig_classical);
        out.extend_from_slice(&self.sig_pq);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(malformed("hybrid record truncated"));
        }
        if bytes[0] != RECORD_VERSION | HYBRID_FLAG {
            return Err(malformed(format!(
                "not a hybrid record (version byte {:#04x})",
                bytes[0]
            )));
        }
        let hash_fn = HashFunctionId::from_id(bytes[1])?;
        let classical = from_suite_code(bytes[2] >> 4)?;
        let pq = from_suite_code(bytes[2] & 0x0F)?;
        let k = bytes[3] as usize;
        if k == 0 {
            return Err(malformed("record with k = 0"));
        }
        let expected = Self::encoded_len(hash_fn, classical, pq, k);
        if bytes.len() != expected {
            return Err(malformed(format!(
                "hybrid record is {} bytes, header implies {expected}",
                bytes.len()
            )));
        }
        let fields_end = HEADER_LEN + k * hash_fn.output_len();
        let class_end = fields_end + classical.sig_len();
        Ok(HybridEvidenceRecord {
            classical,
            pq,
            field_block: FieldBlock::from_bytes(hash_fn, k, bytes[HEADER_LEN..fields_end].to_vec())?,
            sig_classical: bytes[fields_end..class_end].to_vec(),
            sig_pq: bytes[class_end..].to_vec(),
        })
    }
}

impl fmt::Debug for HybridEvidenceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HybridEvidenceRecord")
            .field("classical", &self.classical)
            .field("pq", &self.pq)
            .field("field_block", &self.field_block)
            .finish_non_exhaustive()
    }
}

/// Either record shape, dispatched on the hybrid flag in byte 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyRecord {
    Plain(EvidenceRecord),
    Hybrid(HybridEvidenceRecord),
}

impl AnyRecord {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        match bytes.first() {
            Some(b) if b & HYBRID_FLAG != 0 => HybridEvidenceRecord::from_bytes(bytes).map(AnyRecord::Hybrid),
            _ => EvidenceRecord::from_bytes(bytes).map(AnyRecord::Plain),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            AnyRecord::Plain(r) => r.to_bytes(),
            AnyRecord::Hybrid(r) => r.to_bytes(),
        }
    }

    /// Serialized length implied by a header, for either shape.
    pub fn len_from_header(header: &[u8]) -> Result<usize> {
        if header.len() < HEADER_LEN {
            return Err(malformed("header truncated"));
        }
        let hash_fn = HashFunctionId::from_id(header[1])?;
        let k = header[3] as usize;
        if header[0] & HYBRID_FLAG != 0 {
            let c = from_suite_code(header[2] >> 4)?;
            let p = from_suite_code(header[2] & 0x0F)?;
            Ok(HybridEvidenceRecord::encoded_len(hash_fn, c, p, k))
        } else {
            Ok(EvidenceRecord::encoded_len(
                hash_fn,
                SignatureSchemeId::from_id(header[2])?,
                k,
            ))
        }
    }
}

/// Signs `m` under both keys. The first key must be classical and the
/// second post-quantum.
pub fn generate_hybrid(
    kp_classical: &KeyPair,
    kp_pq: &KeyPair,
    e: &EventDescription,
    cfg: &EvidenceConfig,
) -> Result<HybridEvidenceRecord> {
    if kp_classical.scheme().is_post_quantum() || !kp_pq.scheme().is_post_quantum() {
        return Err(Error::HybridKeyMix);
    }
    cfg.check(kp_classical.scheme())?;
    cfg.check(kp_pq.scheme())?;
    suite_code(kp_classical.scheme())?;
    suite_code(kp_pq.scheme())?;
    let field_block = fields_encode_checked(e, cfg)?;
    let m = field_block.message();
    let sig_classical = sign(kp_classical, m.as_bytes())?;
    let sig_pq = sign(kp_pq, m.as_bytes())?;
    Ok(HybridEvidenceRecord {
        classical: kp_classical.scheme(),
        pq: kp_pq.scheme(),
        field_block,
        sig_classical,
        sig_pq,
    })
}

/// Production-policy hybrid verification: field block, then the classical
/// signature, then the post-quantum one. Both must verify.
pub fn verify_hybrid(
    pk_classical: &PublicKey,
    pk_pq: &PublicKey,
    e: &EventDescription,
    record: &HybridEvidenceRecord,
) -> Verdict {
    verify_hybrid_with(Policy::Production, pk_classical, pk_pq, e, record)
}

pub fn verify_hybrid_with(
    policy: Policy,
    pk_classical: &PublicKey,
    pk_pq: &PublicKey,
    e: &EventDescription,
    record: &HybridEvidenceRecord,
) -> Verdict {
    check_suite(policy, record)?;
    let hash_fn = record.hash_fn();
    if e.k() != record.field_block.k() || fields_encode(e, hash_fn) != record.field_block {
        return Err(RejectReason::FieldMismatch);
    }
    check_signatures(pk_classical, pk_pq, record)
}

/// Both signatures without the field check, for auditors that do not hold
/// the raw event.
pub fn verify_hybrid_signatures(
    policy: Policy,
    pk_classical: &PublicKey,
    pk_pq: &PublicKey,
    record: &HybridEvidenceRecord,
) -> Verdict {
    check_suite(policy, record)?;
    check_signatures(pk_classical, pk_pq, record)
}

fn check_suite(policy: Policy, record: &HybridEvidenceRecord) -> Verdict {
    if !policy.admits_hash(record.hash_fn())
        || !policy.admits_scheme(record.classical)
        || !policy.admits_scheme(record.pq)
    {
        return Err(RejectReason::Malformed);
    }
    if !record.pq.is_post_quantum() {
        return Err(RejectReason::BadPqSig);
    }
    Ok(())
}

fn check_signatures(pk_classical: &PublicKey, pk_pq: &PublicKey, record: &HybridEvidenceRecord) -> Verdict {
    let m = record.field_block.message();
    if pk_classical.scheme() != record.classical || !verify_sig(pk_classical, m.as_bytes(), &record.sig_classical) {
        return Err(RejectReason::BadClassicalSig);
    }
    if pk_pq.scheme() != record.pq || !verify_sig(pk_pq, m.as_bytes(), &record.sig_pq) {
        return Err(RejectReason::BadPqSig);
    }
    Ok(())
}

/// Hybrid-policy verification over raw bytes: plain (legacy) records lack a
/// post-quantum signature and are rejected as such.
pub fn verify_hybrid_bytes(
    policy: Policy,
    pk_classical: &PublicKey,
    pk_pq: &PublicKey,
    e: &EventDescription,
    bytes: &[u8],
) -> Verdict {
    match AnyRecord::from_bytes(bytes) {
        Ok(AnyRecord::Hybrid(r)) => verify_hybrid_with(policy, pk_classical, pk_pq, e, &r),
        Ok(AnyRecord::Plain(_)) => Err(RejectReason::BadPqSig),
        Err(_) => Err(RejectReason::Malformed),
    }
}
