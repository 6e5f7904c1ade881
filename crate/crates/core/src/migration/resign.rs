use rayon::prelude::*;

use crate::error::{malformed, Error, RejectReason, Result, Verdict};
use crate::evidence::{verify_with, EventDescription, EvidenceRecord, Policy};
use crate::merkle::{verify_anchored_record, AnchorLookup, InclusionProof};
use crate::primitives::{hash, sign, tag, verify_sig, Digest, HashFunctionId, KeyPair, PublicKey, SignatureSchemeId};

const MAGIC: &[u8; 4] = b"EVMG";
const FORMAT_VERSION: u8 = 0x01;
const KIND_RESIGN: u8 = 0x01;
const KIND_ANCHOR: u8 = 0x02;

/// `d_i = H(0x06 || Ev_i)` over the legacy record's serialized bytes.
pub fn resign_digest(hash_fn: HashFunctionId, original: &[u8]) -> Digest {
    hash(hash_fn, tag::RESIGN, original)
}

/// `tau` signs [`resign_digest`] only. `key_id` and `signed_at` are
/// unsigned bookkeeping for auditors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResignWrapper {
    pub hash_fn: HashFunctionId,
    pub scheme: SignatureSchemeId,
    pub key_id: [u8; 8],
    /// Seconds since the Unix epoch.
    pub signed_at: u64,
    pub tau: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Wrapper {
    Resign(ResignWrapper),
    /// The batch id lives inside the proof.
    Anchor(InclusionProof),
}

/// A legacy record plus its post-quantum wrapper.
///
/// File layout: `"EVMG" | 0x01 | kind | len u32 LE | original | payload`.
/// Re-sign payloads are `hash id | scheme id | key id (8) | signed_at u64 LE
/// | tau`; anchor payloads are `len u32 LE | proof file bytes`. Entries are
/// self-delimiting and may be concatenated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MigratedRecord {
    pub original: Vec<u8>,
    pub wrapper: Wrapper,
}

impl MigratedRecord {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.original.len() + 64);
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.push(match self.wrapper {
            Wrapper::Resign(_) => KIND_RESIGN,
            Wrapper::Anchor(_) => KIND_ANCHOR,
        });
        out.extend_from_slice(&(self.original.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.original);
        match &self.wrapper {
            Wrapper::Resign(w) => {
                out.push(w.hash_fn.id());
                out.push(w.scheme.id());
                out.extend_from_slice(&w.key_id);
                out.extend_from_slice(&w.signed_at.to_le_bytes());
                out.extend_from_slice(&w.tau);
            }
            Wrapper::Anchor(p) => {
                let pb = p.to_bytes();
                out.extend_from_slice(&(pb.len() as u32).to_le_bytes());
                out.extend_from_slice(&pb);
            }
        }
        out
    }

    /// Parses one entry from the front of `bytes`, returning it and the
    /// number of bytes consumed.
    pub fn read_one(bytes: &[u8]) -> Result<(Self, usize)> {
        let mut cur = Cursor { bytes, at: 0 };
        if cur.take(4)? != MAGIC {
            return Err(malformed("not a migrated-record file"));
        }
        let version = cur.byte()?;
        if version != FORMAT_VERSION {
            return Err(malformed(format!("migrated-record version {version:#04x}")));
        }
        let kind = cur.byte()?;
        let len = cur.u32()? as usize;
        let original = cur.take(len)?.to_vec();
        let wrapper = match kind {
            KIND_RESIGN => {
                let hash_fn = HashFunctionId::from_id(cur.byte()?)?;
                let scheme = SignatureSchemeId::from_id(cur.byte()?)?;
                let key_id = cur.take(8)?.try_into().expect("8 bytes");
                let signed_at = u64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes"));
                let tau = cur.take(scheme.sig_len())?.to_vec();
                Wrapper::Resign(ResignWrapper {
                    hash_fn,
                    scheme,
                    key_id,
                    signed_at,
                    tau,
                })
            }
            KIND_ANCHOR => {
                let plen = cur.u32()? as usize;
                Wrapper::Anchor(InclusionProof::from_bytes(cur.take(plen)?)?)
            }
            other => return Err(malformed(format!("wrapper kind {other:#04x}"))),
        };
        Ok((MigratedRecord { original, wrapper }, cur.at))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (m, used) = Self::read_one(bytes)?;
        if used != bytes.len() {
            return Err(malformed("trailing bytes after migrated record"));
        }
        Ok(m)
    }

    /// Parses a concatenation of entries.
    pub fn read_all(mut bytes: &[u8]) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        while !bytes.is_empty() {
            let (m, used) = Self::read_one(bytes)?;
            out.push(m);
            bytes = &bytes[used..];
        }
        Ok(out)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| malformed("migrated record truncated"))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

/// Wraps one legacy record. Deterministic, so re-running a partially
/// completed migration reproduces identical wrappers.
pub fn resign_one(original: &[u8], kp_pq: &KeyPair, hash_fn: HashFunctionId, signed_at: u64) -> Result<MigratedRecord> {
    if !kp_pq.scheme().is_post_quantum() {
        return Err(Error::ClassicalKeyRefused);
    }
    EvidenceRecord::from_bytes(original)?;
    let tau = sign(kp_pq, resign_digest(hash_fn, original).as_bytes())?;
    Ok(MigratedRecord {
        original: original.to_vec(),
        wrapper: Wrapper::Resign(ResignWrapper {
            hash_fn,
            scheme: kp_pq.scheme(),
            key_id: kp_pq.public_key().key_id(),
            signed_at,
            tau,
        }),
    })
}

/// Re-signs `records` on a pool of `workers` threads. Output order matches
/// input order.
pub fn resign_legacy<B: AsRef<[u8]> + Sync>(
    records: &[B],
    kp_pq: &KeyPair,
    hash_fn: HashFunctionId,
    workers: usize,
    signed_at: u64,
) -> Result<Vec<MigratedRecord>> {
    if !kp_pq.scheme().is_post_quantum() {
        return Err(Error::ClassicalKeyRefused);
    }
    if workers == 0 {
        return Err(Error::InvalidParameter("workers = 0".into()));
    }
    if workers == 1 {
        return records
            .iter()
            .map(|r| resign_one(r.as_ref(), kp_pq, hash_fn, signed_at))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| {
        records
            .par_iter()
            .map(|r| resign_one(r.as_ref(), kp_pq, hash_fn, signed_at))
            .collect()
    })
}

/// Checks the post-quantum wrapper. Re-sign wrappers verify `tau` over the
/// original bytes; anchor wrappers go through the referenced batch anchor.
pub fn verify_migrated(
    m: &MigratedRecord,
    pk_pq: &PublicKey,
    anchors: &(impl AnchorLookup + ?Sized),
    hash_fn: HashFunctionId,
) -> Verdict {
    match &m.wrapper {
        Wrapper::Resign(w) => {
            let ok = w.scheme.is_post_quantum()
                && w.scheme == pk_pq.scheme()
                && w.hash_fn == hash_fn
                && w.key_id == pk_pq.key_id()
                && verify_sig(pk_pq, resign_digest(hash_fn, &m.original).as_bytes(), &w.tau);
            if ok {
                Ok(())
            } else {
                Err(RejectReason::BadWrapperSig)
            }
        }
        Wrapper::Anchor(proof) => {
            let anchor = anchors.anchor(&proof.batch_id).ok_or(RejectReason::UnknownAnchor)?;
            verify_anchored_record(&m.original, proof, anchor, pk_pq, hash_fn)
        }
    }
}

/// [`verify_migrated`] plus the embedded classical record against the
/// original event.
pub fn verify_migrated_with_original(
    m: &MigratedRecord,
    pk_pq: &PublicKey,
    anchors: &(impl AnchorLookup + ?Sized),
    hash_fn: HashFunctionId,
    pk_classical: &PublicKey,
    e: &EventDescription,
) -> Verdict {
    verify_migrated(m, pk_pq, anchors, hash_fn)?;
    let record = EvidenceRecord::from_bytes(&m.original).map_err(|_| RejectReason::Malformed)?;
    verify_with(Policy::Production, pk_classical, e, &record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{generate, EvidenceConfig};
    use crate::merkle::{anchor_batch, BatchAnchor, BatchId};
    use crate::primitives::keygen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SHA: HashFunctionId = HashFunctionId::Sha256;

    fn legacy(n: usize) -> (KeyPair, Vec<EventDescription>, Vec<Vec<u8>>) {
        let kp = keygen(SignatureSchemeId::Ed25519, Some(b"legacy"));
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let events: Vec<_> = (0..n).map(|_| EventDescription::random(&mut rng, 8)).collect();
        let recs = events
            .iter()
            .map(|e| generate(&kp, e, &EvidenceConfig::default()).unwrap().to_bytes())
            .collect();
        (kp, events, recs)
    }

    fn pq() -> KeyPair {
        keygen(SignatureSchemeId::MlDsa65, Some(b"resign"))
    }

    const NO_ANCHORS: &[BatchAnchor] = &[];

    #[test]
    fn honest_resign_verifies_and_round_trips() {
        let (c, events, recs) = legacy(6);
        let kp = pq();
        let out = resign_legacy(&recs, &kp, SHA, 1, 1_700_000_000).unwrap();
        assert_eq!(out.len(), 6);
        for (i, m) in out.iter().enumerate() {
            assert_eq!(m.original, recs[i]);
            assert_eq!(verify_migrated(m, kp.public_key(), NO_ANCHORS, SHA), Ok(()));
            assert_eq!(
                verify_migrated_with_original(m, kp.public_key(), NO_ANCHORS, SHA, c.public_key(), &events[i]),
                Ok(())
            );
            assert_eq!(MigratedRecord::from_bytes(&m.to_bytes()).unwrap(), *m);
        }
        let joined: Vec<u8> = out.iter().flat_map(MigratedRecord::to_bytes).collect();
        assert_eq!(MigratedRecord::read_all(&joined).unwrap(), out);
    }

    #[test]
    fn mutation_after_migration_rejects() {
        let (_, _, recs) = legacy(1);
        let kp = pq();
        let mut m = resign_one(&recs[0], &kp, SHA, 0).unwrap();
        m.original[40] ^= 1;
        assert_eq!(
            verify_migrated(&m, kp.public_key(), NO_ANCHORS, SHA),
            Err(RejectReason::BadWrapperSig)
        );
    }

    #[test]
    fn parallel_output_matches_sequential_order() {
        let (_, _, recs) = legacy(12);
        let kp = pq();
        let seq = resign_legacy(&recs, &kp, SHA, 1, 5).unwrap();
        let par = resign_legacy(&recs, &kp, SHA, 4, 5).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn resign_is_idempotent() {
        let (_, _, recs) = legacy(1);
        let kp = pq();
        let a = resign_one(&recs[0], &kp, SHA, 9).unwrap();
        let b = resign_one(&recs[0], &kp, SHA, 9).unwrap();
        assert_eq!(a, b);
        for m in [&a, &b] {
            assert_eq!(verify_migrated(m, kp.public_key(), NO_ANCHORS, SHA), Ok(()));
        }
    }

    #[test]
    fn empty_stream_and_classical_key() {
        let kp = pq();
        let none: Vec<Vec<u8>> = vec![];
        assert!(resign_legacy(&none, &kp, SHA, 2, 0).unwrap().is_empty());
        let (c, _, recs) = legacy(1);
        assert!(matches!(
            resign_legacy(&recs, &c, SHA, 1, 0),
            Err(Error::ClassicalKeyRefused)
        ));
        assert!(resign_one(b"garbage", &kp, SHA, 0).is_err());
    }

    #[test]
    fn anchor_wrappers() {
        let (_, _, recs) = legacy(5);
        let kp = pq();
        let id = BatchId::sequential(0);
        let (anchor, tree) = anchor_batch(&recs, &kp, id, 0, SHA).unwrap();
        let m = MigratedRecord {
            original: recs[2].clone(),
            wrapper: Wrapper::Anchor(tree.prove_inclusion(id, 2).unwrap()),
        };
        assert_eq!(MigratedRecord::from_bytes(&m.to_bytes()).unwrap(), m);
        assert_eq!(verify_migrated(&m, kp.public_key(), &vec![anchor.clone()], SHA), Ok(()));
        assert_eq!(
            verify_migrated(&m, kp.public_key(), NO_ANCHORS, SHA),
            Err(RejectReason::UnknownAnchor)
        );
        let mut tampered = m.clone();
        tampered.original[10] ^= 1;
        assert_eq!(
            verify_migrated(&tampered, kp.public_key(), &vec![anchor], SHA),
            Err(RejectReason::BadProof)
        );
    }

    #[test]
    fn wrong_key_rejects() {
        let (_, _, recs) = legacy(1);
        let m = resign_one(&recs[0], &pq(), SHA, 0).unwrap();
        let other = keygen(SignatureSchemeId::MlDsa65, Some(b"other"));
        assert_eq!(
            verify_migrated(&m, other.public_key(), NO_ANCHORS, SHA),
            Err(RejectReason::BadWrapperSig)
        );
    }

    #[test]
    fn truncated_files_are_errors() {
        let (_, _, recs) = legacy(1);
        let bytes = resign_one(&recs[0], &pq(), SHA, 0).unwrap().to_bytes();
        for cut in [0, 3, 5, 9, 100, bytes.len() - 1] {
            assert!(MigratedRecord::from_bytes(&bytes[..cut]).is_err(), "cut {cut}");
        }
    }
}
