//! Hash-chain linkage: `ℓ_0 = 0^λ`, `ℓ_i = H(0x03 || ℓ_{i-1} || Ev_i)`, where
//! `Ev_i` is the serialized record including its header.
//!
//! [`diagnose`] compares two logs. When their tips agree but their contents
//! do not, it walks both chains backwards from the tips until the hash
//! inputs differ, and hands back that pair as a concrete collision.

use std::fmt;

use serde::Serialize;

use crate::evidence::EvidenceRecord;
use crate::primitives::{hash_parts, tag, Digest, HashFunctionId};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ChainTip {
    pub value: Digest,
    pub length: u64,
}

impl ChainTip {
    /// `ℓ_0`: all-zero, length 0.
    pub fn genesis(hash_fn: HashFunctionId) -> Self {
        ChainTip {
            value: Digest::zero(hash_fn),
            length: 0,
        }
    }
}

impl fmt::Display for ChainTip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.length, self.value)
    }
}

/// One chain step over raw record bytes.
pub fn chain_step(hash_fn: HashFunctionId, prev: &Digest, record_bytes: &[u8]) -> Digest {
    hash_parts(hash_fn, tag::CHAIN, &[prev.as_bytes(), record_bytes])
}

pub fn link(records: &[EvidenceRecord], hash_fn: HashFunctionId) -> ChainTip {
    records
        .iter()
        .fold(ChainTip::genesis(hash_fn), |tip, r| link_incremental(tip, r, hash_fn))
}

/// [`link`] over already-serialized records.
pub fn link_bytes<I>(records: I, hash_fn: HashFunctionId) -> ChainTip
where
    I: IntoIterator,
    I::Item: AsRef<[u8]>,
{
    records.into_iter().fold(ChainTip::genesis(hash_fn), |tip, r| {
        link_incremental_bytes(tip, r.as_ref(), hash_fn)
    })
}

pub fn link_incremental(tip: ChainTip, record: &EvidenceRecord, hash_fn: HashFunctionId) -> ChainTip {
    link_incremental_bytes(tip, &record.to_bytes(), hash_fn)
}

pub fn link_incremental_bytes(tip: ChainTip, record_bytes: &[u8], hash_fn: HashFunctionId) -> ChainTip {
    ChainTip {
        value: chain_step(hash_fn, &tip.value, record_bytes),
        length: tip.length + 1,
    }
}

/// Every intermediate value `ℓ_0 ..= ℓ_n`.
pub fn chain_values<B: AsRef<[u8]>>(records: &[B], hash_fn: HashFunctionId) -> Vec<Digest> {
    let mut out = Vec::with_capacity(records.len() + 1);
    let mut cur = Digest::zero(hash_fn);
    out.push(cur);
    for r in records {
        cur = chain_step(hash_fn, &cur, r.as_ref());
        out.push(cur);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DivergenceKind {
    Identical,
    /// Tips differ and the logs have different lengths. `index` is the
    /// largest differing position in the common prefix, or the shorter
    /// length when one log extends the other.
    LengthMismatch,
    /// `index` is the largest position at which the logs differ.
    DivergentAt,
    /// Tips agree although the logs differ; `collision_pair` holds two
    /// distinct chain inputs (without the `0x03` tag) that hash equal.
    HashCollision,
}

#[derive(Clone, PartialEq, Eq)]
pub struct DivergenceReport {
    pub kind: DivergenceKind,
    pub index: Option<u64>,
    pub collision_pair: Option<(Vec<u8>, Vec<u8>)>,
}

impl DivergenceReport {
    fn plain(kind: DivergenceKind, index: Option<usize>) -> Self {
        DivergenceReport {
            kind,
            index: index.map(|i| i as u64),
            collision_pair: None,
        }
    }

    /// Re-hashes a reported collision: the inputs must differ and map to the
    /// same chain value.
    pub fn collision_verifies(&self, hash_fn: HashFunctionId) -> bool {
        match &self.collision_pair {
            Some((a, b)) => a != b && hash_parts(hash_fn, tag::CHAIN, &[a]) == hash_parts(hash_fn, tag::CHAIN, &[b]),
            None => false,
        }
    }
}

impl fmt::Debug for DivergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("DivergenceReport");
        d.field("kind", &self.kind).field("index", &self.index);
        if let Some((a, b)) = &self.collision_pair {
            d.field("collision", &(hex::encode(a), hex::encode(b)));
        }
        d.finish()
    }
}

impl fmt::Display for DivergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = serde_json::to_value(self.kind).expect("unit enum");
        write!(f, "{}", kind.as_str().unwrap_or("?"))?;
        if let Some(i) = self.index {
            write!(f, " index={i}")?;
        }
        if let Some((a, b)) = &self.collision_pair {
            write!(f, " preimage_a={} preimage_b={}", hex::encode(a), hex::encode(b))?;
        }
        Ok(())
    }
}

fn chain_input(prev: &Digest, record: &[u8]) -> Vec<u8> {
    let mut v = Vec::with_capacity(prev.len() + record.len());
    v.extend_from_slice(prev.as_bytes());
    v.extend_from_slice(record);
    v
}

/// Walks two chains backwards from positions `p` in `a` and `q` in `b`,
/// which must carry equal chain values. Returns the first position pair
/// whose hash inputs differ (as record indices) together with those
/// inputs, or `None` if the walk reaches the IV first.
fn walk_back<B: AsRef<[u8]>>(
    a: &[B],
    ca: &[Digest],
    mut p: usize,
    b: &[B],
    cb: &[Digest],
    mut q: usize,
) -> Option<(usize, Vec<u8>, Vec<u8>)> {
    debug_assert_eq!(ca[p], cb[q]);
    while p > 0 && q > 0 {
        let (ra, rb) = (a[p - 1].as_ref(), b[q - 1].as_ref());
        if ca[p - 1] != cb[q - 1] || ra != rb {
            return Some((p - 1, chain_input(&ca[p - 1], ra), chain_input(&cb[q - 1], rb)));
        }
        p -= 1;
        q -= 1;
    }
    None
}

fn last_difference<B: AsRef<[u8]>>(a: &[B], b: &[B], upto: usize) -> Option<usize> {
    (0..upto).rev().find(|&i| a[i].as_ref() != b[i].as_ref())
}

/// Compares two logs of serialized records.
pub fn diagnose<B: AsRef<[u8]>>(log_a: &[B], log_b: &[B], hash_fn: HashFunctionId) -> DivergenceReport {
    let (na, nb) = (log_a.len(), log_b.len());
    if na == nb && last_difference(log_a, log_b, na).is_none() {
        return DivergenceReport::plain(DivergenceKind::Identical, None);
    }
    let ca = chain_values(log_a, hash_fn);
    let cb = chain_values(log_b, hash_fn);
    let tips_equal = ca[na] == cb[nb];

    if na == nb {
        if !tips_equal {
            return DivergenceReport::plain(DivergenceKind::DivergentAt, last_difference(log_a, log_b, na));
        }
        // Logs differ somewhere, so the walk meets differing inputs before
        // the IV.
        let (j, x, y) = walk_back(log_a, &ca, na, log_b, &cb, nb).expect("differing logs with equal tips");
        return DivergenceReport {
            kind: DivergenceKind::HashCollision,
            index: Some(j as u64),
            collision_pair: Some((x, y)),
        };
    }

    let (short, long, cs, cl) = if na < nb {
        (log_a, log_b, &ca, &cb)
    } else {
        (log_b, log_a, &cb, &ca)
    };
    let ns = short.len();
    let prefix_diff = last_difference(short, long, ns);
    if !tips_equal {
        return DivergenceReport::plain(DivergenceKind::LengthMismatch, Some(prefix_diff.unwrap_or(ns)));
    }

    // Equal tips, unequal lengths: look for a literal collision, first
    // between the two tips, then as a cycle inside the longer chain.
    let found = walk_back(short, cs, ns, long, cl, long.len()).or_else(|| {
        (cs[ns] == cl[ns])
            .then(|| walk_back(long, cl, ns, long, cl, long.len()))
            .flatten()
    });
    match found {
        Some((j, x, y)) => DivergenceReport {
            kind: DivergenceKind::HashCollision,
            index: Some(j as u64),
            collision_pair: Some((x, y)),
        },
        None => DivergenceReport::plain(DivergenceKind::DivergentAt, Some(prefix_diff.unwrap_or(ns))),
    }
}

/// [`diagnose`] over parsed records.
pub fn diagnose_records(a: &[EvidenceRecord], b: &[EvidenceRecord], hash_fn: HashFunctionId) -> DivergenceReport {
    let a: Vec<Vec<u8>> = a.iter().map(EvidenceRecord::to_bytes).collect();
    let b: Vec<Vec<u8>> = b.iter().map(EvidenceRecord::to_bytes).collect();
    diagnose(&a, &b, hash_fn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{generate, EventDescription, EvidenceConfig};
    use crate::primitives::{hash, keygen, SignatureSchemeId};
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    /// Scalar reference fold, written independently of `chain_step`.
    fn reference_tip(records: &[Vec<u8>]) -> Vec<u8> {
        use sha2::{Digest as _, Sha256};
        let mut l = vec![0u8; 32];
        for r in records {
            let mut input = vec![0x03];
            input.extend_from_slice(&l);
            input.extend_from_slice(r);
            l = Sha256::digest(&input).to_vec();
        }
        l
    }

    fn random_log(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<u8>> {
        (0..n)
            .map(|_| {
                let mut r = vec![0u8; 40];
                rng.fill_bytes(&mut r);
                r
            })
            .collect()
    }

    #[test]
    fn empty_log_is_genesis() {
        let tip = link_bytes(Vec::<Vec<u8>>::new(), HashFunctionId::Sha256);
        assert_eq!(tip.value.as_bytes(), &[0u8; 32]);
        assert_eq!(tip.length, 0);
    }

    #[test]
    fn single_record_matches_reference() {
        let kp = keygen(SignatureSchemeId::Ed25519, Some(b"link"));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = generate(&kp, &EventDescription::random(&mut rng, 8), &EvidenceConfig::default()).unwrap();
        let tip = link(std::slice::from_ref(&rec), HashFunctionId::Sha256);
        assert_eq!(tip.value.as_bytes(), reference_tip(&[rec.to_bytes()]).as_slice());
        let mut input = vec![0u8; 32];
        input.extend_from_slice(&rec.to_bytes());
        assert_eq!(tip.value, hash(HashFunctionId::Sha256, tag::CHAIN, &input));
        assert_eq!(
            link_incremental(ChainTip::genesis(HashFunctionId::Sha256), &rec, HashFunctionId::Sha256),
            tip
        );
    }

    #[test]
    fn prefixes_match_reference_fold() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let log = random_log(&mut rng, 20);
        let values = chain_values(&log, HashFunctionId::Sha256);
        for i in 0..=log.len() {
            assert_eq!(values[i].as_bytes(), reference_tip(&log[..i]).as_slice());
            assert_eq!(link_bytes(&log[..i], HashFunctionId::Sha256).value, values[i]);
        }
    }

    #[test]
    fn appending_always_changes_tip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut tip = ChainTip::genesis(HashFunctionId::Sha256);
        for _ in 0..1000 {
            let mut r = vec![0u8; 16];
            rng.fill_bytes(&mut r);
            let next = link_incremental_bytes(tip, &r, HashFunctionId::Sha256);
            assert_ne!(next.value, tip.value);
            tip = next;
        }
        assert_eq!(tip.length, 1000);
    }

    #[test]
    fn incremental_fold_equals_batch_link() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let n = rng.gen_range(0..30);
            let log = random_log(&mut rng, n);
            let folded = log.iter().fold(ChainTip::genesis(HashFunctionId::Sha256), |t, r| {
                link_incremental_bytes(t, r, HashFunctionId::Sha256)
            });
            assert_eq!(folded, link_bytes(&log, HashFunctionId::Sha256));
        }
    }

    #[test]
    fn identical_logs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let log = random_log(&mut rng, 5);
        assert_eq!(
            diagnose(&log, &log, HashFunctionId::Sha256).kind,
            DivergenceKind::Identical
        );
        let empty: Vec<Vec<u8>> = vec![];
        assert_eq!(
            diagnose(&empty, &empty, HashFunctionId::Sha256).kind,
            DivergenceKind::Identical
        );
    }

    #[test]
    fn divergence_at_position_three_of_ten() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_log(&mut rng, 10);
        let mut b = a.clone();
        b[3][0] ^= 0xFF;
        let r = diagnose(&a, &b, HashFunctionId::Sha256);
        assert_eq!(r.kind, DivergenceKind::DivergentAt);
        assert_eq!(r.index, Some(3));
    }

    #[test]
    fn truncation_reports_length_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_log(&mut rng, 10);
        let r = diagnose(&a[..7], &a, HashFunctionId::Sha256);
        assert_eq!(r.kind, DivergenceKind::LengthMismatch);
        assert_eq!(r.index, Some(7));
    }

    /// Brute-force two single-record toy8 logs with equal tips, then extend
    /// both with a common suffix.
    fn toy_colliding_logs(rng: &mut ChaCha8Rng) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
        let zero = Digest::zero(HashFunctionId::TOY8);
        let mut seen: HashMap<Digest, Vec<u8>> = HashMap::new();
        loop {
            let mut r = vec![0u8; 24];
            rng.fill_bytes(&mut r);
            let t = chain_step(HashFunctionId::TOY8, &zero, &r);
            if let Some(prev) = seen.get(&t) {
                if *prev != r {
                    let suffix = random_log(rng, 3);
                    let mut a = vec![prev.clone()];
                    let mut b = vec![r];
                    a.extend(suffix.iter().cloned());
                    b.extend(suffix);
                    return (a, b);
                }
            }
            seen.insert(t, r);
        }
    }

    #[test]
    fn toy_hash_collision_is_extracted() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (a, b) = toy_colliding_logs(&mut rng);
        assert_eq!(
            link_bytes(&a, HashFunctionId::TOY8),
            link_bytes(&b, HashFunctionId::TOY8)
        );
        let r = diagnose(&a, &b, HashFunctionId::TOY8);
        assert_eq!(r.kind, DivergenceKind::HashCollision);
        assert_eq!(r.index, Some(0));
        assert!(r.collision_verifies(HashFunctionId::TOY8));
        assert!(!r.collision_verifies(HashFunctionId::Sha256));
    }

    #[test]
    fn unequal_length_equal_tip_under_toy_hash() {
        // Search for a short and a long log with the same toy8 tip.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        for _ in 0..2000 {
            let a = random_log(&mut rng, 2);
            let b = random_log(&mut rng, 4);
            if link_bytes(&a, HashFunctionId::TOY8).value != link_bytes(&b, HashFunctionId::TOY8).value {
                continue;
            }
            let r = diagnose(&a, &b, HashFunctionId::TOY8);
            match r.kind {
                DivergenceKind::HashCollision => assert!(r.collision_verifies(HashFunctionId::TOY8)),
                DivergenceKind::DivergentAt => {}
                other => panic!("unexpected {other:?}"),
            }
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn genuine_hash_never_reports_collision() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10_000 {
            let n = rng.gen_range(1..6);
            let a = random_log(&mut rng, n);
            let mut b = a.clone();
            match rng.gen_range(0..3) {
                0 => b[rng.gen_range(0..n)][0] ^= 1,
                1 => b.truncate(n - 1),
                _ => b.push(vec![7; 8]),
            }
            let r = diagnose(&a, &b, HashFunctionId::Sha256);
            assert_ne!(r.kind, DivergenceKind::HashCollision);
            assert_ne!(r.kind, DivergenceKind::Identical);
        }
    }

    #[test]
    fn hundred_thousand_incremental_steps_are_fast() {
        let rec = vec![0xA5u8; 324];
        let start = std::time::Instant::now();
        let mut tip = ChainTip::genesis(HashFunctionId::Sha256);
        for _ in 0..100_000 {
            tip = link_incremental_bytes(tip, &rec, HashFunctionId::Sha256);
        }
        assert_eq!(tip.length, 100_000);
        assert!(start.elapsed().as_secs_f64() < 1.0, "{:?}", start.elapsed());
    }
}
