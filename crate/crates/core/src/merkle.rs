//! Merkle batching of records, PQ-signed batch roots, and inclusion proofs.
//!
//! Leaves are `H(0x04 || record)`, nodes `H(0x05 || left || right)`. Levels
//! are reduced pairwise; a lone trailing node moves up unchanged rather than
//! being paired with itself.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{malformed, Error, RejectReason, Result, Verdict};
use crate::linkage::{link_bytes, ChainTip};
use crate::primitives::{
    hash, hash_parts, sign, tag, verify_sig, Digest, HashFunctionId, KeyPair, PublicKey, SignatureSchemeId,
};

pub const DEFAULT_BATCH_SIZE: u64 = 4096;

const ANCHOR_MAGIC: &[u8; 4] = b"EVAN";
const PROOF_MAGIC: &[u8; 4] = b"EVPF";
const FORMAT_VERSION: u8 = 0x01;

/// Below this many leaves, hashing on one thread is faster than fanning out.
const PAR_THRESHOLD: usize = 512;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BatchId(pub [u8; 16]);

impl BatchId {
    /// Ids for the n-th batch of a log: `n` big-endian in the low 8 bytes.
    pub fn sequential(n: u64) -> Self {
        let mut id = [0u8; 16];
        id[8..].copy_from_slice(&n.to_be_bytes());
        BatchId(id)
    }

    /// Ids for an anchored log range: `start` then `end`, big-endian.
    pub fn for_range(start: u64, end: u64) -> Self {
        let mut id = [0u8; 16];
        id[..8].copy_from_slice(&start.to_be_bytes());
        id[8..].copy_from_slice(&end.to_be_bytes());
        BatchId(id)
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut id = [0u8; 16];
        rng.fill_bytes(&mut id);
        BatchId(id)
    }
}

impl fmt::Display for BatchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for BatchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BatchId({self})")
    }
}

impl FromStr for BatchId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let raw = hex::decode(s.trim()).map_err(|e| malformed(format!("batch id: {e}")))?;
        let arr: [u8; 16] = raw.try_into().map_err(|_| malformed("batch id must be 16 bytes"))?;
        Ok(BatchId(arr))
    }
}

/// Which side of the running hash the sibling sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn to_byte(self) -> u8 {
        match self {
            Side::Left => 0x00,
            Side::Right => 0x01,
        }
    }

    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0x00 => Ok(Side::Left),
            0x01 => Ok(Side::Right),
            other => Err(malformed(format!("proof side byte {other:#04x}"))),
        }
    }
}

pub fn leaf_hash(hash_fn: HashFunctionId, record_bytes: &[u8]) -> Digest {
    hash(hash_fn, tag::MERKLE_LEAF, record_bytes)
}

pub fn node_hash(hash_fn: HashFunctionId, left: &Digest, right: &Digest) -> Digest {
    hash_parts(hash_fn, tag::MERKLE_NODE, &[left.as_bytes(), right.as_bytes()])
}

/// `ceil(log2 n)`, with 0 for `n <= 1`.
pub fn tree_depth(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// `ceil(N / b)`.
pub fn anchor_count(n: u64, batch_size: u64) -> u64 {
    assert!(batch_size > 0, "batch size must be positive");
    n.div_ceil(batch_size)
}

/// The sibling sides a valid proof for leaf `index` of an `n`-leaf tree
/// must have, bottom up. Promoted levels contribute nothing.
pub fn proof_shape(n: u64, index: u64) -> Vec<Side> {
    let mut sides = Vec::new();
    let (mut width, mut i) = (n, index);
    while width > 1 {
        if i % 2 == 1 {
            sides.push(Side::Left);
        } else if i + 1 < width {
            sides.push(Side::Right);
        }
        i /= 2;
        width = width.div_ceil(2);
    }
    sides
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MerkleTree {
    hash_fn: HashFunctionId,
    /// `levels[0]` are the leaves, the last level holds only the root.
    levels: Vec<Vec<Digest>>,
}

impl MerkleTree {
    pub fn from_leaves(hash_fn: HashFunctionId, leaves: Vec<Digest>) -> Result<Self> {
        if leaves.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut levels = vec![leaves];
        while levels.last().expect("non-empty").len() > 1 {
            let cur = levels.last().expect("non-empty");
            let pair = |c: &[Digest]| match c {
                [l, r] => node_hash(hash_fn, l, r),
                [lone] => *lone,
                _ => unreachable!(),
            };
            let next: Vec<Digest> = if cur.len() >= PAR_THRESHOLD {
                cur.par_chunks(2).map(pair).collect()
            } else {
                cur.chunks(2).map(pair).collect()
            };
            levels.push(next);
        }
        Ok(MerkleTree { hash_fn, levels })
    }

    pub fn hash_fn(&self) -> HashFunctionId {
        self.hash_fn
    }

    pub fn leaf_count(&self) -> u64 {
        self.levels[0].len() as u64
    }

    pub fn leaves(&self) -> &[Digest] {
        &self.levels[0]
    }

    pub fn levels(&self) -> &[Vec<Digest>] {
        &self.levels
    }

    pub fn root(&self) -> Digest {
        self.levels.last().expect("non-empty")[0]
    }

    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn prove_inclusion(&self, batch_id: BatchId, index: u64) -> Result<InclusionProof> {
        let n = self.leaf_count();
        if index >= n {
            return Err(Error::OutOfRange { index, len: n });
        }
        let mut path = Vec::with_capacity(self.depth() as usize);
        let mut i = index as usize;
        for level in &self.levels[..self.levels.len() - 1] {
            if i % 2 == 1 {
                path.push((Side::Left, level[i - 1]));
            } else if i + 1 < level.len() {
                path.push((Side::Right, level[i + 1]));
            }
            i /= 2;
        }
        Ok(InclusionProof {
            batch_id,
            leaf_index: index,
            path,
        })
    }
}

/// Builds the tree over serialized records. Leaf hashing fans out across
/// the rayon pool for large batches.
pub fn build_tree<B: AsRef<[u8]> + Sync>(records: &[B], hash_fn: HashFunctionId) -> Result<MerkleTree> {
    let leaves: Vec<Digest> = if records.len() >= PAR_THRESHOLD {
        records.par_iter().map(|r| leaf_hash(hash_fn, r.as_ref())).collect()
    } else {
        records.iter().map(|r| leaf_hash(hash_fn, r.as_ref())).collect()
    };
    MerkleTree::from_leaves(hash_fn, leaves)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionProof {
    pub batch_id: BatchId,
    /// Position within the batch, not within the whole log.
    pub leaf_index: u64,
    pub path: Vec<(Side, Digest)>,
}

impl InclusionProof {
    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.path.first().map_or(0, |(_, d)| d.len());
        let mut out = Vec::with_capacity(4 + 1 + 16 + 8 + 2 + self.path.len() * (1 + w));
        out.extend_from_slice(PROOF_MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&self.batch_id.0);
        out.extend_from_slice(&self.leaf_index.to_le_bytes());
        out.extend_from_slice(&(self.path.len() as u16).to_le_bytes());
        for (side, d) in &self.path {
            out.push(side.to_byte());
            out.extend_from_slice(d.as_bytes());
        }
        out
    }

    /// Parses one proof. The digest width is not stored, so it is inferred
    /// from the remaining length and the entry count.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        const FIXED: usize = 4 + 1 + 16 + 8 + 2;
        if bytes.len() < FIXED || &bytes[..4] != PROOF_MAGIC {
            return Err(malformed("not a proof file"));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(malformed(format!("proof version {:#04x}", bytes[4])));
        }
        let batch_id = BatchId(bytes[5..21].try_into().expect("16 bytes"));
        let leaf_index = u64::from_le_bytes(bytes[21..29].try_into().expect("8 bytes"));
        let count = u16::from_le_bytes([bytes[29], bytes[30]]) as usize;
        let rest = &bytes[FIXED..];
        if count == 0 {
            if !rest.is_empty() {
                return Err(malformed("trailing bytes after empty proof"));
            }
            return Ok(InclusionProof {
                batch_id,
                leaf_index,
                path: Vec::new(),
            });
        }
        if rest.len() % count != 0 {
            return Err(malformed("proof entries have uneven width"));
        }
        let entry = rest.len() / count;
        if !(2..=1 + crate::primitives::MAX_DIGEST_LEN).contains(&entry) {
            return Err(malformed(format!("proof entry of {entry} bytes")));
        }
        let path = rest
            .chunks(entry)
            .map(|c| Ok((Side::from_byte(c[0])?, Digest::from_slice(&c[1..])?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(InclusionProof {
            batch_id,
            leaf_index,
            path,
        })
    }

    /// Folds the path from `leaf` upwards.
    pub fn compute_root(&self, leaf: &Digest, hash_fn: HashFunctionId) -> Digest {
        self.path.iter().fold(*leaf, |cur, (side, sib)| match side {
            Side::Left => node_hash(hash_fn, sib, &cur),
            Side::Right => node_hash(hash_fn, &cur, sib),
        })
    }
}

/// Accepts iff the path folds `leaf_digest` to `root`. Digests of the wrong
/// width reject.
pub fn verify_inclusion(proof: &InclusionProof, leaf_digest: &Digest, root: &Digest, hash_fn: HashFunctionId) -> bool {
    let w = hash_fn.output_len();
    if leaf_digest.len() != w || root.len() != w || proof.path.iter().any(|(_, d)| d.len() != w) {
        return false;
    }
    proof.compute_root(leaf_digest, hash_fn) == *root
}

/// A signed batch root. `tau` covers
/// `H(0x06 || root || batch_id || start || end || chain_tip)`, with the
/// range as little-endian u64s and `chain_tip` the hash chain over just
/// this batch's records, started from the all-zero IV.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchAnchor {
    pub batch_id: BatchId,
    pub hash_fn: HashFunctionId,
    pub scheme: SignatureSchemeId,
    /// `[start, end)` in log positions.
    pub record_range: (u64, u64),
    pub chain_tip: Digest,
    pub root: Digest,
    pub tau: Vec<u8>,
}

impl BatchAnchor {
    pub fn record_count(&self) -> u64 {
        self.record_range.1 - self.record_range.0
    }

    pub fn message(&self) -> Digest {
        anchor_message(
            self.hash_fn,
            &self.root,
            self.batch_id,
            self.record_range,
            &self.chain_tip,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(ANCHOR_MAGIC);
        out.push(FORMAT_VERSION);
        out.push(self.hash_fn.id());
        out.push(self.scheme.id());
        out.extend_from_slice(&self.batch_id.0);
        out.extend_from_slice(&self.record_range.0.to_le_bytes());
        out.extend_from_slice(&self.record_range.1.to_le_bytes());
        out.extend_from_slice(self.chain_tip.as_bytes());
        out.extend_from_slice(self.root.as_bytes());
        out.extend_from_slice(&self.tau);
        out
    }

    pub fn encoded_len(hash_fn: HashFunctionId, scheme: SignatureSchemeId) -> usize {
        4 + 1 + 1 + 1 + 16 + 8 + 8 + 2 * hash_fn.output_len() + scheme.sig_len()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 7 || &bytes[..4] != ANCHOR_MAGIC {
            return Err(malformed("not an anchor file"));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(malformed(format!("anchor version {:#04x}", bytes[4])));
        }
        let hash_fn = HashFunctionId::from_id(bytes[5])?;
        let scheme = SignatureSchemeId::from_id(bytes[6])?;
        let expected = Self::encoded_len(hash_fn, scheme);
        if bytes.len() != expected {
            return Err(malformed(format!(
                "anchor is {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let w = hash_fn.output_len();
        let batch_id = BatchId(bytes[7..23].try_into().expect("16 bytes"));
        let start = u64::from_le_bytes(bytes[23..31].try_into().expect("8 bytes"));
        let end = u64::from_le_bytes(bytes[31..39].try_into().expect("8 bytes"));
        if end <= start {
            return Err(malformed(format!("anchor range [{start}, {end})")));
        }
        let tip_at = 39;
        let root_at = tip_at + w;
        let sig_at = root_at + w;
        Ok(BatchAnchor {
            batch_id,
            hash_fn,
            scheme,
            record_range: (start, end),
            chain_tip: Digest::from_slice(&bytes[tip_at..root_at])?,
            root: Digest::from_slice(&bytes[root_at..sig_at])?,
            tau: bytes[sig_at..].to_vec(),
        })
    }
}

pub fn anchor_message(
    hash_fn: HashFunctionId,
    root: &Digest,
    batch_id: BatchId,
    range: (u64, u64),
    chain_tip: &Digest,
) -> Digest {
    hash_parts(
        hash_fn,
        tag::RESIGN,
        &[
            root.as_bytes(),
            &batch_id.0,
            &range.0.to_le_bytes(),
            &range.1.to_le_bytes(),
            chain_tip.as_bytes(),
        ],
    )
}

/// Builds the batch tree and signs its root with a post-quantum key. The
/// batch covers log positions `[start, start + records.len())`.
pub fn anchor_batch<B: AsRef<[u8]> + Sync>(
    records: &[B],
    kp_pq: &KeyPair,
    batch_id: BatchId,
    start: u64,
    hash_fn: HashFunctionId,
) -> Result<(BatchAnchor, MerkleTree)> {
    if !kp_pq.scheme().is_post_quantum() {
        return Err(Error::ClassicalKeyRefused);
    }
    let tree = build_tree(records, hash_fn)?;
    let tip: ChainTip = link_bytes(records.iter().map(AsRef::as_ref), hash_fn);
    let range = (start, start + records.len() as u64);
    let root = tree.root();
    let msg = anchor_message(hash_fn, &root, batch_id, range, &tip.value);
    let tau = sign(kp_pq, msg.as_bytes())?;
    Ok((
        BatchAnchor {
            batch_id,
            hash_fn,
            scheme: kp_pq.scheme(),
            record_range: range,
            chain_tip: tip.value,
            root,
            tau,
        },
        tree,
    ))
}

/// Checks the anchor signature alone.
pub fn verify_anchor(anchor: &BatchAnchor, pk_pq: &PublicKey) -> Verdict {
    if !anchor.scheme.is_post_quantum() || pk_pq.scheme() != anchor.scheme {
        return Err(RejectReason::BadAnchorSig);
    }
    if verify_sig(pk_pq, anchor.message().as_bytes(), &anchor.tau) {
        Ok(())
    } else {
        Err(RejectReason::BadAnchorSig)
    }
}

/// Accepts iff the record's leaf proves into `anchor.root` along the path
/// shape its position dictates, and `anchor.tau` verifies under `pk_pq`.
pub fn verify_anchored_record(
    record_bytes: &[u8],
    proof: &InclusionProof,
    anchor: &BatchAnchor,
    pk_pq: &PublicKey,
    hash_fn: HashFunctionId,
) -> Verdict {
    let n = anchor.record_count();
    let shape_ok = proof.batch_id == anchor.batch_id
        && anchor.hash_fn == hash_fn
        && proof.leaf_index < n
        && proof.path.iter().map(|(s, _)| *s).eq(proof_shape(n, proof.leaf_index));
    if !shape_ok || !verify_inclusion(proof, &leaf_hash(hash_fn, record_bytes), &anchor.root, hash_fn) {
        return Err(RejectReason::BadProof);
    }
    verify_anchor(anchor, pk_pq)
}

/// Resolves batch ids to anchors.
pub trait AnchorLookup {
    fn anchor(&self, id: &BatchId) -> Option<&BatchAnchor>;
}

impl AnchorLookup for HashMap<BatchId, BatchAnchor> {
    fn anchor(&self, id: &BatchId) -> Option<&BatchAnchor> {
        self.get(id)
    }
}

impl AnchorLookup for [BatchAnchor] {
    fn anchor(&self, id: &BatchId) -> Option<&BatchAnchor> {
        self.iter().find(|a| a.batch_id == *id)
    }
}

impl AnchorLookup for Vec<BatchAnchor> {
    fn anchor(&self, id: &BatchId) -> Option<&BatchAnchor> {
        self.as_slice().anchor(id)
    }
}
