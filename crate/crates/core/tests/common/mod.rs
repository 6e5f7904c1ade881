//! Helpers shared by the golden, property and acceptance targets.
#![allow(dead_code)]

use std::path::PathBuf;

use evtrail::evidence::{RecordHeader, RECORD_VERSION};
use evtrail::merkle::Side;
use evtrail::migration::{resign_one, ResignWrapper, Wrapper};
use evtrail::store::{LogStore, SyncPolicy};
use evtrail::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest as _, Sha256};

pub const H: HashFunctionId = HashFunctionId::Sha256;

pub fn sha(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}

pub fn event(tag: u8) -> EventDescription {
    EventDescription::new((0..8u8).map(|j| vec![tag, j, b'e', b'v']).collect()).unwrap()
}

pub fn ed() -> KeyPair {
    keygen(SignatureSchemeId::Ed25519, Some(b"golden classical"))
}

pub fn ml() -> KeyPair {
    keygen(SignatureSchemeId::MlDsa65, Some(b"golden pq"))
}

pub fn legacy(n: u8) -> Vec<Vec<u8>> {
    (0..n)
        .map(|i| {
            generate(&ed(), &event(i), &EvidenceConfig::default())
                .unwrap()
                .to_bytes()
        })
        .collect()
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.hex"))
}

pub fn read_fixture(name: &str) -> Option<Vec<u8>> {
    let text = std::fs::read_to_string(fixture_path(name)).ok()?;
    hex::decode(text.split_whitespace().collect::<String>()).ok()
}

pub fn write_fixture(name: &str, bytes: &[u8]) {
    let text: String = hex::encode(bytes)
        .as_bytes()
        .chunks(64)
        .map(|c| format!("{}\n", std::str::from_utf8(c).unwrap()))
        .collect();
    let path = fixture_path(name);
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, text).unwrap();
}

/// Every frozen artifact, as the library produces it today.
pub fn fixture_artifacts() -> Vec<(&'static str, Vec<u8>)> {
    let (kc, kq) = (ed(), ml());
    let cfg = EvidenceConfig::default();
    let record = generate(&kc, &event(0), &cfg).unwrap().to_bytes();
    let hybrid = generate_hybrid(&kc, &kq, &event(1), &cfg).unwrap().to_bytes();

    let three = legacy(3);
    let id = BatchId::sequential(7);
    let (anchor, tree) = anchor_batch(&three, &kq, id, 40, H).unwrap();
    let proof = tree.prove_inclusion(id, 2).unwrap().to_bytes();

    let two = legacy(2);
    let resigned = resign_one(&two[0], &kq, H, 1_700_000_000).unwrap().to_bytes();
    let (_, tree2) = anchor_batch(&two, &kq, BatchId::sequential(1), 0, H).unwrap();
    let anchored = MigratedRecord {
        original: two[0].clone(),
        wrapper: Wrapper::Anchor(tree2.prove_inclusion(BatchId::sequential(1), 0).unwrap()),
    }
    .to_bytes();

    let dir = tempfile::tempdir().unwrap();
    let mut store = LogStore::create(dir.path(), H).unwrap();
    store.set_sync_policy(SyncPolicy::OnCheckpoint);
    for r in &three {
        store.append(r).unwrap();
    }
    store.close().unwrap();
    let segment = std::fs::read(dir.path().join("seg-000000.evlg")).unwrap();

    vec![
        ("record_ed25519", record),
        ("record_hybrid_ed25519_mldsa65", hybrid),
        ("anchor_mldsa65", anchor.to_bytes()),
        ("proof_leaf2_of3", proof),
        ("migrated_resign", resigned),
        ("migrated_anchor", anchored),
        ("segment_3_records", segment),
    ]
}

fn random_bytes(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    let mut v = vec![0u8; n];
    rng.fill(&mut v[..]);
    v
}

fn random_digest(rng: &mut ChaCha8Rng) -> Digest {
    Digest::from_slice(&random_bytes(rng, 32)).unwrap()
}

/// Builds `n` random instances of each serialized type and checks
/// `from_bytes(to_bytes(x)) == x`. Returns the first mismatch.
pub fn round_trip_random(seed: u64, n: usize) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pqs = [
        SignatureSchemeId::MlDsa65,
        SignatureSchemeId::MlDsa87,
        SignatureSchemeId::SlhDsaSha2_128s,
    ];
    for i in 0..n {
        let k = rng.gen_range(1..=16usize);
        let scheme = *SignatureSchemeId::GENUINE.choose(&mut rng).unwrap();
        let fb = FieldBlock::from_bytes(H, k, random_bytes(&mut rng, k * 32)).unwrap();
        let rec = EvidenceRecord {
            header: RecordHeader {
                version: RECORD_VERSION,
                hash_fn: H,
                scheme,
                k: k as u8,
            },
            field_block: fb.clone(),
            signature: random_bytes(&mut rng, scheme.sig_len()),
        };
        let rec_bytes = rec.to_bytes();
        if EvidenceRecord::from_bytes(&rec_bytes).ok().as_ref() != Some(&rec) {
            return Err(format!("record #{i}"));
        }

        let pq = *pqs.choose(&mut rng).unwrap();
        let hy = HybridEvidenceRecord {
            classical: SignatureSchemeId::Ed25519,
            pq,
            field_block: fb,
            sig_classical: random_bytes(&mut rng, 64),
            sig_pq: random_bytes(&mut rng, pq.sig_len()),
        };
        if HybridEvidenceRecord::from_bytes(&hy.to_bytes()).ok().as_ref() != Some(&hy) {
            return Err(format!("hybrid record #{i}"));
        }

        let depth = rng.gen_range(0..=20usize);
        let proof = InclusionProof {
            batch_id: BatchId::random(&mut rng),
            leaf_index: rng.gen(),
            path: (0..depth)
                .map(|_| {
                    let side = if rng.gen() { Side::Left } else { Side::Right };
                    (side, random_digest(&mut rng))
                })
                .collect(),
        };
        if InclusionProof::from_bytes(&proof.to_bytes()).ok().as_ref() != Some(&proof) {
            return Err(format!("proof #{i}"));
        }

        let start = rng.gen_range(0..u64::MAX / 2);
        let anchor = BatchAnchor {
            batch_id: BatchId::random(&mut rng),
            hash_fn: H,
            scheme: pq,
            record_range: (start, start + rng.gen_range(1..1 << 20)),
            chain_tip: random_digest(&mut rng),
            root: random_digest(&mut rng),
            tau: random_bytes(&mut rng, pq.sig_len()),
        };
        if BatchAnchor::from_bytes(&anchor.to_bytes()).ok().as_ref() != Some(&anchor) {
            return Err(format!("anchor #{i}"));
        }

        let wrapper = if rng.gen() {
            Wrapper::Anchor(proof)
        } else {
            Wrapper::Resign(ResignWrapper {
                hash_fn: H,
                scheme: pq,
                key_id: rng.gen(),
                signed_at: rng.gen(),
                tau: random_bytes(&mut rng, pq.sig_len()),
            })
        };
        let m = MigratedRecord {
            original: rec_bytes,
            wrapper,
        };
        if MigratedRecord::from_bytes(&m.to_bytes()).ok().as_ref() != Some(&m) {
            return Err(format!("migrated record #{i}"));
        }
    }
    Ok(())
}

/// Merkle root by splitting at the largest power of two below n.
pub fn reference_root_split(leaves: &[&[u8]]) -> [u8; 32] {
    if leaves.len() == 1 {
        return sha(&[&[0x04], leaves[0]]);
    }
    let k = leaves.len().next_power_of_two() / 2;
    sha(&[
        &[0x05],
        &reference_root_split(&leaves[..k]),
        &reference_root_split(&leaves[k..]),
    ])
}

/// Merkle root by pairing level by level, carrying a lone last node up.
pub fn reference_root_levels(leaves: &[&[u8]]) -> [u8; 32] {
    fn up(level: Vec<[u8; 32]>) -> [u8; 32] {
        if level.len() == 1 {
            return level[0];
        }
        up(level
            .chunks(2)
            .map(|p| {
                if p.len() == 2 {
                    sha(&[&[0x05], &p[0], &p[1]])
                } else {
                    p[0]
                }
            })
            .collect())
    }
    up(leaves.iter().map(|l| sha(&[&[0x04], l])).collect())
}
