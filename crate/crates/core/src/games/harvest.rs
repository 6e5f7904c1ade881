//! Harvest-now, forge-later: logs are copied while the classical scheme is
//! sound, then the classical scheme falls. Here the "fallen" classical
//! scheme is the constant-signature toy, so the attacker can produce
//! classical signatures at will, and the question is whether the
//! post-quantum layers still hold.

use serde::Serialize;

use super::trial_rng;
use crate::error::Result;
use crate::evidence::{generate, verify_with, EventDescription, EvidenceConfig, EvidenceRecord, Policy};
use crate::merkle::{anchor_batch, BatchId};
use crate::migration::{
    generate_hybrid, resign_legacy, verify_hybrid_bytes, verify_migrated, HybridEvidenceRecord, MigratedRecord, Wrapper,
};
use crate::primitives::{keygen, HashFunctionId, SignatureSchemeId};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HarvestReport {
    pub honest_hybrid: u64,
    pub honest_hybrid_accepted: u64,
    pub honest_migrated: u64,
    pub honest_migrated_accepted: u64,
    /// Attacker records that the broken classical verifier alone accepts.
    pub forged: u64,
    pub forged_classically_valid: u64,
    pub forged_rejected_by_hybrid: u64,
    pub forged_rejected_by_migrated: u64,
}

impl HarvestReport {
    pub fn holds(&self) -> bool {
        self.honest_hybrid == self.honest_hybrid_accepted
            && self.honest_migrated == self.honest_migrated_accepted
            && self.forged == self.forged_rejected_by_hybrid
            && self.forged == self.forged_rejected_by_migrated
    }
}

/// Runs the scenario with `n` honest events and `n` forgeries.
pub fn simulate_harvest(n: usize, pq_scheme: SignatureSchemeId, seed: u64) -> Result<HarvestReport> {
    let h = HashFunctionId::Sha256;
    let mut rng = trial_rng(seed, 0);
    let cfg = EvidenceConfig::harness(h, crate::evidence::DEFAULT_K);
    let classical = keygen(SignatureSchemeId::ToyConstant, Some(b"harvest classical"));
    let pq = keygen(pq_scheme, Some(b"harvest pq"));
    let pk_c = classical.public_key();
    let pk_pq = pq.public_key();
    let mut rep = HarvestReport::default();

    let events: Vec<EventDescription> = (0..n).map(|_| EventDescription::random(&mut rng, cfg.k)).collect();

    // Honest side: hybrid records for new events, and legacy classical
    // records migrated both by re-signing and by anchoring.
    let hybrids: Vec<HybridEvidenceRecord> = events
        .iter()
        .map(|e| generate_hybrid(&classical, &pq, e, &cfg))
        .collect::<Result<_>>()?;
    for (e, r) in events.iter().zip(&hybrids) {
        rep.honest_hybrid += 1;
        if verify_hybrid_bytes(Policy::Harness, pk_c, pk_pq, e, &r.to_bytes()).is_ok() {
            rep.honest_hybrid_accepted += 1;
        }
    }
    let legacy: Vec<Vec<u8>> = events
        .iter()
        .map(|e| generate(&classical, e, &cfg).map(|r| r.to_bytes()))
        .collect::<Result<_>>()?;
    let resigned = resign_legacy(&legacy, &pq, h, 1, 0)?;
    let batch = BatchId::sequential(0);
    let (anchor, tree) = anchor_batch(&legacy, &pq, batch, 0, h)?;
    let anchors = vec![anchor];
    let anchored: Vec<MigratedRecord> = legacy
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(MigratedRecord {
                original: r.clone(),
                wrapper: Wrapper::Anchor(tree.prove_inclusion(batch, i as u64)?),
            })
        })
        .collect::<Result<_>>()?;
    for m in resigned.iter().chain(&anchored) {
        rep.honest_migrated += 1;
        if verify_migrated(m, pk_pq, &anchors, h).is_ok() {
            rep.honest_migrated_accepted += 1;
        }
    }

    // Attacker side: forge classical records for events never logged, then
    // try every way of dressing them up.
    for i in 0..n {
        let e = EventDescription::random(&mut rng, cfg.k);
        let forged = forge_classical(&e, &cfg);
        rep.forged += 1;
        if verify_with(Policy::Harness, pk_c, &e, &forged).is_ok() {
            rep.forged_classically_valid += 1;
        }

        // As a plain record, and as a hybrid record borrowing an honest
        // post-quantum signature.
        let mut spliced = hybrids[i].clone();
        spliced.field_block = forged.field_block.clone();
        spliced.sig_classical = forged.signature.clone();
        let hybrid_rejects = verify_hybrid_bytes(Policy::Harness, pk_c, pk_pq, &e, &forged.to_bytes()).is_err()
            && verify_hybrid_bytes(Policy::Harness, pk_c, pk_pq, &e, &spliced.to_bytes()).is_err();
        if hybrid_rejects {
            rep.forged_rejected_by_hybrid += 1;
        }

        // Under a copied re-sign wrapper and under a copied anchor proof.
        let forged_bytes = forged.to_bytes();
        let wrapped = [&resigned[i], &anchored[i]].map(|honest| MigratedRecord {
            original: forged_bytes.clone(),
            wrapper: honest.wrapper.clone(),
        });
        if wrapped.iter().all(|m| verify_migrated(m, pk_pq, &anchors, h).is_err()) {
            rep.forged_rejected_by_migrated += 1;
        }
    }
    Ok(rep)
}

/// What an attacker holding a broken classical scheme produces: a correct
/// field block with a signature the classical verifier accepts.
fn forge_classical(e: &EventDescription, cfg: &EvidenceConfig) -> EvidenceRecord {
    let throwaway = keygen(SignatureSchemeId::ToyConstant, Some(b"attacker"));
    generate(&throwaway, e, cfg).expect("toy scheme under harness policy")
}
