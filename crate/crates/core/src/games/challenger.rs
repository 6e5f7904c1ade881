use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evidence::{generate, EventDescription, EvidenceConfig, EvidenceRecord};
use crate::primitives::{keygen, HashFunctionId, KeyPair, PublicKey, SignatureSchemeId};

/// Per-trial challenger state: the key pair, the public parameters, and
/// the set `Q` of pairs served by the Generate oracle. The secret key never
/// leaves this module.
pub struct Challenger {
    kp: KeyPair,
    cfg: EvidenceConfig,
    budget: usize,
    queries: Vec<(EventDescription, EvidenceRecord)>,
}

impl Challenger {
    pub(crate) fn setup(
        hash_fn: HashFunctionId,
        scheme: SignatureSchemeId,
        k: usize,
        budget: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        Challenger {
            kp: keygen(scheme, Some(&seed)),
            cfg: EvidenceConfig::harness(hash_fn, k),
            budget,
            queries: Vec::new(),
        }
    }

    pub fn public_key(&self) -> &PublicKey {
        self.kp.public_key()
    }

    pub fn config(&self) -> &EvidenceConfig {
        &self.cfg
    }

    pub fn hash_fn(&self) -> HashFunctionId {
        self.cfg.hash_fn
    }

    pub fn k(&self) -> usize {
        self.cfg.k
    }

    /// Remaining Generate calls.
    pub fn remaining(&self) -> usize {
        self.budget.saturating_sub(self.queries.len())
    }

    /// The Generate oracle. Calls past the budget abort the trial.
    pub fn generate(&mut self, e: &EventDescription) -> Result<EvidenceRecord> {
        if self.queries.len() >= self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        let ev = generate(&self.kp, e, &self.cfg)?;
        self.queries.push((e.clone(), ev.clone()));
        Ok(ev)
    }

    pub fn queries(&self) -> &[(EventDescription, EvidenceRecord)] {
        &self.queries
    }

    pub(crate) fn was_queried(&self, e: &EventDescription, ev: &EvidenceRecord) -> bool {
        self.queries.iter().any(|(qe, qev)| qe == e && qev == ev)
    }
}
