//! Q-Audit Integrity: the adversary wins with a verifying `(e*, Ev*)` that
//! the Generate oracle never returned.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use super::{log_view, settle, Adversary, Challenger, Outcome, TranscriptBody, TrialOutcome};
use crate::error::Result;
use crate::evidence::{
    fields_encode, verify_with, EventDescription, EvidenceRecord, Policy, RecordHeader, RECORD_VERSION,
};
use crate::primitives::{hash, tag};

/// Local hash evaluations allowed to the search strategies.
const SEARCH_TRIES: usize = 4096;
/// Oracle queries and fresh candidates per query for signature splicing.
const SPLICE_QUERIES: usize = 8;
const SPLICE_CANDIDATES: usize = 8;

pub(crate) fn trial(adv: Adversary, ch: &mut Challenger, rng: &mut ChaCha8Rng) -> TrialOutcome {
    let out = match adv {
        Adversary::ReplayMutate => replay_mutate(ch, rng),
        Adversary::SignatureSplice => signature_splice(ch, rng),
        Adversary::FieldCollisionSearch => field_collision_search(ch, rng),
        Adversary::RandomForge => random_forge(ch, rng),
        other => unreachable!("{other} does not play qaudit"),
    };
    settle(out, |(event, record)| TrialOutcome {
        outcome: judge(ch, &event, &record),
        body: Some(TranscriptBody::Audit {
            queries: log_view(ch.queries()),
            event,
            record: record.to_bytes(),
        }),
    })
}

pub(crate) fn judge(ch: &Challenger, e: &EventDescription, ev: &EvidenceRecord) -> Outcome {
    if verify_with(Policy::Harness, ch.public_key(), e, ev).is_ok() && !ch.was_queried(e, ev) {
        Outcome::Win
    } else {
        Outcome::Loss
    }
}

fn random_component(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut v = vec![0u8; 16];
    rng.fill_bytes(&mut v);
    v
}

fn replay_mutate(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<(EventDescription, EvidenceRecord)> {
    let e = EventDescription::random(rng, ch.k());
    let ev = ch.generate(&e)?;
    let j = rng.gen_range(0..ch.k());
    let mutated = e.with_component(j, random_component(rng))?;
    Ok((mutated, ev))
}

fn signature_splice(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<(EventDescription, EvidenceRecord)> {
    let mut harvested = Vec::new();
    for _ in 0..SPLICE_QUERIES.min(ch.remaining()).max(1) {
        let e = EventDescription::random(rng, ch.k());
        harvested.push(ch.generate(&e)?);
    }
    let mut last = None;
    for _ in 0..SPLICE_CANDIDATES {
        let e = EventDescription::random(rng, ch.k());
        let x = fields_encode(&e, ch.hash_fn());
        for honest in &harvested {
            let candidate = EvidenceRecord {
                header: honest.header,
                field_block: x.clone(),
                signature: honest.signature.clone(),
            };
            if verify_with(Policy::Harness, ch.public_key(), &e, &candidate).is_ok() {
                return Ok((e, candidate));
            }
            last = Some((e.clone(), candidate));
        }
    }
    Ok(last.expect("at least one candidate"))
}

/// Keeps the signed field block and hunts for a different component value
/// with the same field digest.
fn field_collision_search(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<(EventDescription, EvidenceRecord)> {
    let e = EventDescription::random(rng, ch.k());
    let ev = ch.generate(&e)?;
    let h = ch.hash_fn();
    for _ in 0..SEARCH_TRIES {
        let j = rng.gen_range(0..ch.k());
        let v = random_component(rng);
        if v.as_slice() != e.component(j) && hash(h, tag::FIELD, &v).as_bytes() == ev.field_block.field(j) {
            return Ok((e.with_component(j, v)?, ev));
        }
    }
    Ok((e, ev))
}

fn random_forge(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<(EventDescription, EvidenceRecord)> {
    let e = EventDescription::random(rng, ch.k());
    let scheme = ch.public_key().scheme();
    let mut signature = vec![0u8; scheme.sig_len()];
    rng.fill_bytes(&mut signature);
    let record = EvidenceRecord {
        header: RecordHeader {
            version: RECORD_VERSION,
            hash_fn: ch.hash_fn(),
            scheme,
            k: ch.k() as u8,
        },
        field_block: fields_encode(&e, ch.hash_fn()),
        signature,
    };
    Ok((e, record))
}
