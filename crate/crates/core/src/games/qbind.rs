//! Q-Binding: the adversary wins with `(e0, e1, Ev*)`, `e0 != e1`, where
//! `Ev*` verifies for both events.

use std::collections::HashMap;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use super::{settle, Adversary, Challenger, Outcome, TranscriptBody, TrialOutcome};
use crate::error::Result;
use crate::evidence::{verify_with, EventDescription, EvidenceRecord, Policy};
use crate::primitives::{hash, tag, Digest};

const SEARCH_TRIES: usize = 4096;

type Output = (EventDescription, EventDescription, EvidenceRecord);

pub(crate) fn trial(adv: Adversary, ch: &mut Challenger, rng: &mut ChaCha8Rng) -> TrialOutcome {
    let out = match adv {
        Adversary::CollisionSearch => collision_search(ch, rng),
        Adversary::NaiveRebind => naive_rebind(ch, rng),
        other => unreachable!("{other} does not play qbind"),
    };
    settle(out, |(e0, e1, record)| TrialOutcome {
        outcome: judge(ch, &e0, &e1, &record),
        body: Some(TranscriptBody::Bind {
            e0,
            e1,
            record: record.to_bytes(),
        }),
    })
}

pub(crate) fn judge(ch: &Challenger, e0: &EventDescription, e1: &EventDescription, ev: &EvidenceRecord) -> Outcome {
    if e0 == e1 {
        return Outcome::Invalid;
    }
    let pk = ch.public_key();
    if verify_with(Policy::Harness, pk, e0, ev).is_ok() && verify_with(Policy::Harness, pk, e1, ev).is_ok() {
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

/// Birthday search for two values of one component with equal field
/// digests, then a single oracle query on the first.
fn collision_search(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<Output> {
    let h = ch.hash_fn();
    let j = rng.gen_range(0..ch.k());
    let mut seen: HashMap<Digest, Vec<u8>> = HashMap::new();
    let mut pair = None;
    for _ in 0..SEARCH_TRIES {
        let v = random_component(rng);
        let d = hash(h, tag::FIELD, &v);
        match seen.get(&d) {
            Some(prev) if *prev != v => {
                pair = Some((prev.clone(), v));
                break;
            }
            _ => {
                seen.insert(d, v);
            }
        }
    }
    let base = EventDescription::random(rng, ch.k());
    let (a, b) = pair.unwrap_or_else(|| (random_component(rng), random_component(rng)));
    let e0 = base.with_component(j, a)?;
    let e1 = base.with_component(j, b)?;
    let ev = ch.generate(&e0)?;
    Ok((e0, e1, ev))
}

fn naive_rebind(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<Output> {
    let e0 = EventDescription::random(rng, ch.k());
    let ev = ch.generate(&e0)?;
    let j = rng.gen_range(0..ch.k());
    let e1 = e0.with_component(j, random_component(rng))?;
    Ok((e0, e1, ev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{extract_field_collision, trial_rng, Transcript};
    use crate::primitives::{HashFunctionId, SignatureSchemeId};

    #[test]
    fn identical_events_are_invalid() {
        let mut rng = trial_rng(1, 0);
        let mut ch = Challenger::setup(HashFunctionId::TOY8, SignatureSchemeId::Ed25519, 8, 4, &mut rng);
        let e = EventDescription::random(&mut rng, 8);
        let ev = ch.generate(&e).unwrap();
        assert_eq!(judge(&ch, &e, &e, &ev), Outcome::Invalid);
        let t = Transcript {
            game: crate::games::Game::QBind,
            hash_fn: HashFunctionId::TOY8,
            public_key: ch.public_key().clone(),
            body: TranscriptBody::Bind {
                e0: e.clone(),
                e1: e,
                record: ev.to_bytes(),
            },
        };
        assert!(!t.recheck());
    }

    #[test]
    fn toy_wins_carry_an_extractable_field_collision() {
        for t in 0..50 {
            let mut rng = trial_rng(2, t);
            let mut ch = Challenger::setup(HashFunctionId::TOY8, SignatureSchemeId::Ed25519, 8, 4, &mut rng);
            let to = trial(Adversary::CollisionSearch, &mut ch, &mut rng);
            assert_eq!(to.outcome, Outcome::Win);
            let Some(TranscriptBody::Bind { e0, e1, .. }) = to.body else {
                panic!("no transcript")
            };
            let j = extract_field_collision(&e0, &e1, HashFunctionId::TOY8).unwrap();
            assert_eq!(
                hash(HashFunctionId::TOY8, tag::FIELD, e0.component(j)),
                hash(HashFunctionId::TOY8, tag::FIELD, e1.component(j))
            );
        }
    }
}
