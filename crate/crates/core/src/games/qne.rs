//! Q-Non-Equivocation: the adversary wins with two logs whose entries all
//! verify, whose chain tips agree, and which differ at some position. A
//! position present in only one log counts as differing.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{log_view, settle, Adversary, Challenger, Outcome, TranscriptBody, TrialOutcome};
use crate::error::Result;
use crate::evidence::{verify_with, EventDescription, EvidenceRecord, Policy};
use crate::linkage::{chain_step, link};
use crate::primitives::Digest;

type Log = Vec<(EventDescription, EvidenceRecord)>;

/// Honest log length the reordering strategies work from.
const BASE_LOG: usize = 6;

pub(crate) fn trial(adv: Adversary, ch: &mut Challenger, rng: &mut ChaCha8Rng) -> TrialOutcome {
    let out = match adv {
        Adversary::Reorder => reorder(ch, rng),
        Adversary::TruncateExtend => truncate_extend(ch, rng),
        Adversary::Splice => splice(ch, rng),
        Adversary::ChainCollisionSearch => chain_collision_search(ch, rng),
        other => unreachable!("{other} does not play qne"),
    };
    settle(out, |(a, b)| TrialOutcome {
        outcome: judge(ch, &a, &b),
        body: Some(TranscriptBody::NonEquivocation {
            log_a: log_view(&a),
            log_b: log_view(&b),
        }),
    })
}

pub(crate) fn judge(ch: &Challenger, a: &Log, b: &Log) -> Outcome {
    let pk = ch.public_key();
    let all_verify = a
        .iter()
        .chain(b)
        .all(|(e, ev)| verify_with(Policy::Harness, pk, e, ev).is_ok());
    let records = |l: &Log| l.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>();
    let same_tip = link(&records(a), ch.hash_fn()).value == link(&records(b), ch.hash_fn()).value;
    let differ = a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x != y);
    if all_verify && same_tip && differ {
        Outcome::Win
    } else {
        Outcome::Loss
    }
}

fn honest_log(ch: &mut Challenger, rng: &mut ChaCha8Rng, n: usize) -> Result<Log> {
    (0..n)
        .map(|_| {
            let e = EventDescription::random(rng, ch.k());
            let ev = ch.generate(&e)?;
            Ok((e, ev))
        })
        .collect()
}

fn reorder(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<(Log, Log)> {
    let a = honest_log(ch, rng, BASE_LOG)?;
    let mut b = a.clone();
    let i = rng.gen_range(0..BASE_LOG);
    let j = (i + rng.gen_range(1..BASE_LOG)) % BASE_LOG;
    b.swap(i, j);
    Ok((a, b))
}

fn truncate_extend(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<(Log, Log)> {
    let a = honest_log(ch, rng, BASE_LOG)?;
    let mut b = a[..BASE_LOG - 1].to_vec();
    b.extend(honest_log(ch, rng, 2)?);
    Ok((a, b))
}

/// Replaces one position with an honestly signed record from a parallel run.
fn splice(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<(Log, Log)> {
    let a = honest_log(ch, rng, BASE_LOG)?;
    let other = honest_log(ch, rng, 1)?;
    let mut b = a.clone();
    b[rng.gen_range(0..BASE_LOG)] = other[0].clone();
    Ok((a, b))
}

/// Spends the whole query budget on fresh events, looking for two signed
/// records whose first chain values collide, then appends a common suffix
/// so the collision sits behind later entries.
fn chain_collision_search(ch: &mut Challenger, rng: &mut ChaCha8Rng) -> Result<(Log, Log)> {
    let h = ch.hash_fn();
    let iv = Digest::zero(h);
    let mut seen: HashMap<Digest, (EventDescription, EvidenceRecord)> = HashMap::new();
    let mut pair = None;
    while ch.remaining() > 1 {
        let e = EventDescription::random(rng, ch.k());
        let ev = ch.generate(&e)?;
        let l1 = chain_step(h, &iv, &ev.to_bytes());
        if let Some(prev) = seen.get(&l1) {
            pair = Some((prev.clone(), (e, ev)));
            break;
        }
        seen.insert(l1, (e, ev));
    }
    let suffix = honest_log(ch, rng, 1)?;
    let (x, y) = match pair {
        Some(p) => p,
        None => {
            let mut it = seen.into_values();
            match (it.next(), it.next()) {
                (Some(x), Some(y)) => (x, y),
                _ => {
                    let l = honest_log(ch, rng, 2)?;
                    (l[0].clone(), l[1].clone())
                }
            }
        }
    };
    let mut a = vec![x];
    let mut b = vec![y];
    a.extend(suffix.iter().cloned());
    b.extend(suffix);
    Ok((a, b))
}
