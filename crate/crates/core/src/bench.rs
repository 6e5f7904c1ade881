//! Throughput measurement. Numbers are hardware-dependent; the useful
//! outputs are ratios (scaling across workers, classical against
//! post-quantum signing).

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::{generate, verify_signature_only, EventDescription, EvidenceConfig, Policy};
use crate::linkage::link_bytes;
use crate::merkle::{anchor_batch, BatchId};
use crate::primitives::{keygen, sign, KeyPair, SignatureSchemeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchOp {
    Generate,
    Verify,
    Link,
    Anchor,
}

impl BenchOp {
    pub const ALL: [BenchOp; 4] = [BenchOp::Generate, BenchOp::Verify, BenchOp::Link, BenchOp::Anchor];

    pub fn name(self) -> &'static str {
        match self {
            BenchOp::Generate => "generate",
            BenchOp::Verify => "verify",
            BenchOp::Link => "link",
            BenchOp::Anchor => "anchor",
        }
    }
}

impl fmt::Display for BenchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub op: BenchOp,
    pub scheme: String,
    pub count: u64,
    pub workers: usize,
    pub elapsed_seconds: f64,
    pub records_per_second: f64,
    /// Wall time per operation on one worker.
    pub latency_us: f64,
}

impl BenchReport {
    fn new(op: BenchOp, scheme: SignatureSchemeId, count: u64, workers: usize, elapsed: Duration) -> Self {
        let secs = elapsed.as_secs_f64().max(1e-9);
        BenchReport {
            op,
            scheme: scheme.name(),
            count,
            workers,
            elapsed_seconds: secs,
            records_per_second: count as f64 / secs,
            latency_us: secs * 1e6 * workers as f64 / count.max(1) as f64,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:<10} {:>8} {:>7} {:>12} {:>13}",
            "op", "scheme", "count", "workers", "Events/s", "Latency (µs)"
        )?;
        writeln!(
            f,
            "{:<10} {:<10} {:>8} {:>7} {:>12.0} {:>13.1}",
            self.op.name(),
            self.scheme,
            self.count,
            self.workers,
            self.records_per_second,
            self.latency_us
        )?;
        write!(f, "(hardware-dependent; compare ratios, not absolute values)")
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn events(count: u64, k: usize, seed: u64) -> Vec<EventDescription> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| EventDescription::random(&mut rng, k)).collect()
}

/// Times `op` over `count` random events with `workers` threads. Inputs
/// are prepared before the clock starts. `Anchor` anchors the whole set
/// as one batch, timing tree construction and one root signature, and
/// needs a post-quantum scheme.
pub fn run_bench(op: BenchOp, scheme: SignatureSchemeId, count: u64, workers: usize) -> Result<BenchReport> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let pool = pool(workers)?;
    let cfg = EvidenceConfig::default();
    let kp = keygen(scheme, Some(b"bench"));
    let evs = events(count, cfg.k, 0xbe7c);

    let elapsed = match op {
        BenchOp::Generate => {
            let t = Instant::now();
            let n = pool.install(|| evs.par_iter().filter(|e| generate(&kp, e, &cfg).is_ok()).count());
            let elapsed = t.elapsed();
            if n as u64 != count {
                return Err(Error::InvalidParameter("benchmark generation failed".into()));
            }
            elapsed
        }
        BenchOp::Verify => {
            let recs = pool.install(|| {
                evs.par_iter()
                    .map(|e| generate(&kp, e, &cfg))
                    .collect::<Result<Vec<_>>>()
            })?;
            let pk = kp.public_key();
            let t = Instant::now();
            let ok = pool.install(|| {
                evs.par_iter()
                    .zip(&recs)
                    .filter(|(e, r)| crate::evidence::verify(pk, e, r).is_ok())
                    .count()
            });
            let elapsed = t.elapsed();
            if ok as u64 != count {
                return Err(Error::InvalidParameter("benchmark records failed to verify".into()));
            }
            elapsed
        }
        BenchOp::Link => {
            let recs = pool.install(|| {
                evs.par_iter()
                    .map(|e| generate(&kp, e, &cfg).map(|r| r.to_bytes()))
                    .collect::<Result<Vec<_>>>()
            })?;
            let t = Instant::now();
            std::hint::black_box(link_bytes(&recs, cfg.hash_fn));
            t.elapsed()
        }
        BenchOp::Anchor => {
            if !scheme.is_post_quantum() {
                return Err(Error::ClassicalKeyRefused);
            }
            let classical = keygen(SignatureSchemeId::Ed25519, Some(b"bench legacy"));
            let recs = pool.install(|| {
                evs.par_iter()
                    .map(|e| generate(&classical, e, &cfg).map(|r| r.to_bytes()))
                    .collect::<Result<Vec<_>>>()
            })?;
            let t = Instant::now();
            pool.install(|| anchor_batch(&recs, &kp, BatchId::sequential(0), 0, cfg.hash_fn))?;
            t.elapsed()
        }
    };
    Ok(BenchReport::new(op, scheme, count, workers, elapsed))
}

/// Raw signatures per second over `count` distinct 32-byte messages on
/// one thread, isolating the signature scheme from record assembly.
pub fn sign_rate(kp: &KeyPair, count: u64) -> Result<f64> {
    let msgs: Vec<[u8; 32]> = (0..count.max(1))
        .map(|i| {
            let mut m = [0u8; 32];
            m[..8].copy_from_slice(&i.to_le_bytes());
            m[31] = 1;
            m
        })
        .collect();
    let t = Instant::now();
    for m in &msgs {
        std::hint::black_box(sign(kp, m)?);
    }
    Ok(msgs.len() as f64 / t.elapsed().as_secs_f64().max(1e-9))
}

/// Signature-only verifications per second over `count` records signed
/// by `kp`, on one thread.
pub fn verify_rate(kp: &KeyPair, count: u64) -> Result<f64> {
    let cfg = EvidenceConfig::default();
    let recs = events(count.max(1), cfg.k, 7)
        .iter()
        .map(|e| generate(kp, e, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let t = Instant::now();
    for r in &recs {
        verify_signature_only(Policy::Production, kp.public_key(), r)
            .map_err(|r| Error::InvalidParameter(r.to_string()))?;
    }
    Ok(recs.len() as f64 / t.elapsed().as_secs_f64().max(1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_op_runs() {
        for op in BenchOp::ALL {
            let scheme = if op == BenchOp::Anchor {
                SignatureSchemeId::MlDsa65
            } else {
                SignatureSchemeId::Ed25519
            };
            let r = run_bench(op, scheme, 32, 1).unwrap();
            assert_eq!(r.count, 32);
            assert!(r.records_per_second > 0.0);
            assert_eq!(op.name().parse::<BenchOp>().unwrap(), op);
        }
    }

    #[test]
    fn anchor_refuses_classical() {
        assert!(matches!(
            run_bench(BenchOp::Anchor, SignatureSchemeId::Ed25519, 4, 1),
            Err(Error::ClassicalKeyRefused)
        ));
        assert!(run_bench(BenchOp::Generate, SignatureSchemeId::Ed25519, 4, 0).is_err());
    }

    #[test]
    fn table_is_labelled() {
        let r = run_bench(BenchOp::Link, SignatureSchemeId::Ed25519, 8, 1).unwrap();
        let s = r.to_string();
        assert!(s.contains("Events/s") && s.contains("Latency (µs)") && s.contains("hardware-dependent"));
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["op"], "link");
    }
}
