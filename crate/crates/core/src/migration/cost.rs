use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::merkle::tree_depth;
use crate::primitives::{HashFunctionId, SignatureSchemeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Pattern {
    Hybrid,
    Resign,
    Anchor,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Hybrid, Pattern::Resign, Pattern::Anchor];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Hybrid => "hybrid",
            Pattern::Resign => "resign",
            Pattern::Anchor => "anchor",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hybrid" => Ok(Pattern::Hybrid),
            "resign" | "re-sign" => Ok(Pattern::Resign),
            "anchor" | "merkle" => Ok(Pattern::Anchor),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// Estimator inputs beyond the pattern table itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostParams {
    pub hash_fn: HashFunctionId,
    /// Signatures per second per worker. `None` uses the scheme's
    /// reference figure.
    pub sign_rate: Option<f64>,
    pub workers: u32,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            hash_fn: HashFunctionId::Sha256,
            sign_rate: None,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MigrationCostReport {
    pub pattern: Pattern,
    pub scheme: String,
    pub records: u64,
    pub new_records: u64,
    pub batch_size: u64,
    pub pq_signature_count: u64,
    /// Bytes added to each affected record: the PQ signature for hybrid and
    /// re-sign, the inclusion proof for anchoring.
    pub per_record_overhead_bytes: u64,
    pub total_storage_overhead_bytes: u64,
    pub sign_rate: f64,
    pub workers: u32,
    pub est_signing_seconds: f64,
}

impl MigrationCostReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

impl fmt::Display for MigrationCostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 8] = [
            ("pattern", self.pattern.to_string()),
            ("scheme", self.scheme.clone()),
            ("pq signatures", self.pq_signature_count.to_string()),
            ("per-record overhead (B)", self.per_record_overhead_bytes.to_string()),
            (
                "total storage overhead (B)",
                self.total_storage_overhead_bytes.to_string(),
            ),
            ("sign rate (/s/worker)", format!("{}", self.sign_rate)),
            ("workers", self.workers.to_string()),
            ("est. signing time (s)", format!("{:.3}", self.est_signing_seconds)),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<28}{v:>16}")?;
        }
        Ok(())
    }
}

/// Counts follow the pattern table: `N_new`, `N`, `ceil(N/b)` signatures.
pub fn estimate_cost(
    pattern: Pattern,
    n: u64,
    n_new: u64,
    batch_size: u64,
    scheme: SignatureSchemeId,
) -> Result<MigrationCostReport> {
    estimate_cost_with(pattern, n, n_new, batch_size, scheme, CostParams::default())
}

pub fn estimate_cost_with(
    pattern: Pattern,
    n: u64,
    n_new: u64,
    batch_size: u64,
    scheme: SignatureSchemeId,
    params: CostParams,
) -> Result<MigrationCostReport> {
    if batch_size < 1 {
        return Err(Error::InvalidParameter("batch size must be at least 1".into()));
    }
    if params.workers == 0 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    let sign_rate = params
        .sign_rate
        .or_else(|| scheme.reference_rates().map(|(s, _)| s))
        .ok_or_else(|| Error::InvalidParameter(format!("no reference sign rate for {scheme}; pass one")))?;
    if !(sign_rate > 0.0 && sign_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("sign rate {sign_rate}")));
    }
    let sig = scheme.sig_len() as u64;
    let (count, per_record, total) = match pattern {
        Pattern::Hybrid => (n_new, sig, n_new * sig),
        Pattern::Resign => (n, sig, n * sig),
        Pattern::Anchor => {
            let count = n.div_ceil(batch_size);
            let proof = tree_depth(batch_size) as u64 * params.hash_fn.output_len() as u64;
            (count, proof, count * sig + n * proof)
        }
    };
    Ok(MigrationCostReport {
        pattern,
        scheme: scheme.name(),
        records: n,
        new_records: n_new,
        batch_size,
        pq_signature_count: count,
        per_record_overhead_bytes: per_record,
        total_storage_overhead_bytes: total,
        sign_rate,
        workers: params.workers,
        est_signing_seconds: count as f64 / (sign_rate * params.workers as f64),
    })
}
