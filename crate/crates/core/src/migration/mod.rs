//! Moving classical evidence to post-quantum protection: hybrid signing for
//! new records, per-record re-signing of legacy records, Merkle-root
//! anchoring of legacy batches, and a cost estimator for the three.

mod cost;
mod hybrid;
mod resign;

pub use cost::{estimate_cost, estimate_cost_with, CostParams, MigrationCostReport, Pattern};
pub use hybrid::{
    generate_hybrid, verify_hybrid, verify_hybrid_bytes, verify_hybrid_signatures, verify_hybrid_with, AnyRecord,
    HybridEvidenceRecord, HYBRID_FLAG,
};
pub use resign::{
    resign_digest, resign_legacy, resign_one, verify_migrated, verify_migrated_with_original, MigratedRecord,
    ResignWrapper, Wrapper,
};
