//! Signed, hash-chained evidence records for audit trails.

pub mod bench;
pub mod error;
pub mod evidence;
pub mod games;
pub mod linkage;
pub mod merkle;
pub mod migration;
pub mod primitives;
pub mod store;

pub use error::{Error, RejectReason, Result, Verdict};
pub use evidence::{
    fields_encode, generate, verify, verify_with, EventDescription, EvidenceConfig, EvidenceRecord, FieldBlock, Policy,
};
pub use games::{run_game, Adversary, Game, GameConfig, GameResult, Outcome};
pub use linkage::{diagnose, link, link_bytes, link_incremental, ChainTip, DivergenceKind, DivergenceReport};
pub use merkle::{
    anchor_batch, build_tree, verify_anchor, verify_anchored_record, verify_inclusion, BatchAnchor, BatchId,
    InclusionProof, MerkleTree,
};
pub use migration::{
    estimate_cost, generate_hybrid, resign_legacy, verify_hybrid, verify_migrated, AnyRecord, HybridEvidenceRecord,
    MigratedRecord, MigrationCostReport, Pattern,
};
pub use primitives::{keygen, Digest, HashFunctionId, KeyPair, PublicKey, SignatureSchemeId};
pub use store::{AuditOptions, AuditReport, LogSegment, LogStore};
