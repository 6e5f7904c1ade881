//! Executable security experiments: Q-Audit Integrity, Q-Binding and
//! Q-Non-Equivocation, played by classical adversary strategies against
//! genuine or deliberately weakened primitives.
//!
//! The experiments exercise the game mechanics and the reductions (a win
//! under a toy primitive must surface the collision or forgery behind it).
//! They say nothing about quantum advantage: superposition access to the
//! hash oracle cannot be simulated, and `win_rate` is a finite-sample rate,
//! not an asymptotic advantage.

mod challenger;
mod harvest;
mod qaudit;
mod qbind;
mod qne;
mod report;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::{verify_with, EventDescription, EvidenceRecord, Policy};
use crate::linkage::{diagnose, link_bytes, DivergenceKind, DivergenceReport};
use crate::primitives::{hash, tag, HashFunctionId, PublicKey, SignatureSchemeId};

pub use challenger::Challenger;
pub use harvest::{simulate_harvest, HarvestReport};
pub use report::{report, Summary, SummaryRow, REPORT_FORMAT_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Game {
    QAudit,
    QBind,
    QNe,
}

impl Game {
    pub const ALL: [Game; 3] = [Game::QAudit, Game::QBind, Game::QNe];

    pub fn name(self) -> &'static str {
        match self {
            Game::QAudit => "qaudit",
            Game::QBind => "qbind",
            Game::QNe => "qne",
        }
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Game {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Game::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// Shipped adversary strategies. Each belongs to exactly one game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    /// Takes one honest record and claims it for a mutated event.
    ReplayMutate,
    /// Pairs fresh field blocks with signatures harvested from the oracle.
    SignatureSplice,
    /// Searches for a second preimage of one field digest.
    FieldCollisionSearch,
    /// Outputs a correct field block with random signature bytes.
    RandomForge,
    /// Finds two component values with equal field digests, signs one.
    CollisionSearch,
    /// Swaps one component of a signed event and hopes.
    NaiveRebind,
    Reorder,
    TruncateExtend,
    Splice,
    /// Birthday search for two signed records with equal first chain step.
    ChainCollisionSearch,
}

impl Adversary {
    pub const ALL: [Adversary; 10] = [
        Adversary::ReplayMutate,
        Adversary::SignatureSplice,
        Adversary::FieldCollisionSearch,
        Adversary::RandomForge,
        Adversary::CollisionSearch,
        Adversary::NaiveRebind,
        Adversary::Reorder,
        Adversary::TruncateExtend,
        Adversary::Splice,
        Adversary::ChainCollisionSearch,
    ];

    pub fn game(self) -> Game {
        match self {
            Adversary::ReplayMutate
            | Adversary::SignatureSplice
            | Adversary::FieldCollisionSearch
            | Adversary::RandomForge => Game::QAudit,
            Adversary::CollisionSearch | Adversary::NaiveRebind => Game::QBind,
            Adversary::Reorder | Adversary::TruncateExtend | Adversary::Splice | Adversary::ChainCollisionSearch => {
                Game::QNe
            }
        }
    }

    pub fn for_game(game: Game) -> impl Iterator<Item = Adversary> {
        Adversary::ALL.into_iter().filter(move |a| a.game() == game)
    }

    pub fn name(self) -> &'static str {
        match self {
            Adversary::ReplayMutate => "replay-mutate",
            Adversary::SignatureSplice => "signature-splice",
            Adversary::FieldCollisionSearch => "field-collision-search",
            Adversary::RandomForge => "random-forge",
            Adversary::CollisionSearch => "collision-search",
            Adversary::NaiveRebind => "naive-rebind",
            Adversary::Reorder => "reorder",
            Adversary::TruncateExtend => "truncate-extend",
            Adversary::Splice => "splice",
            Adversary::ChainCollisionSearch => "chain-collision-search",
        }
    }
}

impl fmt::Display for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Adversary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Adversary::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

pub const DEFAULT_QUERY_BUDGET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameConfig {
    pub game: Game,
    pub hash_fn: HashFunctionId,
    pub scheme: SignatureSchemeId,
    pub adversary: Adversary,
    pub trials: u64,
    /// `q_s`: Generate-oracle calls allowed per trial.
    pub query_budget: usize,
    pub k: usize,
    pub seed: u64,
}

impl GameConfig {
    /// 1,000 trials, budget 64, k = 8, seed 0.
    pub fn new(game: Game, hash_fn: HashFunctionId, scheme: SignatureSchemeId, adversary: Adversary) -> Self {
        GameConfig {
            game,
            hash_fn,
            scheme,
            adversary,
            trials: 1000,
            query_budget: DEFAULT_QUERY_BUDGET,
            k: crate::evidence::DEFAULT_K,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.k == 0 || self.k > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("k = {}", self.k)));
        }
        if self.adversary.game() != self.game {
            return Err(Error::UnknownName(format!(
                "adversary {} does not play {}",
                self.adversary, self.game
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Win,
    Loss,
    /// The output violates the game's syntax (for example `e0 == e1`).
    Invalid,
    /// The adversary exceeded its query budget.
    Aborted,
}

pub type LogView = Vec<(EventDescription, Vec<u8>)>;

#[derive(Clone, Debug)]
pub enum TranscriptBody {
    Audit {
        queries: LogView,
        event: EventDescription,
        record: Vec<u8>,
    },
    Bind {
        e0: EventDescription,
        e1: EventDescription,
        record: Vec<u8>,
    },
    NonEquivocation {
        log_a: LogView,
        log_b: LogView,
    },
}

/// Everything needed to re-judge a trial from bytes.
#[derive(Clone, Debug)]
pub struct Transcript {
    pub game: Game,
    pub hash_fn: HashFunctionId,
    pub public_key: PublicKey,
    pub body: TranscriptBody,
}

fn verifies(pk: &PublicKey, e: &EventDescription, bytes: &[u8]) -> bool {
    EvidenceRecord::from_bytes(bytes).is_ok_and(|r| verify_with(Policy::Harness, pk, e, &r).is_ok())
}

/// First position `j` where the events differ yet their field digests are
/// equal: the collision a Q-Binding win must contain.
pub fn extract_field_collision(e0: &EventDescription, e1: &EventDescription, hash_fn: HashFunctionId) -> Option<usize> {
    if e0.k() != e1.k() {
        return None;
    }
    (0..e0.k()).find(|&j| {
        e0.component(j) != e1.component(j)
            && hash(hash_fn, tag::FIELD, e0.component(j)) == hash(hash_fn, tag::FIELD, e1.component(j))
    })
}

impl Transcript {
    /// Re-judges the transcript from its serialized records, independently
    /// of the referee. For binding and non-equivocation wins it also demands
    /// the underlying hash collision.
    pub fn recheck(&self) -> bool {
        let pk = &self.public_key;
        match &self.body {
            TranscriptBody::Audit { queries, event, record } => {
                verifies(pk, event, record) && !queries.iter().any(|(qe, qr)| qe == event && qr == record)
            }
            TranscriptBody::Bind { e0, e1, record } => {
                e0 != e1
                    && verifies(pk, e0, record)
                    && verifies(pk, e1, record)
                    && extract_field_collision(e0, e1, self.hash_fn).is_some()
            }
            TranscriptBody::NonEquivocation { log_a, log_b } => {
                let all_verify = log_a.iter().chain(log_b).all(|(e, r)| verifies(pk, e, r));
                let ra: Vec<&[u8]> = log_a.iter().map(|(_, r)| r.as_slice()).collect();
                let rb: Vec<&[u8]> = log_b.iter().map(|(_, r)| r.as_slice()).collect();
                if !all_verify || link_bytes(&ra, self.hash_fn).value != link_bytes(&rb, self.hash_fn).value {
                    return false;
                }
                let differ = log_a.len() != log_b.len() || log_a.iter().zip(log_b).any(|(a, b)| a != b);
                let d = diagnose(&ra, &rb, self.hash_fn);
                differ
                    && match d.kind {
                        DivergenceKind::HashCollision => d.collision_verifies(self.hash_fn),
                        DivergenceKind::DivergentAt => log_a.len() != log_b.len(),
                        _ => false,
                    }
            }
        }
    }

    /// The linkage diagnosis of a non-equivocation transcript.
    pub fn diagnosis(&self) -> Option<DivergenceReport> {
        match &self.body {
            TranscriptBody::NonEquivocation { log_a, log_b } => {
                let ra: Vec<&[u8]> = log_a.iter().map(|(_, r)| r.as_slice()).collect();
                let rb: Vec<&[u8]> = log_b.iter().map(|(_, r)| r.as_slice()).collect();
                Some(diagnose(&ra, &rb, self.hash_fn))
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GameResult {
    pub config: GameConfig,
    pub wins: u64,
    pub losses: u64,
    pub invalid: u64,
    pub aborted: u64,
    pub win_rate: f64,
    /// Trials where the referee and [`Transcript::recheck`] disagreed.
    pub referee_disagreements: u64,
    /// Winning transcripts that were re-verified (all of them).
    pub rechecked_wins: u64,
    /// The lowest-numbered winning trial's transcript.
    pub transcript_sample: Option<Transcript>,
}

impl GameResult {
    pub fn trials(&self) -> u64 {
        self.config.trials
    }
}

pub(crate) struct TrialOutcome {
    pub outcome: Outcome,
    pub body: Option<TranscriptBody>,
}

impl TrialOutcome {
    pub fn aborted() -> Self {
        TrialOutcome {
            outcome: Outcome::Aborted,
            body: None,
        }
    }
}

/// Maps adversary errors to outcomes: running out of queries aborts the
/// trial, anything else is a plain loss.
pub(crate) fn settle<T>(r: Result<T>, judge: impl FnOnce(T) -> TrialOutcome) -> TrialOutcome {
    match r {
        Ok(out) => judge(out),
        Err(Error::BudgetExceeded(_)) => TrialOutcome::aborted(),
        Err(_) => TrialOutcome {
            outcome: Outcome::Loss,
            body: None,
        },
    }
}

pub(crate) fn log_view(log: &[(EventDescription, EvidenceRecord)]) -> LogView {
    log.iter().map(|(e, r)| (e.clone(), r.to_bytes())).collect()
}

/// Per-trial generator: stream `trial` of the ChaCha8 keyed by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn run_game(cfg: &GameConfig) -> Result<GameResult> {
    cfg.validate()?;
    let per_trial: Vec<(Outcome, Option<Transcript>, bool)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let mut ch = Challenger::setup(cfg.hash_fn, cfg.scheme, cfg.k, cfg.query_budget, &mut rng);
            let to = match cfg.game {
                Game::QAudit => qaudit::trial(cfg.adversary, &mut ch, &mut rng),
                Game::QBind => qbind::trial(cfg.adversary, &mut ch, &mut rng),
                Game::QNe => qne::trial(cfg.adversary, &mut ch, &mut rng),
            };
            let transcript = to.body.map(|body| Transcript {
                game: cfg.game,
                hash_fn: cfg.hash_fn,
                public_key: ch.public_key().clone(),
                body,
            });
            let agrees = match &transcript {
                Some(t) => t.recheck() == (to.outcome == Outcome::Win),
                None => to.outcome != Outcome::Win,
            };
            let keep = (to.outcome == Outcome::Win).then_some(transcript).flatten();
            (to.outcome, keep, agrees)
        })
        .collect();

    let count = |o: Outcome| per_trial.iter().filter(|(x, _, _)| *x == o).count() as u64;
    let wins = count(Outcome::Win);
    Ok(GameResult {
        config: *cfg,
        wins,
        losses: count(Outcome::Loss),
        invalid: count(Outcome::Invalid),
        aborted: count(Outcome::Aborted),
        win_rate: wins as f64 / cfg.trials as f64,
        referee_disagreements: per_trial.iter().filter(|(_, _, ok)| !ok).count() as u64,
        rechecked_wins: per_trial
            .iter()
            .filter(|(o, t, _)| *o == Outcome::Win && t.is_some())
            .count() as u64,
        transcript_sample: per_trial.into_iter().find_map(|(_, t, _)| t),
    })
}

pub fn run_qaudit(cfg: &GameConfig) -> Result<GameResult> {
    expect_game(cfg, Game::QAudit)?;
    run_game(cfg)
}

pub fn run_qbind(cfg: &GameConfig) -> Result<GameResult> {
    expect_game(cfg, Game::QBind)?;
    run_game(cfg)
}

pub fn run_qne(cfg: &GameConfig) -> Result<GameResult> {
    expect_game(cfg, Game::QNe)?;
    run_game(cfg)
}

fn expect_game(cfg: &GameConfig, game: Game) -> Result<()> {
    if cfg.game == game {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "config is for {}, not {game}",
            cfg.game
        )))
    }
}
