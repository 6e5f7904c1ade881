//! `evtrail`: operator front end for evidence logs.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evtrail::Error;

/// Bumped when a field of any `--json` output line changes meaning.
pub const OUTPUT_FORMAT_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "evtrail", version, about = "Signed, hash-chained evidence logs")]
pub struct Cli {
    /// Emit one JSON object per line instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct StoreArg {
    /// Log store directory.
    #[arg(long, env = "EVTRAIL_STORE")]
    pub store: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Create a key pair: FILE holds the secret key, FILE.pub the public key.
    Keygen {
        #[arg(long, default_value = "ed25519")]
        scheme: String,
        #[arg(long)]
        out: PathBuf,
        /// Derive the key from this string instead of the OS RNG.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Build evidence records for events and append them to a store.
    Generate {
        /// Event description files.
        #[arg(long = "event", num_args = 1.., required_unless_present = "stdin")]
        events: Vec<PathBuf>,
        /// Read one event description from standard input.
        #[arg(long, conflicts_with = "events")]
        stdin: bool,
        #[arg(long)]
        key: PathBuf,
        #[arg(long, requires = "pq_key")]
        hybrid: bool,
        #[arg(long)]
        pq_key: Option<PathBuf>,
        #[arg(long, default_value = "sha256")]
        hash: String,
        #[arg(long, default_value_t = evtrail::evidence::DEFAULT_K)]
        k: usize,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Check the record at an index against an event description.
    Verify {
        #[arg(long)]
        index: u64,
        #[arg(long)]
        event: PathBuf,
        #[arg(long)]
        pubkey: PathBuf,
        #[arg(long)]
        pq_pubkey: Option<PathBuf>,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Print the chain tip over a range of records, started from zero.
    Link {
        /// `A..B`, half-open; defaults to the whole log.
        #[arg(long)]
        range: Option<String>,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Compare two stores and locate where they diverge.
    Diagnose {
        #[arg(long)]
        log_a: PathBuf,
        #[arg(long)]
        log_b: PathBuf,
    },
    /// Anchor a range of records under post-quantum signed Merkle roots.
    Anchor {
        #[arg(long)]
        range: Option<String>,
        #[arg(long)]
        pq_key: PathBuf,
        #[arg(long, default_value_t = evtrail::merkle::DEFAULT_BATCH_SIZE)]
        batch_size: u64,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Write an inclusion proof for an anchored record.
    Prove {
        #[arg(long)]
        index: u64,
        /// Proof output file; the covering anchor is copied to FILE.evan.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Check an inclusion proof against an anchor.
    VerifyProof {
        #[arg(long)]
        proof: PathBuf,
        #[arg(long)]
        anchor: PathBuf,
        #[arg(long)]
        pq_pubkey: PathBuf,
        /// Raw record bytes; without it the record is read from the store.
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long, env = "EVTRAIL_STORE")]
        store: Option<PathBuf>,
    },
    /// Re-sign every record in a store with a post-quantum key.
    Resign {
        #[arg(long)]
        pq_key: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output file; an existing file is resumed, not rewritten.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seconds since the Unix epoch; defaults to now.
        #[arg(long)]
        signed_at: Option<u64>,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Estimate the cost of a migration pattern.
    Estimate {
        /// hybrid, resign or anchor.
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        n_new: u64,
        #[arg(long, default_value_t = evtrail::merkle::DEFAULT_BATCH_SIZE)]
        batch_size: u64,
        #[arg(long, default_value = "ml-dsa-65")]
        scheme: String,
        /// Signatures per second per worker; defaults to the scheme's reference rate.
        #[arg(long)]
        sign_rate: Option<f64>,
        #[arg(long, default_value_t = 1)]
        workers: u32,
    },
    /// Run a security game against a shipped adversary.
    Game {
        /// qaudit, qbind or qne; defaults to the adversary's game.
        #[arg(long)]
        game: Option<String>,
        #[arg(long, default_value = "ed25519")]
        scheme: String,
        #[arg(long, default_value = "sha256")]
        hash: String,
        #[arg(long)]
        adversary: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = evtrail::games::DEFAULT_QUERY_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = evtrail::evidence::DEFAULT_K)]
        k: usize,
    },
    /// Re-verify a store: signatures, chain against checkpoints, anchors.
    Audit {
        /// Directory of `*.pub` key files.
        #[arg(long)]
        pubkeys: PathBuf,
        #[arg(long)]
        range: Option<String>,
        #[command(flatten)]
        store: StoreArg,
    },
    /// Measure throughput of one operation.
    Bench {
        /// generate, verify, link or anchor.
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 10_000)]
        count: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Defaults to ed25519, or ml-dsa-65 for anchor.
        #[arg(long)]
        scheme: Option<String>,
    },
}

/// A command outcome that is not a library error.
#[derive(Debug)]
pub enum Failure {
    /// Verification or audit rejected; the message is already printed.
    Rejected,
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Malformed(_) => 3,
        Error::UnknownName(_)
        | Error::InvalidParameter(_)
        | Error::OutOfRange { .. }
        | Error::EmptyBatch
        | Error::ComponentCount { .. }
        | Error::EmptyComponent(_) => 2,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
