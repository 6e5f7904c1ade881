use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use evtrail::bench::{run_bench, BenchOp};
use evtrail::games::report;
use evtrail::migration::{estimate_cost_with, verify_hybrid, CostParams};
use evtrail::primitives::{decode_public_key, decode_secret_key, encode_public_key, encode_secret_key};
use evtrail::store::{AuditOptions, AuditReport, LogStore};
use evtrail::{
    diagnose, generate, generate_hybrid, keygen, resign_legacy, verify, verify_anchored_record, Adversary, AnyRecord,
    BatchAnchor, DivergenceKind, Error, EventDescription, EvidenceConfig, Game, GameConfig, HashFunctionId,
    InclusionProof, KeyPair, MigratedRecord, Pattern, PublicKey, SignatureSchemeId, Verdict,
};
use serde_json::{json, Value};

use crate::{Cli, Command, Failure, OUTPUT_FORMAT_VERSION};

type CmdResult = Result<(), Failure>;

/// Records re-signed between flushes of the output file.
const RESIGN_CHUNK: usize = 4096;

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, text: impl AsRef<str>, mut value: Value) {
        if self.json {
            if let Value::Object(map) = &mut value {
                map.insert("format".into(), OUTPUT_FORMAT_VERSION.into());
            }
            println!("{value}");
        } else {
            println!("{}", text.as_ref());
        }
    }

    fn verdict(&self, what: &str, v: Verdict) -> CmdResult {
        match v {
            Ok(()) => {
                self.emit("ACCEPT", json!({ "check": what, "result": "ACCEPT" }));
                Ok(())
            }
            Err(reason) => {
                self.emit(
                    format!("REJECT {reason}"),
                    json!({ "check": what, "result": "REJECT", "reason": reason.code() }),
                );
                Err(Failure::Rejected)
            }
        }
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    let out = Out { json: cli.json };
    match &cli.command {
        Command::Keygen {
            scheme,
            out: path,
            seed,
        } => {
            let scheme: SignatureSchemeId = scheme.parse()?;
            if scheme.is_toy() {
                return Err(Error::ToyRefused(scheme.name()).into());
            }
            let kp = keygen(scheme, seed.as_deref().map(str::as_bytes));
            write_new(path, &encode_secret_key(&kp))?;
            let pub_path = with_suffix(path, ".pub");
            write_new(&pub_path, &encode_public_key(kp.public_key()))?;
            let key_id = hex::encode(kp.public_key().key_id());
            out.emit(
                format!(
                    "{} key {key_id} written to {} and {}",
                    scheme,
                    path.display(),
                    pub_path.display()
                ),
                json!({ "scheme": scheme.name(), "key_id": key_id, "secret": path, "public": pub_path }),
            );
            Ok(())
        }

        Command::Generate {
            events,
            stdin,
            key,
            hybrid,
            pq_key,
            hash,
            k,
            store,
        } => {
            let hash_fn: HashFunctionId = hash.parse()?;
            let cfg = EvidenceConfig::new(hash_fn, *k);
            let kp = load_secret(key)?;
            let pq = match (hybrid, pq_key) {
                (true, Some(p)) => Some(load_secret(p)?),
                (false, Some(_)) => return Err(Failure::Usage("--pq-key needs --hybrid".into())),
                _ => None,
            };
            let parsed = if *stdin {
                let mut text = String::new();
                std::io::stdin().read_to_string(&mut text)?;
                vec![EventDescription::parse_text(&text, *k, None)?]
            } else {
                events
                    .iter()
                    .map(|p| EventDescription::parse_text(&fs::read_to_string(p)?, *k, p.parent()))
                    .collect::<evtrail::Result<Vec<_>>>()?
            };
            let mut log = LogStore::open_or_create(&store.store, hash_fn)?;
            for e in &parsed {
                let bytes = match &pq {
                    Some(pq) => generate_hybrid(&kp, pq, e, &cfg)?.to_bytes(),
                    None => generate(&kp, e, &cfg)?.to_bytes(),
                };
                let index = log.append(&bytes)?;
                let tip = log.tip();
                out.emit(
                    format!("{index} {}", tip.value),
                    json!({ "index": index, "bytes": bytes.len(), "tip": tip.value.to_hex() }),
                );
            }
            log.close()?;
            Ok(())
        }

        Command::Verify {
            index,
            event,
            pubkey,
            pq_pubkey,
            store,
        } => {
            let log = LogStore::open(&store.store)?;
            let bytes = log.read(*index)?;
            let pk = load_public(pubkey)?;
            match AnyRecord::from_bytes(&bytes)? {
                AnyRecord::Plain(r) => {
                    let e = read_event(event, r.header.k as usize)?;
                    out.verdict("record", verify(&pk, &e, &r))
                }
                AnyRecord::Hybrid(r) => {
                    let pq_path = pq_pubkey
                        .as_ref()
                        .ok_or_else(|| Failure::Usage(format!("record {index} is hybrid; pass --pq-pubkey")))?;
                    let pq = load_public(pq_path)?;
                    let e = read_event(event, r.field_block.k())?;
                    out.verdict("hybrid record", verify_hybrid(&pk, &pq, &e, &r))
                }
            }
        }

        Command::Link { range, store } => {
            let log = LogStore::open(&store.store)?;
            let range = parse_range(range.as_deref(), log.len())?;
            let tip = log.link_range(range.clone())?;
            out.emit(
                tip.value.to_hex(),
                json!({ "start": range.start, "end": range.end, "tip": tip.value.to_hex() }),
            );
            Ok(())
        }

        Command::Diagnose { log_a, log_b } => {
            let (a, b) = (LogStore::open(log_a)?, LogStore::open(log_b)?);
            if a.chain_hash() != b.chain_hash() {
                return Err(Failure::Usage(format!(
                    "stores chain under different hashes ({} and {})",
                    a.chain_hash(),
                    b.chain_hash()
                )));
            }
            let ra = a.read_range(0..a.len())?;
            let rb = b.read_range(0..b.len())?;
            let rep = diagnose(&ra, &rb, a.chain_hash());
            let collision = rep
                .collision_pair
                .as_ref()
                .map(|(x, y)| json!([hex::encode(x), hex::encode(y)]));
            out.emit(
                rep.to_string(),
                json!({ "kind": rep.kind, "index": rep.index, "collision_pair": collision }),
            );
            if rep.kind == DivergenceKind::Identical {
                Ok(())
            } else {
                Err(Failure::Rejected)
            }
        }

        Command::Anchor {
            range,
            pq_key,
            batch_size,
            store,
        } => {
            let kp = load_secret(pq_key)?;
            let mut log = LogStore::open(&store.store)?;
            let range = parse_range(range.as_deref(), log.len())?;
            for a in log.anchor(range, &kp, *batch_size)? {
                let (s, e) = a.record_range;
                out.emit(
                    format!("batch {} records {s}..{e} root {}", a.batch_id, a.root),
                    json!({ "batch_id": a.batch_id.to_string(), "start": s, "end": e, "root": a.root.to_hex() }),
                );
            }
            Ok(())
        }

        Command::Prove {
            index,
            out: path,
            store,
        } => {
            let log = LogStore::open(&store.store)?;
            let (proof, anchor) = log.prove(*index)?;
            let anchor_path = with_suffix(path, ".evan");
            fs::write(path, proof.to_bytes())?;
            fs::write(&anchor_path, anchor.to_bytes())?;
            out.emit(
                format!(
                    "proof for record {index} ({} steps) written to {}; anchor {} written to {}",
                    proof.path.len(),
                    path.display(),
                    anchor.batch_id,
                    anchor_path.display()
                ),
                json!({ "index": index, "proof": path, "anchor": anchor_path, "batch_id": anchor.batch_id.to_string() }),
            );
            Ok(())
        }

        Command::VerifyProof {
            proof,
            anchor,
            pq_pubkey,
            record,
            store,
        } => {
            let proof = InclusionProof::from_bytes(&fs::read(proof)?)?;
            let anchor = BatchAnchor::from_bytes(&fs::read(anchor)?)?;
            let pk = load_public(pq_pubkey)?;
            let bytes = match (record, store) {
                (Some(r), _) => fs::read(r)?,
                (None, Some(dir)) => LogStore::open(dir)?.read(anchor.record_range.0 + proof.leaf_index)?,
                (None, None) => return Err(Failure::Usage("pass --record or --store".into())),
            };
            out.verdict(
                "inclusion proof",
                verify_anchored_record(&bytes, &proof, &anchor, &pk, anchor.hash_fn),
            )
        }

        Command::Resign {
            pq_key,
            workers,
            out: path,
            signed_at,
            store,
        } => {
            let kp = load_secret(pq_key)?;
            let log = LogStore::open(&store.store)?;
            let path = path.clone().unwrap_or_else(|| store.store.join("migrated.evmg"));
            let signed_at =
                signed_at.unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
            let done = resume_point(&path, &log)?;
            let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
            let mut next = done;
            while next < log.len() {
                let end = (next + RESIGN_CHUNK as u64).min(log.len());
                let chunk = log.read_range(next..end)?;
                let migrated = resign_legacy(&chunk, &kp, log.chain_hash(), *workers, signed_at)?;
                let mut buf = Vec::new();
                for m in &migrated {
                    buf.extend_from_slice(&m.to_bytes());
                }
                file.write_all(&buf)?;
                file.sync_data()?;
                next = end;
            }
            out.emit(
                format!(
                    "{} records re-signed ({} already done) into {}",
                    log.len() - done,
                    done,
                    path.display()
                ),
                json!({ "resigned": log.len() - done, "skipped": done, "out": path }),
            );
            Ok(())
        }

        Command::Estimate {
            pattern,
            n,
            n_new,
            batch_size,
            scheme,
            sign_rate,
            workers,
        } => {
            let pattern: Pattern = pattern.parse()?;
            let scheme: SignatureSchemeId = scheme.parse()?;
            let params = CostParams {
                sign_rate: *sign_rate,
                workers: *workers,
                ..CostParams::default()
            };
            let r = estimate_cost_with(pattern, *n, *n_new, *batch_size, scheme, params)?;
            let value = serde_json::to_value(&r).expect("plain data");
            out.emit(format!("{} signatures\n{r}", r.pq_signature_count), value);
            Ok(())
        }

        Command::Game {
            game,
            scheme,
            hash,
            adversary,
            trials,
            seed,
            budget,
            k,
        } => {
            let adversary: Adversary = adversary.parse()?;
            let game: Game = match game {
                Some(g) => g.parse()?,
                None => adversary.game(),
            };
            let cfg = GameConfig {
                trials: *trials,
                seed: *seed,
                query_budget: *budget,
                k: *k,
                ..GameConfig::new(game, hash.parse()?, scheme.parse()?, adversary)
            };
            let result = evtrail::run_game(&cfg)?;
            let summary = report(std::slice::from_ref(&result));
            if out.json {
                print!("{}", summary.to_json_lines());
            } else {
                print!("{}", summary.to_table());
                println!(
                    "win rate {:.4} ({} of {} trials)",
                    result.win_rate, result.wins, result.config.trials
                );
                if result.referee_disagreements > 0 {
                    println!("referee disagreements: {}", result.referee_disagreements);
                }
            }
            Ok(())
        }

        Command::Audit { pubkeys, range, store } => {
            let log = LogStore::open(&store.store)?;
            let keys = load_key_dir(pubkeys)?;
            let opts = AuditOptions {
                range: range.as_deref().map(|r| parse_range(Some(r), log.len())).transpose()?,
                ..AuditOptions::new(&keys)
            };
            let rep = log.audit(&opts);
            out.emit(audit_text(&rep), audit_json(&rep));
            if rep.passed() {
                Ok(())
            } else {
                Err(Failure::Rejected)
            }
        }

        Command::Bench {
            op,
            count,
            workers,
            scheme,
        } => {
            let op: BenchOp = op.parse()?;
            let scheme = match scheme {
                Some(s) => s.parse()?,
                None if op == BenchOp::Anchor => SignatureSchemeId::MlDsa65,
                None => SignatureSchemeId::Ed25519,
            };
            let r = run_bench(op, scheme, *count, *workers)?;
            out.emit(r.to_string(), serde_json::to_value(&r).expect("plain data"));
            Ok(())
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_new(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut f = OpenOptions::new().write(true).create_new(true).open(path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(())
}

fn load_secret(path: &Path) -> Result<KeyPair, Failure> {
    Ok(decode_secret_key(&fs::read(path)?)?)
}

fn load_public(path: &Path) -> Result<PublicKey, Failure> {
    Ok(decode_public_key(&fs::read(path)?)?)
}

fn load_key_dir(dir: &Path) -> Result<Vec<PublicKey>, Failure> {
    let mut keys = Vec::new();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.sort();
    for p in paths.into_iter().filter(|p| p.extension().is_some_and(|e| e == "pub")) {
        keys.push(load_public(&p)?);
    }
    if keys.is_empty() {
        return Err(Failure::Usage(format!("no *.pub files in {}", dir.display())));
    }
    Ok(keys)
}

fn read_event(path: &Path, k: usize) -> Result<EventDescription, Failure> {
    Ok(EventDescription::parse_text(
        &fs::read_to_string(path)?,
        k,
        path.parent(),
    )?)
}

/// Parses `A..B`, `A..` or `..B` against a log of `len` records.
fn parse_range(text: Option<&str>, len: u64) -> Result<Range<u64>, Failure> {
    let Some(text) = text else {
        return Ok(0..len);
    };
    let bad = || Failure::Usage(format!("range {text:?} is not A..B"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let start = if a.is_empty() { 0 } else { a.parse().map_err(|_| bad())? };
    let end = if b.is_empty() {
        len
    } else {
        b.parse().map_err(|_| bad())?
    };
    if start > end || end > len {
        return Err(Error::OutOfRange { index: end, len }.into());
    }
    Ok(start..end)
}

/// Counts complete migrated records already in `path`, checking each wraps
/// the store record at its position. A partial trailing record is cut off.
fn resume_point(path: &Path, log: &LogStore) -> Result<u64, Failure> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e.into()),
    };
    let mut at = 0;
    let mut done = 0u64;
    while at < bytes.len() {
        let Ok((m, used)) = MigratedRecord::read_one(&bytes[at..]) else {
            break;
        };
        if done >= log.len() || log.read(done)? != m.original {
            return Err(Error::Malformed(format!(
                "{} entry {done} does not match the store; refusing to resume",
                path.display()
            ))
            .into());
        }
        at += used;
        done += 1;
    }
    if at < bytes.len() {
        File::options().write(true).open(path)?.set_len(at as u64)?;
    }
    Ok(done)
}

fn audit_text(r: &AuditReport) -> String {
    let mut lines = vec![
        format!("records checked     {}", r.records_checked),
        format!("verify failures     {}", r.verify_failures.len()),
        format!("chain               {}", if r.chain_ok { "ok" } else { "MISMATCH" }),
        format!("checkpoints checked {}", r.checkpoints_checked),
        format!("anchors checked     {}", r.anchors_checked),
        format!("anchor failures     {}", r.anchor_failures.len()),
    ];
    if r.torn_tail_bytes > 0 {
        lines.push(format!("torn tail bytes     {}", r.torn_tail_bytes));
    }
    for (i, reason) in &r.verify_failures {
        lines.push(format!("record {i}: {reason}"));
    }
    for i in &r.checkpoint_failures {
        lines.push(format!("checkpoint at {i}: tip mismatch"));
    }
    for (id, reason) in &r.anchor_failures {
        lines.push(format!("anchor {id}: {reason}"));
    }
    lines.push(if r.passed() { "PASSED" } else { "FAILED" }.into());
    lines.join("\n")
}

fn audit_json(r: &AuditReport) -> Value {
    json!({
        "records_checked": r.records_checked,
        "verify_failures": r.verify_failures.iter().map(|(i, reason)| json!([i, reason.code()])).collect::<Vec<_>>(),
        "chain_ok": r.chain_ok,
        "checkpoints_checked": r.checkpoints_checked,
        "checkpoint_failures": r.checkpoint_failures,
        "anchors_checked": r.anchors_checked,
        "anchor_failures": r.anchor_failures.iter().map(|(id, reason)| json!([id.to_string(), reason.code()])).collect::<Vec<_>>(),
        "torn_tail_bytes": r.torn_tail_bytes,
        "passed": r.passed(),
    })
}
