use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn evtrail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evtrail"))
        .args(args)
        .env_remove("EVTRAIL_STORE")
        .output()
        .expect("spawn evtrail")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_event(dir: &Path, name: &str, output: &str) -> PathBuf {
    let text = format!(
        "context = text:job-{name}\nmodel = hex:9f86d081\ncode = b64:aGVsbG8=\ninput = text:in\n\
         output = text:{output}\npolicy = text:p\nenvironment = text:env\nlink_hint = text:-\n"
    );
    let p = dir.join(format!("{name}.ev"));
    std::fs::write(&p, text).unwrap();
    p
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        std::fs::create_dir(f.path("keys")).unwrap();
        let ok = |o: Output| assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        ok(evtrail(&[
            "keygen",
            "--scheme",
            "ed25519",
            "--seed",
            "a",
            "--out",
            s(&f.path("keys/ed")),
        ]));
        ok(evtrail(&[
            "keygen",
            "--scheme",
            "ml-dsa-65",
            "--seed",
            "b",
            "--out",
            s(&f.path("keys/ml")),
        ]));
        f
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn generate(&self, store: &str, names: &[&str], extra: &[&str]) -> Output {
        let events: Vec<PathBuf> = names.iter().map(|n| write_event(self.dir.path(), n, n)).collect();
        let key = self.path("keys/ed");
        let store = self.path(store);
        let mut a: Vec<&str> = vec!["generate", "--key", s(&key), "--store", s(&store)];
        a.extend_from_slice(extra);
        a.push("--event");
        a.extend(events.iter().map(|p| s(p)));
        evtrail(&a)
    }
}

#[test]
fn estimate_reports_signature_count() {
    let o = evtrail(&[
        "estimate",
        "--pattern",
        "anchor",
        "--n",
        "100000000",
        "--batch-size",
        "4096",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("24415 signatures"), "{}", stdout(&o));

    let o = evtrail(&["--json", "estimate", "--pattern", "resign", "--n", "1000"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["format"], 1);
    assert_eq!(v["pq_signature_count"], 1000);
}

#[test]
fn generate_verify_and_tamper() {
    let f = Fixture::new();
    let o = f.generate("store", &["a", "b", "c"], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 3);

    let store = f.path("store");
    let pk = f.path("keys/ed.pub");
    let ev_b = f.path("b.ev");
    let o = evtrail(&[
        "verify",
        "--store",
        s(&store),
        "--index",
        "1",
        "--event",
        s(&ev_b),
        "--pubkey",
        s(&pk),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "ACCEPT");

    // Same record, event with a different output component.
    let forged = write_event(f.dir.path(), "b", "other");
    let o = evtrail(&[
        "verify",
        "--store",
        s(&store),
        "--index",
        "1",
        "--event",
        s(&forged),
        "--pubkey",
        s(&pk),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("REJECT"), "{}", stdout(&o));

    let o = evtrail(&[
        "verify",
        "--store",
        s(&store),
        "--index",
        "9",
        "--event",
        s(&forged),
        "--pubkey",
        s(&pk),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn hybrid_records_need_both_keys() {
    let f = Fixture::new();
    let ml = f.path("keys/ml");
    let o = f.generate("store", &["h"], &["--hybrid", "--pq-key", s(&ml)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (store, ev) = (f.path("store"), f.path("h.ev"));
    let (pk, pq) = (f.path("keys/ed.pub"), f.path("keys/ml.pub"));
    let o = evtrail(&[
        "verify",
        "--store",
        s(&store),
        "--index",
        "0",
        "--event",
        s(&ev),
        "--pubkey",
        s(&pk),
        "--pq-pubkey",
        s(&pq),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = evtrail(&[
        "verify",
        "--store",
        s(&store),
        "--index",
        "0",
        "--event",
        s(&ev),
        "--pubkey",
        s(&pk),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn anchor_prove_audit() {
    let f = Fixture::new();
    assert_eq!(code(&f.generate("store", &["a", "b", "c", "d", "e"], &[])), 0);
    let (store, ml) = (f.path("store"), f.path("keys/ml"));
    let o = evtrail(&["anchor", "--store", s(&store), "--pq-key", s(&ml), "--batch-size", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 3);

    let proof = f.path("p4.evpf");
    let o = evtrail(&["prove", "--store", s(&store), "--index", "4", "--out", s(&proof)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let anchor = f.path("p4.evpf.evan");
    let pq = f.path("keys/ml.pub");
    let o = evtrail(&[
        "verify-proof",
        "--store",
        s(&store),
        "--proof",
        s(&proof),
        "--anchor",
        s(&anchor),
        "--pq-pubkey",
        s(&pq),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    // Proof for record 4 presented with record 0's bytes.
    let rec0 = f.path("rec0");
    std::fs::write(
        &rec0,
        &std::fs::read(store.join("seg-000000.evlg")).unwrap()[9..9 + 324],
    )
    .unwrap();
    let o = evtrail(&[
        "verify-proof",
        "--record",
        s(&rec0),
        "--proof",
        s(&proof),
        "--anchor",
        s(&anchor),
        "--pq-pubkey",
        s(&pq),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("REJECT"));

    let keys = f.path("keys");
    let o = evtrail(&["audit", "--store", s(&store), "--pubkeys", s(&keys)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("PASSED"));
}

#[test]
fn audit_flags_tampered_record() {
    let f = Fixture::new();
    assert_eq!(code(&f.generate("store", &["a", "b", "c"], &[])), 0);
    let seg = f.path("store/seg-000000.evlg");
    let mut bytes = std::fs::read(&seg).unwrap();
    bytes[9 + 324 + 40] ^= 1;
    std::fs::write(&seg, bytes).unwrap();
    let (store, keys) = (f.path("store"), f.path("keys"));
    let o = evtrail(&["--json", "audit", "--store", s(&store), "--pubkeys", s(&keys)]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verify_failures"][0][0], 1);
    assert_eq!(v["chain_ok"], false);
}

#[test]
fn link_and_diagnose() {
    let f = Fixture::new();
    assert_eq!(code(&f.generate("a", &["x", "y", "z"], &[])), 0);
    assert_eq!(code(&f.generate("b", &["x", "y", "z"], &[])), 0);
    let (a, b) = (f.path("a"), f.path("b"));
    let tip_a = stdout(&evtrail(&["link", "--store", s(&a)]));
    let tip_b = stdout(&evtrail(&["link", "--store", s(&b)]));
    assert_eq!(tip_a, tip_b);
    assert_eq!(tip_a.trim().len(), 64);
    assert_eq!(code(&evtrail(&["diagnose", "--log-a", s(&a), "--log-b", s(&b)])), 0);

    assert_eq!(code(&f.generate("c", &["x", "w", "z"], &[])), 0);
    let c = f.path("c");
    let o = evtrail(&["--json", "diagnose", "--log-a", s(&a), "--log-b", s(&c)]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["index"], 1);
}

#[test]
fn resign_resumes() {
    let f = Fixture::new();
    assert_eq!(code(&f.generate("store", &["a", "b"], &[])), 0);
    let (store, ml) = (f.path("store"), f.path("keys/ml"));
    let args = ["resign", "--store", s(&store), "--pq-key", s(&ml), "--signed-at", "5"];
    let o = evtrail(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read(store.join("migrated.evmg")).unwrap();

    assert_eq!(code(&f.generate("store", &["c"], &[])), 0);
    let o = evtrail(&["--json", args[0], args[1], args[2], args[3], args[4], args[5], args[6]]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!((v["resigned"].as_u64(), v["skipped"].as_u64()), (Some(1), Some(2)));
    let all = std::fs::read(store.join("migrated.evmg")).unwrap();
    assert!(all.starts_with(&first));
}

#[test]
fn toy_game_wins_and_toys_stay_out_of_keygen() {
    let o = evtrail(&[
        "game",
        "--game",
        "qbind",
        "--hash",
        "toy8",
        "--adversary",
        "collision-search",
        "--trials",
        "50",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("win rate")).expect("win rate line");
    let rate: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(rate > 0.9, "{out}");

    let dir = tempfile::tempdir().unwrap();
    let o = evtrail(&["keygen", "--scheme", "toy-constant", "--out", s(&dir.path().join("k"))]);
    assert_eq!(code(&o), 4);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&evtrail(&["estimate", "--pattern", "teleport", "--n", "1"])), 2);
    assert_eq!(code(&evtrail(&["frobnicate"])), 2);
    assert_eq!(code(&evtrail(&["bench", "--op", "anchor", "--scheme", "nope"])), 2);
}

#[test]
fn bench_runs() {
    let o = evtrail(&["--json", "bench", "--op", "link", "--count", "200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["count"], 200);
}
