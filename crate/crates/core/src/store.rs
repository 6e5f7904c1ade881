//! Append-only evidence log on disk.
//!
//! A store is a directory:
//!
//! ```text
//! index               "evtrail-store 1", "chain <hash>", then "segment <id>" per segment
//! seg-000000.evlg     "EVLG" | 0x01 | hash id | scheme byte | k | flags | records...
//! checkpoints         "<records chained> <hex tip>" per line
//! anchors/<id>.evan   batch anchors
//! ```
//!
//! Records within a segment share one header, so they are all the same
//! size and record `i` sits at a computable offset. The hash chain runs
//! across segments under the store's chain hash, fixed at creation.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{malformed, Error, RejectReason, Result};
use crate::evidence::{verify_signature_only, verify_with, EventDescription, Policy, HEADER_LEN};
use crate::linkage::{chain_step, link_bytes, link_incremental_bytes, ChainTip};
use crate::merkle::{anchor_batch, build_tree, verify_anchor, BatchAnchor, BatchId, InclusionProof};
use crate::migration::{verify_hybrid_signatures, verify_hybrid_with, AnyRecord, HYBRID_FLAG};
use crate::primitives::{Digest, HashFunctionId, KeyPair, PublicKey, SignatureSchemeId};

pub const SEGMENT_MAGIC: &[u8; 4] = b"EVLG";
pub const SEGMENT_VERSION: u8 = 0x01;
pub const SEGMENT_HEADER_LEN: usize = 9;
pub const CHECKPOINT_INTERVAL: u64 = 4096;
/// Segment header flag: records are hybrid.
pub const FLAG_HYBRID: u8 = 0x01;

const INDEX_FILE: &str = "index";
const INDEX_MAGIC: &str = "evtrail-store 1";
const CHECKPOINT_FILE: &str = "checkpoints";
const ANCHOR_DIR: &str = "anchors";

/// When appends reach stable storage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SyncPolicy {
    /// `fsync` after every record.
    #[default]
    EveryAppend,
    /// Hand each record to the OS on append; `fsync` at checkpoints and
    /// close. Survives process crashes, not power loss.
    OnCheckpoint,
}

/// The record header every record in a segment carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SegmentConfig {
    header: [u8; HEADER_LEN],
}

impl SegmentConfig {
    pub fn of_record(record: &[u8]) -> Result<Self> {
        AnyRecord::len_from_header(record)?;
        Ok(SegmentConfig {
            header: record[..HEADER_LEN].try_into().expect("length checked"),
        })
    }

    pub fn record_len(&self) -> usize {
        AnyRecord::len_from_header(&self.header).expect("validated at construction")
    }

    pub fn is_hybrid(&self) -> bool {
        self.header[0] & HYBRID_FLAG != 0
    }

    pub fn hash_fn(&self) -> HashFunctionId {
        HashFunctionId::from_id(self.header[1]).expect("validated at construction")
    }

    pub fn k(&self) -> usize {
        self.header[3] as usize
    }

    pub fn describe(&self) -> String {
        let scheme = if self.is_hybrid() {
            format!("hybrid suite {:#04x}", self.header[2])
        } else {
            SignatureSchemeId::from_id(self.header[2]).map_or_else(|_| "?".into(), |s| s.name())
        };
        format!("{} {} k={}", self.hash_fn(), scheme, self.k())
    }

    fn to_segment_header(self) -> [u8; SEGMENT_HEADER_LEN] {
        let mut h = [0u8; SEGMENT_HEADER_LEN];
        h[..4].copy_from_slice(SEGMENT_MAGIC);
        h[4] = SEGMENT_VERSION;
        h[5] = self.header[1];
        h[6] = self.header[2];
        h[7] = self.header[3];
        h[8] = if self.is_hybrid() { FLAG_HYBRID } else { 0 };
        h
    }

    fn from_segment_header(h: &[u8]) -> Result<Self> {
        if h.len() < SEGMENT_HEADER_LEN || &h[..4] != SEGMENT_MAGIC {
            return Err(malformed("not a segment file"));
        }
        if h[4] != SEGMENT_VERSION {
            return Err(malformed(format!("segment version {:#04x}", h[4])));
        }
        if h[8] & !FLAG_HYBRID != 0 {
            return Err(malformed(format!("segment flags {:#04x}", h[8])));
        }
        let version = crate::evidence::RECORD_VERSION | if h[8] & FLAG_HYBRID != 0 { HYBRID_FLAG } else { 0 };
        Self::of_record(&[version, h[5], h[6], h[7]])
    }
}

#[derive(Debug)]
pub struct LogSegment {
    pub segment_id: u32,
    pub config: SegmentConfig,
    pub first_index: u64,
    pub record_count: u64,
    pub chain_tip_at_end: ChainTip,
    path: PathBuf,
    file: File,
}

impl LogSegment {
    pub fn record_len(&self) -> usize {
        self.config.record_len()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Byte offset of record `i` (segment-local).
    pub fn offset(&self, i: u64) -> u64 {
        SEGMENT_HEADER_LEN as u64 + i * self.record_len() as u64
    }

    fn read_local(&self, i: u64) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; self.record_len()];
        read_exact_at(&self.file, &mut buf, self.offset(i))?;
        Ok(buf)
    }
}

#[cfg(unix)]
fn read_exact_at(f: &File, buf: &mut [u8], at: u64) -> std::io::Result<()> {
    std::os::unix::fs::FileExt::read_exact_at(f, buf, at)
}

#[cfg(not(unix))]
fn read_exact_at(f: &File, buf: &mut [u8], at: u64) -> std::io::Result<()> {
    use std::io::{Seek, SeekFrom};
    let mut f = f.try_clone()?;
    f.seek(SeekFrom::Start(at))?;
    f.read_exact(buf)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    /// Number of records chained, so `tip` is `ℓ_index`.
    pub index: u64,
    pub tip: Digest,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub records_checked: u64,
    pub verify_failures: Vec<(u64, RejectReason)>,
    pub chain_ok: bool,
    pub checkpoints_checked: u64,
    /// Checkpoints whose tip disagrees with the recomputed chain, or which
    /// refer past the end of the log.
    pub checkpoint_failures: Vec<u64>,
    pub anchors_checked: u64,
    pub anchor_failures: Vec<(BatchId, RejectReason)>,
    /// Bytes of an incomplete final record, excluded from the log.
    pub torn_tail_bytes: u64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.verify_failures.is_empty() && self.chain_ok && self.anchor_failures.is_empty()
    }
}

/// Inputs for [`LogStore::audit`].
pub struct AuditOptions<'a> {
    /// Defaults to the whole log.
    pub range: Option<Range<u64>>,
    /// Candidate keys; each record is checked against the key(s) matching
    /// its scheme(s).
    pub keys: &'a [PublicKey],
    /// Raw events by index, when the auditor has them.
    pub events: Option<&'a (dyn Fn(u64) -> Option<EventDescription> + Sync)>,
    pub policy: Policy,
}

impl<'a> AuditOptions<'a> {
    pub fn new(keys: &'a [PublicKey]) -> Self {
        AuditOptions {
            range: None,
            keys,
            events: None,
            policy: Policy::Production,
        }
    }
}

pub struct LogStore {
    dir: PathBuf,
    chain_hash: HashFunctionId,
    segments: Vec<LogSegment>,
    tip: ChainTip,
    checkpoints: Vec<Checkpoint>,
    sync: SyncPolicy,
    torn_tail_bytes: u64,
    appended: bool,
}

impl LogStore {
    pub fn create(dir: impl AsRef<Path>, chain_hash: HashFunctionId) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        if dir.join(INDEX_FILE).exists() {
            return Err(Error::InvalidParameter(format!(
                "{} already holds a store",
                dir.display()
            )));
        }
        fs::create_dir_all(dir.join(ANCHOR_DIR))?;
        File::create(dir.join(CHECKPOINT_FILE))?.sync_all()?;
        let store = LogStore {
            dir,
            chain_hash,
            segments: Vec::new(),
            tip: ChainTip::genesis(chain_hash),
            checkpoints: Vec::new(),
            sync: SyncPolicy::default(),
            torn_tail_bytes: 0,
            appended: false,
        };
        store.write_index()?;
        Ok(store)
    }

    /// Opens an existing store, recomputing the chain over every record.
    /// An incomplete final record is excluded and reported.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let index = fs::read_to_string(dir.join(INDEX_FILE))?;
        let mut lines = index.lines();
        if lines.next() != Some(INDEX_MAGIC) {
            return Err(malformed("not a store index"));
        }
        let chain_hash: HashFunctionId = lines
            .next()
            .and_then(|l| l.strip_prefix("chain "))
            .ok_or_else(|| malformed("index lacks a chain line"))?
            .parse()?;
        let ids = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.strip_prefix("segment ")
                    .and_then(|n| n.trim().parse::<u32>().ok())
                    .ok_or_else(|| malformed(format!("index line {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut segments = Vec::with_capacity(ids.len());
        let mut tip = ChainTip::genesis(chain_hash);
        let mut torn_tail_bytes = 0;
        for (n, id) in ids.iter().copied().enumerate() {
            let path = segment_path(&dir, id);
            let file = OpenOptions::new().read(true).append(true).open(&path)?;
            let len = file.metadata()?.len();
            let mut header = [0u8; SEGMENT_HEADER_LEN];
            read_exact_at(&file, &mut header, 0)?;
            let config = SegmentConfig::from_segment_header(&header)?;
            let rl = config.record_len() as u64;
            let payload = len - SEGMENT_HEADER_LEN as u64;
            let (count, torn) = (payload / rl, payload % rl);
            if torn != 0 {
                if n + 1 != ids.len() {
                    return Err(malformed(format!("segment {id} has a partial record but is not last")));
                }
                torn_tail_bytes = torn;
            }
            let mut reader = BufReader::new(&file);
            let mut skip = [0u8; SEGMENT_HEADER_LEN];
            reader.read_exact(&mut skip)?;
            let mut buf = vec![0u8; rl as usize];
            for _ in 0..count {
                reader.read_exact(&mut buf)?;
                tip = link_incremental_bytes(tip, &buf, chain_hash);
            }
            segments.push(LogSegment {
                segment_id: id,
                config,
                first_index: tip.length - count,
                record_count: count,
                chain_tip_at_end: tip,
                path,
                file,
            });
        }
        let checkpoints = read_checkpoints(&dir.join(CHECKPOINT_FILE))?;
        Ok(LogStore {
            dir,
            chain_hash,
            segments,
            tip,
            checkpoints,
            sync: SyncPolicy::default(),
            torn_tail_bytes,
            appended: false,
        })
    }

    pub fn open_or_create(dir: impl AsRef<Path>, chain_hash: HashFunctionId) -> Result<Self> {
        if dir.as_ref().join(INDEX_FILE).exists() {
            Self::open(dir)
        } else {
            Self::create(dir, chain_hash)
        }
    }

    pub fn set_sync_policy(&mut self, sync: SyncPolicy) {
        self.sync = sync;
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn chain_hash(&self) -> HashFunctionId {
        self.chain_hash
    }

    pub fn len(&self) -> u64 {
        self.tip.length
    }

    pub fn is_empty(&self) -> bool {
        self.tip.length == 0
    }

    pub fn tip(&self) -> ChainTip {
        self.tip
    }

    pub fn segments(&self) -> &[LogSegment] {
        &self.segments
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }

    pub fn torn_tail_bytes(&self) -> u64 {
        self.torn_tail_bytes
    }

    /// Appends one serialized record (plain or hybrid) to the current
    /// segment and returns its index. A record whose header differs from
    /// the segment's is refused; see [`LogStore::append_or_roll`].
    pub fn append(&mut self, record: &[u8]) -> Result<u64> {
        AnyRecord::from_bytes(record)?;
        let config = SegmentConfig::of_record(record)?;
        match self.segments.last() {
            None => {
                self.start_segment(config)?;
            }
            Some(s) if s.config != config => {
                return Err(Error::ConfigMismatch {
                    expected: s.config.describe(),
                    found: config.describe(),
                })
            }
            Some(_) => {}
        }
        self.write_record(record)
    }

    /// Like [`LogStore::append`], starting a new segment when the record's
    /// header differs from the current one.
    pub fn append_or_roll(&mut self, record: &[u8]) -> Result<u64> {
        let config = SegmentConfig::of_record(record)?;
        if self.segments.last().map_or(true, |s| s.config != config) {
            AnyRecord::from_bytes(record)?;
            self.start_segment(config)?;
        }
        self.append(record)
    }

    /// Closes the current segment and opens a fresh one for `config`.
    pub fn start_segment(&mut self, config: SegmentConfig) -> Result<u32> {
        self.drop_torn_tail()?;
        let id = self.segments.last().map_or(0, |s| s.segment_id + 1);
        let path = segment_path(&self.dir, id);
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create_new(true)
            .open(&path)?;
        file.write_all(&config.to_segment_header())?;
        file.sync_all()?;
        self.segments.push(LogSegment {
            segment_id: id,
            config,
            first_index: self.tip.length,
            record_count: 0,
            chain_tip_at_end: self.tip,
            path,
            file,
        });
        self.write_index()?;
        Ok(id)
    }

    fn drop_torn_tail(&mut self) -> Result<()> {
        if self.torn_tail_bytes == 0 {
            return Ok(());
        }
        let seg = self.segments.last().expect("torn bytes imply a segment");
        seg.file.set_len(seg.offset(seg.record_count))?;
        seg.file.sync_all()?;
        self.torn_tail_bytes = 0;
        Ok(())
    }

    fn write_record(&mut self, record: &[u8]) -> Result<u64> {
        self.drop_torn_tail()?;
        let seg = self.segments.last_mut().expect("segment exists");
        (&seg.file).write_all(record)?;
        if self.sync == SyncPolicy::EveryAppend {
            seg.file.sync_data()?;
        }
        let index = self.tip.length;
        self.tip = link_incremental_bytes(self.tip, record, self.chain_hash);
        seg.record_count += 1;
        seg.chain_tip_at_end = self.tip;
        self.appended = true;
        if self.tip.length % CHECKPOINT_INTERVAL == 0 {
            self.checkpoint()?;
        }
        Ok(index)
    }

    /// Syncs the current segment and records the tip, unless the last
    /// checkpoint already covers it.
    pub fn checkpoint(&mut self) -> Result<()> {
        if let Some(seg) = self.segments.last() {
            seg.file.sync_data()?;
        }
        if self.checkpoints.last().map(|c| c.index) == Some(self.tip.length) || self.tip.length == 0 {
            return Ok(());
        }
        let cp = Checkpoint {
            index: self.tip.length,
            tip: self.tip.value,
        };
        let mut f = OpenOptions::new().append(true).open(self.dir.join(CHECKPOINT_FILE))?;
        writeln!(f, "{} {}", cp.index, cp.tip)?;
        f.sync_data()?;
        self.checkpoints.push(cp);
        Ok(())
    }

    /// Checkpoints and releases the store.
    pub fn close(mut self) -> Result<()> {
        self.checkpoint()
    }

    fn segment_for(&self, index: u64) -> Result<&LogSegment> {
        if index >= self.tip.length {
            return Err(Error::OutOfRange {
                index,
                len: self.tip.length,
            });
        }
        let at = self
            .segments
            .partition_point(|s| s.first_index + s.record_count <= index);
        Ok(&self.segments[at])
    }

    /// The exact bytes appended at `index`, read by offset.
    pub fn read(&self, index: u64) -> Result<Vec<u8>> {
        let seg = self.segment_for(index)?;
        seg.read_local(index - seg.first_index)
    }

    pub fn read_range(&self, range: Range<u64>) -> Result<Vec<Vec<u8>>> {
        self.check_range(&range)?;
        range.map(|i| self.read(i)).collect()
    }

    fn check_range(&self, range: &Range<u64>) -> Result<()> {
        if range.start > range.end || range.end > self.tip.length {
            return Err(Error::OutOfRange {
                index: range.end,
                len: self.tip.length,
            });
        }
        Ok(())
    }

    /// Chain over `range` alone, started from the all-zero IV.
    pub fn link_range(&self, range: Range<u64>) -> Result<ChainTip> {
        Ok(link_bytes(self.read_range(range)?, self.chain_hash))
    }

    /// Anchors `range` in batches of `batch_size`, storing each anchor.
    pub fn anchor(&mut self, range: Range<u64>, kp_pq: &KeyPair, batch_size: u64) -> Result<Vec<BatchAnchor>> {
        if batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        if !kp_pq.scheme().is_post_quantum() {
            return Err(Error::ClassicalKeyRefused);
        }
        self.check_range(&range)?;
        if range.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut out = Vec::new();
        let mut start = range.start;
        while start < range.end {
            let end = (start + batch_size).min(range.end);
            let records = self.read_range(start..end)?;
            let (anchor, _) = anchor_batch(&records, kp_pq, BatchId::for_range(start, end), start, self.chain_hash)?;
            let path = self.dir.join(ANCHOR_DIR).join(format!("{}.evan", anchor.batch_id));
            fs::write(&path, anchor.to_bytes())?;
            File::open(&path)?.sync_all()?;
            out.push(anchor);
            start = end;
        }
        Ok(out)
    }

    pub fn anchors(&self) -> Result<Vec<BatchAnchor>> {
        let mut out = Vec::new();
        let dir = self.dir.join(ANCHOR_DIR);
        if !dir.exists() {
            return Ok(out);
        }
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "evan") {
                out.push(BatchAnchor::from_bytes(&fs::read(&path)?)?);
            }
        }
        out.sort_by_key(|a| a.record_range);
        Ok(out)
    }

    /// Inclusion proof for `index` under the most recent anchor covering it.
    pub fn prove(&self, index: u64) -> Result<(InclusionProof, BatchAnchor)> {
        let anchor = self
            .anchors()?
            .into_iter()
            .rev()
            .find(|a| (a.record_range.0..a.record_range.1).contains(&index))
            .ok_or_else(|| Error::InvalidParameter(format!("no anchor covers record {index}")))?;
        let records = self.read_range(anchor.record_range.0..anchor.record_range.1)?;
        let tree = build_tree(&records, self.chain_hash)?;
        let proof = tree.prove_inclusion(anchor.batch_id, index - anchor.record_range.0)?;
        Ok((proof, anchor))
    }

    /// Re-verifies records, recomputes the chain against every checkpoint,
    /// and re-proves stored anchors overlapping the range. Problems become
    /// report entries.
    pub fn audit(&self, opts: &AuditOptions<'_>) -> AuditReport {
        let range = opts.range.clone().unwrap_or(0..self.tip.length);
        let range = range.start.min(self.tip.length)..range.end.min(self.tip.length);
        let mut report = AuditReport {
            records_checked: range.end.saturating_sub(range.start),
            torn_tail_bytes: self.torn_tail_bytes,
            ..AuditReport::default()
        };

        let mut failures: Vec<(u64, RejectReason)> = range
            .clone()
            .into_par_iter()
            .filter_map(|i| match self.read(i) {
                Ok(bytes) => self.check_record(i, &bytes, opts).err().map(|r| (i, r)),
                Err(_) => Some((i, RejectReason::Malformed)),
            })
            .collect();
        failures.sort_by_key(|(i, _)| *i);
        report.verify_failures = failures;

        // The chain is a fold from the first record, so it is recomputed
        // in full whatever the audit range.
        let mut chain_ok = true;
        let mut cur = Digest::zero(self.chain_hash);
        let mut cps = self.checkpoints.iter().peekable();
        for i in 0..self.tip.length {
            while let Some(cp) = cps.next_if(|cp| cp.index == i) {
                report.checkpoints_checked += 1;
                if cp.tip != cur {
                    report.checkpoint_failures.push(cp.index);
                }
            }
            match self.read(i) {
                Ok(b) => cur = chain_step(self.chain_hash, &cur, &b),
                Err(_) => chain_ok = false,
            }
        }
        for cp in cps {
            report.checkpoints_checked += 1;
            if cp.index != self.tip.length || cp.tip != cur {
                report.checkpoint_failures.push(cp.index);
            }
        }
        report.chain_ok = chain_ok && report.checkpoint_failures.is_empty();

        match self.anchors() {
            Ok(anchors) => {
                for a in anchors {
                    let (s, e) = a.record_range;
                    if e <= range.start || s >= range.end {
                        continue;
                    }
                    report.anchors_checked += 1;
                    if let Err(r) = self.check_anchor(&a, opts.keys) {
                        report.anchor_failures.push((a.batch_id, r));
                    }
                }
            }
            Err(_) => report.anchor_failures.push((BatchId([0; 16]), RejectReason::Malformed)),
        }
        report
    }

    fn check_record(&self, i: u64, bytes: &[u8], opts: &AuditOptions<'_>) -> std::result::Result<(), RejectReason> {
        let key = |s: SignatureSchemeId| opts.keys.iter().find(|k| k.scheme() == s);
        let event = opts.events.and_then(|f| f(i));
        match AnyRecord::from_bytes(bytes).map_err(|_| RejectReason::Malformed)? {
            AnyRecord::Plain(r) => {
                let pk = key(r.header.scheme).ok_or(RejectReason::BadSignature)?;
                match &event {
                    Some(e) => verify_with(opts.policy, pk, e, &r),
                    None => verify_signature_only(opts.policy, pk, &r),
                }
            }
            AnyRecord::Hybrid(r) => {
                let pkc = key(r.classical).ok_or(RejectReason::BadClassicalSig)?;
                let pkq = key(r.pq).ok_or(RejectReason::BadPqSig)?;
                match &event {
                    Some(e) => verify_hybrid_with(opts.policy, pkc, pkq, e, &r),
                    None => verify_hybrid_signatures(opts.policy, pkc, pkq, &r),
                }
            }
        }
    }

    fn check_anchor(&self, a: &BatchAnchor, keys: &[PublicKey]) -> std::result::Result<(), RejectReason> {
        let (s, e) = a.record_range;
        let records = self.read_range(s..e).map_err(|_| RejectReason::BadProof)?;
        let tree = build_tree(&records, a.hash_fn).map_err(|_| RejectReason::BadProof)?;
        if tree.root() != a.root || link_bytes(&records, a.hash_fn).value != a.chain_tip {
            return Err(RejectReason::BadProof);
        }
        let pk = keys
            .iter()
            .find(|k| k.scheme() == a.scheme)
            .ok_or(RejectReason::BadAnchorSig)?;
        verify_anchor(a, pk)
    }

    fn write_index(&self) -> Result<()> {
        let mut text = format!("{INDEX_MAGIC}\nchain {}\n", self.chain_hash);
        for s in &self.segments {
            text.push_str(&format!("segment {}\n", s.segment_id));
        }
        let tmp = self.dir.join("index.tmp");
        {
            let mut f = File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(tmp, self.dir.join(INDEX_FILE))?;
        Ok(())
    }
}

impl Drop for LogStore {
    fn drop(&mut self) {
        if self.appended {
            let _ = self.checkpoint();
        }
    }
}

fn segment_path(dir: &Path, id: u32) -> PathBuf {
    dir.join(format!("seg-{id:06}.evlg"))
}

fn read_checkpoints(path: &Path) -> Result<Vec<Checkpoint>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (i, t) = line
            .split_once(' ')
            .ok_or_else(|| malformed(format!("checkpoint line {line:?}")))?;
        out.push(Checkpoint {
            index: i.parse().map_err(|_| malformed(format!("checkpoint index {i:?}")))?,
            tip: Digest::from_hex(t)?,
        });
    }
    Ok(out)
}
