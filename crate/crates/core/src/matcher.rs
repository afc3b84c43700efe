//! Failure-less parallel scanning.
//!
//! Every text position starts its own walk from the root. A walk ends on the
//! first mismatch or on the first match node it reaches.

use std::collections::HashMap;
use std::io::{self, Write};
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::Serialize;

use crate::crs::CrsTrie;
use crate::error::{Error, Result};
use crate::pattern::{PatternId, PatternSet};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MatchRecord {
    /// Byte offset of the walk's start.
    pub position: usize,
    /// Bytes consumed to reach the match node.
    pub depth: usize,
    /// Patterns confirmed in full at `position`. Empty without verification.
    pub pattern_ids: Vec<PatternId>,
    /// Set when verification ran and no full pattern was confirmed.
    pub prefix_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanConfig {
    pub parallelism: usize,
    /// Start positions per work unit.
    pub chunk_size: usize,
    pub verify: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            parallelism: thread::available_parallelism().map_or(1, NonZeroUsize::get),
            chunk_size: 1 << 16,
            verify: false,
        }
    }
}

impl ScanConfig {
    pub fn new(parallelism: usize, chunk_size: usize, verify: bool) -> Result<Self> {
        let cfg = ScanConfig {
            parallelism,
            chunk_size,
            verify,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Walks from the root at `start` and reports the first match node reached.
#[inline]
pub fn match_at(crs: &CrsTrie, text: &[u8], start: usize) -> Option<MatchRecord> {
    let mut node = 0;
    for (i, &c) in text[start..].iter().enumerate() {
        node = crs.child_lookup(node, c)?;
        if crs.is_match(node) {
            return Some(MatchRecord {
                position: start,
                depth: i + 1,
                pattern_ids: Vec::new(),
                prefix_only: false,
            });
        }
    }
    None
}

/// Resolves truncated or merged matches back to concrete patterns.
///
/// Candidates are grouped by compiled prefix: a pattern's first
/// `min(len, height)` bytes, where `height` is the deepest root path of the
/// trie. A walk stopping at depth `d` can only belong to patterns whose
/// compiled prefix is at least `d` bytes and starts with the `d` matched bytes.
#[derive(Debug, Clone)]
pub struct Verifier<'p> {
    patterns: &'p PatternSet,
    by_prefix: HashMap<&'p [u8], Vec<PatternId>>,
    height: usize,
}

impl<'p> Verifier<'p> {
    pub fn new(crs: &CrsTrie, patterns: &'p PatternSet) -> Result<Self> {
        let height = crs.height();
        let mut by_prefix: HashMap<&[u8], Vec<PatternId>> = HashMap::new();
        let mut known: Vec<PatternId> = crs.pattern_index().values().flatten().copied().collect();
        known.sort_unstable();
        known.dedup();
        for id in known {
            let pattern = patterns.get(id).ok_or_else(|| {
                Error::Invariant(format!(
                    "trie references pattern {id} but only {} patterns were given",
                    patterns.len()
                ))
            })?;
            by_prefix
                .entry(&pattern[..pattern.len().min(height)])
                .or_default()
                .push(id);
        }
        Ok(Verifier {
            patterns,
            by_prefix,
            height,
        })
    }

    pub fn verify(&self, mut record: MatchRecord, text: &[u8]) -> MatchRecord {
        let rest = &text[record.position..];
        let mut ids = Vec::new();
        for len in record.depth..=self.height.min(rest.len()) {
            if let Some(candidates) = self.by_prefix.get(&rest[..len]) {
                ids.extend(
                    candidates
                        .iter()
                        .copied()
                        .filter(|&id| rest.starts_with(self.patterns.get(id).unwrap())),
                );
            }
        }
        ids.sort_unstable();
        record.prefix_only = ids.is_empty();
        record.pattern_ids = ids;
        record
    }
}

/// Runs [`match_at`] at every position, optionally verifying each record.
///
/// Start positions are cut into `chunk_size` runs handed out to
/// `parallelism` workers; results are stitched back in position order, so
/// the output does not depend on either setting.
pub fn match_all(
    crs: &CrsTrie,
    text: &[u8],
    cfg: &ScanConfig,
    verifier: Option<&Verifier>,
) -> Result<Vec<MatchRecord>> {
    cfg.check()?;
    let verifier = match (cfg.verify, verifier) {
        (true, None) => {
            return Err(Error::Config(
                "verification requested without patterns".into(),
            ))
        }
        (true, v) => v,
        (false, _) => None,
    };
    let scan = |range: std::ops::Range<usize>| -> Vec<MatchRecord> {
        let records = range.filter_map(|s| match_at(crs, text, s));
        match verifier {
            Some(v) => records.map(|r| v.verify(r, text)).collect(),
            None => records.collect(),
        }
    };

    let chunks = text.len().div_ceil(cfg.chunk_size);
    let workers = cfg.parallelism.min(chunks);
    if workers <= 1 {
        return Ok(scan(0..text.len()));
    }
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(chunks));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| {
                let mut local = Vec::new();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= chunks {
                        break;
                    }
                    let start = i * cfg.chunk_size;
                    let end = (start + cfg.chunk_size).min(text.len());
                    local.push((i, scan(start..end)));
                }
                done.lock().unwrap().extend(local);
            });
        }
    });
    let mut done = done.into_inner().unwrap();
    done.sort_unstable_by_key(|(i, _)| *i);
    Ok(done.into_iter().flat_map(|(_, r)| r).collect())
}

/// Writes `position<TAB>depth<TAB>ids` lines.
pub fn write_tsv<W: Write>(mut out: W, records: &[MatchRecord]) -> io::Result<()> {
    for r in records {
        write!(out, "{}\t{}\t", r.position, r.depth)?;
        for (i, id) in r.pattern_ids.iter().enumerate() {
            if i > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{id}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes one JSON object per record.
pub fn write_jsonl<W: Write>(mut out: W, records: &[MatchRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
