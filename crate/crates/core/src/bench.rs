//! Corpus benchmarks and the MT19937 pattern sampler.

use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::time::Instant;

use rand_mt::Mt;
use serde::Serialize;

use crate::compile::{compile_stages, CompileConfig};
use crate::crs::{dense_cost, occupancy, CrsTrie, DenseNodeMatrix, COLS};
use crate::error::{Error, Result};
use crate::matcher::{match_all, ScanConfig};
use crate::node::NODE_BYTES;
use crate::pattern::PatternSet;

/// Bytes per stored element: every CRS vector entry is counted as a word.
pub const ELEMENT_BYTES: usize = 4;

/// Pattern length used when none is given.
pub const DEFAULT_PATTERN_LENGTH: usize = 16;

/// Resamples allowed per requested pattern before giving up on duplicates.
const RETRIES_PER_PATTERN: usize = 64;

/// Draws `count` distinct substrings of `length` bytes from `corpus`.
///
/// Offsets are successive 32-bit MT19937 outputs reduced modulo the number of
/// valid start offsets. Duplicate draws are discarded and redrawn.
pub fn sample_patterns(
    corpus: &[u8],
    count: usize,
    length: usize,
    seed: u32,
) -> Result<PatternSet> {
    if count == 0 || length == 0 {
        return Err(Error::Config("count and length must be at least 1".into()));
    }
    if corpus.len() < length {
        return Err(Error::Sampling(format!(
            "corpus of {} bytes is shorter than pattern length {length}",
            corpus.len()
        )));
    }
    let span = (corpus.len() - length + 1) as u64;
    let mut rng = Mt::new(seed);
    let mut seen = std::collections::HashSet::new();
    let mut picked = Vec::with_capacity(count);
    let mut draws = 0;
    let budget = count.saturating_mul(RETRIES_PER_PATTERN);
    while picked.len() < count {
        if draws == budget {
            return Err(Error::Sampling(format!(
                "found only {} distinct patterns after {draws} draws",
                picked.len()
            )));
        }
        draws += 1;
        let offset = (u64::from(rng.next_u32()) % span) as usize;
        let pattern = &corpus[offset..offset + length];
        if seen.insert(pattern) {
            picked.push(pattern);
        }
    }
    PatternSet::new(picked)
}

/// Builds `size` bytes of text by concatenating MT19937-chosen corpus slices.
pub fn synthetic_text(corpus: &[u8], size: usize, seed: u32) -> Vec<u8> {
    const SLICE: usize = 4096;
    let mut rng = Mt::new(seed);
    let mut out = Vec::with_capacity(size);
    let slice = SLICE.min(corpus.len());
    let span = (corpus.len() - slice + 1) as u64;
    while out.len() < size {
        let offset = (u64::from(rng.next_u32()) % span) as usize;
        let take = slice.min(size - out.len());
        out.extend_from_slice(&corpus[offset..offset + take]);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageCount {
    pub stage: &'static str,
    pub nodes: usize,
    pub elements: usize,
    pub bytes: usize,
    /// Elements relative to the previous stage.
    pub ratio_to_previous: f64,
    /// Elements relative to the full trie.
    pub ratio_to_original: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionReport {
    pub corpus_bytes: usize,
    pub patterns: usize,
    pub pattern_length: usize,
    pub seed: u32,
    pub truncation_depth: usize,
    pub merge_levels: usize,
    pub stages: Vec<StageCount>,
    pub nnz: usize,
    pub end_block_rows: usize,
    pub assumptions: Vec<String>,
}

impl CompressionReport {
    pub fn stage(&self, name: &str) -> Option<&StageCount> {
        self.stages.iter().find(|s| s.stage == name)
    }

    /// CRS elements as a fraction of the given stage's elements.
    pub fn crs_ratio_to(&self, name: &str) -> f64 {
        let crs = self.stage("crs").unwrap().elements as f64;
        crs / self.stage(name).unwrap().elements as f64
    }

    pub fn is_monotone(&self) -> bool {
        self.stages
            .windows(2)
            .all(|w| w[1].elements <= w[0].elements)
    }
}

impl fmt::Display for CompressionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} patterns of {} bytes from a {}-byte corpus (seed {}), depth {}, merge levels {}",
            self.patterns,
            self.pattern_length,
            self.corpus_bytes,
            self.seed,
            self.truncation_depth,
            self.merge_levels
        )?;
        writeln!(
            f,
            "{:<14} {:>8} {:>10} {:>10} {:>9} {:>9}",
            "stage", "nodes", "elements", "bytes", "vs prev", "vs orig"
        )?;
        for s in &self.stages {
            writeln!(
                f,
                "{:<14} {:>8} {:>10} {:>10} {:>8.1}% {:>8.1}%",
                s.stage,
                s.nodes,
                s.elements,
                s.bytes,
                100.0 * s.ratio_to_previous,
                100.0 * s.ratio_to_original
            )?;
        }
        writeln!(
            f,
            "reduction: {:.1}% vs original trie, {:.1}% vs merged trie",
            100.0 * (1.0 - self.crs_ratio_to("original")),
            100.0 * (1.0 - self.crs_ratio_to("leaf_merged"))
        )?;
        for a in &self.assumptions {
            writeln!(f, "assumption: {a}")?;
        }
        Ok(())
    }
}

/// Compiles `patterns` stage by stage and counts what each stage stores.
pub fn compression_report(
    patterns: &PatternSet,
    cfg: &CompileConfig,
) -> Result<(CompressionReport, CrsTrie)> {
    let stages = compile_stages(patterns, cfg)?;
    let crs = CrsTrie::from_trie(&stages.leaf_merged);
    let mut counts = Vec::new();
    let mut push = |stage: &'static str, nodes: usize, elements: usize| {
        let original = counts.first().map_or(elements, |s: &StageCount| s.elements);
        let previous = counts.last().map_or(elements, |s: &StageCount| s.elements);
        counts.push(StageCount {
            stage,
            nodes,
            elements,
            bytes: elements * ELEMENT_BYTES,
            ratio_to_previous: elements as f64 / previous as f64,
            ratio_to_original: elements as f64 / original as f64,
        });
    };
    for (name, trie) in [
        ("original", &stages.full),
        ("truncated", &stages.truncated),
        ("suffix_merged", &stages.suffix_merged),
        ("leaf_merged", &stages.leaf_merged),
    ] {
        push(name, trie.len(), dense_cost(trie.len()));
    }
    push("crs", crs.rows(), crs.storage_cost());
    debug_assert_eq!(dense_cost(1) * ELEMENT_BYTES, NODE_BYTES);

    let report = CompressionReport {
        corpus_bytes: 0,
        patterns: patterns.len(),
        pattern_length: patterns.longest(),
        seed: 0,
        truncation_depth: cfg.truncation_depth,
        merge_levels: cfg.merge_levels,
        stages: counts,
        nnz: crs.nnz(),
        end_block_rows: stages.leaf_merged.end_nodes().map_or(0, |r| r.len()),
        assumptions: Vec::new(),
    };
    Ok((report, crs))
}

/// Samples patterns from a corpus file and reports per-stage storage.
pub fn run_compression_bench(
    corpus_path: &Path,
    count: usize,
    length: usize,
    seed: u32,
    cfg: &CompileConfig,
) -> Result<CompressionReport> {
    let corpus = fs::read(corpus_path)?;
    let patterns = sample_patterns(&corpus, count, length, seed)?;
    let (mut report, _) = compression_report(&patterns, cfg)?;
    report.corpus_bytes = corpus.len();
    report.pattern_length = length;
    report.seed = seed;
    report.assumptions = vec![
        format!("pattern length {length} bytes (not fixed by the reference results)"),
        format!("pattern count {count}"),
        "elements are 32-bit words; col_ind entries counted as one element each".into(),
    ];
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputLevel {
    pub parallelism: usize,
    pub median_seconds: f64,
    pub gbps: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub text_bytes: usize,
    pub patterns: usize,
    pub repetitions: usize,
    pub match_count: usize,
    pub levels: Vec<ThroughputLevel>,
}

impl fmt::Display for ThroughputReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} patterns over {} bytes, median of {} runs, {} matches",
            self.patterns, self.text_bytes, self.repetitions, self.match_count
        )?;
        writeln!(
            f,
            "{:>8} {:>12} {:>10} {:>8}",
            "workers", "seconds", "Gbps", "speedup"
        )?;
        for l in &self.levels {
            writeln!(
                f,
                "{:>8} {:>12.6} {:>10.3} {:>7.2}x",
                l.parallelism, l.median_seconds, l.gbps, l.speedup
            )?;
        }
        Ok(())
    }
}

pub fn gbps(bytes: usize, seconds: f64) -> f64 {
    bytes as f64 * 8.0 / seconds / 1e9
}

/// Times [`match_all`] at each parallelism level and reports medians.
///
/// Fails with an invariant error if two levels disagree on the match count.
pub fn throughput(
    crs: &CrsTrie,
    text: &[u8],
    patterns: usize,
    parallelism: &[usize],
    repetitions: usize,
    chunk_size: usize,
) -> Result<ThroughputReport> {
    if parallelism.is_empty() || repetitions == 0 {
        return Err(Error::Config(
            "need at least one parallelism level and repetition".into(),
        ));
    }
    let mut levels: Vec<ThroughputLevel> = Vec::new();
    let mut match_count = None;
    for &p in parallelism {
        let cfg = ScanConfig::new(p, chunk_size, false)?;
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let t = Instant::now();
            let records = match_all(crs, text, &cfg, None)?;
            times.push(t.elapsed().as_secs_f64().max(1e-9));
            match match_count {
                None => match_count = Some(records.len()),
                Some(n) if n != records.len() => {
                    return Err(Error::Invariant(format!(
                        "parallelism {p} found {} matches, expected {n}",
                        records.len()
                    )))
                }
                Some(_) => {}
            }
        }
        times.sort_by(f64::total_cmp);
        let median = median(&times);
        let base = levels.first().map_or(median, |l| l.median_seconds);
        levels.push(ThroughputLevel {
            parallelism: p,
            median_seconds: median,
            gbps: gbps(text.len(), median),
            speedup: base / median,
        });
    }
    Ok(ThroughputReport {
        text_bytes: text.len(),
        patterns,
        repetitions,
        match_count: match_count.unwrap_or(0),
        levels,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone)]
pub struct ThroughputArgs {
    pub count: usize,
    pub length: usize,
    pub seed: u32,
    /// Size of the synthetic text; the corpus itself when `None`.
    pub synthetic_bytes: Option<usize>,
    pub repetitions: usize,
    pub chunk_size: usize,
}

pub fn run_throughput_bench(
    corpus_path: &Path,
    args: &ThroughputArgs,
    cfg: &CompileConfig,
    parallelism: &[usize],
) -> Result<ThroughputReport> {
    let corpus = fs::read(corpus_path)?;
    let patterns = sample_patterns(&corpus, args.count, args.length, args.seed)?;
    let crs = CrsTrie::from_trie(&crate::compile::compile(&patterns, cfg)?);
    let text = match args.synthetic_bytes {
        Some(n) => synthetic_text(&corpus, n, args.seed.wrapping_add(1)),
        None => corpus,
    };
    throughput(
        &crs,
        &text,
        patterns.len(),
        parallelism,
        args.repetitions,
        args.chunk_size,
    )
}

/// Writes the non-zero cells as CSV. The first line carries the matrix
/// dimensions as `rows,cols`; then a `row,col,value` header and one line
/// per non-zero cell.
pub fn write_occupancy<W: Write>(mut out: W, crs: &CrsTrie) -> io::Result<()> {
    writeln!(out, "# rows={},cols={}", crs.rows(), COLS)?;
    writeln!(out, "row,col,value")?;
    for (r, c, v) in occupancy(crs) {
        writeln!(out, "{r},{c},{v}")?;
    }
    Ok(())
}

pub fn dump_occupancy(crs: &CrsTrie, path: &Path) -> Result<()> {
    let file = io::BufWriter::new(fs::File::create(path)?);
    write_occupancy(file, crs)?;
    Ok(())
}

/// Parses an occupancy CSV back into a dense matrix.
pub fn read_occupancy<R: BufRead>(input: R) -> Result<DenseNodeMatrix> {
    let bad = |msg: String| Error::Invariant(format!("occupancy csv: {msg}"));
    let mut lines = input.lines();
    let dims = lines.next().ok_or_else(|| bad("empty".into()))??;
    let dims = dims
        .strip_prefix("# rows=")
        .and_then(|d| d.split_once(",cols="))
        .ok_or_else(|| bad(format!("bad dimension line {dims:?}")))?;
    let rows: usize = dims.0.parse().map_err(|_| bad("bad row count".into()))?;
    let cols: usize = dims.1.parse().map_err(|_| bad("bad column count".into()))?;
    if cols != COLS {
        return Err(bad(format!("expected {COLS} columns, got {cols}")));
    }
    lines.next().ok_or_else(|| bad("missing header".into()))??;
    let mut cells = vec![0u32; rows * COLS];
    for line in lines {
        let line = line?;
        let mut parts = line.split(',').map(str::parse::<u64>);
        let (Some(Ok(r)), Some(Ok(c)), Some(Ok(v)), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad(format!("bad line {line:?}")));
        };
        let (r, c) = (r as usize, c as usize);
        if r >= rows || c >= COLS || v > u64::from(u32::MAX) {
            return Err(bad(format!("cell out of range in {line:?}")));
        }
        cells[r * COLS + c] = v as u32;
    }
    DenseNodeMatrix::from_cells(rows, cells)
}
