use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crs_trie::bench::{self, ThroughputArgs, DEFAULT_PATTERN_LENGTH};
use crs_trie::compile::DEFAULT_MERGE_LEVELS;
use crs_trie::matcher::{write_jsonl, write_tsv};
use crs_trie::{
    compile, deserialize, match_all, serialize, CompileConfig, CrsTrie, Error, PatternSet,
    ScanConfig, Verifier,
};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "crs-trie",
    version,
    about = "Compressed bitmap-trie multi-pattern matcher"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a pattern file into a .crst trie
    Compile {
        #[command(flatten)]
        patterns: PatternArgs,
        #[command(flatten)]
        trie: TrieArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Scan a text with a compiled trie
    Scan {
        trie: PathBuf,
        text: PathBuf,
        /// Pattern file the trie was compiled from; required by --verify
        #[arg(long)]
        patterns: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PatternFormat::Text)]
        pattern_format: PatternFormat,
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = default_parallelism())]
        parallelism: usize,
        #[arg(long, default_value_t = 1 << 16)]
        chunk_size: usize,
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report per-stage storage for patterns sampled from a corpus
    BenchCompress {
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        trie: TrieArgs,
        #[arg(long)]
        json: bool,
    },
    /// Time scans at several worker counts
    BenchThroughput {
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        trie: TrieArgs,
        /// Comma-separated worker counts
        #[arg(long, value_delimiter = ',', default_value = "1,2,8")]
        parallelism: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        /// Scan this many MiB of text stitched from corpus slices instead of the corpus
        #[arg(long)]
        synthetic_mb: Option<usize>,
        #[arg(long, default_value_t = 1 << 16)]
        chunk_size: usize,
        #[arg(long)]
        json: bool,
    },
    /// Write the non-zero cells of a compiled trie as CSV
    DumpOccupancy {
        trie: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Sample patterns from a corpus with MT19937
    SamplePatterns {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, value_enum, default_value_t = PatternFormat::Text)]
        format: PatternFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternFormat {
    Text,
    Binary,
}

#[derive(Args)]
struct PatternArgs {
    #[arg(long)]
    patterns: PathBuf,
    #[arg(long, value_enum, default_value_t = PatternFormat::Text)]
    pattern_format: PatternFormat,
    #[arg(long, default_value_t = 256)]
    alphabet: u16,
}

#[derive(Args)]
struct TrieArgs {
    /// Truncation depth in bytes (default: derived from the alphabet)
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MERGE_LEVELS)]
    merge_levels: usize,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 5489)]
    seed: u32,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_PATTERN_LENGTH)]
    length: usize,
}

fn default_parallelism() -> usize {
    ScanConfig::default().parallelism
}

impl TrieArgs {
    fn config(&self, patterns: Option<&PatternSet>) -> crs_trie::Result<CompileConfig> {
        let depth = match (self.depth, patterns) {
            (Some(d), _) => d,
            (None, Some(p)) => CompileConfig::for_patterns(p).truncation_depth,
            (None, None) => CompileConfig::default().truncation_depth,
        };
        CompileConfig::new(depth, self.merge_levels.min(depth))
    }
}

fn read_patterns(
    path: &Path,
    format: PatternFormat,
    alphabet: u16,
) -> crs_trie::Result<PatternSet> {
    let bytes = fs::read(path)?;
    match format {
        PatternFormat::Text => PatternSet::parse_text(&bytes, alphabet),
        PatternFormat::Binary => PatternSet::parse_binary(&bytes, alphabet),
    }
}

fn load_trie(path: &Path) -> crs_trie::Result<CrsTrie> {
    Ok(deserialize(&fs::read(path)?)?)
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> crs_trie::Result<()> {
    match cli.command {
        Command::Compile {
            patterns,
            trie,
            output,
        } => {
            let set = read_patterns(
                &patterns.patterns,
                patterns.pattern_format,
                patterns.alphabet,
            )?;
            let cfg = trie.config(Some(&set))?;
            let compiled = compile(&set, &cfg)?;
            compiled.validate()?;
            let crs = CrsTrie::from_trie(&compiled);
            fs::write(&output, serialize(&crs))?;
            eprintln!(
                "{} patterns -> {} nodes, {} non-zeros, {} elements",
                set.len(),
                crs.rows(),
                crs.nnz(),
                crs.storage_cost()
            );
        }
        Command::Scan {
            trie,
            text,
            patterns,
            pattern_format,
            verify,
            parallelism,
            chunk_size,
            json,
            output: out_path,
        } => {
            let crs = load_trie(&trie)?;
            let text = fs::read(&text)?;
            let set = match &patterns {
                Some(p) => Some(read_patterns(p, pattern_format, crs.alphabet_size())?),
                None if verify => {
                    return Err(Error::Config("--verify needs --patterns".into()));
                }
                None => None,
            };
            let verifier = set.as_ref().map(|s| Verifier::new(&crs, s)).transpose()?;
            let cfg = ScanConfig::new(parallelism, chunk_size, verify)?;
            let records = match_all(&crs, &text, &cfg, verifier.as_ref())?;
            let mut out = output(out_path.as_deref())?;
            if json {
                write_jsonl(&mut out, &records)?;
            } else {
                write_tsv(&mut out, &records)?;
            }
            out.flush()?;
        }
        Command::BenchCompress { sample, trie, json } => {
            let cfg = trie.config(None)?;
            if sample.length < cfg.truncation_depth {
                eprintln!(
                    "warning: pattern length {} is below truncation depth {}",
                    sample.length, cfg.truncation_depth
                );
            }
            let report = bench::run_compression_bench(
                &sample.corpus,
                sample.count,
                sample.length,
                sample.seed,
                &cfg,
            )?;
            if !report.is_monotone() {
                return Err(Error::Invariant("stage element counts increased".into()));
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                print!("{report}");
            }
        }
        Command::BenchThroughput {
            sample,
            trie,
            parallelism,
            repetitions,
            synthetic_mb,
            chunk_size,
            json,
        } => {
            let cfg = trie.config(None)?;
            let args = ThroughputArgs {
                count: sample.count,
                length: sample.length,
                seed: sample.seed,
                synthetic_bytes: synthetic_mb.map(|mb| mb << 20),
                repetitions,
                chunk_size,
            };
            let report = bench::run_throughput_bench(&sample.corpus, &args, &cfg, &parallelism)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                print!("{report}");
            }
        }
        Command::DumpOccupancy { trie, output } => {
            let crs = load_trie(&trie)?;
            bench::dump_occupancy(&crs, &output)?;
        }
        Command::SamplePatterns {
            sample,
            format,
            output: out_path,
        } => {
            let corpus = fs::read(&sample.corpus)?;
            let set = bench::sample_patterns(&corpus, sample.count, sample.length, sample.seed)?;
            let mut out = output(out_path.as_deref())?;
            match format {
                PatternFormat::Text => out.write_all(&set.to_text())?,
                PatternFormat::Binary => out.write_all(&set.to_binary())?,
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Format(_) | Error::Invariant(_) => EXIT_INVARIANT,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
