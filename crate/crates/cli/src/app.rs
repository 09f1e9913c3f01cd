//! Argument parsing and the subcommands of the `mblk` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mblk_core::analysis::{block_entropy, block_entropy_disjoint, mi_bound};
use mblk_core::sources::{ingest_corpus, permute_characters, Corpus, SourceSpec};
use mblk_core::transform::{compress, decompress, minimal_block_transform, TransformOptions};
use mblk_core::{Error, PsiCode, Symbol};

use crate::experiment::{
    default_grid, parse_grid, parse_source, slopes, sweep_source, write_csv, ExperimentRecord,
    Statistic, SweepOptions,
};
use crate::plot::{loglog_svg, PlotSeries};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CORRUPT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mblk",
    version,
    about = "Minimal block grammar code: compress, sweep and measure"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a file into an MBLK container.
    Encode(EncodeArgs),
    /// Restore a file from an MBLK container.
    Decode(DecodeArgs),
    /// Transform growing prefixes of one or more sources; write CSV and plots.
    Sweep(SweepArgs),
    /// Pointwise mutual information of two files and its rule-count bound.
    Mi(MiArgs),
    /// Write a synthetic source as bytes (symbol s becomes byte s - 1).
    Gen(GenArgs),
    /// Shuffle the bytes of a file.
    Permute(PermuteArgs),
    /// Empirical block entropy of a file.
    Entropy(EntropyArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Map bytes to symbols by first appearance in this file instead of byte + 1.
    #[arg(long)]
    pub alphabet_from_file: Option<PathBuf>,
    /// Search block lengths only up to this value.
    #[arg(long)]
    pub kmax_override: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// The alphabet file given when encoding.
    #[arg(long)]
    pub alphabet_from_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// bernoulli:P1,P2,.. | markov:ROW;ROW;.. | corpus:PATH | permuted:PATH,
    /// optionally prefixed by LABEL=. Repeatable.
    #[arg(long = "source", required = true)]
    pub sources: Vec<String>,
    /// dyadic:LO..HI or a comma list; default dyadic:10..22.
    #[arg(long)]
    pub n_grid: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Writes PREFIX-rules.svg and PREFIX-length.svg.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub kmax_override: Option<usize>,
    /// Write 0 in the wall_seconds column so the CSV is reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct MiArgs {
    pub u: PathBuf,
    pub v: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// bernoulli:P1,P2,.. or markov:ROW;ROW;..
    pub source: String,
    #[arg(short = 'n', long)]
    pub length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PermuteArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    pub input: PathBuf,
    #[arg(short, default_value_t = 1)]
    pub k: usize,
    /// Count disjoint blocks instead of overlapping ones.
    #[arg(long)]
    pub disjoint: bool,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Corrupt(_) | Error::Truncated(_) => EXIT_CORRUPT,
        Error::Domain(_) | Error::Precondition(_) | Error::InsufficientData(_) => EXIT_USAGE,
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> mblk_core::Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| io_err(path, e))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, data: &[u8]) -> mblk_core::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(data).map_err(|e| io_err(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let perms = std::fs::Permissions::from_mode(0o644);
        tmp.as_file()
            .set_permissions(perms)
            .map_err(|e| io_err(path, e))?;
    }
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// Symbol `b + 1` for byte `b`, over `m = max byte + 1`.
fn bytes_to_symbols(bytes: &[u8]) -> (u32, Vec<Symbol>) {
    let m = bytes.iter().copied().max().map_or(1, |b| u32::from(b) + 1);
    (m, bytes.iter().map(|&b| Symbol::from(b) + 1).collect())
}

fn symbols_to_bytes(symbols: &[Symbol]) -> mblk_core::Result<Vec<u8>> {
    symbols
        .iter()
        .map(|&s| {
            u8::try_from(s.wrapping_sub(1)).map_err(|_| {
                Error::Domain(format!("symbol {s} has no byte; pass --alphabet-from-file"))
            })
        })
        .collect()
}

fn mapped_symbols(alphabet: &Corpus, bytes: &[u8]) -> mblk_core::Result<Vec<Symbol>> {
    let mut map = [0 as Symbol; 256];
    for (i, &a) in alphabet.alphabet.iter().enumerate() {
        map[a as usize] = i as Symbol + 1;
    }
    bytes
        .iter()
        .map(|&b| match map[b as usize] {
            0 => Err(Error::Domain(format!(
                "byte {b:#04x} is not in the alphabet file"
            ))),
            s => Ok(s),
        })
        .collect()
}

fn cmd_encode(a: &EncodeArgs) -> mblk_core::Result<()> {
    let bytes = read(&a.input)?;
    let (m, symbols) = match &a.alphabet_from_file {
        Some(f) => {
            let alphabet = ingest_corpus(f)?;
            (alphabet.m().max(1), mapped_symbols(&alphabet, &bytes)?)
        }
        None => bytes_to_symbols(&bytes),
    };
    let packed = compress(
        m,
        &symbols,
        TransformOptions {
            kmax: a.kmax_override,
        },
    )?;
    write_atomic(&a.output, &packed)
}

fn cmd_decode(a: &DecodeArgs) -> mblk_core::Result<()> {
    let data = read(&a.input)?;
    let (_, decoded) = decompress(&data)?;
    if !decoded.block_shaped {
        eprintln!("warning: the container holds a grammar that is not block-shaped");
    }
    let bytes = match &a.alphabet_from_file {
        Some(f) => ingest_corpus(f)?.to_bytes(&decoded.symbols)?,
        None => symbols_to_bytes(&decoded.symbols)?,
    };
    write_atomic(&a.output, &bytes)
}

fn plot(rows: &[ExperimentRecord], stat: Statistic, title: &str, y_label: &str) -> String {
    let fitted = slopes(rows, stat);
    let mut series: Vec<PlotSeries> = Vec::new();
    for r in rows {
        match series.iter_mut().find(|s| s.label == r.source) {
            Some(s) => s.points.push((r.n as f64, stat.of(r))),
            None => series.push(PlotSeries {
                label: r.source.clone(),
                points: vec![(r.n as f64, stat.of(r))],
                slope: fitted
                    .iter()
                    .find(|f| f.source == r.source)
                    .map(|f| f.exponent),
            }),
        }
    }
    loglog_svg(title, "n", y_label, &series)
}

fn svg_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_sweep(a: &SweepArgs) -> mblk_core::Result<()> {
    let grid = match &a.n_grid {
        Some(g) => parse_grid(g)?,
        None => default_grid(),
    };
    let sources = a
        .sources
        .iter()
        .map(|s| parse_source(s, a.seed))
        .collect::<mblk_core::Result<Vec<_>>>()?;
    let opts = SweepOptions {
        transform: TransformOptions {
            kmax: a.kmax_override,
        },
        timing: !a.no_timing,
    };
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for s in &sources {
        rows.extend(sweep_source(s, &grid, opts, &mut skipped)?);
    }
    for (label, n) in &skipped {
        eprintln!("warning: {label}: n = {n} exceeds the source length, row skipped");
    }
    let mut table = Vec::new();
    write_csv(&mut table, &rows).map_err(|e| Error::Io(e.to_string()))?;
    match &a.csv {
        Some(p) => write_atomic(p, &table)?,
        None => std::io::stdout()
            .write_all(&table)
            .map_err(|e| Error::Io(e.to_string()))?,
    }
    if let Some(prefix) = &a.svg {
        let rules = plot(&rows, Statistic::Rules, "Number of rules", "V");
        write_atomic(&svg_path(prefix, "-rules.svg"), rules.as_bytes())?;
        let length = plot(&rows, Statistic::RuleLen, "Rule length", "L");
        write_atomic(&svg_path(prefix, "-length.svg"), length.as_bytes())?;
    }
    for stat in [Statistic::Rules, Statistic::RuleLen] {
        for s in slopes(&rows, stat) {
            let name = if stat == Statistic::Rules { "V" } else { "L" };
            eprintln!("{}: {name} slope {:.4}", s.source, s.exponent);
        }
    }
    Ok(())
}

fn cmd_mi(a: &MiArgs) -> mblk_core::Result<()> {
    let u = read(&a.u)?;
    let v = read(&a.v)?;
    let joint: Vec<u8> = u.iter().chain(&v).copied().collect();
    let corpus = Corpus::from_bytes(&joint);
    let (su, sv) = corpus.symbols.split_at(u.len());
    let code = PsiCode::new(corpus.m().max(1))?;
    let bu = minimal_block_transform(&code, su)?.code_bits;
    let bv = minimal_block_transform(&code, sv)?.code_bits;
    let whole = minimal_block_transform(&code, &corpus.symbols)?;
    let j = bu as i64 + bv as i64 - whole.code_bits as i64;
    let bound = mi_bound(&code, &whole);
    println!("J\t{j}");
    println!("V\t{}", whole.rules);
    println!("L\t{}", whole.rule_len);
    println!("bound\t{bound}");
    println!("slack\t{}", bound as i64 - j);
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> mblk_core::Result<()> {
    let src = parse_source(&a.source, a.seed)?;
    if matches!(
        src.spec,
        SourceSpec::Corpus { .. } | SourceSpec::PermutedCorpus { .. }
    ) {
        return Err(Error::Domain("gen takes a synthetic source".into()));
    }
    let stream = src.spec.generate(Some(a.length))?;
    write_atomic(&a.output, &symbols_to_bytes(&stream.symbols)?)
}

fn cmd_permute(a: &PermuteArgs) -> mblk_core::Result<()> {
    let bytes = read(&a.input)?;
    let c = Corpus::from_bytes(&bytes);
    let shuffled = c.to_bytes(&permute_characters(&c.symbols, a.seed))?;
    write_atomic(&a.output, &shuffled)
}

fn cmd_entropy(a: &EntropyArgs) -> mblk_core::Result<()> {
    let c = Corpus::from_bytes(&read(&a.input)?);
    let h = if a.disjoint {
        block_entropy_disjoint(&c.symbols, a.k)?
    } else {
        block_entropy(&c.symbols, a.k)?
    };
    println!("{h:.6}");
    Ok(())
}

pub fn execute(cli: &Cli) -> mblk_core::Result<()> {
    match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Mi(a) => cmd_mi(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Permute(a) => cmd_permute(a),
        Command::Entropy(a) => cmd_entropy(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("mblk: {e}");
            exit_code(&e)
        }
    }
}
