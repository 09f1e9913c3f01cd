//! Prefix sweeps over a source: one transform per prefix length, collected
//! as CSV rows and summarized by log-log slopes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mblk_core::analysis::{hilberg_exponent, log_log_fit, GrowthSeries, LogLogFit};
use mblk_core::sources::SourceSpec;
use mblk_core::transform::{minimal_block_transform_with, TransformOptions};
use mblk_core::{Error, PsiCode, Result};

/// One row of the sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub source: String,
    pub n: usize,
    /// Block length of the chosen grammar; 0 for the terminal grammar.
    pub k: usize,
    pub shift: usize,
    pub rules: usize,
    pub rule_len: usize,
    pub code_bits: u64,
    pub bits_per_symbol: f64,
    pub wall_seconds: f64,
}

pub const CSV_HEADER: [&str; 9] = [
    "source",
    "n",
    "k",
    "shift",
    "V",
    "L",
    "code_bits",
    "bits_per_symbol",
    "wall_seconds",
];

/// A source plus the label used in CSV rows and plot legends.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSource {
    pub label: String,
    pub spec: SourceSpec,
}

fn parse_probs(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("bad probability {p:?}")))
        })
        .collect()
}

/// Parses `bernoulli:P1,P2,..`, `markov:ROW;ROW;..` (uniform start),
/// `corpus:PATH` or `permuted:PATH`. An optional `LABEL=` prefix overrides
/// the label. Synthetic and permuted sources take `seed`.
pub fn parse_source(arg: &str, seed: u64) -> Result<LabeledSource> {
    let (label, body) = match arg.split_once('=') {
        Some((l, b)) if !l.contains(':') => (Some(l.to_string()), b),
        _ => (None, arg),
    };
    let (kind, rest) = body
        .split_once(':')
        .ok_or_else(|| Error::Domain(format!("source {arg:?} is not KIND:PARAMS")))?;
    let spec = match kind {
        "bernoulli" => SourceSpec::Bernoulli {
            p: parse_probs(rest)?,
            seed,
        },
        "markov" => {
            let transitions = rest
                .split(';')
                .map(parse_probs)
                .collect::<Result<Vec<_>>>()?;
            let m = transitions.len();
            SourceSpec::Markov {
                initial: vec![1.0 / m as f64; m],
                transitions,
                seed,
            }
        }
        "corpus" => SourceSpec::Corpus {
            path: PathBuf::from(rest),
        },
        "permuted" => SourceSpec::PermutedCorpus {
            path: PathBuf::from(rest),
            seed,
        },
        other => return Err(Error::Domain(format!("unknown source kind {other:?}"))),
    };
    let label = label.unwrap_or_else(|| match &spec {
        SourceSpec::Bernoulli { .. } => format!("bernoulli({rest})"),
        SourceSpec::Markov { .. } => "markov".to_string(),
        SourceSpec::Corpus { path } => file_stem(path),
        SourceSpec::PermutedCorpus { path, .. } => format!("{} (permuted)", file_stem(path)),
    });
    Ok(LabeledSource { label, spec })
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Parses `dyadic:LO..HI` (powers of two, inclusive) or a comma list.
pub fn parse_grid(arg: &str) -> Result<Vec<usize>> {
    let bad = || Error::Domain(format!("bad n grid {arg:?}"));
    let mut grid: Vec<usize> = if let Some(range) = arg.strip_prefix("dyadic:") {
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi || hi > 40 {
            return Err(bad());
        }
        (lo..=hi).map(|e| 1usize << e).collect()
    } else {
        arg.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(bad());
    }
    grid.sort_unstable();
    grid.dedup();
    Ok(grid)
}

pub fn default_grid() -> Vec<usize> {
    (10..=22).map(|e| 1usize << e).collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub transform: TransformOptions,
    /// Record wall-clock time per row; when off the column is 0.
    pub timing: bool,
}

/// Runs the transform on every prefix length of `grid`. Lengths beyond the
/// source are skipped and reported through `skipped`.
pub fn sweep_source(
    source: &LabeledSource,
    grid: &[usize],
    opts: SweepOptions,
    skipped: &mut Vec<(String, usize)>,
) -> Result<Vec<ExperimentRecord>> {
    let longest = grid.iter().copied().max().unwrap_or(0);
    let limit = match source.spec {
        SourceSpec::Corpus { .. } | SourceSpec::PermutedCorpus { .. } => None,
        _ => Some(longest),
    };
    let stream = source.spec.generate(limit)?;
    let code = PsiCode::new(stream.m.max(1))?;
    let mut rows = Vec::with_capacity(grid.len());
    for &n in grid {
        if n > stream.symbols.len() {
            skipped.push((source.label.clone(), n));
            continue;
        }
        let prefix = &stream.symbols[..n];
        let start = Instant::now();
        let r = minimal_block_transform_with(&code, prefix, opts.transform)?;
        let wall = start.elapsed().as_secs_f64();
        rows.push(ExperimentRecord {
            source: source.label.clone(),
            n,
            k: if r.is_terminal() { 0 } else { r.grammar.k() },
            shift: r.shift,
            rules: r.rules,
            rule_len: r.rule_len,
            code_bits: r.code_bits,
            bits_per_symbol: r.code_bits as f64 / n as f64,
            wall_seconds: if opts.timing { wall } else { 0.0 },
        });
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[ExperimentRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.source.clone(),
            r.n.to_string(),
            r.k.to_string(),
            r.shift.to_string(),
            r.rules.to_string(),
            r.rule_len.to_string(),
            r.code_bits.to_string(),
            format!("{:.6}", r.bits_per_symbol),
            format!("{:.6}", r.wall_seconds),
        ])?;
    }
    w.flush()
}

pub fn read_csv<R: std::io::Read>(
    input: R,
) -> std::result::Result<Vec<ExperimentRecord>, csv::Error> {
    let mut rd = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |i: usize| rec.get(i).unwrap_or("").to_string();
        let parse_err = |i: usize| {
            csv::Error::from(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("bad field {} in row {:?}", CSV_HEADER[i], rec),
            ))
        };
        rows.push(ExperimentRecord {
            source: num(0),
            n: num(1).parse().map_err(|_| parse_err(1))?,
            k: num(2).parse().map_err(|_| parse_err(2))?,
            shift: num(3).parse().map_err(|_| parse_err(3))?,
            rules: num(4).parse().map_err(|_| parse_err(4))?,
            rule_len: num(5).parse().map_err(|_| parse_err(5))?,
            code_bits: num(6).parse().map_err(|_| parse_err(6))?,
            bits_per_symbol: num(7).parse().map_err(|_| parse_err(7))?,
            wall_seconds: num(8).parse().map_err(|_| parse_err(8))?,
        });
    }
    Ok(rows)
}

/// Which statistic of a row to regress on `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Rules,
    RuleLen,
}

impl Statistic {
    pub fn of(self, r: &ExperimentRecord) -> f64 {
        match self {
            Statistic::Rules => r.rules as f64,
            Statistic::RuleLen => r.rule_len as f64,
        }
    }
}

/// Rows of one source as a growth series of `stat`.
pub fn series_of(rows: &[ExperimentRecord], source: &str, stat: Statistic) -> Result<GrowthSeries> {
    GrowthSeries::new(
        rows.iter()
            .filter(|r| r.source == source)
            .map(|r| (r.n as f64, stat.of(r)))
            .collect(),
    )
}

/// Slope summary of one source for one statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeSummary {
    pub source: String,
    pub statistic: Statistic,
    pub exponent: f64,
    pub fit: LogLogFit,
}

pub fn slopes(rows: &[ExperimentRecord], stat: Statistic) -> Vec<SlopeSummary> {
    let mut sources: Vec<&str> = Vec::new();
    for r in rows {
        if !sources.contains(&r.source.as_str()) {
            sources.push(&r.source);
        }
    }
    sources
        .into_iter()
        .filter_map(|s| {
            let series = series_of(rows, s, stat).ok()?;
            let fit = log_log_fit(&series, None).ok()?;
            let exponent = hilberg_exponent(&series, None).ok()?;
            Some(SlopeSummary {
                source: s.to_string(),
                statistic: stat,
                exponent,
                fit,
            })
        })
        .collect()
}
