//! Acceptance suite. Each test prints one `criterion N [PASS|FAIL]` line to
//! stderr (uncaptured) and then asserts the criterion.
//!
//! The corpus is read from `MBLK_CORPUS`, falling back to
//! `data/shakespeare.txt` at the workspace root.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use mblk_cli::experiment::{read_csv, slopes, Statistic};
use mblk_core::analysis::{mi_bound, zipf_check, ProbabilityTable};
use mblk_core::codebook::{read_container, write_container};
use mblk_core::grammar::encode_grammar;
use mblk_core::sources::{gen_bernoulli, gen_markov, ingest_corpus, SourceRng};
use mblk_core::transform::{compress, decompress, minimal_block_transform, RankedBlockTable};
use mblk_core::{BitString, PsiCode, Symbol};
use mblk_oracle::{brute_force_min_block, criterion_rhs, EnumerationBudget};

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {criterion} [{verdict}] {detail}\n");
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn corpus_path() -> PathBuf {
    match std::env::var_os("MBLK_CORPUS") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/shakespeare.txt"),
    }
}

fn random_string(rng: &mut SourceRng, m: u32, n: usize) -> Vec<Symbol> {
    (0..n)
        .map(|_| rng.below(u64::from(m)) as Symbol + 1)
        .collect()
}

// ---------------------------------------------------------------- criterion 1

/// Independent Elias delta: (L - 1) zeros, N in L bits, low N - 1 bits of j.
fn elias_delta(j: u64, out: &mut BitString) {
    let n = 64 - j.leading_zeros();
    let l = 32 - n.leading_zeros();
    for _ in 1..l {
        out.push(false);
    }
    out.push_bits(u64::from(n), l);
    out.push_bits(j & ((1u64 << (n - 1)) - 1), n - 1);
}

fn expected_codeword(m: u32, c1: u32, n: i64) -> BitString {
    let mut out = BitString::new();
    if n <= i64::from(m) {
        out.push(false);
        out.push_bits((n + 1) as u64, c1 - 1);
    } else {
        out.push(true);
        out.push(false);
        elias_delta((n - i64::from(m)) as u64, &mut out);
    }
    out
}

fn floor_log2(x: u64) -> u64 {
    u64::from(63 - x.leading_zeros())
}

#[test]
fn criterion_1_codewords() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut max_kraft = 0.0f64;
    for m in [2u32, 3, 27, 64, 255] {
        let code = PsiCode::new(m).unwrap();
        let c1 = (f64::from(m) + 2.0).log2().ceil() as u32 + 1;
        if code.c1() != c1 {
            failures.push(format!("m={m}: c1 {} != {c1}", code.c1()));
        }
        for n in -1..=i64::from(m) + 1_000_000 {
            let word = code.encode(n).unwrap();
            let want_len = if n <= i64::from(m) {
                u64::from(c1)
            } else {
                let j = (n - i64::from(m)) as u64;
                floor_log2(j) + 2 * floor_log2(floor_log2(j) + 1) + 3
            };
            if word.len() != want_len || code.length(n).unwrap() != want_len {
                failures.push(format!("m={m} n={n}: length {} != {want_len}", word.len()));
                break;
            }
            if word != expected_codeword(m, c1, n) {
                failures.push(format!("m={m} n={n}: codeword {word}"));
                break;
            }
            if code.decode(&mut word.reader()).unwrap() != n {
                failures.push(format!("m={m} n={n}: decode mismatch"));
                break;
            }
        }

        // sorted neighbours: a word that prefixes another prefixes its successor
        let mut words: Vec<String> = (-1..=i64::from(m) + 100_000)
            .map(|n| code.encode(n).unwrap().to_string())
            .collect();
        words.sort_unstable();
        if let Some(w) = words.windows(2).find(|w| w[1].starts_with(&w[0])) {
            failures.push(format!("m={m}: {} prefixes {}", w[0], w[1]));
        }

        // all ranks with the same floor(log2 j) share one length; the tail
        // beyond 2^63 contributes at most sum_{b>=6} 2^-b / 8 < 1/256
        let fixed = f64::from(m + 2) * 2f64.powi(-(c1 as i32));
        let ranks: f64 = (0..63)
            .map(|a| 2f64.powi(a) * 2f64.powi(-(code.rank_length(1u64 << a) as i32)))
            .sum();
        let kraft = fixed + ranks + 1.0 / 256.0;
        max_kraft = max_kraft.max(kraft);
        if kraft > 1.0 {
            failures.push(format!("m={m}: Kraft sum {kraft}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    let detail = format!(
        "codewords for m in {{2,3,27,64,255}}, ranks <= 1e6 exact; prefix-free to rank 1e5; Kraft <= {max_kraft:.4}; {secs:.1} s{}",
        if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
    );
    report(1, failures.is_empty(), &detail);
}

// ---------------------------------------------------------------- criterion 2

/// Mix of i.i.d., periodic and noisy-periodic strings over m in {2, 3, 27}.
fn criterion_2_inputs() -> Vec<(u32, Vec<Symbol>)> {
    let mut rng = SourceRng::new(0xC2);
    (0..10_000)
        .map(|i| {
            let m = [2u32, 3, 27][i % 3];
            let n = rng.below(2001) as usize;
            let u = match rng.below(3) {
                0 => random_string(&mut rng, m, n),
                kind => {
                    let period = 1 + rng.below(12) as usize;
                    let motif = random_string(&mut rng, m, period);
                    let mut u: Vec<Symbol> = motif.iter().copied().cycle().take(n).collect();
                    if kind == 2 {
                        for s in u.iter_mut() {
                            if rng.below(20) == 0 {
                                *s = rng.below(u64::from(m)) as Symbol + 1;
                            }
                        }
                    }
                    u
                }
            };
            (m, u)
        })
        .collect()
}

#[test]
fn criterion_2_round_trip() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut block_grammars = 0;
    for (i, (m, u)) in criterion_2_inputs().iter().enumerate() {
        let code = PsiCode::new(*m).unwrap();
        let r = minimal_block_transform(&code, u).unwrap();
        block_grammars += usize::from(!r.is_terminal());
        let bits = encode_grammar(&code, r.grammar.base()).unwrap();
        let packed = write_container(&code, &bits).unwrap();
        let (code2, bits2) = read_container(&packed).unwrap();
        let (_, decoded) = decompress(&packed).unwrap();
        if code2 != code
            || bits2 != bits
            || decoded.symbols != *u
            || !decoded.block_shaped
            || bits.len() != r.code_bits
        {
            failures.push(format!("string {i} (m={m}, n={})", u.len()));
        }
    }
    let path = corpus_path();
    let corpus_note = match ingest_corpus(&path) {
        Ok(c) if c.symbols.len() >= 1 << 20 => {
            let prefix = &c.symbols[..1 << 20];
            let packed = compress(c.m(), prefix, Default::default()).unwrap();
            let (_, decoded) = decompress(&packed).unwrap();
            if decoded.symbols != prefix {
                failures.push("corpus prefix".into());
            }
            format!("1 MiB corpus prefix -> {} bytes", packed.len())
        }
        Ok(_) => {
            failures.push(format!("{} is shorter than 1 MiB", path.display()));
            "corpus too short".into()
        }
        Err(e) => {
            failures.push(e.to_string());
            "corpus missing".into()
        }
    };
    let detail = format!(
        "10^4 random strings ({block_grammars} block-coded) and {corpus_note} round-trip exactly; {:.1} s{}",
        start.elapsed().as_secs_f64(),
        if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
    );
    report(2, failures.is_empty(), &detail);
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3_inputs() -> Vec<(u32, Vec<Symbol>)> {
    let mut inputs = Vec::new();
    for n in 1..=10usize {
        for bits in 0u32..(1 << n) {
            inputs.push((2, (0..n).map(|i| (bits >> i) & 1).map(|b| b + 1).collect()));
        }
    }
    let mut rng = SourceRng::new(0xC3);
    for _ in 0..200 {
        let n = rng.below(10) as usize;
        inputs.push((3, random_string(&mut rng, 3, n)));
    }
    inputs
}

#[test]
fn criterion_3_oracle() {
    let start = Instant::now();
    let budget = EnumerationBudget::default();
    let inputs = criterion_3_inputs();
    let mut failures = Vec::new();
    for (m, u) in &inputs {
        let code = PsiCode::new(*m).unwrap();
        let r = minimal_block_transform(&code, u).unwrap();
        let oracle = brute_force_min_block(&code, u, &budget).unwrap();
        let measured = encode_grammar(&code, r.grammar.base()).unwrap().len();
        if r.code_bits != oracle.bits || measured != r.code_bits || r.grammar.base().produce() != *u
        {
            failures.push(format!("{u:?}: {} vs oracle {}", r.code_bits, oracle.bits));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 300.0 {
        failures.push(format!("runtime {secs:.1} s"));
    }
    let detail = format!(
        "{} strings (all binary n <= 10, 200 ternary n <= 9) match the brute-force minimum; {secs:.1} s{}",
        inputs.len(),
        if failures.is_empty() { String::new() } else { format!("; {}", failures.iter().take(5).cloned().collect::<Vec<_>>().join("; ")) }
    );
    report(3, failures.is_empty(), &detail);
}

// ---------------------------------------------------------------- criterion 4

struct Trial {
    k: usize,
    x: Vec<Symbol>,
    /// Probability of each k-block, indexed by its bits.
    pi: Vec<f64>,
}

fn block_index(w: &[Symbol]) -> usize {
    w.iter()
        .enumerate()
        .map(|(i, &s)| ((s - 1) as usize) << i)
        .sum()
}

/// Sources: Bernoulli with random bias or a random two-state chain. Measures
/// cycle through random weights, the empirical k-block law of x and the
/// generating product law.
fn criterion_4_trials() -> Vec<Trial> {
    let mut rng = SourceRng::new(0xC4);
    let mut trials = Vec::new();
    for k in 1..=4usize {
        for n in [64usize, 256, 512] {
            for t in 0..100 {
                let p = 0.02 + 0.96 * rng.unit();
                let seed = rng.next_u64();
                let x = if t % 2 == 0 {
                    gen_bernoulli(&[p, 1.0 - p], n, seed).unwrap()
                } else {
                    let q = 0.02 + 0.96 * rng.unit();
                    gen_markov(&[0.5, 0.5], &[vec![p, 1.0 - p], vec![q, 1.0 - q]], n, seed).unwrap()
                };
                let blocks = 1usize << k;
                let pi: Vec<f64> = match t % 3 {
                    0 => {
                        let w: Vec<f64> = (0..blocks).map(|_| 1e-3 + rng.unit()).collect();
                        let total: f64 = w.iter().sum();
                        w.iter().map(|v| v / total).collect()
                    }
                    1 => {
                        let mut counts = vec![0f64; blocks];
                        for w in x.windows(k) {
                            counts[block_index(w)] += 1.0;
                        }
                        let total: f64 = counts.iter().sum();
                        counts.iter().map(|c| c / total).collect()
                    }
                    _ => (0..blocks)
                        .map(|b| {
                            (0..k)
                                .map(|i| if b >> i & 1 == 0 { p } else { 1.0 - p })
                                .product()
                        })
                        .collect(),
                };
                trials.push(Trial { k, x, pi });
            }
        }
    }
    trials
}

#[test]
fn criterion_4_universality() {
    let code = PsiCode::new(2).unwrap();
    let trials = criterion_4_trials();
    let mut violations = Vec::new();
    let mut min_slack = f64::INFINITY;
    for (i, t) in trials.iter().enumerate() {
        let bits = minimal_block_transform(&code, &t.x).unwrap().code_bits as f64;
        let rhs = criterion_rhs(&code, &t.x, t.k, |w| t.pi[block_index(w)]);
        min_slack = min_slack.min(rhs - bits);
        if bits > rhs {
            violations.push(format!(
                "trial {i} (k={}, n={}): {bits} > {rhs:.1}",
                t.k,
                t.x.len()
            ));
        }
    }
    let detail = format!(
        "{} trials (m=2, k in 1..4, n in {{64,256,512}}), {} violations, smallest slack {min_slack:.1} bits{}",
        trials.len(),
        violations.len(),
        if violations.is_empty() { String::new() } else { format!("; {}", violations.iter().take(5).cloned().collect::<Vec<_>>().join("; ")) }
    );
    report(4, violations.is_empty(), &detail);
}

// ---------------------------------------------------------------- criterion 5

fn table_probs(t: &RankedBlockTable) -> ProbabilityTable {
    ProbabilityTable::from_counts(t.counts()).unwrap()
}

#[test]
fn criterion_5_zipf() {
    let mut tables: Vec<ProbabilityTable> = Vec::new();
    for (m, u) in criterion_2_inputs() {
        let code = PsiCode::new(m).unwrap();
        if let Some(t) = minimal_block_transform(&code, &u).unwrap().table {
            tables.push(table_probs(&t));
        }
    }
    for (_, u) in criterion_3_inputs() {
        for k in 1..=u.len() {
            for shift in 0..k.min(u.len() + 1 - k) {
                tables.push(table_probs(
                    &RankedBlockTable::from_parse(&u, k, shift).unwrap(),
                ));
            }
        }
    }
    let code = PsiCode::new(2).unwrap();
    for t in criterion_4_trials() {
        if let Some(table) = minimal_block_transform(&code, &t.x).unwrap().table {
            tables.push(table_probs(&table));
        }
        tables.push(ProbabilityTable::new(t.pi.clone()).unwrap());
    }
    let encountered = tables.len();
    let mut rng = SourceRng::new(0xC5);
    for i in 0..1000 {
        let len = 1 + rng.below(300) as usize;
        let w: Vec<f64> = match i % 3 {
            0 => (0..len).map(|_| rng.unit()).collect(),
            1 => (0..len).map(|_| rng.unit().powi(8)).collect(),
            _ => (1..=len)
                .map(|r| (r as f64).powf(-0.5 - 2.0 * rng.unit()))
                .collect(),
        };
        let total: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
        // sub-probability tables are allowed: drop a random share of the mass
        let mass = if i % 2 == 0 { 1.0 } else { rng.unit() };
        tables.push(ProbabilityTable::new(w.iter().map(|v| v / total * mass).collect()).unwrap());
    }
    let violations: Vec<usize> = tables
        .iter()
        .enumerate()
        .filter(|(_, t)| zipf_check(t).is_some())
        .map(|(i, _)| i)
        .collect();
    let detail = format!(
        "{encountered} ranked tables from criteria 2-4 and 1000 random tables, {} violations",
        violations.len()
    );
    report(5, violations.is_empty(), &detail);
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_6_mi_bound() {
    const N: usize = 100_000;
    const SPLITS: usize = 125;
    let start = Instant::now();
    let mut data: Vec<(String, u32, Vec<Symbol>)> = vec![
        (
            "bernoulli(1/2,1/2)".into(),
            2,
            gen_bernoulli(&[0.5, 0.5], N, 61).unwrap(),
        ),
        (
            "bernoulli(.2,.3,.5)".into(),
            3,
            gen_bernoulli(&[0.2, 0.3, 0.5], N, 62).unwrap(),
        ),
        (
            "markov3".into(),
            3,
            gen_markov(
                &[1.0, 0.0, 0.0],
                &[
                    vec![0.1, 0.8, 0.1],
                    vec![0.1, 0.1, 0.8],
                    vec![0.8, 0.1, 0.1],
                ],
                N,
                63,
            )
            .unwrap(),
        ),
        (
            "bernoulli27".into(),
            27,
            gen_bernoulli(&[1.0 / 27.0; 27], N, 64).unwrap(),
        ),
    ];
    let mut failures = Vec::new();
    match ingest_corpus(corpus_path()) {
        Ok(c) => {
            for part in 0..4 {
                let from = (part * c.symbols.len() / 4).min(c.symbols.len().saturating_sub(N));
                let w = c.symbols[from..(from + N).min(c.symbols.len())].to_vec();
                data.push((format!("corpus@{from}"), c.m(), w));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    let mut rng = SourceRng::new(0xC6);
    let mut splits = 0;
    let mut per_source = Vec::new();
    for (name, m, w) in &data {
        let code = PsiCode::new(*m).unwrap();
        let whole = minimal_block_transform(&code, w).unwrap();
        let bound = mi_bound(&code, &whole) as i64;
        let mut cache: HashMap<usize, (u64, u64)> = HashMap::new();
        let mut min_slack = i64::MAX;
        let mut violations = 0;
        for _ in 0..SPLITS {
            let s = rng.below(w.len() as u64 + 1) as usize;
            let (bu, bv) = *cache.entry(s).or_insert_with(|| {
                let bu = minimal_block_transform(&code, &w[..s]).unwrap().code_bits;
                let bv = minimal_block_transform(&code, &w[s..]).unwrap().code_bits;
                (bu, bv)
            });
            let j = bu as i64 + bv as i64 - whole.code_bits as i64;
            min_slack = min_slack.min(bound - j);
            splits += 1;
            violations += usize::from(j > bound);
        }
        per_source.push(format!(
            "{name}: V={} L={} slack >= {min_slack}{}",
            whole.rules,
            whole.rule_len,
            if violations > 0 {
                format!(" ({violations} violations)")
            } else {
                String::new()
            }
        ));
        if violations > 0 {
            failures.push(format!(
                "{name} violates the bound in {violations}/{SPLITS} splits"
            ));
        }
    }
    let detail = format!(
        "{splits} splits of {} sources ({N} symbols each) [{}]; {:.1} s{}",
        data.len(),
        per_source.join(", "),
        start.elapsed().as_secs_f64(),
        if failures.is_empty() {
            String::new()
        } else {
            format!("; {}", failures.join("; "))
        }
    );
    report(6, failures.is_empty() && splits >= 1000, &detail);
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_7_bernoulli_trend() {
    let start = Instant::now();
    let x = gen_bernoulli(&[0.5, 0.5], 1 << 20, 7).unwrap();
    let code = PsiCode::new(2).unwrap();
    let small = minimal_block_transform(&code, &x[..1 << 14]).unwrap();
    let large = minimal_block_transform(&code, &x).unwrap();
    let bps_small = small.code_bits as f64 / (1 << 14) as f64;
    let bps_large = large.code_bits as f64 / (1 << 20) as f64;
    let secs = start.elapsed().as_secs_f64();
    let pass = bps_large <= 2.0 && bps_large < bps_small && secs <= 600.0;
    let detail = format!(
        "Bernoulli(0.5): {bps_small:.4} bits/symbol at 2^14 (k={}), {bps_large:.4} at 2^20 (k={}); {secs:.1} s",
        small.rule_len, large.rule_len
    );
    report(7, pass, &detail);
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn criterion_8_sweep() {
    let start = Instant::now();
    let corpus = corpus_path();
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-sweep");
    let csv = out.with_extension("csv");
    let source = format!("corpus:{}", corpus.display());
    let shuffled = format!("permuted:{}", corpus.display());
    let run = Command::new(env!("CARGO_BIN_EXE_mblk"))
        .args([
            "sweep", "--source", &source, "--source", &shuffled, "--seed", "1",
        ])
        .arg("--csv")
        .arg(&csv)
        .arg("--svg")
        .arg(&out)
        .output()
        .expect("spawn mblk");
    let secs = start.elapsed().as_secs_f64();
    if !run.status.success() {
        let msg = String::from_utf8_lossy(&run.stderr).trim().to_string();
        report(8, false, &format!("sweep failed: {msg}"));
        return;
    }

    let mut problems = Vec::new();
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    let labels: Vec<String> = {
        let mut l: Vec<String> = rows.iter().map(|r| r.source.clone()).collect();
        l.dedup();
        l
    };
    if labels.len() != 2 {
        problems.push(format!("expected 2 sources, got {labels:?}"));
    }
    for suffix in ["-rules.svg", "-length.svg"] {
        let path = PathBuf::from(format!("{}{suffix}", out.display()));
        match std::fs::read_to_string(&path) {
            Ok(svg) if svg.matches("(slope ").count() == labels.len() => {}
            _ => problems.push(format!(
                "{} missing or without slope legend",
                path.display()
            )),
        }
    }
    for label in &labels {
        let v: Vec<usize> = rows
            .iter()
            .filter(|r| &r.source == label)
            .map(|r| r.rules)
            .collect();
        if v.windows(2).any(|w| w[1] < w[0]) {
            problems.push(format!("V decreases for {label}: {v:?}"));
        }
    }
    let mut fitted = Vec::new();
    for (stat, name) in [(Statistic::Rules, "V"), (Statistic::RuleLen, "L")] {
        let found = slopes(&rows, stat);
        for label in &labels {
            match found.iter().find(|s| &s.source == label) {
                Some(s) => {
                    fitted.push(format!("{name}[{label}] {:.3}", s.exponent));
                    if !(s.exponent > 0.0 && s.exponent <= 1.0) {
                        problems.push(format!(
                            "{name} slope of {label} is {:.3}, outside (0, 1]",
                            s.exponent
                        ));
                    }
                }
                None => problems.push(format!("no {name} slope for {label}")),
            }
        }
    }
    if secs > 1800.0 {
        problems.push(format!("runtime {secs:.0} s"));
    }
    let detail = format!(
        "{} rows, CSV + 2 SVGs in {}; slopes {}; {secs:.1} s{}",
        rows.len(),
        out.parent().unwrap().display(),
        fitted.join(", "),
        if problems.is_empty() {
            String::new()
        } else {
            format!("; {}", problems.join("; "))
        }
    );
    report(8, problems.is_empty(), &detail);
}
