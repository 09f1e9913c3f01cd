//! Seeded synthetic sources and byte-level corpus ingestion.
//!
//! All randomness comes from ChaCha20 (`rand_chacha` 0.3) seeded with
//! `seed_from_u64`, consumed one `u64` at a time. Uniform reals use the top
//! 53 bits; bounded integers use widening multiplication with rejection.
//! Streams are therefore identical across platforms for a given seed.

use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::grammar::Symbol;

const SUM_TOLERANCE: f64 = 1e-12;

pub struct SourceRng(ChaCha20Rng);

impl SourceRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..bound`, `bound > 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let wide = u128::from(self.next_u64()) * u128::from(bound);
            if (wide as u64) >= threshold {
                return (wide >> 64) as u64;
            }
        }
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Domain("empty probability vector".into()));
    }
    if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::Domain(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

fn draw(rng: &mut SourceRng, p: &[f64]) -> Symbol {
    let x = rng.unit();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if x < acc {
            return i as Symbol + 1;
        }
    }
    // rounding left a sliver above the cumulative sum: take the last
    // symbol that has positive probability
    p.iter().rposition(|&pi| pi > 0.0).unwrap() as Symbol + 1
}

/// `n` i.i.d. draws from `p` over the symbols `1..=p.len()`.
pub fn gen_bernoulli(p: &[f64], n: usize, seed: u64) -> Result<Vec<Symbol>> {
    check_distribution(p)?;
    let mut rng = SourceRng::new(seed);
    Ok((0..n).map(|_| draw(&mut rng, p)).collect())
}

/// First-order Markov chain: the first symbol from `initial`, each next one
/// from the row of the current symbol.
pub fn gen_markov(
    initial: &[f64],
    transitions: &[Vec<f64>],
    n: usize,
    seed: u64,
) -> Result<Vec<Symbol>> {
    check_distribution(initial)?;
    if transitions.len() != initial.len() {
        return Err(Error::Domain(
            "transition table must be square over the alphabet".into(),
        ));
    }
    for row in transitions {
        if row.len() != initial.len() {
            return Err(Error::Domain(
                "transition table must be square over the alphabet".into(),
            ));
        }
        check_distribution(row)?;
    }
    let mut rng = SourceRng::new(seed);
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let mut state = draw(&mut rng, initial);
    out.push(state);
    while out.len() < n {
        state = draw(&mut rng, &transitions[state as usize - 1]);
        out.push(state);
    }
    Ok(out)
}

/// Bytes mapped to symbols `1..=m` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub symbols: Vec<Symbol>,
    /// `alphabet[s - 1]` is the byte behind symbol `s`.
    pub alphabet: Vec<u8>,
}

impl Corpus {
    /// Alphabet size; 0 for an empty input.
    pub fn m(&self) -> u32 {
        self.alphabet.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut code = [0 as Symbol; 256];
        let mut alphabet = Vec::new();
        let symbols = bytes
            .iter()
            .map(|&b| {
                if code[b as usize] == 0 {
                    alphabet.push(b);
                    code[b as usize] = alphabet.len() as Symbol;
                }
                code[b as usize]
            })
            .collect();
        Self { symbols, alphabet }
    }

    /// Maps symbols back to bytes.
    pub fn to_bytes(&self, symbols: &[Symbol]) -> Result<Vec<u8>> {
        symbols
            .iter()
            .map(|&s| {
                self.alphabet
                    .get((s as usize).wrapping_sub(1))
                    .copied()
                    .ok_or_else(|| Error::Domain(format!("symbol {s} not in the alphabet map")))
            })
            .collect()
    }
}

pub fn ingest_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(Corpus::from_bytes(&bytes))
}

/// Fisher-Yates shuffle of `u`.
pub fn permute_characters(u: &[Symbol], seed: u64) -> Vec<Symbol> {
    let mut out = u.to_vec();
    let mut rng = SourceRng::new(seed);
    for i in (1..out.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        out.swap(i, j);
    }
    out
}

/// Description of where a symbol stream comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Bernoulli {
        p: Vec<f64>,
        seed: u64,
    },
    Markov {
        initial: Vec<f64>,
        transitions: Vec<Vec<f64>>,
        seed: u64,
    },
    Corpus {
        path: std::path::PathBuf,
    },
    PermutedCorpus {
        path: std::path::PathBuf,
        seed: u64,
    },
}

/// A generated or ingested stream together with its alphabet size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    pub symbols: Vec<Symbol>,
    pub m: u32,
}

impl SourceSpec {
    /// Produces `n` symbols, or the whole corpus when `n` is `None`.
    pub fn generate(&self, n: Option<usize>) -> Result<Stream> {
        match self {
            SourceSpec::Bernoulli { p, seed } => {
                let n = n.ok_or_else(|| Error::Domain("synthetic sources need a length".into()))?;
                Ok(Stream {
                    symbols: gen_bernoulli(p, n, *seed)?,
                    m: p.len() as u32,
                })
            }
            SourceSpec::Markov {
                initial,
                transitions,
                seed,
            } => {
                let n = n.ok_or_else(|| Error::Domain("synthetic sources need a length".into()))?;
                Ok(Stream {
                    symbols: gen_markov(initial, transitions, n, *seed)?,
                    m: initial.len() as u32,
                })
            }
            SourceSpec::Corpus { path } => {
                let c = ingest_corpus(path)?;
                let mut symbols = c.symbols;
                if let Some(n) = n {
                    symbols.truncate(n);
                }
                Ok(Stream {
                    symbols,
                    m: c.alphabet.len() as u32,
                })
            }
            SourceSpec::PermutedCorpus { path, seed } => {
                let c = ingest_corpus(path)?;
                let mut symbols = permute_characters(&c.symbols, *seed);
                if let Some(n) = n {
                    symbols.truncate(n);
                }
                Ok(Stream {
                    symbols,
                    m: c.alphabet.len() as u32,
                })
            }
        }
    }
}
