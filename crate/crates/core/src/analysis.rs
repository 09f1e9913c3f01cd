//! Measurements built on the minimal block code: pointwise mutual
//! information and its rule-count bound, log-log growth exponents,
//! empirical block entropy and the ranked-probability bound.

use std::collections::HashMap;

use crate::codebook::PsiCode;
use crate::error::{Error, Result};
use crate::grammar::Symbol;
use crate::transform::{check_alphabet, minimal_block_transform, TransformResult};

/// `|B(u)| + |B(v)| - |B(uv)|` for the minimal block code. May be negative.
pub fn pointwise_mi(code: &PsiCode, u: &[Symbol], v: &[Symbol]) -> Result<i64> {
    check_alphabet(code.m(), u)?;
    check_alphabet(code.m(), v)?;
    let uv: Vec<Symbol> = u.iter().chain(v).copied().collect();
    let bu = minimal_block_transform(code, u)?.code_bits;
    let bv = minimal_block_transform(code, v)?.code_bits;
    let buv = minimal_block_transform(code, &uv)?.code_bits;
    Ok(bu as i64 + bv as i64 - buv as i64)
}

/// `V (L + 1) c1` for the minimal block grammar of `uv`.
pub fn mi_bound(code: &PsiCode, result: &TransformResult) -> u64 {
    result.rules as u64 * (result.rule_len as u64 + 1) * u64::from(code.c1())
}

/// Positive statistic sampled at increasing prefix lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSeries {
    points: Vec<(f64, f64)>,
}

impl GrowthSeries {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points
            .iter()
            .any(|&(n, v)| n.is_nan() || n < 1.0 || v.is_nan() || v < 0.0 || !v.is_finite())
        {
            return Err(Error::Domain(
                "series needs n >= 1 and finite values >= 0".into(),
            ));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain(
                "series lengths must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Least-squares line through `(log2 n, log2 value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

impl LogLogFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.log2()).exp2()
    }
}

/// Fits the positive points whose `n` lies in `window` (inclusive), or all
/// positive points when `window` is `None`.
pub fn log_log_fit(series: &GrowthSeries, window: Option<(f64, f64)>) -> Result<LogLogFit> {
    let pts: Vec<(f64, f64)> = series
        .points
        .iter()
        .filter(|&&(n, v)| v > 0.0 && window.is_none_or(|(lo, hi)| n >= lo && n <= hi))
        .map(|&(n, v)| (n.log2(), v.log2()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} positive points, need at least 2",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// Finite-sample growth exponent: the log-log regression slope clipped
/// below at zero.
pub fn hilberg_exponent(series: &GrowthSeries, window: Option<(f64, f64)>) -> Result<f64> {
    Ok(log_log_fit(series, window)?.slope.max(0.0))
}

/// Counts of overlapping `k`-blocks of `x`.
pub fn overlapping_block_counts(x: &[Symbol], k: usize) -> Result<HashMap<&[Symbol], u64>> {
    if k == 0 || k > x.len() {
        return Err(Error::Domain(format!(
            "block length {k} for a string of length {}",
            x.len()
        )));
    }
    let mut counts: HashMap<&[Symbol], u64> = HashMap::new();
    for w in x.windows(k) {
        *counts.entry(w).or_default() += 1;
    }
    Ok(counts)
}

/// Counts of the disjoint `k`-blocks `x[i k .. (i + 1) k]`.
pub fn disjoint_block_counts(x: &[Symbol], k: usize) -> Result<HashMap<&[Symbol], u64>> {
    if k == 0 || k > x.len() {
        return Err(Error::Domain(format!(
            "block length {k} for a string of length {}",
            x.len()
        )));
    }
    let mut counts: HashMap<&[Symbol], u64> = HashMap::new();
    for w in x.chunks_exact(k) {
        *counts.entry(w).or_default() += 1;
    }
    Ok(counts)
}

fn entropy_of(counts: &HashMap<&[Symbol], u64>) -> f64 {
    let total: u64 = counts.values().sum();
    let t = total as f64;
    // sum over blocks of -(c/t) log2(c/t), i.e. the average over occurrences
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Empirical entropy of the overlapping `k`-blocks of `x`, in bits per block.
pub fn block_entropy(x: &[Symbol], k: usize) -> Result<f64> {
    Ok(entropy_of(&overlapping_block_counts(x, k)?))
}

/// As [`block_entropy`], over disjoint blocks.
pub fn block_entropy_disjoint(x: &[Symbol], k: usize) -> Result<f64> {
    Ok(entropy_of(&disjoint_block_counts(x, k)?))
}

/// Probabilities of disjoint events.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    probs: Vec<f64>,
}

const MASS_TOLERANCE: f64 = 1e-9;

impl ProbabilityTable {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        let mass: f64 = probs.iter().sum();
        if mass > 1.0 + MASS_TOLERANCE {
            return Err(Error::Domain(format!("probabilities sum to {mass} > 1")));
        }
        Ok(Self { probs })
    }

    pub fn from_counts(counts: impl IntoIterator<Item = u64>) -> Result<Self> {
        let counts: Vec<u64> = counts.into_iter().collect();
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Self::new(Vec::new());
        }
        Self::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Checks `pi_n <= 1/n` for the probabilities ranked in descending order.
/// Returns the first violating rank (1-based), or `None` if the bound holds.
pub fn zipf_check(table: &ProbabilityTable) -> Option<usize> {
    let mut ranked = table.probs.clone();
    ranked.sort_unstable_by(|a, b| b.total_cmp(a));
    ranked
        .iter()
        .enumerate()
        .find(|&(i, &p)| p > 1.0 / (i + 1) as f64 + f64::EPSILON)
        .map(|(i, _)| i + 1)
}
