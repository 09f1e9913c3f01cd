//! Brute-force references for the minimal block code.
//!
//! Nothing here shares code with the transform's search or its closed-form
//! cost: every candidate grammar is built explicitly and measured by running
//! the local grammar encoder.

use std::collections::HashMap;

use mblk_core::grammar::encode_grammar;
use mblk_core::{DictionaryGrammar, PsiCode, Symbol};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Core(#[from] mblk_core::Error),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Limits on the exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_n: usize,
    /// Distinct blocks per parse; all `D!` identifier assignments are tried.
    pub max_distinct: usize,
    pub max_k: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_n: 10,
            max_distinct: 6,
            max_k: 11,
        }
    }
}

/// The best grammar found and its encoded length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMin {
    pub bits: u64,
    pub grammar: DictionaryGrammar,
    /// `(k, shift)` of the winner, `None` for the terminal grammar.
    pub parse: Option<(usize, usize)>,
}

fn encoded_len(code: &PsiCode, g: &DictionaryGrammar) -> Result<u64> {
    Ok(encode_grammar(code, g)?.len())
}

/// Calls `visit` with every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm)?;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm)?;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(())
}

/// Minimum encoded length over every identifier assignment for the parse of
/// `u` into `k`-blocks starting at `shift`. `None` if the parse has no block.
pub fn best_assignment(
    code: &PsiCode,
    u: &[Symbol],
    k: usize,
    shift: usize,
    budget: &EnumerationBudget,
) -> Result<Option<OracleMin>> {
    let n = u.len();
    if k == 0 || shift >= k || shift + k > n {
        return Ok(None);
    }
    let tail = (n - shift) % k;
    let blocks: Vec<&[Symbol]> = u[shift..n - tail].chunks_exact(k).collect();
    let mut distinct: Vec<&[Symbol]> = Vec::new();
    for b in &blocks {
        if !distinct.contains(b) {
            distinct.push(b);
        }
    }
    if distinct.len() > budget.max_distinct {
        return Err(OracleError::BudgetExceeded(format!(
            "{} distinct blocks for k = {k}",
            distinct.len()
        )));
    }
    let m = code.m();
    let mut best: Option<OracleMin> = None;
    for_each_permutation(distinct.len(), |perm| {
        // perm[i] is the zero-based rule slot of distinct block i
        let mut rules = vec![Vec::new(); distinct.len()];
        let mut slot_of: HashMap<&[Symbol], Symbol> = HashMap::new();
        for (i, b) in distinct.iter().enumerate() {
            rules[perm[i]] = b.to_vec();
            slot_of.insert(b, m + 1 + perm[i] as Symbol);
        }
        let mut primary = u[..shift].to_vec();
        primary.extend(blocks.iter().map(|b| slot_of[b]));
        primary.extend_from_slice(&u[n - tail..]);
        rules.push(primary);
        let grammar = DictionaryGrammar::new(m, rules)?;
        let bits = encoded_len(code, &grammar)?;
        if best.as_ref().is_none_or(|b| bits < b.bits) {
            best = Some(OracleMin {
                bits,
                grammar,
                parse: Some((k, shift)),
            });
        }
        Ok(())
    })?;
    Ok(best)
}

/// True minimum of `|psi*(G)|` over all block grammars producing `u`: the
/// terminal grammar and every `(k, shift, assignment)` with at least one block.
pub fn brute_force_min_block(
    code: &PsiCode,
    u: &[Symbol],
    budget: &EnumerationBudget,
) -> Result<OracleMin> {
    let n = u.len();
    if n > budget.max_n {
        return Err(OracleError::BudgetExceeded(format!(
            "n = {n} > {}",
            budget.max_n
        )));
    }
    let terminal = DictionaryGrammar::new(code.m(), vec![u.to_vec()])?;
    let mut best = OracleMin {
        bits: encoded_len(code, &terminal)?,
        grammar: terminal,
        parse: None,
    };
    for k in 1..=(n + 1).min(budget.max_k) {
        for shift in 0..k {
            if let Some(found) = best_assignment(code, u, k, shift, budget)? {
                if found.bits < best.bits {
                    best = found;
                }
            }
        }
    }
    Ok(best)
}

/// `C(k) = [m^k (k + 1) + 2k + 2] c1`.
pub fn criterion_c_k(code: &PsiCode, k: usize) -> f64 {
    let blocks = f64::from(code.m()).powi(k as i32);
    (blocks * (k as f64 + 1.0) + 2.0 * k as f64 + 2.0) * f64::from(code.c1())
}

/// `C(n, k) = C(k) + (n / k) [2 log2 log2 m + 2 log2 k + c2]`.
pub fn criterion_c_nk(code: &PsiCode, n: usize, k: usize) -> f64 {
    let m = f64::from(code.m());
    let per_block = 2.0 * m.log2().log2() + 2.0 * (k as f64).log2() + f64::from(code.c2());
    criterion_c_k(code, k) + n as f64 / k as f64 * per_block
}

/// Right-hand side `C(n, k) - (1/k) sum_i log2 pi(x[i..i + k])` over all
/// overlapping windows. Infinite when `pi` gives an occurring block zero mass.
pub fn criterion_rhs(code: &PsiCode, x: &[Symbol], k: usize, pi: impl Fn(&[Symbol]) -> f64) -> f64 {
    let log_mass: f64 = if k > x.len() {
        0.0
    } else {
        x.windows(k).map(|w| pi(w).log2()).sum()
    };
    criterion_c_nk(code, x.len(), k) - log_mass / k as f64
}
