//! The minimal block grammar transform and the code built on it.
//!
//! For a parse of `u` into `k`-blocks starting at shift `l`, the best
//! identifier assignment numbers the distinct blocks by decreasing count,
//! since codeword lengths of nonterminals are nondecreasing in the rank and
//! every secondary rule costs exactly `(k + 1) c1` bits. The search therefore
//! reduces to choosing `(k, l)`, and the cost of each choice depends only on
//! the multiset of block counts.
//!
//! Block counts for all shifts of one `k` are read off the suffix array: two
//! positions start the same `k`-block exactly when they sit in one run of
//! suffix-array neighbours with LCP at least `k`. Positions whose `k`-block
//! is unique in the whole string always contribute a count of one, so only
//! repeated positions are visited. For `k` beyond the longest repeat every
//! block is unique and the terminal grammar is strictly cheaper.

use std::collections::HashMap;

use crate::bits::BitString;
use crate::codebook::{read_container, write_container, PsiCode};
use crate::error::{Error, Result};
use crate::grammar::{
    decode_grammar, encode_grammar, grammar_code_length, BlockGrammar, DictionaryGrammar, Symbol,
};
use crate::suffix::{lcp_array, suffix_array};

/// Distinct `k`-blocks of one parse, by descending count, ties broken by
/// ascending lexicographic block order. Entry `i` (zero-based) gets the
/// nonterminal `m + 1 + i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedBlockTable {
    k: usize,
    shift: usize,
    n: usize,
    entries: Vec<(Vec<Symbol>, u64)>,
}

impl RankedBlockTable {
    /// Counts the blocks `u[l + i k .. l + (i + 1) k]` for every full block.
    pub fn from_parse(u: &[Symbol], k: usize, shift: usize) -> Result<Self> {
        if k == 0 || shift >= k {
            return Err(Error::Precondition(format!(
                "shift {shift} with block length {k}"
            )));
        }
        let mut counts: HashMap<&[Symbol], u64> = HashMap::new();
        if shift <= u.len() {
            for block in u[shift..].chunks_exact(k) {
                *counts.entry(block).or_default() += 1;
            }
        }
        let mut entries: Vec<(Vec<Symbol>, u64)> =
            counts.into_iter().map(|(b, c)| (b.to_vec(), c)).collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(Self {
            k,
            shift,
            n: u.len(),
            entries,
        })
    }

    /// Builds a table from explicit entries, which must be sorted by
    /// nonincreasing count. The order among equal counts is kept as given.
    pub fn from_entries(
        k: usize,
        shift: usize,
        n: usize,
        entries: Vec<(Vec<Symbol>, u64)>,
    ) -> Result<Self> {
        if entries.iter().any(|(b, c)| b.len() != k || *c == 0) {
            return Err(Error::Precondition(
                "entries must be k-blocks with positive counts".into(),
            ));
        }
        if entries.windows(2).any(|w| w[0].1 < w[1].1) {
            return Err(Error::Precondition(
                "entries are not sorted by count".into(),
            ));
        }
        Ok(Self {
            k,
            shift,
            n,
            entries,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    /// Length of the parsed string.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(Vec<Symbol>, u64)] {
        &self.entries
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// Number of blocks in the parse.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    /// Rank (1-based) of every block, for assembling the primary rule.
    fn rank_map(&self) -> HashMap<&[Symbol], u32> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, (b, _))| (b.as_slice(), i as u32 + 1))
            .collect()
    }
}

/// Exact `|psi*(G)|` of the grammar that uses `table` as its secondary rules
/// in table order, with `head` leading and `tail` trailing terminals.
pub fn block_cost(
    code: &PsiCode,
    table: &RankedBlockTable,
    k: usize,
    head: usize,
    tail: usize,
) -> Result<u64> {
    let c1 = u64::from(code.c1());
    let n = table.n();
    if table.entries.is_empty() {
        if head + tail != n {
            return Err(Error::Precondition(format!(
                "terminal runs {head} + {tail} do not cover n = {n}"
            )));
        }
        return Ok((n as u64 + 2) * c1);
    }
    if k != table.k() || head != table.shift() || head >= k || head > n {
        return Err(Error::Precondition(format!(
            "table parsed with k = {}, shift {} but asked for k = {k}, shift {head}",
            table.k(),
            table.shift()
        )));
    }
    let blocks = (n - head) / k;
    if tail != (n - head) % k || table.total() != blocks as u64 {
        return Err(Error::Precondition(format!(
            "n = {n}, k = {k}, head = {head} leave a tail of {}, not {tail}",
            (n - head) % k
        )));
    }
    let rules = table.distinct() as u64 * (k as u64 + 1) * c1;
    let runs = (head + tail) as u64 * c1 + 2 * c1;
    let ids: u64 = table
        .counts()
        .enumerate()
        .map(|(i, c)| c * code.rank_length(i as u64 + 1))
        .sum();
    Ok(rules + runs + ids)
}

/// The chosen grammar and its statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformResult {
    pub grammar: BlockGrammar,
    /// `|psi*(G)|` in bits.
    pub code_bits: u64,
    /// Rules including the primary one.
    pub rules: usize,
    /// Common length of the secondary rules; 0 when there are none.
    pub rule_len: usize,
    /// Leading terminal run.
    pub shift: usize,
    /// Ranked blocks backing the secondary rules; empty for the terminal grammar.
    pub table: Option<RankedBlockTable>,
}

impl TransformResult {
    pub fn is_terminal(&self) -> bool {
        self.table.is_none()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransformOptions {
    /// Caps the block lengths searched. With a cap the result is minimal
    /// only among block lengths up to the cap.
    pub kmax: Option<usize>,
}

pub fn check_alphabet(m: u32, u: &[Symbol]) -> Result<()> {
    match u.iter().position(|&s| s == 0 || s > m) {
        Some(i) => Err(Error::Domain(format!(
            "symbol {} at position {i} outside 1..={m}",
            u[i]
        ))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Choice {
    cost: u64,
    /// 0 selects the terminal grammar.
    k: usize,
    shift: usize,
}

/// Cumulative rank codeword lengths: `cum[j] = sum_{i=1..=j} |psi(m + i)|`.
fn rank_length_prefix(code: &PsiCode, upto: usize) -> Vec<u64> {
    let mut cum = Vec::with_capacity(upto + 1);
    cum.push(0);
    let mut acc = 0;
    for j in 1..=upto as u64 {
        acc += code.rank_length(j);
        cum.push(acc);
    }
    cum
}

fn search(code: &PsiCode, u: &[Symbol], opts: TransformOptions) -> Choice {
    let n = u.len();
    let c1 = u64::from(code.c1());
    let mut best = Choice {
        cost: (n as u64 + 2) * c1,
        k: 0,
        shift: 0,
    };
    if n < 2 {
        return best;
    }
    let sa = suffix_array(u);
    let lcp = lcp_array(u, &sa);
    let longest_repeat = lcp.iter().copied().max().unwrap_or(0) as usize;
    let kmax = longest_repeat.min(n).min(opts.kmax.unwrap_or(usize::MAX));
    if kmax == 0 {
        return best;
    }
    let cum = rank_length_prefix(code, n);
    // Longest repeat through suffix-array slot i, over both neighbours.
    let reach: Vec<u32> = (0..n)
        .map(|i| lcp[i].max(lcp.get(i + 1).copied().unwrap_or(0)))
        .collect();
    let mut active: Vec<u32> = (0..n as u32).filter(|&i| reach[i as usize] >= 1).collect();
    let mut keyed: Vec<u64> = Vec::with_capacity(active.len());
    let mut counts: Vec<u64> = Vec::new();

    for k in 1..=kmax {
        // Any grammar with a secondary rule pays at least (k + 1) c1 for it.
        if (k as u64 + 1) * c1 >= best.cost {
            break;
        }
        active.retain(|&i| reach[i as usize] as usize >= k);
        if active.is_empty() {
            break;
        }
        keyed.clear();
        let mut group = 0u64;
        for (w, &i) in active.iter().enumerate() {
            if w > 0 {
                let prev = active[w - 1];
                if !(i == prev + 1 && lcp[i as usize] as usize >= k) {
                    group += 1;
                }
            }
            let residue = sa[i as usize] as u64 % k as u64;
            keyed.push((residue << 32) | group);
        }
        keyed.sort_unstable();

        let mut start = 0;
        while start < keyed.len() {
            let shift = (keyed[start] >> 32) as usize;
            let mut end = start;
            counts.clear();
            while end < keyed.len() && (keyed[end] >> 32) as usize == shift {
                let mut run = end;
                while run < keyed.len() && keyed[run] == keyed[end] {
                    run += 1;
                }
                counts.push((run - end) as u64);
                end = run;
            }
            start = end;

            let blocks = ((n - shift) / k) as u64;
            let tail = ((n - shift) % k) as u64;
            let repeated: u64 = counts.iter().sum();
            let distinct = counts.len() + (blocks - repeated) as usize;
            counts.sort_unstable_by(|a, b| b.cmp(a));
            let ids: u64 = counts
                .iter()
                .enumerate()
                .map(|(j, &c)| c * code.rank_length(j as u64 + 1))
                .sum::<u64>()
                + (cum[distinct] - cum[counts.len()]);
            let cost = distinct as u64 * (k as u64 + 1) * c1 + (shift as u64 + tail + 2) * c1 + ids;
            if cost < best.cost {
                best = Choice { cost, k, shift };
            }
        }
    }
    best
}

fn assemble(code: &PsiCode, u: &[Symbol], choice: Choice) -> Result<TransformResult> {
    let m = code.m();
    if choice.k == 0 {
        let grammar = BlockGrammar::terminal(m, u)?;
        return Ok(TransformResult {
            code_bits: grammar_code_length(code, grammar.base())?,
            grammar,
            rules: 1,
            rule_len: 0,
            shift: 0,
            table: None,
        });
    }
    let (k, shift) = (choice.k, choice.shift);
    let table = RankedBlockTable::from_parse(u, k, shift)?;
    let tail = (u.len() - shift) % k;
    let mut rules: Vec<Vec<Symbol>> = table.entries().iter().map(|(b, _)| b.clone()).collect();
    let ranks = table.rank_map();
    let body = &u[shift..u.len() - tail];
    let mut primary = Vec::with_capacity(shift + body.len() / k + tail);
    primary.extend_from_slice(&u[..shift]);
    primary.extend(body.chunks_exact(k).map(|b| m + ranks[b]));
    primary.extend_from_slice(&u[u.len() - tail..]);
    rules.push(primary);
    let grammar = BlockGrammar::new(DictionaryGrammar::new(m, rules)?, k, shift, tail)?;
    let code_bits = grammar_code_length(code, grammar.base())?;
    debug_assert_eq!(code_bits, choice.cost);
    debug_assert_eq!(code_bits, block_cost(code, &table, k, shift, tail)?);
    let rules = grammar.base().rule_count();
    Ok(TransformResult {
        grammar,
        code_bits,
        rules,
        rule_len: k,
        shift,
        table: Some(table),
    })
}

/// Finds the block grammar producing `u` with the shortest local encoding.
///
/// Ties prefer the terminal grammar, then smaller `k`, then smaller shift.
pub fn minimal_block_transform(code: &PsiCode, u: &[Symbol]) -> Result<TransformResult> {
    minimal_block_transform_with(code, u, TransformOptions::default())
}

pub fn minimal_block_transform_with(
    code: &PsiCode,
    u: &[Symbol],
    opts: TransformOptions,
) -> Result<TransformResult> {
    check_alphabet(code.m(), u)?;
    let choice = search(code, u, opts);
    assemble(code, u, choice)
}

/// `psi*` of the minimal block grammar of `u`.
pub fn encode(code: &PsiCode, u: &[Symbol]) -> Result<BitString> {
    let result = minimal_block_transform(code, u)?;
    encode_grammar(code, result.grammar.base())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub symbols: Vec<Symbol>,
    /// False when the stream held a valid dictionary grammar that is not a
    /// block grammar. The string is still produced.
    pub block_shaped: bool,
}

pub fn decode(code: &PsiCode, bits: &BitString) -> Result<Decoded> {
    let grammar = decode_grammar(code, bits)?;
    let symbols = grammar.produce();
    let block_shaped = BlockGrammar::recognize(grammar).is_some();
    Ok(Decoded {
        symbols,
        block_shaped,
    })
}

/// Encodes `u` over the alphabet `1..=m` into an `MBLK` container.
pub fn compress(m: u32, u: &[Symbol], opts: TransformOptions) -> Result<Vec<u8>> {
    let code = PsiCode::new(m)?;
    let result = minimal_block_transform_with(&code, u, opts)?;
    write_container(&code, &encode_grammar(&code, result.grammar.base())?)
}

pub fn decompress(data: &[u8]) -> Result<(PsiCode, Decoded)> {
    let (code, bits) = read_container(data)?;
    let decoded = decode(&code, &bits)?;
    Ok((code, decoded))
}
