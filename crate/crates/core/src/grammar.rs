//! Dictionary grammars, their expansion, and the local grammar encoder.
//!
//! Terminals are `1..=m`. Rule `i` (zero-based) defines the nonterminal
//! `m + 1 + i`; the last rule is the primary rule and spells the produced
//! string. Every element of a rule is strictly smaller than the symbol the
//! rule defines, so expansion always terminates.

use crate::bits::BitString;
use crate::codebook::PsiCode;
use crate::error::{Error, Result};

pub type Symbol = u32;

const RULE_END: i64 = 0;
const GRAMMAR_END: i64 = -1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DictionaryGrammar {
    m: u32,
    rules: Vec<Vec<Symbol>>,
}

impl DictionaryGrammar {
    pub fn new(m: u32, rules: Vec<Vec<Symbol>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Precondition(
                "alphabet size must be at least 1".into(),
            ));
        }
        if rules.is_empty() {
            return Err(Error::Precondition("a grammar needs a primary rule".into()));
        }
        for (i, rule) in rules.iter().enumerate() {
            let lhs = m as u64 + 1 + i as u64;
            if let Some(&bad) = rule.iter().find(|&&r| r == 0 || u64::from(r) >= lhs) {
                return Err(Error::Precondition(format!(
                    "rule {lhs} references symbol {bad}, expected 1..{lhs}"
                )));
            }
        }
        Ok(Self { m, rules })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of rules, primary included.
    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[Vec<Symbol>] {
        &self.rules
    }

    pub fn primary(&self) -> &[Symbol] {
        self.rules.last().unwrap()
    }

    pub fn secondary(&self) -> &[Vec<Symbol>] {
        &self.rules[..self.rules.len() - 1]
    }

    pub fn primary_symbol(&self) -> Symbol {
        self.m + self.rules.len() as Symbol
    }

    /// The right-hand side of nonterminal `r`, or `None` for terminals and
    /// unknown symbols.
    pub fn rule(&self, r: Symbol) -> Option<&[Symbol]> {
        let idx = r.checked_sub(self.m + 1)? as usize;
        self.rules.get(idx).map(Vec::as_slice)
    }

    /// Expands symbol `r` into the terminal string it derives.
    pub fn expand(&self, r: Symbol) -> Result<Vec<Symbol>> {
        if r == 0 || r > self.primary_symbol() {
            return Err(Error::Domain(format!(
                "symbol {r} outside 1..={}",
                self.primary_symbol()
            )));
        }
        let mut out = Vec::new();
        let mut stack = vec![r];
        while let Some(s) = stack.pop() {
            match self.rule(s) {
                None => out.push(s),
                Some(rhs) => stack.extend(rhs.iter().rev()),
            }
        }
        Ok(out)
    }

    /// The string produced by the grammar.
    pub fn produce(&self) -> Vec<Symbol> {
        self.expand(self.primary_symbol()).unwrap()
    }
}

fn check_alphabet(code: &PsiCode, g: &DictionaryGrammar) -> Result<()> {
    if code.m() != g.m() {
        return Err(Error::Precondition(format!(
            "code built for m = {} but grammar has m = {}",
            code.m(),
            g.m()
        )));
    }
    Ok(())
}

/// Local encoding: every rule symbol by symbol, each rule closed by `psi(0)`,
/// the grammar closed by `psi(-1)`.
pub fn encode_grammar(code: &PsiCode, g: &DictionaryGrammar) -> Result<BitString> {
    check_alphabet(code, g)?;
    let mut out = BitString::with_capacity(grammar_code_length(code, g)?);
    for rule in g.rules() {
        for &r in rule {
            code.encode_into(i64::from(r), &mut out)?;
        }
        code.encode_into(RULE_END, &mut out)?;
    }
    code.encode_into(GRAMMAR_END, &mut out)?;
    Ok(out)
}

pub fn grammar_code_length(code: &PsiCode, g: &DictionaryGrammar) -> Result<u64> {
    check_alphabet(code, g)?;
    let c1 = u64::from(code.c1());
    let mut total = c1;
    for rule in g.rules() {
        total += c1;
        for &r in rule {
            total += code.length(i64::from(r))?;
        }
    }
    Ok(total)
}

/// Reads a locally encoded grammar. The stream must end exactly after the
/// closing `psi(-1)`.
pub fn decode_grammar(code: &PsiCode, bits: &BitString) -> Result<DictionaryGrammar> {
    let m = code.m();
    let mut reader = bits.reader();
    let mut rules: Vec<Vec<Symbol>> = Vec::new();
    let mut current: Vec<Symbol> = Vec::new();
    loop {
        let n = code.decode(&mut reader)?;
        match n {
            GRAMMAR_END => {
                if !current.is_empty() {
                    return Err(Error::Corrupt("grammar ended inside an open rule".into()));
                }
                if rules.is_empty() {
                    return Err(Error::Corrupt("grammar without a primary rule".into()));
                }
                break;
            }
            RULE_END => rules.push(std::mem::take(&mut current)),
            _ => {
                let lhs = i64::from(m) + 1 + rules.len() as i64;
                if n >= lhs {
                    return Err(Error::Corrupt(format!(
                        "rule {lhs} references symbol {n} not below it"
                    )));
                }
                current.push(n as Symbol);
            }
        }
    }
    if !reader.is_exhausted() {
        return Err(Error::Corrupt(format!(
            "{} trailing bits after grammar terminator",
            reader.remaining()
        )));
    }
    DictionaryGrammar::new(m, rules).map_err(|e| Error::Corrupt(e.to_string()))
}

/// A dictionary grammar whose secondary rules are terminal strings of one
/// length `k`, and whose primary rule is a run of `head < k` terminals,
/// then nonterminals only, then a run of `tail < k` terminals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockGrammar {
    base: DictionaryGrammar,
    k: usize,
    head: usize,
    tail: usize,
}

impl BlockGrammar {
    pub fn new(base: DictionaryGrammar, k: usize, head: usize, tail: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition(
                "block length must be at least 1".into(),
            ));
        }
        if head >= k || tail >= k {
            return Err(Error::Precondition(format!(
                "terminal runs {head}, {tail} must be shorter than k = {k}"
            )));
        }
        let m = base.m();
        for (i, rule) in base.secondary().iter().enumerate() {
            if rule.len() != k || rule.iter().any(|&r| r > m) {
                return Err(Error::Precondition(format!(
                    "secondary rule {} is not a terminal block of length {k}",
                    m as usize + 1 + i
                )));
            }
        }
        let primary = base.primary();
        if head + tail > primary.len() {
            return Err(Error::Precondition(
                "primary rule shorter than its terminal runs".into(),
            ));
        }
        let (lead, rest) = primary.split_at(head);
        let (middle, trail) = rest.split_at(rest.len() - tail);
        if lead.iter().chain(trail).any(|&r| r > m) || middle.iter().any(|&r| r <= m) {
            return Err(Error::Precondition(
                "primary rule is not terminals, nonterminals, terminals".into(),
            ));
        }
        Ok(Self {
            base,
            k,
            head,
            tail,
        })
    }

    /// The grammar with no secondary rules whose primary rule spells `u`.
    pub fn terminal(m: u32, u: &[Symbol]) -> Result<Self> {
        let base = DictionaryGrammar::new(m, vec![u.to_vec()])?;
        Self::new(base, u.len() + 1, u.len(), 0)
    }

    /// Interprets a dictionary grammar as a block grammar, choosing the
    /// block length from its secondary rules. Returns `None` if the grammar
    /// does not have block shape.
    pub fn recognize(base: DictionaryGrammar) -> Option<Self> {
        let m = base.m();
        let primary = base.primary();
        if base.secondary().is_empty() {
            return Self::terminal(m, primary).ok();
        }
        let k = base.secondary()[0].len();
        let head = primary.iter().take_while(|&&r| r <= m).count();
        let tail = if head == primary.len() {
            0
        } else {
            primary.iter().rev().take_while(|&&r| r <= m).count()
        };
        Self::new(base, k, head, tail).ok()
    }

    pub fn base(&self) -> &DictionaryGrammar {
        &self.base
    }

    pub fn into_base(self) -> DictionaryGrammar {
        self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    /// Number of nonterminals in the primary rule.
    pub fn block_count(&self) -> usize {
        self.base.primary().len() - self.head - self.tail
    }
}
