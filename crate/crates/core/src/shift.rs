//! Alphabets, transition structures, admissible words and the `d_θ` metric.
//!
//! A countable shift is presented by its successor rule together with an
//! increasing schedule of finite truncations `S_m = {0, .., m-1}`. Every
//! enumeration in the crate runs on one truncation, i.e. on the restricted
//! matrix `M|_{S_m × S_m}`.
//!
//! Infinite sequences are never materialized: a [`Word`] stands for the
//! cylinder of all sequences extending it, and every operation states how
//! many leading symbols it reads.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg;

pub type Symbol = usize;

/// Default cap on the number of cylinders a single enumeration may produce.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Alphabet {
    Finite { size: usize },
    Countable,
}

impl Alphabet {
    pub fn contains(&self, a: Symbol) -> bool {
        match *self {
            Alphabet::Finite { size } => a < size,
            Alphabet::Countable => true,
        }
    }

    fn check(&self, a: Symbol) -> Result<()> {
        match *self {
            Alphabet::Finite { size } if a >= size => Err(Error::SymbolOutOfRange { symbol: a, size }),
            _ => Ok(()),
        }
    }
}

/// How successors are listed.
#[derive(Debug, Clone, PartialEq)]
pub enum SuccessorRule {
    /// Explicit sorted successor lists; unlisted symbols have no successors.
    Explicit(BTreeMap<Symbol, Vec<Symbol>>),
    /// Every transition permitted.
    Full,
    /// `M(a, b) = 1` iff `|a − b| ≤ width`.
    Band { width: usize },
}

/// A 0/1 transition matrix over a finite or countable alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransitionJson", into = "TransitionJson")]
pub struct TransitionStructure {
    alphabet: Alphabet,
    rule: SuccessorRule,
    truncations: Vec<usize>,
    /// Caller-declared BIP flag; recorded, never verified.
    bip: bool,
}

/// The restricted matrix on `S_m`, as sorted successor lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    succ: Vec<Vec<Symbol>>,
}

impl TransitionStructure {
    pub fn new(alphabet: Alphabet, rule: SuccessorRule, truncations: Vec<usize>) -> Result<Self> {
        let rule = match rule {
            SuccessorRule::Explicit(map) => {
                let mut cleaned = BTreeMap::new();
                for (a, mut succ) in map {
                    alphabet.check(a)?;
                    for &b in &succ {
                        alphabet.check(b)?;
                    }
                    succ.sort_unstable();
                    succ.dedup();
                    cleaned.insert(a, succ);
                }
                SuccessorRule::Explicit(cleaned)
            }
            other => other,
        };
        let truncations = if truncations.is_empty() {
            match alphabet {
                Alphabet::Finite { size } => vec![size],
                Alphabet::Countable => return Err(domain("a countable alphabet needs a truncation schedule")),
            }
        } else {
            truncations
        };
        if let Alphabet::Finite { size } = alphabet {
            if size == 0 {
                return Err(domain("finite alphabet must have at least one symbol"));
            }
        }
        for pair in truncations.windows(2) {
            if pair[0] >= pair[1] {
                return Err(domain("truncation schedule must be strictly increasing"));
            }
        }
        let ts = TransitionStructure {
            alphabet,
            rule,
            truncations,
            bip: false,
        };
        for &m in &ts.truncations {
            if m == 0 {
                return Err(domain("truncations must be nonempty"));
            }
            if let Alphabet::Finite { size } = alphabet {
                if m > size {
                    return Err(domain(format!("truncation {m} exceeds alphabet size {size}")));
                }
            }
            for a in 0..m {
                if ts.successors_in(a, m).is_empty() {
                    return Err(domain(format!("symbol {a} has no successor inside truncation {m}")));
                }
            }
        }
        Ok(ts)
    }

    /// Full shift on `m` symbols.
    pub fn full(m: usize) -> Self {
        Self::new(Alphabet::Finite { size: m }, SuccessorRule::Full, vec![m]).expect("full shift is valid")
    }

    /// Golden-mean shift: `0 → {0, 1}`, `1 → {0}`.
    pub fn golden_mean() -> Self {
        Self::from_pattern(&[vec![true, true], vec![true, false]]).expect("golden mean is valid")
    }

    /// Full shift on ℕ, presented through the given truncation sizes.
    pub fn full_countable(truncations: Vec<usize>) -> Result<Self> {
        Self::new(Alphabet::Countable, SuccessorRule::Full, truncations)
    }

    /// Finite shift from a 0/1 pattern.
    pub fn from_pattern(pattern: &[Vec<bool>]) -> Result<Self> {
        let m = pattern.len();
        let mut map = BTreeMap::new();
        for (a, row) in pattern.iter().enumerate() {
            if row.len() != m {
                return Err(domain("transition pattern must be square"));
            }
            map.insert(a, (0..m).filter(|&b| row[b]).collect());
        }
        Self::new(Alphabet::Finite { size: m }, SuccessorRule::Explicit(map), vec![m])
    }

    pub fn with_bip(mut self, bip: bool) -> Self {
        self.bip = bip;
        self
    }

    pub fn bip(&self) -> bool {
        self.bip
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn rule(&self) -> &SuccessorRule {
        &self.rule
    }

    pub fn truncation_schedule(&self) -> &[usize] {
        &self.truncations
    }

    pub fn truncation_size(&self, index: usize) -> Result<usize> {
        self.truncations.get(index).copied().ok_or(Error::NoSuchTruncation {
            index,
            len: self.truncations.len(),
        })
    }

    pub fn permits(&self, a: Symbol, b: Symbol) -> bool {
        match &self.rule {
            SuccessorRule::Explicit(map) => map.get(&a).is_some_and(|s| s.binary_search(&b).is_ok()),
            SuccessorRule::Full => self.alphabet.contains(a) && self.alphabet.contains(b),
            SuccessorRule::Band { width } => {
                self.alphabet.contains(a) && self.alphabet.contains(b) && a.abs_diff(b) <= *width
            }
        }
    }

    /// Sorted successors of `a` inside `S_m`.
    pub fn successors_in(&self, a: Symbol, m: usize) -> Vec<Symbol> {
        match &self.rule {
            SuccessorRule::Explicit(map) => map
                .get(&a)
                .map(|s| s.iter().copied().filter(|&b| b < m).collect())
                .unwrap_or_default(),
            SuccessorRule::Full => (0..m).collect(),
            SuccessorRule::Band { width } => {
                let lo = a.saturating_sub(*width);
                let hi = (a + width).min(m.saturating_sub(1));
                if lo > hi {
                    Vec::new()
                } else {
                    (lo..=hi).collect()
                }
            }
        }
    }

    pub fn truncation(&self, index: usize) -> Result<Truncation> {
        let m = self.truncation_size(index)?;
        Ok(Truncation {
            succ: (0..m).map(|a| self.successors_in(a, m)).collect(),
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl Truncation {
    pub fn size(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, a: Symbol) -> &[Symbol] {
        &self.succ[a]
    }

    pub fn permits(&self, a: Symbol, b: Symbol) -> bool {
        a < self.size() && self.succ[a].binary_search(&b).is_ok()
    }

    pub fn pattern(&self) -> Vec<Vec<bool>> {
        let m = self.size();
        (0..m).map(|a| (0..m).map(|b| self.permits(a, b)).collect()).collect()
    }

    /// Number of admissible words of length `n`: the entry sum of `M^{n−1}`
    /// (saturating).
    pub fn count_words(&self, n: usize) -> u128 {
        if n == 0 {
            return 0;
        }
        let mut v = vec![1u128; self.size()];
        for _ in 1..n {
            let mut next = vec![0u128; self.size()];
            for (a, &va) in v.iter().enumerate() {
                for &b in &self.succ[a] {
                    next[b] = next[b].saturating_add(va);
                }
            }
            v = next;
        }
        v.into_iter().fold(0u128, |acc, x| acc.saturating_add(x))
    }

    /// Depth-first walk over admissible words of length `1..=max_len`
    /// beginning with `first`, in lexicographic order.
    ///
    /// `push` extends the per-word state by one symbol (returning `None`
    /// prunes the subtree); `visit` sees each word with its state and returns
    /// whether to descend further.
    pub fn walk_rooted<S, P, V>(&self, first: Symbol, max_len: usize, init: &S, push: &P, visit: &mut V)
    where
        P: Fn(&S, Symbol) -> Option<S>,
        V: FnMut(&[Symbol], &S) -> bool,
    {
        if max_len == 0 || first >= self.size() {
            return;
        }
        let Some(state) = push(init, first) else {
            return;
        };
        let mut word = Vec::with_capacity(max_len);
        word.push(first);
        self.descend(&mut word, &state, max_len, push, visit);
    }

    /// [`walk_rooted`](Self::walk_rooted) over every first symbol.
    pub fn walk<S, P, V>(&self, max_len: usize, init: &S, push: &P, visit: &mut V)
    where
        P: Fn(&S, Symbol) -> Option<S>,
        V: FnMut(&[Symbol], &S) -> bool,
    {
        for a in 0..self.size() {
            self.walk_rooted(a, max_len, init, push, visit);
        }
    }

    fn descend<S, P, V>(&self, word: &mut Vec<Symbol>, state: &S, max_len: usize, push: &P, visit: &mut V)
    where
        P: Fn(&S, Symbol) -> Option<S>,
        V: FnMut(&[Symbol], &S) -> bool,
    {
        if !visit(word, state) || word.len() == max_len {
            return;
        }
        let last = *word.last().expect("nonempty");
        for &b in &self.succ[last] {
            if let Some(next) = push(state, b) {
                word.push(b);
                self.descend(word, &next, max_len, push, visit);
                word.pop();
            }
        }
    }
}

/// A finite nonempty symbol string; stands for the cylinder `[w_0, .., w_{N−1}]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(domain("words have length at least 1"));
        }
        Ok(Word(symbols))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Symbol {
        self.0[0]
    }

    pub fn into_inner(self) -> Vec<Symbol> {
        self.0
    }
}

impl TryFrom<Vec<Symbol>> for Word {
    type Error = Error;
    fn try_from(v: Vec<Symbol>) -> Result<Self> {
        Word::new(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    theta: f64,
}

impl MetricParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(domain(format!("theta must lie in (0,1), got {theta}")));
        }
        Ok(MetricParams { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// A `d_θ` distance read off finite prefixes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    /// The first disagreement was observed.
    Exact(f64),
    /// The prefixes agree on every compared symbol: `0 ≤ d ≤ bound`.
    AtMost(f64),
}

impl Distance {
    /// The exact value, or `0` when the prefixes never disagreed.
    pub fn value(&self) -> f64 {
        match *self {
            Distance::Exact(d) => d,
            Distance::AtMost(_) => 0.0,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            Distance::Exact(d) | Distance::AtMost(d) => d,
        }
    }
}

/// True iff every consecutive pair of `word` is a permitted transition.
pub fn is_admissible(word: &[Symbol], trans: &TransitionStructure) -> Result<bool> {
    for &a in word {
        trans.alphabet.check(a)?;
    }
    Ok(word.windows(2).all(|p| trans.permits(p[0], p[1])))
}

/// The `(n, θ^k)`-dynamical ball around any point with the given prefix: the
/// cylinder of its first `n + k + 1` symbols.
pub fn ball_as_cylinder(center_prefix: &[Symbol], n: usize, k: usize) -> Result<Word> {
    let len = n + k + 1;
    if center_prefix.len() < len {
        return Err(Error::InsufficientData {
            needed: len,
            got: center_prefix.len(),
        });
    }
    Word::new(center_prefix[..len].to_vec())
}

/// `d_θ(x, y) = θ^k` with `k` the length of the longest common cylinder
/// (`1` when the first symbols differ).
pub fn d_theta(x: &[Symbol], y: &[Symbol], params: MetricParams) -> Distance {
    let compared = x.len().min(y.len());
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(k) => Distance::Exact(params.theta.powi(k as i32)),
        None => Distance::AtMost(params.theta.powi(compared as i32)),
    }
}

/// Lexicographic stream of the admissible words of one length.
#[derive(Debug, Clone)]
pub struct CylinderIter {
    trunc: Truncation,
    len: usize,
    // positions into successor lists (first entry indexes symbols directly)
    cursor: Vec<usize>,
    word: Vec<Symbol>,
    started: bool,
    done: bool,
}

impl CylinderIter {
    fn options(&self, depth: usize) -> usize {
        if depth == 0 {
            self.trunc.size()
        } else {
            self.trunc.succ[self.word[depth - 1]].len()
        }
    }

    fn symbol_at(&self, depth: usize, idx: usize) -> Symbol {
        if depth == 0 {
            idx
        } else {
            self.trunc.succ[self.word[depth - 1]][idx]
        }
    }

    // Fill positions depth.. with their first options.
    fn fill_from(&mut self, depth: usize) {
        for d in depth..self.len {
            self.cursor[d] = 0;
            self.word[d] = self.symbol_at(d, 0);
        }
    }
}

impl Iterator for CylinderIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill_from(0);
            return Some(Word(self.word.clone()));
        }
        let mut d = self.len;
        while d > 0 {
            d -= 1;
            if self.cursor[d] + 1 < self.options(d) {
                self.cursor[d] += 1;
                self.word[d] = self.symbol_at(d, self.cursor[d]);
                self.fill_from(d + 1);
                return Some(Word(self.word.clone()));
            }
        }
        self.done = true;
        None
    }
}

/// All admissible length-`n` words over one truncation, lexicographically.
pub fn enumerate_cylinders(trans: &TransitionStructure, truncation_index: usize, n: usize) -> Result<CylinderIter> {
    enumerate_cylinders_with_budget(trans, truncation_index, n, DEFAULT_BUDGET)
}

pub fn enumerate_cylinders_with_budget(
    trans: &TransitionStructure,
    truncation_index: usize,
    n: usize,
    budget: u128,
) -> Result<CylinderIter> {
    if n == 0 {
        return Err(domain("cylinder length must be at least 1"));
    }
    let trunc = trans.truncation(truncation_index)?;
    let count = trunc.count_words(n);
    if count > budget {
        return Err(Error::Budget { count, budget });
    }
    Ok(CylinderIter {
        trunc,
        len: n,
        cursor: vec![0; n],
        word: vec![0; n],
        started: false,
        done: false,
    })
}

/// Result of [`check_primitive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Primitivity {
    pub primitive: bool,
    /// Smallest `p` with `M^p > 0`, when it exists.
    pub power: Option<usize>,
}

pub fn check_primitive(trans: &TransitionStructure, truncation_index: usize) -> Result<Primitivity> {
    let trunc = trans.truncation(truncation_index)?;
    let power = linalg::primitivity_exponent(&trunc.pattern());
    Ok(Primitivity {
        primitive: power.is_some(),
        power,
    })
}

// ---- JSON form ------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TransitionJson {
    alphabet: Alphabet,
    successors: SuccessorsJson,
    #[serde(default)]
    truncations: Vec<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    bip: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SuccessorsJson {
    Rule {
        rule: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<serde_json::Value>,
    },
    Explicit(BTreeMap<String, Vec<Symbol>>),
}

impl TryFrom<TransitionJson> for TransitionStructure {
    type Error = Error;

    fn try_from(j: TransitionJson) -> Result<Self> {
        let rule = match j.successors {
            SuccessorsJson::Rule { rule, params } => match rule.as_str() {
                "full" => SuccessorRule::Full,
                "band" => {
                    let width = params
                        .as_ref()
                        .and_then(|p| p.get("width"))
                        .and_then(|w| w.as_u64())
                        .ok_or_else(|| Error::Config("band rule needs params.width".into()))?;
                    SuccessorRule::Band { width: width as usize }
                }
                other => return Err(Error::Config(format!("unknown successor rule {other:?}"))),
            },
            SuccessorsJson::Explicit(map) => {
                let mut parsed = BTreeMap::new();
                for (k, v) in map {
                    let a: Symbol = k
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("successor key {k:?} is not a symbol")))?;
                    parsed.insert(a, v);
                }
                SuccessorRule::Explicit(parsed)
            }
        };
        Ok(TransitionStructure::new(j.alphabet, rule, j.truncations)?.with_bip(j.bip))
    }
}

impl From<TransitionStructure> for TransitionJson {
    fn from(t: TransitionStructure) -> Self {
        let successors = match t.rule {
            SuccessorRule::Full => SuccessorsJson::Rule {
                rule: "full".into(),
                params: None,
            },
            SuccessorRule::Band { width } => SuccessorsJson::Rule {
                rule: "band".into(),
                params: Some(serde_json::json!({ "width": width })),
            },
            SuccessorRule::Explicit(map) => {
                SuccessorsJson::Explicit(map.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
            }
        };
        TransitionJson {
            alphabet: t.alphabet,
            successors,
            truncations: t.truncations,
            bip: t.bip,
        }
    }
}
