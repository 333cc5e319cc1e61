//! Locally constant potentials and their Birkhoff sums.
//!
//! A depth-`k` potential reads the first `k` symbols of a sequence. Values are
//! tabulated per admissible `k`-word; an optional affine rule in the first
//! symbol (`c + s·a`) covers words missing from the table, which is how
//! unbounded functions on countable alphabets (roofs, proper weights) are
//! written down.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::logspace::safe_ln;
use crate::shift::{Symbol, TransitionStructure, Truncation};

/// `f(a) = intercept + slope · a`, evaluated on the first symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub intercept: f64,
    pub slope: f64,
}

impl Affine {
    pub fn eval(&self, a: Symbol) -> f64 {
        self.intercept + self.slope * a as f64
    }
}

/// How `S_N φ` treats windows that run past the end of a length-`N` word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BirkhoffBoundary {
    /// Only windows lying inside the word: `N − k + 1` terms.
    #[default]
    Interior,
    /// `N` terms; the word is continued by lexicographically least successors.
    LeastSuccessor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialJson", into = "PotentialJson")]
pub struct Potential {
    depth: usize,
    values: BTreeMap<Vec<Symbol>, f64>,
    affine: Option<Affine>,
    sup: Option<f64>,
}

impl Potential {
    pub fn new(
        depth: usize,
        values: BTreeMap<Vec<Symbol>, f64>,
        affine: Option<Affine>,
        sup: Option<f64>,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(domain("potential depth must be at least 1"));
        }
        for (k, v) in &values {
            if k.len() != depth {
                return Err(domain(format!("key {k:?} does not have length {depth}")));
            }
            if !v.is_finite() {
                return Err(domain(format!("potential value on {k:?} is not finite")));
            }
            if let Some(s) = sup {
                if *v > s + 1e-12 {
                    return Err(domain(format!("value {v} on {k:?} exceeds declared sup {s}")));
                }
            }
        }
        if let Some(af) = affine {
            if !(af.intercept.is_finite() && af.slope.is_finite()) {
                return Err(domain("affine rule must be finite"));
            }
            if let Some(s) = sup {
                if af.slope > 0.0 {
                    return Err(domain("an increasing affine rule has no finite sup"));
                }
                if af.intercept > s + 1e-12 {
                    return Err(domain("affine rule exceeds declared sup"));
                }
            }
        }
        Ok(Potential {
            depth,
            values,
            affine,
            sup,
        })
    }

    /// Depth-1 potential `φ(a) = values[a]` on `{0, .., len−1}`.
    pub fn depth1(values: &[f64]) -> Result<Self> {
        let map = values.iter().enumerate().map(|(a, &v)| (vec![a], v)).collect();
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(1, map, None, Some(sup))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(
            1,
            BTreeMap::new(),
            Some(Affine {
                intercept: c,
                slope: 0.0,
            }),
            Some(c),
        )
        .expect("finite constant")
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Depth-1 `φ(a) = intercept + slope·a` on the whole alphabet.
    pub fn affine(intercept: f64, slope: f64) -> Result<Self> {
        let sup = if slope <= 0.0 { Some(intercept) } else { None };
        Self::new(1, BTreeMap::new(), Some(Affine { intercept, slope }), sup)
    }

    /// Depth-1 indicator of one symbol.
    pub fn indicator(symbol: Symbol) -> Self {
        let mut map = BTreeMap::new();
        map.insert(vec![symbol], 1.0);
        Self::new(
            1,
            map,
            Some(Affine {
                intercept: 0.0,
                slope: 0.0,
            }),
            Some(1.0),
        )
        .expect("indicator is valid")
    }

    /// Tabulates `f` on every admissible `depth`-word of a truncation.
    pub fn from_fn(
        depth: usize,
        trans: &TransitionStructure,
        truncation_index: usize,
        f: impl Fn(&[Symbol]) -> f64,
    ) -> Result<Self> {
        let trunc = trans.truncation(truncation_index)?;
        let mut values = BTreeMap::new();
        trunc.walk(depth, &(), &|_, _| Some(()), &mut |w: &[Symbol], _| {
            if w.len() == depth {
                values.insert(w.to_vec(), f(w));
            }
            true
        });
        let sup = values.values().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(depth, values, None, Some(sup))
    }

    /// `φ(a, b) = log P_ab` on the positive entries of a stochastic matrix.
    pub fn markov_log(matrix: &[Vec<f64>]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (a, row) in matrix.iter().enumerate() {
            for (b, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    values.insert(vec![a, b], safe_ln(p));
                }
            }
        }
        Self::new(2, values, None, Some(0.0))
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn sup(&self) -> Option<f64> {
        self.sup
    }

    pub fn affine_rule(&self) -> Option<Affine> {
        self.affine
    }

    pub fn table(&self) -> &BTreeMap<Vec<Symbol>, f64> {
        &self.values
    }

    /// Largest first symbol mentioned by the table, plus one.
    pub(crate) fn table_extent(&self) -> Symbol {
        self.values.keys().map(|k| k[0] + 1).max().unwrap_or(0)
    }

    /// Value on a window of exactly `depth` symbols.
    pub fn eval(&self, window: &[Symbol]) -> Result<f64> {
        if window.len() != self.depth {
            return Err(domain(format!(
                "window of length {} given to a depth-{} potential",
                window.len(),
                self.depth
            )));
        }
        if let Some(v) = self.values.get(window) {
            return Ok(*v);
        }
        match self.affine {
            Some(af) => Ok(af.eval(window[0])),
            None => Err(Error::UndefinedPotential(window.to_vec())),
        }
    }

    /// Log-weight of the edge `a → b` for depth ≤ 2 (`φ(a)` or `φ(a, b)`).
    pub fn edge_value(&self, a: Symbol, b: Symbol) -> Result<f64> {
        match self.depth {
            1 => self.eval(&[a]),
            2 => self.eval(&[a, b]),
            d => Err(domain(format!("transfer operators need depth ≤ 2, got {d}"))),
        }
    }

    /// `Σ_i φ(σ^i x)` over a cylinder word, under the chosen boundary rule.
    ///
    /// `LeastSuccessor` needs the truncation that supplies the continuation.
    pub fn birkhoff_sum(&self, word: &[Symbol], boundary: BirkhoffBoundary, trunc: Option<&Truncation>) -> Result<f64> {
        let n = word.len();
        let k = self.depth;
        match boundary {
            BirkhoffBoundary::Interior => {
                if n < k {
                    return Ok(0.0);
                }
                word.windows(k).map(|w| self.eval(w)).sum()
            }
            BirkhoffBoundary::LeastSuccessor => {
                let trunc = trunc.ok_or_else(|| domain("least-successor boundary needs a truncation"))?;
                let mut ext = word.to_vec();
                while ext.len() < n + k - 1 {
                    let last = *ext.last().expect("nonempty");
                    let next = *trunc
                        .successors(last)
                        .first()
                        .ok_or_else(|| domain("symbol without successor"))?;
                    ext.push(next);
                }
                ext.windows(k).take(n).map(|w| self.eval(w)).sum()
            }
        }
    }

    /// `φ + c`.
    pub fn add_constant(&self, c: f64) -> Self {
        let values = self.values.iter().map(|(k, v)| (k.clone(), v + c)).collect();
        let affine = self.affine.map(|af| Affine {
            intercept: af.intercept + c,
            slope: af.slope,
        });
        Potential {
            depth: self.depth,
            values,
            affine,
            sup: self.sup.map(|s| s + c),
        }
    }

    /// `max |φ − ψ|` over the admissible `depth`-words of a truncation.
    pub fn sup_distance(&self, other: &Potential, trans: &TransitionStructure, truncation_index: usize) -> Result<f64> {
        let depth = self.depth.max(other.depth);
        let trunc = trans.truncation(truncation_index)?;
        let mut worst: Result<f64> = Ok(0.0);
        trunc.walk(depth, &(), &|_, _| Some(()), &mut |w: &[Symbol], _| {
            if w.len() == depth {
                if let Ok(acc) = &worst {
                    let d = self
                        .eval(&w[..self.depth])
                        .and_then(|x| other.eval(&w[..other.depth]).map(|y| (x - y).abs()));
                    worst = d.map(|d| acc.max(d));
                }
            }
            true
        });
        worst
    }
}

// ---- JSON form ------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PotentialJson {
    depth: usize,
    #[serde(default)]
    values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sup: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    affine: Option<Affine>,
}

fn parse_key(k: &str) -> Result<Vec<Symbol>> {
    k.split(',')
        .map(|s| {
            s.trim()
                .parse::<Symbol>()
                .map_err(|_| Error::Config(format!("potential key {k:?} is not a word")))
        })
        .collect()
}

impl TryFrom<PotentialJson> for Potential {
    type Error = Error;
    fn try_from(j: PotentialJson) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (k, v) in j.values {
            values.insert(parse_key(&k)?, v);
        }
        Potential::new(j.depth, values, j.affine, j.sup)
    }
}

impl From<Potential> for PotentialJson {
    fn from(p: Potential) -> Self {
        let values = p
            .values
            .into_iter()
            .map(|(k, v)| {
                let key: Vec<String> = k.iter().map(|a| a.to_string()).collect();
                (key.join(","), v)
            })
            .collect();
        PotentialJson {
            depth: p.depth,
            values,
            sup: p.sup,
            affine: p.affine,
        }
    }
}
