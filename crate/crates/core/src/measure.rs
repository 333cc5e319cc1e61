//! Shift-invariant sub-probability measures with exact cylinder masses.
//!
//! Every measure is a kernel (Bernoulli, stationary Markov, periodic orbit or
//! a finite mixture) times a scale. Masses are carried in log space, so
//! length-60 cylinders do not underflow.
//!
//! Sub-probability measures are first class: a vague limit that lost mass is
//! just a measure with `total_mass() < 1`, and [`ShiftMeasure::normalized`]
//! is the explicit `μ / ‖μ‖`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::logspace::{log_sum_exp, safe_ln, KahanSum};
use crate::potential::Potential;
use crate::shift::{is_admissible, Alphabet, Symbol, TransitionStructure, DEFAULT_BUDGET};

const PROB_TOL: f64 = 1e-9;

/// Symbol weights of a Bernoulli kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolWeights {
    /// `weights[i]` on symbol `offset + i`.
    Finite { offset: Symbol, weights: Vec<f64> },
    /// `(1 − r)·r^a` on every `a ∈ ℕ`.
    Geometric { ratio: f64 },
}

impl SymbolWeights {
    fn weight(&self, a: Symbol) -> f64 {
        match self {
            SymbolWeights::Finite { offset, weights } => {
                if a >= *offset && a - offset < weights.len() {
                    weights[a - offset]
                } else {
                    0.0
                }
            }
            SymbolWeights::Geometric { ratio } => (1.0 - ratio) * ratio.powi(a as i32),
        }
    }

    fn log_weight(&self, a: Symbol) -> f64 {
        match self {
            SymbolWeights::Geometric { ratio } => (1.0 - ratio).ln() + a as f64 * ratio.ln(),
            _ => safe_ln(self.weight(a)),
        }
    }
}

/// Stationary Markov kernel on states `{0, .., d−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    matrix: Vec<Vec<f64>>,
    stationary: Vec<f64>,
    log_matrix: Vec<Vec<f64>>,
    log_stationary: Vec<f64>,
}

impl MarkovKernel {
    pub fn new(matrix: Vec<Vec<f64>>, stationary: Option<Vec<f64>>) -> Result<Self> {
        let d = matrix.len();
        if d == 0 {
            return Err(domain("empty transition matrix"));
        }
        let mut matrix = matrix;
        for (a, row) in matrix.iter_mut().enumerate() {
            if row.len() != d {
                return Err(domain("transition matrix must be square"));
            }
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(domain(format!("row {a} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > PROB_TOL {
                return Err(domain(format!("row {a} sums to {s}, not 1")));
            }
            row.iter_mut().for_each(|p| *p /= s);
        }
        let stationary = match stationary {
            Some(pi) => {
                if pi.len() != d || pi.iter().any(|&x| !(x >= 0.0)) {
                    return Err(domain("stationary vector has wrong length or negative entries"));
                }
                let s: f64 = pi.iter().sum();
                if (s - 1.0).abs() > PROB_TOL {
                    return Err(domain(format!("stationary vector sums to {s}")));
                }
                let pi: Vec<f64> = pi.iter().map(|x| x / s).collect();
                let res = linalg::stationarity_residual(&matrix, &pi);
                if res > PROB_TOL {
                    return Err(domain(format!("πP ≠ π (residual {res:e})")));
                }
                pi
            }
            None => linalg::stationary(&matrix)?,
        };
        let log_matrix = matrix.iter().map(|r| r.iter().map(|&p| safe_ln(p)).collect()).collect();
        let log_stationary = stationary.iter().map(|&p| safe_ln(p)).collect();
        Ok(MarkovKernel {
            matrix,
            stationary,
            log_matrix,
            log_stationary,
        })
    }

    pub fn states(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub(crate) fn log_p(&self, a: Symbol, b: Symbol) -> f64 {
        if a < self.states() && b < self.states() {
            self.log_matrix[a][b]
        } else {
            f64::NEG_INFINITY
        }
    }

    pub(crate) fn log_pi(&self, a: Symbol) -> f64 {
        self.log_stationary.get(a).copied().unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    Bernoulli(SymbolWeights),
    Markov(MarkovKernel),
    /// Uniform average over the phases of a periodic point.
    Orbit(Vec<Symbol>),
    Mixture(Vec<(f64, ShiftMeasure)>),
}

/// A shift-invariant measure of total mass in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct ShiftMeasure {
    kernel: Kernel,
    scale: f64,
}

/// Incremental cylinder state used by depth-first scans.
#[derive(Debug, Clone)]
pub struct MassState(StateInner);

#[derive(Debug, Clone)]
enum StateInner {
    Empty,
    Product(f64),
    Chain { log: f64, last: Symbol },
    Orbit { phases: Vec<u32>, len: usize },
    Mixture(Vec<MassState>),
}

impl ShiftMeasure {
    fn build(kernel: Kernel, scale: f64) -> Result<Self> {
        let mu = ShiftMeasure { kernel, scale };
        let total = mu.total_mass();
        if !(total > 0.0) || total > 1.0 + 1e-12 || !scale.is_finite() {
            return Err(domain(format!("total mass {total} outside (0, 1]")));
        }
        Ok(mu)
    }

    pub fn bernoulli(weights: Vec<f64>) -> Result<Self> {
        Self::bernoulli_block(0, weights)
    }

    /// Bernoulli measure with `weights[i]` on symbol `offset + i`.
    pub fn bernoulli_block(offset: Symbol, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(domain("Bernoulli weights must be nonnegative and finite"));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > PROB_TOL {
            return Err(domain(format!("Bernoulli weights sum to {s}")));
        }
        let weights = weights.into_iter().map(|w| w / s).collect();
        Self::build(Kernel::Bernoulli(SymbolWeights::Finite { offset, weights }), 1.0)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::uniform_block(0, m)
    }

    /// Uniform Bernoulli on `{start, .., start + count − 1}`.
    pub fn uniform_block(start: Symbol, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(domain("uniform block needs at least one symbol"));
        }
        Self::bernoulli_block(start, vec![1.0 / count as f64; count])
    }

    /// Bernoulli with weights `(1 − r) r^a` on ℕ.
    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(domain(format!("geometric ratio must lie in (0,1), got {ratio}")));
        }
        Self::build(Kernel::Bernoulli(SymbolWeights::Geometric { ratio }), 1.0)
    }

    pub fn markov(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(Kernel::Markov(MarkovKernel::new(matrix, None)?), 1.0)
    }

    pub fn markov_with_stationary(matrix: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        Self::build(Kernel::Markov(MarkovKernel::new(matrix, Some(stationary))?), 1.0)
    }

    /// The invariant probability on the orbit of the periodic point `cycle^∞`.
    pub fn orbit(cycle: Vec<Symbol>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(domain("periodic orbit needs a nonempty cycle"));
        }
        Self::build(Kernel::Orbit(cycle), 1.0)
    }

    /// `Σ w_i μ_i`; the result must have mass at most 1.
    pub fn mixture(components: Vec<(f64, ShiftMeasure)>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("mixture needs at least one component"));
        }
        if components.iter().any(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(domain("mixture weights must be nonnegative"));
        }
        Self::build(Kernel::Mixture(components), 1.0)
    }

    /// `s · μ`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::build(self.kernel.clone(), self.scale * s)
    }

    /// `μ / ‖μ‖`.
    pub fn normalized(&self) -> Self {
        ShiftMeasure {
            kernel: self.kernel.clone(),
            scale: self.scale / self.total_mass(),
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }

    fn kernel_total(&self) -> f64 {
        match &self.kernel {
            Kernel::Mixture(parts) => parts.iter().map(|(w, m)| w * m.total_mass()).sum(),
            _ => 1.0,
        }
    }

    /// `‖μ‖ = μ(Σ)`.
    pub fn total_mass(&self) -> f64 {
        self.scale * self.kernel_total()
    }

    /// `Σ_{a<m} μ([a])` together with the exact mass on symbols `≥ m`.
    pub fn total_mass_at(&self, m: usize) -> Certified {
        let covered: KahanSum = (0..m).map(|a| self.symbol_mass(a)).collect();
        Certified {
            value: covered.value(),
            tail_bound: self.tail_mass(m),
        }
    }

    /// Mass of `{x : x_0 ≥ m}`.
    pub fn tail_mass(&self, m: usize) -> f64 {
        let k = match &self.kernel {
            Kernel::Bernoulli(SymbolWeights::Geometric { ratio }) => ratio.powi(m as i32),
            Kernel::Bernoulli(SymbolWeights::Finite { offset, weights }) => weights
                .iter()
                .enumerate()
                .filter(|(i, _)| offset + i >= m)
                .map(|(_, w)| w)
                .sum(),
            Kernel::Markov(mk) => mk.stationary.iter().skip(m).sum(),
            Kernel::Orbit(c) => c.iter().filter(|&&a| a >= m).count() as f64 / c.len() as f64,
            Kernel::Mixture(parts) => parts.iter().map(|(w, mu)| w * mu.tail_mass(m)).sum(),
        };
        self.scale * k
    }

    /// `μ([a])`.
    pub fn symbol_mass(&self, a: Symbol) -> f64 {
        self.cylinder_log_mass(&[a]).exp()
    }

    // ---- cylinder masses --------------------------------------------------

    pub fn start_state(&self) -> MassState {
        MassState(match &self.kernel {
            Kernel::Bernoulli(_) => StateInner::Product(0.0),
            Kernel::Markov(_) => StateInner::Empty,
            Kernel::Orbit(c) => StateInner::Orbit {
                phases: (0..c.len() as u32).collect(),
                len: 0,
            },
            Kernel::Mixture(parts) => StateInner::Mixture(parts.iter().map(|(_, m)| m.start_state()).collect()),
        })
    }

    /// State of the cylinder `[w a]` from the state of `[w]`.
    pub fn push_state(&self, state: &MassState, a: Symbol) -> MassState {
        MassState(match (&self.kernel, &state.0) {
            (Kernel::Bernoulli(sw), StateInner::Product(log)) => StateInner::Product(log + sw.log_weight(a)),
            (Kernel::Markov(mk), StateInner::Empty) => StateInner::Chain {
                log: mk.log_pi(a),
                last: a,
            },
            (Kernel::Markov(mk), StateInner::Chain { log, last }) => StateInner::Chain {
                log: log + mk.log_p(*last, a),
                last: a,
            },
            (Kernel::Orbit(c), StateInner::Orbit { phases, len }) => {
                let p = c.len();
                StateInner::Orbit {
                    phases: phases
                        .iter()
                        .copied()
                        .filter(|&j| c[(j as usize + len) % p] == a)
                        .collect(),
                    len: len + 1,
                }
            }
            (Kernel::Mixture(parts), StateInner::Mixture(children)) => StateInner::Mixture(
                parts
                    .iter()
                    .zip(children)
                    .map(|((_, m), s)| m.push_state(s, a))
                    .collect(),
            ),
            _ => unreachable!("state does not belong to this measure"),
        })
    }

    /// `log μ([w])` for the word whose state this is.
    pub fn state_log_mass(&self, state: &MassState) -> f64 {
        let k = match (&self.kernel, &state.0) {
            (_, StateInner::Empty) => 0.0,
            (Kernel::Bernoulli(_), StateInner::Product(log)) => *log,
            (Kernel::Markov(_), StateInner::Chain { log, .. }) => *log,
            (Kernel::Orbit(c), StateInner::Orbit { phases, .. }) => safe_ln(phases.len() as f64 / c.len() as f64),
            (Kernel::Mixture(parts), StateInner::Mixture(children)) => log_sum_exp(
                parts
                    .iter()
                    .zip(children)
                    .map(|((w, m), s)| safe_ln(*w) + m.state_log_mass(s)),
            ),
            _ => unreachable!("state does not belong to this measure"),
        };
        if k == f64::NEG_INFINITY {
            k
        } else {
            k + self.scale.ln()
        }
    }

    /// `log μ([w])`, `−∞` for null cylinders.
    pub fn cylinder_log_mass(&self, w: &[Symbol]) -> f64 {
        let mut st = self.start_state();
        for &a in w {
            st = self.push_state(&st, a);
        }
        if w.is_empty() {
            return safe_ln(self.total_mass());
        }
        self.state_log_mass(&st)
    }

    /// [`cylinder_log_mass`](Self::cylinder_log_mass) after checking the word
    /// against a transition structure.
    pub fn cylinder_log_mass_in(&self, w: &[Symbol], trans: &TransitionStructure) -> Result<f64> {
        if w.is_empty() {
            return Err(domain("empty word"));
        }
        if !is_admissible(w, trans)? {
            return Err(domain(format!("word {w:?} is not admissible")));
        }
        Ok(self.cylinder_log_mass(w))
    }

    pub fn cylinder_mass(&self, w: &[Symbol]) -> f64 {
        self.cylinder_log_mass(w).exp()
    }

    /// Checks that the measure only charges admissible cylinders.
    pub fn validate_support(&self, trans: &TransitionStructure) -> Result<()> {
        let alph = trans.alphabet();
        match &self.kernel {
            Kernel::Bernoulli(SymbolWeights::Geometric { .. }) => {
                if alph != Alphabet::Countable {
                    return Err(domain("geometric weights need a countable alphabet"));
                }
                let probe: Vec<Symbol> = (0..8).collect();
                for &a in &probe {
                    for &b in &probe {
                        if !trans.permits(a, b) {
                            return Err(domain(format!("Bernoulli measure charges forbidden {a}→{b}")));
                        }
                    }
                }
            }
            Kernel::Bernoulli(SymbolWeights::Finite { offset, weights }) => {
                let support: Vec<Symbol> = (0..weights.len())
                    .filter(|&i| weights[i] > 0.0)
                    .map(|i| i + offset)
                    .collect();
                for &a in &support {
                    for &b in &support {
                        if !trans.permits(a, b) {
                            return Err(domain(format!("Bernoulli measure charges forbidden {a}→{b}")));
                        }
                    }
                }
            }
            Kernel::Markov(mk) => {
                for a in 0..mk.states() {
                    for b in 0..mk.states() {
                        if mk.matrix[a][b] > 0.0 && mk.stationary[a] > 0.0 && !trans.permits(a, b) {
                            return Err(domain(format!("Markov kernel uses forbidden {a}→{b}")));
                        }
                    }
                }
            }
            Kernel::Orbit(c) => {
                let p = c.len();
                for i in 0..p {
                    if !trans.permits(c[i], c[(i + 1) % p]) {
                        return Err(domain("periodic orbit is not admissible"));
                    }
                }
            }
            Kernel::Mixture(parts) => {
                for (_, m) in parts {
                    m.validate_support(trans)?;
                }
            }
        }
        Ok(())
    }

    /// The kernel as a finite Markov chain when it is one (Bernoulli with
    /// finite support, Markov, or an orbit through distinct symbols).
    pub fn as_markov(&self) -> Option<MarkovKernel> {
        match &self.kernel {
            Kernel::Markov(mk) => Some(mk.clone()),
            Kernel::Bernoulli(SymbolWeights::Finite { offset, weights }) => {
                let d = offset + weights.len();
                let row: Vec<f64> = (0..d).map(|a| self.kernel_weight(a)).collect();
                MarkovKernel::new(vec![row.clone(); d], Some(row)).ok()
            }
            Kernel::Orbit(c) => {
                let mut seen = c.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != c.len() {
                    return None;
                }
                let d = seen.last().copied()? + 1;
                let mut m = vec![vec![0.0; d]; d];
                let mut pi = vec![0.0; d];
                for i in 0..c.len() {
                    m[c[i]][c[(i + 1) % c.len()]] = 1.0;
                    pi[c[i]] = 1.0 / c.len() as f64;
                }
                // states off the orbit are null; give them a self-loop so rows stay stochastic
                for a in 0..d {
                    if pi[a] == 0.0 {
                        m[a][a] = 1.0;
                    }
                }
                MarkovKernel::new(m, Some(pi)).ok()
            }
            _ => None,
        }
    }

    fn kernel_weight(&self, a: Symbol) -> f64 {
        match &self.kernel {
            Kernel::Bernoulli(sw) => sw.weight(a),
            _ => self.symbol_mass(a) / self.scale,
        }
    }

    // ---- integrals ----------------------------------------------------------

    /// `∫ φ dμ` for a depth-1 potential, summed over the whole alphabet.
    ///
    /// Finite-support kernels are summed exactly; geometric tails are closed
    /// form when `φ` is affine beyond its table. Anything else is rejected.
    pub fn integrate_symbol_fn(&self, phi: &Potential) -> Result<Certified> {
        if phi.depth() != 1 {
            return Err(domain("symbol integrals need a depth-1 potential"));
        }
        let k = match &self.kernel {
            Kernel::Bernoulli(SymbolWeights::Finite { offset, weights }) => {
                let mut acc = KahanSum::default();
                for (i, &w) in weights.iter().enumerate() {
                    if w > 0.0 {
                        acc.add(w * phi.eval(&[offset + i])?);
                    }
                }
                Certified::exact(acc.value())
            }
            Kernel::Bernoulli(SymbolWeights::Geometric { ratio }) => {
                let r = *ratio;
                let cut = phi.table_extent();
                let mut acc = KahanSum::default();
                for a in 0..cut {
                    acc.add((1.0 - r) * r.powi(a as i32) * phi.eval(&[a])?);
                }
                let af = phi
                    .affine_rule()
                    .ok_or_else(|| Error::NotIntegrable("no certified tail beyond the potential's table".into()))?;
                // Σ_{a≥C} (c + s a)(1−r) r^a = r^C (c + s C) + s r^{C+1} / (1 − r)
                let rc = r.powi(cut as i32);
                acc.add(rc * (af.intercept + af.slope * cut as f64) + af.slope * rc * r / (1.0 - r));
                Certified::exact(acc.value())
            }
            Kernel::Markov(mk) => {
                let mut acc = KahanSum::default();
                for (a, &p) in mk.stationary.iter().enumerate() {
                    if p > 0.0 {
                        acc.add(p * phi.eval(&[a])?);
                    }
                }
                Certified::exact(acc.value())
            }
            Kernel::Orbit(c) => {
                let mut acc = KahanSum::default();
                for &a in c {
                    acc.add(phi.eval(&[a])?);
                }
                Certified::exact(acc.value() / c.len() as f64)
            }
            Kernel::Mixture(parts) => {
                let mut value = KahanSum::default();
                let mut tail = 0.0;
                for (w, m) in parts {
                    let c = m.integrate_symbol_fn(phi)?;
                    value.add(w * c.value);
                    tail += w * c.tail_bound;
                }
                Certified {
                    value: value.value(),
                    tail_bound: tail,
                }
            }
        };
        Ok(Certified {
            value: self.scale * k.value,
            tail_bound: self.scale * k.tail_bound,
        })
    }

    /// `∫ φ dμ` over the admissible `depth`-cylinders of one truncation; the
    /// uncovered mass is charged at `sup |φ|` in the tail bound.
    pub fn integrate_cylinders(
        &self,
        phi: &Potential,
        trans: &TransitionStructure,
        truncation_index: usize,
    ) -> Result<Certified> {
        let trunc = trans.truncation(truncation_index)?;
        let depth = phi.depth();
        let count = trunc.count_words(depth);
        if count > DEFAULT_BUDGET {
            return Err(Error::Budget {
                count,
                budget: DEFAULT_BUDGET,
            });
        }
        let mut acc = KahanSum::default();
        let mut covered = KahanSum::default();
        let mut failure = None;
        trunc.walk(
            depth,
            &self.start_state(),
            &|s, a| Some(self.push_state(s, a)),
            &mut |w: &[Symbol], s| {
                let lm = self.state_log_mass(s);
                if lm == f64::NEG_INFINITY {
                    return false;
                }
                if w.len() == depth {
                    let m = lm.exp();
                    match phi.eval(w) {
                        Ok(v) => acc.add(m * v),
                        Err(e) => failure = Some(e),
                    }
                    covered.add(m);
                }
                true
            },
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let deficit = (self.total_mass() - covered.value()).max(0.0);
        let tail_bound = if deficit <= 1e-14 {
            0.0
        } else {
            let table_max = phi.table().values().map(|v| v.abs()).fold(0.0, f64::max);
            match phi.affine_rule() {
                Some(af) if af.slope != 0.0 => {
                    return Err(Error::NotIntegrable(
                        "unbounded potential with mass outside the truncation".into(),
                    ))
                }
                Some(af) => deficit * table_max.max(af.intercept.abs()),
                None => deficit * table_max,
            }
        };
        Ok(Certified {
            value: acc.value(),
            tail_bound,
        })
    }
}

/// A value with a bound on what the truncation left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certified {
    pub value: f64,
    pub tail_bound: f64,
}

impl Certified {
    pub fn exact(value: f64) -> Self {
        Certified { value, tail_bound: 0.0 }
    }
}

/// A nonnegative depth-1 function with finite sublevel sets, `F(x) = f(x_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Potential", into = "Potential")]
pub struct ProperWeight(Potential);

impl ProperWeight {
    /// Properness on a countable alphabet requires an increasing affine rule
    /// beyond the table; on finite alphabets any nonnegative table will do.
    pub fn new(f: Potential, alphabet: Alphabet) -> Result<Self> {
        let w = Self::try_from(f)?;
        if alphabet == Alphabet::Countable && !w.0.affine_rule().is_some_and(|af| af.slope > 0.0) {
            return Err(domain(
                "a proper weight on a countable alphabet must grow without bound",
            ));
        }
        Ok(w)
    }

    /// `f(a) = a`.
    pub fn identity() -> Self {
        ProperWeight(Potential::affine(0.0, 1.0).expect("valid"))
    }

    pub fn potential(&self) -> &Potential {
        &self.0
    }
}

impl TryFrom<Potential> for ProperWeight {
    type Error = Error;
    fn try_from(f: Potential) -> Result<Self> {
        if f.depth() != 1 {
            return Err(domain("proper weights are depth-1"));
        }
        if f.table().values().any(|&v| v < 0.0) {
            return Err(domain("proper weights are nonnegative"));
        }
        if let Some(af) = f.affine_rule() {
            if af.intercept < 0.0 || af.slope < 0.0 {
                return Err(domain("proper weights are nonnegative and nondecreasing in the tail"));
            }
        }
        Ok(ProperWeight(f))
    }
}

impl From<ProperWeight> for Potential {
    fn from(w: ProperWeight) -> Self {
        w.0
    }
}

// ---- vague topology ---------------------------------------------------------

/// `max |μ([w]) − ν([w])|` over admissible words of length `1..=depth` in a
/// truncation.
pub fn vague_gap(
    mu: &ShiftMeasure,
    nu: &ShiftMeasure,
    depth: usize,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<f64> {
    let trunc = trans.truncation(truncation_index)?;
    let count: u128 = (1..=depth).map(|n| trunc.count_words(n)).fold(0, u128::saturating_add);
    if count > DEFAULT_BUDGET {
        return Err(Error::Budget {
            count,
            budget: DEFAULT_BUDGET,
        });
    }
    let mut gap = 0.0f64;
    trunc.walk(
        depth,
        &(mu.start_state(), nu.start_state()),
        &|(s, t), a| Some((mu.push_state(s, a), nu.push_state(t, a))),
        &mut |_, (s, t)| {
            let lm = mu.state_log_mass(s);
            let ln = nu.state_log_mass(t);
            if lm == f64::NEG_INFINITY && ln == f64::NEG_INFINITY {
                return false;
            }
            gap = gap.max((lm.exp() - ln.exp()).abs());
            true
        },
    );
    Ok(gap)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Tightness {
    /// Every `∫F dμ_k ≤ C`: no vague limit of the sequence loses mass.
    Tight,
    BoundViolated {
        index: usize,
        integral: f64,
    },
    /// Some integral could not be certified and no violation was seen.
    Inconclusive {
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub verdict: Tightness,
    /// `∫F dμ_k` per index, `None` where the tail could not be certified.
    pub integrals: Vec<Option<f64>>,
}

pub fn tightness_verdict(seq: &[ShiftMeasure], f: &ProperWeight, bound: f64) -> Result<TightnessReport> {
    if seq.is_empty() {
        return Err(domain("tightness needs a nonempty sequence"));
    }
    let integrals: Vec<Option<f64>> = seq
        .iter()
        .map(|mu| {
            mu.integrate_symbol_fn(f.potential())
                .ok()
                .map(|c| c.value + c.tail_bound)
        })
        .collect();
    let verdict = if let Some((index, v)) = integrals
        .iter()
        .enumerate()
        .find_map(|(i, v)| v.filter(|&x| x > bound).map(|x| (i, x)))
    {
        Tightness::BoundViolated { index, integral: v }
    } else if let Some(index) = integrals.iter().position(Option::is_none) {
        Tightness::Inconclusive { index }
    } else {
        Tightness::Tight
    };
    Ok(TightnessReport { verdict, integrals })
}

// ---- Kac first returns --------------------------------------------------------

/// First-return masses `μ(A_n)` for `A_n = {x_0 ∈ K, x_n ∈ K, x_i ∉ K (0<i<n)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KacReport {
    /// `μ(A_n)` for `n = 1..=n_max` (entry `n − 1`).
    pub masses: Vec<f64>,
    pub mass_of_k: f64,
    /// `Σ_{n ≤ n_max} n μ(A_n)`.
    pub weighted_sum: f64,
    /// Upper bound on `Σ_{n > n_max} n μ(A_n)`; infinite when the chain can
    /// avoid `K` forever.
    pub tail_bound: f64,
}

impl KacReport {
    pub fn weighted_partial_sums(&self) -> Vec<f64> {
        let mut acc = KahanSum::default();
        self.masses
            .iter()
            .enumerate()
            .map(|(i, m)| {
                acc.add((i + 1) as f64 * m);
                acc.value()
            })
            .collect()
    }
}

/// Exact first-return decomposition by taboo-matrix propagation.
pub fn kac_return_masses(mu: &ShiftMeasure, k_set: &[Symbol], n_max: usize) -> Result<KacReport> {
    let mk = mu
        .as_markov()
        .ok_or_else(|| domain("Kac masses need a finite Markov kernel"))?;
    let d = mk.states();
    let in_k: Vec<bool> = (0..d).map(|a| k_set.contains(&a)).collect();
    let scale = mu.scale;
    // w holds μ(x_0 ∈ K, x_1..x_j ∉ K, x_j = b) for b ∉ K
    let mut w: Vec<f64> = (0..d)
        .map(|a| if in_k[a] { scale * mk.stationary[a] } else { 0.0 })
        .collect();
    let mass_of_k: f64 = w.iter().sum();
    if !(mass_of_k > 0.0) {
        return Err(domain("μ(K) = 0"));
    }
    let mut masses = Vec::with_capacity(n_max);
    let mut weighted = KahanSum::default();
    for n in 1..=n_max {
        let mut next = vec![0.0; d];
        for a in 0..d {
            if w[a] > 0.0 {
                for b in 0..d {
                    next[b] += w[a] * mk.matrix[a][b];
                }
            }
        }
        let ret: f64 = (0..d).filter(|&b| in_k[b]).map(|b| next[b]).sum();
        masses.push(ret);
        weighted.add(n as f64 * ret);
        w = (0..d).map(|b| if in_k[b] { 0.0 } else { next[b] }).collect();
    }
    let survival: f64 = w.iter().sum();
    let tail_bound = if survival == 0.0 {
        0.0
    } else {
        // s_{j+L} ≤ q s_j with q the max row sum of Q^L, Q = P on K^c
        let outside: Vec<Symbol> = (0..d).filter(|&a| !in_k[a]).collect();
        let mut v: Vec<f64> = vec![1.0; d];
        let mut found = None;
        for l in 1..=4 * d + 4 {
            v = (0..d)
                .map(|a| {
                    if in_k[a] {
                        0.0
                    } else {
                        outside.iter().map(|&b| mk.matrix[a][b] * v[b]).sum()
                    }
                })
                .collect();
            let q = outside.iter().map(|&a| v[a]).fold(0.0, f64::max);
            if q < 1.0 {
                found = Some((l, q));
                break;
            }
        }
        match found {
            Some((l, q)) => n_max as f64 * survival + l as f64 * survival / (1.0 - q),
            None => f64::INFINITY,
        }
    };
    Ok(KacReport {
        masses,
        mass_of_k,
        weighted_sum: weighted.value(),
        tail_bound,
    })
}

// ---- JSON form ------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum WeightsJson {
    List(Vec<f64>),
    Geometric { geometric: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ComponentJson {
    weight: f64,
    measure: ShiftMeasure,
}

fn one() -> f64 {
    1.0
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MeasureJson {
    Bernoulli {
        weights: WeightsJson,
        #[serde(default, skip_serializing_if = "is_zero")]
        offset: usize,
        #[serde(default = "one")]
        mass: f64,
    },
    Markov {
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stationary: Option<Vec<f64>>,
        #[serde(default = "one")]
        mass: f64,
    },
    Orbit {
        cycle: Vec<Symbol>,
        #[serde(default = "one")]
        mass: f64,
    },
    Mixture {
        components: Vec<ComponentJson>,
        #[serde(default = "one")]
        mass: f64,
    },
}

impl TryFrom<MeasureJson> for ShiftMeasure {
    type Error = Error;
    fn try_from(j: MeasureJson) -> Result<Self> {
        // `mass` is the total mass of the measure
        let (mu, mass) = match j {
            MeasureJson::Bernoulli { weights, offset, mass } => (
                match weights {
                    WeightsJson::List(w) => ShiftMeasure::bernoulli_block(offset, w)?,
                    WeightsJson::Geometric { geometric } => ShiftMeasure::geometric(geometric)?,
                },
                mass,
            ),
            MeasureJson::Markov {
                matrix,
                stationary,
                mass,
            } => (
                match stationary {
                    Some(pi) => ShiftMeasure::markov_with_stationary(matrix, pi)?,
                    None => ShiftMeasure::markov(matrix)?,
                },
                mass,
            ),
            MeasureJson::Orbit { cycle, mass } => (ShiftMeasure::orbit(cycle)?, mass),
            MeasureJson::Mixture { components, mass } => (
                ShiftMeasure::mixture(components.into_iter().map(|c| (c.weight, c.measure)).collect())?,
                mass,
            ),
        };
        if !(mass > 0.0 && mass <= 1.0 + 1e-12) {
            return Err(domain(format!("mass {mass} outside (0, 1]")));
        }
        mu.scaled(mass / mu.total_mass())
    }
}

impl From<ShiftMeasure> for MeasureJson {
    fn from(mu: ShiftMeasure) -> Self {
        let mass = mu.total_mass();
        match mu.kernel {
            Kernel::Bernoulli(SymbolWeights::Finite { offset, weights }) => MeasureJson::Bernoulli {
                weights: WeightsJson::List(weights),
                offset,
                mass,
            },
            Kernel::Bernoulli(SymbolWeights::Geometric { ratio }) => MeasureJson::Bernoulli {
                weights: WeightsJson::Geometric { geometric: ratio },
                offset: 0,
                mass,
            },
            Kernel::Markov(mk) => MeasureJson::Markov {
                matrix: mk.matrix,
                stationary: Some(mk.stationary),
                mass,
            },
            Kernel::Orbit(cycle) => MeasureJson::Orbit { cycle, mass },
            Kernel::Mixture(parts) => MeasureJson::Mixture {
                components: parts
                    .into_iter()
                    .map(|(weight, measure)| ComponentJson { weight, measure })
                    .collect(),
                mass,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::enumerate_cylinders;

    fn parry_golden() -> ShiftMeasure {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        ShiftMeasure::markov(vec![vec![1.0 / g, 1.0 / (g * g)], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn cylinder_mass_examples() {
        let u = ShiftMeasure::uniform(2).unwrap();
        assert!((u.cylinder_log_mass(&[0, 1, 1, 0]) - (1.0f64 / 16.0).ln()).abs() < 1e-15);
        assert_eq!(parry_golden().cylinder_log_mass(&[1, 1]), f64::NEG_INFINITY);
        let orb = ShiftMeasure::orbit(vec![0, 1]).unwrap();
        assert!((orb.cylinder_log_mass(&[0, 1, 0]) - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(orb.cylinder_log_mass(&[0, 0]), f64::NEG_INFINITY);
    }

    #[test]
    fn inadmissible_word_is_a_domain_error() {
        let gm = TransitionStructure::golden_mean();
        assert!(parry_golden().cylinder_log_mass_in(&[1, 1], &gm).is_err());
        assert!(parry_golden().cylinder_log_mass_in(&[0, 1], &gm).is_ok());
    }

    #[test]
    fn total_mass_examples() {
        assert_eq!(parry_golden().total_mass(), 1.0);
        let nu = ShiftMeasure::uniform(2).unwrap();
        let mix = ShiftMeasure::mixture(vec![(0.7, nu)]).unwrap();
        assert!((mix.total_mass() - 0.7).abs() < 1e-15);
        let geo = ShiftMeasure::geometric(0.5).unwrap();
        let c = geo.total_mass_at(60);
        assert!((c.value - 1.0).abs() < 1e-12);
        assert!((c.tail_bound - 0.5f64.powi(60)).abs() < 1e-30);
    }

    #[test]
    fn mass_above_one_is_rejected() {
        let nu = ShiftMeasure::uniform(2).unwrap();
        assert!(ShiftMeasure::mixture(vec![(0.7, nu.clone()), (0.7, nu)]).is_err());
        assert!(ShiftMeasure::bernoulli(vec![0.5, 0.6]).is_err());
        assert!(ShiftMeasure::markov(vec![vec![0.5, 0.4], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn vague_gap_examples() {
        let full = TransitionStructure::full(2);
        let u = ShiftMeasure::uniform(2).unwrap();
        assert_eq!(vague_gap(&u, &u, 4, &full, 0).unwrap(), 0.0);
        let b = ShiftMeasure::bernoulli(vec![0.6, 0.4]).unwrap();
        assert!((vague_gap(&u, &b, 1, &full, 0).unwrap() - 0.1).abs() < 1e-15);
        let nat = TransitionStructure::full_countable(vec![5]).unwrap();
        let nu = ShiftMeasure::uniform(2).unwrap();
        let limit = ShiftMeasure::mixture(vec![(0.6, nu.clone())]).unwrap();
        let mu = ShiftMeasure::mixture(vec![(0.6, nu), (0.4, ShiftMeasure::orbit(vec![9]).unwrap())]).unwrap();
        assert!(vague_gap(&mu, &limit, 3, &nat, 0).unwrap() < 1e-15);
    }

    #[test]
    fn tightness_examples() {
        let id = ProperWeight::identity();
        let u = ShiftMeasure::uniform(2).unwrap();
        let r = tightness_verdict(&vec![u; 5], &id, 1.0).unwrap();
        assert_eq!(r.verdict, Tightness::Tight);
        assert_eq!(r.integrals[0], Some(0.5));

        let orbits: Vec<_> = (0..=20).map(|k| ShiftMeasure::orbit(vec![k]).unwrap()).collect();
        let r = tightness_verdict(&orbits, &id, 10.0).unwrap();
        assert_eq!(
            r.verdict,
            Tightness::BoundViolated {
                index: 11,
                integral: 11.0
            }
        );

        // mean of the geometric law is r/(1-r)
        let geos: Vec<_> = [0.5, 0.8, 0.9, 0.95, 0.99]
            .iter()
            .map(|&r| ShiftMeasure::geometric(r).unwrap())
            .collect();
        let r = tightness_verdict(&geos, &id, 10.0).unwrap();
        assert!(matches!(r.verdict, Tightness::BoundViolated { index: 3, .. }));
        assert!((r.integrals[1].unwrap() - 4.0).abs() < 1e-9);

        // a table-only weight cannot certify a geometric tail
        let table = ProperWeight::try_from(Potential::depth1(&[0.0, 1.0]).unwrap()).unwrap();
        let r = tightness_verdict(&geos[..1], &table, 10.0).unwrap();
        assert_eq!(r.verdict, Tightness::Inconclusive { index: 0 });
    }

    #[test]
    fn kac_edge_cases() {
        let u = ShiftMeasure::uniform(2).unwrap();
        let all = kac_return_masses(&u, &[0, 1], 5).unwrap();
        assert_eq!(all.masses, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(all.tail_bound, 0.0);
        assert!(kac_return_masses(&u, &[7], 5).is_err());
        let geo = ShiftMeasure::geometric(0.5).unwrap();
        assert!(kac_return_masses(&geo, &[0], 5).is_err());
    }

    #[test]
    fn kac_uniform_geometric_law() {
        // first return to 0 at time n: 0 1^{n−1} 0, mass (1/2)^{n+1}
        let u = ShiftMeasure::uniform(2).unwrap();
        let r = kac_return_masses(&u, &[0], 60).unwrap();
        for (i, m) in r.masses.iter().enumerate() {
            assert!((m - 0.5f64.powi(i as i32 + 2)).abs() < 1e-16);
        }
        assert!((r.weighted_sum - 1.0).abs() < 1e-10);
        assert!(r.weighted_sum + r.tail_bound >= 1.0 - 1e-12);
    }

    #[test]
    fn json_schema() {
        let doc = r#"{"kind":"mixture","components":[{"weight":0.6,"measure":{"kind":"bernoulli","weights":[0.5,0.5]}},{"weight":0.4,"measure":{"kind":"orbit","cycle":[7]}}],"mass":1.0}"#;
        let mu: ShiftMeasure = serde_json::from_str(doc).unwrap();
        assert!((mu.cylinder_mass(&[7, 7]) - 0.4).abs() < 1e-15);
        let geo: ShiftMeasure =
            serde_json::from_str(r#"{"kind":"bernoulli","weights":{"geometric":0.5},"mass":0.5}"#).unwrap();
        assert!((geo.total_mass() - 0.5).abs() < 1e-15);
        let mk: ShiftMeasure = serde_json::from_str(r#"{"kind":"markov","matrix":[[0.5,0.5],[1.0,0.0]]}"#).unwrap();
        let back: ShiftMeasure = serde_json::from_str(&serde_json::to_string(&mk).unwrap()).unwrap();
        assert!((back.cylinder_mass(&[0, 1]) - mk.cylinder_mass(&[0, 1])).abs() < 1e-15);
    }

    #[test]
    fn consistency_on_small_words() {
        let gm = TransitionStructure::golden_mean();
        let mu = parry_golden();
        for n in 1..=6 {
            for w in enumerate_cylinders(&gm, 0, n).unwrap() {
                let w = w.symbols().to_vec();
                let m = mu.cylinder_mass(&w);
                let right: f64 = [0, 1]
                    .iter()
                    .map(|&a| mu.cylinder_mass(&[w.clone(), vec![a]].concat()))
                    .sum();
                let left: f64 = [0, 1]
                    .iter()
                    .map(|&a| mu.cylinder_mass(&[vec![a], w.clone()].concat()))
                    .sum();
                assert!((right - m).abs() <= 1e-12 * m.max(1e-300));
                assert!((left - m).abs() <= 1e-12 * m.max(1e-300));
            }
        }
    }
}
