//! Exact and estimated measure-theoretic entropy, in nats.
//!
//! * [`exact_entropy`] / [`markov_entropy`]: closed forms.
//! * [`plugin_entropy`]: `H_n / n` over the length-`n` cylinders.
//! * [`katok_estimate`]: exact minimal cylinder covers, i.e. the number of
//!   `(N, θ^k)` dynamical balls needed to cover mass `1 − δ`.
//! * [`smb_deviation`], [`birkhoff_concentration`]: seeded orbit sampling.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::logspace::{eta, KahanSum};
use crate::measure::{Kernel, MarkovKernel, ShiftMeasure, SymbolWeights};
use crate::potential::{BirkhoffBoundary, Potential};
use crate::shift::{Symbol, TransitionStructure, DEFAULT_BUDGET};

/// Entropy of `μ / ‖μ‖` from the kernel, without enumeration.
///
/// Mixtures use affinity of entropy in the (normalized) weights.
pub fn exact_entropy(mu: &ShiftMeasure) -> Result<f64> {
    Ok(match mu.kernel() {
        Kernel::Bernoulli(SymbolWeights::Finite { weights, .. }) => weights.iter().map(|&w| eta(w)).sum(),
        Kernel::Bernoulli(SymbolWeights::Geometric { ratio }) => {
            let r = *ratio;
            -(1.0 - r).ln() - r * r.ln() / (1.0 - r)
        }
        Kernel::Markov(mk) => chain_entropy(mk),
        Kernel::Orbit(_) => 0.0,
        Kernel::Mixture(parts) => {
            let total = mu.total_mass() / mu.scale();
            let mut acc = KahanSum::default();
            for (w, m) in parts {
                if *w > 0.0 {
                    acc.add(w * m.total_mass() / total * exact_entropy(m)?);
                }
            }
            acc.value()
        }
    })
}

fn chain_entropy(mk: &MarkovKernel) -> f64 {
    let mut acc = KahanSum::default();
    for (a, row) in mk.matrix().iter().enumerate() {
        let pa = mk.stationary()[a];
        if pa > 0.0 {
            acc.add(pa * row.iter().map(|&p| eta(p)).sum::<f64>());
        }
    }
    acc.value()
}

/// `−Σ_a π_a Σ_b P_ab log P_ab`.
pub fn markov_entropy(mu: &ShiftMeasure) -> Result<f64> {
    if let Kernel::Orbit(_) = mu.kernel() {
        return Ok(0.0);
    }
    let mk = mu
        .as_markov()
        .ok_or_else(|| domain("measure has no finite Markov kernel"))?;
    Ok(chain_entropy(&mk))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    ExactMarkov,
    Plugin,
    Katok,
}

/// How the minimal-cover count is turned into a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KatokNormalization {
    /// `log(count) / (N + k)`: the ball `B_N(x, θ^k)` is the `(N + k)`-step
    /// ball of radius 1.
    #[default]
    Horizon,
    /// `log(count) / N`.
    Steps,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KatokOptions {
    pub normalization: KatokNormalization,
    /// Cover `(1 − δ)·‖μ‖` instead of `1 − δ`.
    pub relative_mass: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EstimateParams {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    /// Exact minimal-cover count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    /// `H_1, .., H_n`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub block_entropies: Vec<f64>,
    /// `H_n − H_{n−1}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub increment: Option<f64>,
    /// `1 −` the mass covered by the enumerated cylinders.
    pub mass_deficit: f64,
    /// `log(count) / N`, reported next to the horizon-normalized value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_step_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub estimator: Estimator,
    pub value: f64,
    pub params: EstimateParams,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl EntropyEstimate {
    pub fn exact(mu: &ShiftMeasure) -> Result<Self> {
        Ok(EntropyEstimate {
            estimator: Estimator::Exact,
            value: exact_entropy(mu)?,
            params: EstimateParams::default(),
            diagnostics: Diagnostics {
                mass_deficit: 1.0 - mu.total_mass(),
                ..Default::default()
            },
            seed: None,
        })
    }
}

fn check_budget(count: u128) -> Result<()> {
    if count > DEFAULT_BUDGET {
        return Err(Error::Budget {
            count,
            budget: DEFAULT_BUDGET,
        });
    }
    Ok(())
}

/// Per-length `(Σ η(μ[w]), Σ μ[w])` for words of length `1..=n`, summed in
/// lexicographic order of first symbols.
fn block_sums(
    mu: &ShiftMeasure,
    n: usize,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<Vec<(f64, f64)>> {
    let trunc = trans.truncation(truncation_index)?;
    check_budget((1..=n).map(|j| trunc.count_words(j)).fold(0, u128::saturating_add))?;
    let per_root: Vec<Vec<(KahanSum, KahanSum)>> = (0..trunc.size())
        .into_par_iter()
        .map(|a| {
            let mut acc = vec![(KahanSum::default(), KahanSum::default()); n];
            trunc.walk_rooted(
                a,
                n,
                &mu.start_state(),
                &|s, b| Some(mu.push_state(s, b)),
                &mut |w: &[Symbol], s| {
                    let lm = mu.state_log_mass(s);
                    if lm == f64::NEG_INFINITY {
                        return false;
                    }
                    let m = lm.exp();
                    let slot = &mut acc[w.len() - 1];
                    slot.0.add(-m * lm);
                    slot.1.add(m);
                    true
                },
            );
            acc
        })
        .collect();
    Ok((0..n)
        .map(|j| {
            let mut h = KahanSum::default();
            let mut m = KahanSum::default();
            for root in &per_root {
                h.add(root[j].0.value());
                m.add(root[j].1.value());
            }
            (h.value(), m.value())
        })
        .collect())
}

/// `H_n / n` with `H_n = −Σ_{|w|=n} μ[w] log μ[w]`.
pub fn plugin_entropy(
    mu: &ShiftMeasure,
    n: usize,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(domain("plug-in entropy needs n ≥ 1"));
    }
    let sums = block_sums(mu, n, trans, truncation_index)?;
    let block_entropies: Vec<f64> = sums.iter().map(|s| s.0).collect();
    let covered = sums[n - 1].1;
    let increment = if n > 1 {
        Some(block_entropies[n - 1] - block_entropies[n - 2])
    } else {
        Some(block_entropies[0])
    };
    Ok(EntropyEstimate {
        estimator: Estimator::Plugin,
        value: block_entropies[n - 1] / n as f64,
        params: EstimateParams {
            n,
            truncation_index: Some(truncation_index),
            ..Default::default()
        },
        diagnostics: Diagnostics {
            block_entropies,
            increment,
            mass_deficit: (1.0 - covered).max(0.0),
            ..Default::default()
        },
        seed: None,
    })
}

/// Minimal number of length-`len` cylinders covering `target` mass: the
/// heaviest ones first, since equal-length cylinders are disjoint.
fn minimal_cover(
    mu: &ShiftMeasure,
    len: usize,
    target: f64,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<(u64, f64)> {
    let trunc = trans.truncation(truncation_index)?;
    check_budget(trunc.count_words(len))?;
    let per_root: Vec<Vec<f64>> = (0..trunc.size())
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            trunc.walk_rooted(
                a,
                len,
                &mu.start_state(),
                &|s, b| Some(mu.push_state(s, b)),
                &mut |w: &[Symbol], s| {
                    let lm = mu.state_log_mass(s);
                    if lm == f64::NEG_INFINITY {
                        return false;
                    }
                    if w.len() == len {
                        out.push(lm.exp());
                    }
                    true
                },
            );
            out
        })
        .collect();
    let mut masses: Vec<f64> = per_root.into_iter().flatten().collect();
    let covered: KahanSum = masses.iter().copied().collect();
    let covered = covered.value();
    if covered < target * (1.0 - 1e-12) {
        return Err(Error::InsufficientMass {
            mass: covered,
            required: target,
        });
    }
    // stable: equal masses keep lexicographic order
    masses.sort_by(|x, y| y.total_cmp(x));
    let mut acc = KahanSum::default();
    for (i, m) in masses.iter().enumerate() {
        acc.add(*m);
        if acc.value() >= target * (1.0 - 1e-12) {
            return Ok((i as u64 + 1, covered));
        }
    }
    Ok((masses.len() as u64, covered))
}

/// Katok estimate with the default options.
pub fn katok_estimate(
    mu: &ShiftMeasure,
    n: usize,
    k: usize,
    delta: f64,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<EntropyEstimate> {
    katok_estimate_with(mu, n, k, delta, trans, truncation_index, KatokOptions::default())
}

/// `N_μ(N, θ^k; δ)` computed exactly on the length-`(N + k + 1)` cylinders.
pub fn katok_estimate_with(
    mu: &ShiftMeasure,
    n: usize,
    k: usize,
    delta: f64,
    trans: &TransitionStructure,
    truncation_index: usize,
    opts: KatokOptions,
) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(domain("Katok estimate needs N ≥ 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("δ must lie in (0,1), got {delta}")));
    }
    let total = mu.total_mass();
    let target = if opts.relative_mass {
        (1.0 - delta) * total
    } else {
        1.0 - delta
    };
    if total < target * (1.0 - 1e-12) {
        return Err(Error::InsufficientMass {
            mass: total,
            required: target,
        });
    }
    let (count, covered) = minimal_cover(mu, n + k + 1, target, trans, truncation_index)?;
    let log_count = (count as f64).ln();
    let per_step = log_count / n as f64;
    let value = match opts.normalization {
        KatokNormalization::Horizon => log_count / (n + k) as f64,
        KatokNormalization::Steps => per_step,
    };
    Ok(EntropyEstimate {
        estimator: Estimator::Katok,
        value,
        params: EstimateParams {
            n,
            k: Some(k),
            delta: Some(delta),
            truncation_index: Some(truncation_index),
        },
        diagnostics: Diagnostics {
            count: Some(count),
            mass_deficit: (1.0 - covered).max(0.0),
            per_step_rate: Some(per_step),
            ..Default::default()
        },
        seed: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplifiedFormulaReport {
    pub estimates: Vec<EntropyEstimate>,
    pub min: f64,
    pub max: f64,
    /// `max − min` across the radii.
    pub spread: f64,
    /// Estimate at `(N, k_min)` minus the estimate at `(N − 1, k_min)`.
    pub trend_in_n: Option<f64>,
}

/// Katok estimates across a range of radii `θ^k` at fixed `N` and `δ`.
pub fn simplified_formula_report(
    mu: &ShiftMeasure,
    n: usize,
    delta: f64,
    k_range: std::ops::RangeInclusive<usize>,
    trans: &TransitionStructure,
    truncation_index: usize,
    opts: KatokOptions,
) -> Result<SimplifiedFormulaReport> {
    let k0 = *k_range.start();
    let estimates = k_range
        .map(|k| katok_estimate_with(mu, n, k, delta, trans, truncation_index, opts))
        .collect::<Result<Vec<_>>>()?;
    if estimates.is_empty() {
        return Err(domain("empty radius range"));
    }
    let min = estimates.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    let max = estimates.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max);
    let trend_in_n = if n > 1 {
        let prev = katok_estimate_with(mu, n - 1, k0, delta, trans, truncation_index, opts)?;
        Some(estimates[0].value - prev.value)
    } else {
        None
    };
    Ok(SimplifiedFormulaReport {
        estimates,
        min,
        max,
        spread: max - min,
        trend_in_n,
    })
}

// ---- sampling -----------------------------------------------------------------

struct Sampler {
    mk: MarkovKernel,
    start: WeightedIndex<f64>,
    rows: Vec<Option<WeightedIndex<f64>>>,
}

impl Sampler {
    fn new(mu: &ShiftMeasure) -> Result<Self> {
        let mk = mu
            .as_markov()
            .ok_or_else(|| domain("orbit sampling needs a finite Markov kernel"))?;
        let start = WeightedIndex::new(mk.stationary()).map_err(|e| domain(e.to_string()))?;
        let rows = mk.matrix().iter().map(|r| WeightedIndex::new(r).ok()).collect();
        Ok(Sampler { mk, start, rows })
    }

    fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    fn path(&self, len: usize, rng: &mut ChaCha8Rng) -> Vec<Symbol> {
        let mut x = Vec::with_capacity(len);
        let mut a = self.start.sample(rng);
        x.push(a);
        while x.len() < len {
            a = self.rows[a]
                .as_ref()
                .expect("reachable rows are stochastic")
                .sample(rng);
            x.push(a);
        }
        x
    }

    fn log_mass(&self, x: &[Symbol]) -> f64 {
        let mut lm = self.mk.log_pi(x[0]);
        for w in x.windows(2) {
            lm += self.mk.log_p(w[0], w[1]);
        }
        lm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmbSummary {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Exact entropy of the chain.
    pub entropy: f64,
    pub mean: f64,
    pub stddev: f64,
    pub epsilon: f64,
    /// Fraction of samples with `|−(1/n) log μ[x_0..x_{n−1}] − h| ≤ ε`.
    pub fraction_within: f64,
    pub values: Vec<f64>,
}

/// Empirical distribution of `−(1/n) log μ([x_0 .. x_{n−1}])` along
/// sampled orbits. Sample `i` draws from stream `i` of a seeded ChaCha8.
pub fn smb_deviation(mu: &ShiftMeasure, n: usize, sample_count: usize, seed: u64, epsilon: f64) -> Result<SmbSummary> {
    if n == 0 || sample_count == 0 {
        return Err(domain("SMB sampling needs n ≥ 1 and at least one sample"));
    }
    let sampler = Sampler::new(mu)?;
    let h = chain_entropy(&sampler.mk);
    let values: Vec<f64> = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = Sampler::rng(seed, i as u64);
            let x = sampler.path(n, &mut rng);
            -sampler.log_mass(&x) / n as f64
        })
        .collect();
    let (mean, stddev) = mean_std(&values);
    let within = values.iter().filter(|&&v| (v - h).abs() <= epsilon).count();
    Ok(SmbSummary {
        n,
        samples: sample_count,
        seed,
        entropy: h,
        mean,
        stddev,
        epsilon,
        fraction_within: within as f64 / sample_count as f64,
        values,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean: KahanSum = values.iter().copied().collect();
    let mean = mean.value() / n;
    let var: KahanSum = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = if values.len() > 1 { var.value() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirkhoffSummary {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub integral: f64,
    pub mean: f64,
    /// Fraction of samples with `|S_n φ / n − ∫φ| < ε`.
    pub fraction: f64,
    /// The event is tested at the single scale `N = n`.
    pub scale: &'static str,
}

/// Fraction of sampled orbits in `A_n = {|S_n φ/n − ∫φ dμ| < ε}`.
pub fn birkhoff_concentration(
    mu: &ShiftMeasure,
    phi: &Potential,
    n: usize,
    epsilon: f64,
    sample_count: usize,
    seed: u64,
) -> Result<BirkhoffSummary> {
    if n == 0 || sample_count == 0 {
        return Err(domain("Birkhoff sampling needs n ≥ 1 and at least one sample"));
    }
    let sampler = Sampler::new(mu)?;
    let d = sampler.mk.states();
    let integral = mu.integrate_cylinders(phi, &TransitionStructure::full(d), 0)?.value / mu.total_mass();
    let k = phi.depth();
    let averages = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = Sampler::rng(seed, i as u64);
            let x = sampler.path(n + k - 1, &mut rng);
            Ok(phi.birkhoff_sum(&x, BirkhoffBoundary::Interior, None)? / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, _) = mean_std(&averages);
    let inside = averages.iter().filter(|&&v| (v - integral).abs() < epsilon).count();
    Ok(BirkhoffSummary {
        n,
        samples: sample_count,
        seed,
        epsilon,
        integral,
        mean,
        fraction: inside as f64 / sample_count as f64,
        scale: "single",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    /// `Σ_{k≥M} k m_k + (2/e) Σ_{k≥M} e^{−k/2}`.
    pub bound: f64,
    /// `−Σ_{k≥M} m_k log m_k`.
    pub tail_entropy: f64,
    pub dominated: bool,
}

/// Bound on the entropy of the tail `{m_k : k ≥ M}` of a mass sequence
/// (`masses[0]` is `m_1`), from `√t log(1/t) ≤ 2/e`.
pub fn tail_entropy_bound(masses: &[f64], cutoff: usize) -> Result<TailBound> {
    if cutoff == 0 {
        return Err(domain("the cutoff M is at least 1"));
    }
    if masses.iter().any(|&m| !(0.0..=1.0).contains(&m)) {
        return Err(domain("masses must lie in [0, 1]"));
    }
    let tail = masses.iter().enumerate().skip(cutoff - 1);
    let mut weighted = KahanSum::default();
    let mut ent = KahanSum::default();
    for (i, &m) in tail {
        weighted.add((i + 1) as f64 * m);
        ent.add(eta(m));
    }
    let geometric = (-(cutoff as f64) / 2.0).exp() / (1.0 - (-0.5f64).exp());
    let bound = weighted.value() + 2.0 / std::f64::consts::E * geometric;
    let tail_entropy = ent.value();
    Ok(TailBound {
        bound,
        tail_entropy,
        dominated: tail_entropy <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN_LOG: f64 = 0.481_211_825_059_603_4;

    fn parry() -> ShiftMeasure {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        ShiftMeasure::markov(vec![vec![1.0 / g, 1.0 / (g * g)], vec![1.0, 0.0]]).unwrap()
    }

    fn h2(p: f64) -> f64 {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }

    #[test]
    fn markov_entropy_examples() {
        assert!((markov_entropy(&ShiftMeasure::uniform(2).unwrap()).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(
            markov_entropy(&ShiftMeasure::orbit(vec![0, 1, 1]).unwrap()).unwrap(),
            0.0
        );
        assert!((markov_entropy(&parry()).unwrap() - GOLDEN_LOG).abs() < 1e-14);
    }

    #[test]
    fn exact_entropy_of_geometric_law() {
        // direct summation of −Σ p_a log p_a
        let r: f64 = 0.3;
        let direct: f64 = (0..400).map(|a| eta((1.0 - r) * r.powi(a))).sum();
        let geo = ShiftMeasure::geometric(r).unwrap();
        assert!((exact_entropy(&geo).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn plugin_examples() {
        let full = TransitionStructure::full(2);
        let b = ShiftMeasure::bernoulli(vec![0.3, 0.7]).unwrap();
        for n in 1..=6 {
            let e = plugin_entropy(&b, n, &full, 0).unwrap();
            assert!((e.value - h2(0.3)).abs() < 1e-12);
        }
        let gm = TransitionStructure::golden_mean();
        assert!((plugin_entropy(&parry(), 10, &gm, 0).unwrap().value - GOLDEN_LOG).abs() < 0.02);
        let orb = ShiftMeasure::orbit(vec![0, 1]).unwrap();
        for n in 1..=6 {
            let e = plugin_entropy(&orb, n, &full, 0).unwrap();
            assert!((e.value - 2f64.ln() / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn katok_examples() {
        let full = TransitionStructure::full(2);
        let u = ShiftMeasure::uniform(2).unwrap();
        let e = katok_estimate(&u, 16, 0, 0.5, &full, 0).unwrap();
        assert_eq!(e.diagnostics.count, Some(1 << 16));
        assert!((e.value - 2f64.ln()).abs() < 1e-12);
        let orb = ShiftMeasure::orbit(vec![0]).unwrap();
        assert_eq!(katok_estimate(&orb, 7, 2, 0.3, &full, 0).unwrap().value, 0.0);
        let gm = TransitionStructure::golden_mean();
        let counts: Vec<u64> = (0..3)
            .map(|k| {
                katok_estimate(&parry(), 14, k, 0.3, &gm, 0)
                    .unwrap()
                    .diagnostics
                    .count
                    .unwrap()
            })
            .collect();
        assert_eq!(counts, vec![943, 1525, 2468]);
    }

    #[test]
    fn katok_needs_mass() {
        let nat = TransitionStructure::full_countable(vec![4]).unwrap();
        let sub = ShiftMeasure::mixture(vec![(0.5, ShiftMeasure::uniform(2).unwrap())]).unwrap();
        assert!(matches!(
            katok_estimate(&sub, 4, 0, 0.3, &nat, 0),
            Err(Error::InsufficientMass { .. })
        ));
        let opts = KatokOptions {
            relative_mass: true,
            ..Default::default()
        };
        let e = katok_estimate_with(&sub, 8, 0, 0.5, &nat, 0, opts).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn simplified_formula_examples() {
        let full = TransitionStructure::full(2);
        let u = ShiftMeasure::uniform(2).unwrap();
        let r = simplified_formula_report(&u, 12, 0.5, 0..=3, &full, 0, KatokOptions::default()).unwrap();
        assert!(r.spread <= 0.06);
        let fixed = ShiftMeasure::orbit(vec![0]).unwrap();
        let r = simplified_formula_report(&fixed, 12, 0.3, 0..=3, &full, 0, KatokOptions::default()).unwrap();
        assert_eq!(r.spread, 0.0);
        // two phases: count 2 at every radius
        let orb = ShiftMeasure::orbit(vec![0, 1]).unwrap();
        let r = simplified_formula_report(&orb, 12, 0.3, 0..=3, &full, 0, KatokOptions::default()).unwrap();
        assert!((r.spread - 2f64.ln() * (1.0 / 12.0 - 1.0 / 15.0)).abs() < 1e-15);
        let steps = KatokOptions {
            normalization: KatokNormalization::Steps,
            ..Default::default()
        };
        let r = simplified_formula_report(&orb, 12, 0.3, 0..=3, &full, 0, steps).unwrap();
        assert_eq!(r.spread, 0.0);
        let gm = TransitionStructure::golden_mean();
        let r = simplified_formula_report(&parry(), 12, 0.3, 0..=2, &gm, 0, KatokOptions::default()).unwrap();
        assert!(r.spread <= 0.08);
    }

    #[test]
    fn smb_examples() {
        let u = ShiftMeasure::uniform(2).unwrap();
        let s = smb_deviation(&u, 50, 20, 1, 0.01).unwrap();
        assert!(s.values.iter().all(|&v| (v - 2f64.ln()).abs() < 1e-14));
        assert!(s.stddev < 1e-14);
        let b = ShiftMeasure::bernoulli(vec![0.9, 0.1]).unwrap();
        let s = smb_deviation(&b, 2000, 200, 7, 0.05).unwrap();
        assert!((s.mean - h2(0.9)).abs() < 0.01);
        let again = smb_deviation(&b, 2000, 200, 7, 0.05).unwrap();
        assert_eq!(s.values, again.values);
    }

    #[test]
    fn birkhoff_examples() {
        let p = parry();
        let c = birkhoff_concentration(&p, &Potential::constant(3.0), 100, 1e-9, 50, 3).unwrap();
        assert_eq!(c.fraction, 1.0);
        let ind = Potential::indicator(0);
        let c = birkhoff_concentration(&p, &ind, 2000, 0.05, 300, 3).unwrap();
        assert!(c.fraction >= 0.99);
        let mut last = 1.0;
        for eps in [0.1, 0.03, 0.01, 0.003, 0.001] {
            let f = birkhoff_concentration(&p, &ind, 500, eps, 200, 11).unwrap().fraction;
            assert!(f <= last);
            last = f;
        }
    }

    #[test]
    fn tail_bound_examples() {
        let zeros = vec![0.5, 0.25, 0.0, 0.0, 0.0];
        let t = tail_entropy_bound(&zeros, 3).unwrap();
        assert_eq!(t.tail_entropy, 0.0);
        assert!(t.bound >= 0.0 && t.dominated);
        let exp: Vec<f64> = (1..=200).map(|k| (-(k as f64)).exp()).collect();
        for m in 1..=20 {
            assert!(tail_entropy_bound(&exp, m).unwrap().dominated);
        }
        let harmonic: Vec<f64> = (1..=5000).map(|k| 1.0 / (k as f64 * (k as f64 + 1.0))).collect();
        assert!(tail_entropy_bound(&harmonic, 5).unwrap().dominated);
    }
}
