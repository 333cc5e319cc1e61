//! Transfer-operator pressure, RPF equilibria, Gibbs certificates and
//! constrained pressure on finite truncations.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::exact_entropy;
use crate::error::{domain, Error, Result};
use crate::linalg::{self, PerronPair};
use crate::measure::{MassState, ShiftMeasure};
use crate::potential::{BirkhoffBoundary, Potential};
use crate::shift::{check_primitive, Symbol, TransitionStructure, Truncation, Word, DEFAULT_BUDGET};

/// `L_ab = M(a,b)·exp(φ(a,b))` (depth 2) or `M(a,b)·exp(φ(a))` (depth 1).
pub fn transfer_matrix(phi: &Potential, trans: &TransitionStructure, truncation_index: usize) -> Result<Vec<Vec<f64>>> {
    let trunc = trans.truncation(truncation_index)?;
    let m = trunc.size();
    let mut l = vec![vec![0.0; m]; m];
    for a in 0..m {
        for &b in trunc.successors(a) {
            l[a][b] = phi.edge_value(a, b)?.exp();
        }
    }
    Ok(l)
}

fn require_primitive(trans: &TransitionStructure, truncation_index: usize) -> Result<()> {
    let p = check_primitive(trans, truncation_index)?;
    if !p.primitive {
        return Err(Error::NotPrimitive {
            size: trans.truncation_size(truncation_index)?,
        });
    }
    Ok(())
}

fn perron_of(phi: &Potential, trans: &TransitionStructure, truncation_index: usize) -> Result<PerronPair> {
    require_primitive(trans, truncation_index)?;
    linalg::perron(&transfer_matrix(phi, trans, truncation_index)?)
}

/// `log λ` for the Perron eigenvalue `λ` of the transfer matrix.
pub fn transfer_pressure(phi: &Potential, trans: &TransitionStructure, truncation_index: usize) -> Result<f64> {
    Ok(perron_of(phi, trans, truncation_index)?.value.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureReport {
    /// Supremum over the schedule.
    pub pressure: f64,
    pub per_truncation: Vec<f64>,
    /// The last two increments of the (nondecreasing) sequence.
    pub last_increments: Vec<f64>,
}

/// Pressure over the whole truncation schedule.
pub fn pressure_over_schedule(phi: &Potential, trans: &TransitionStructure) -> Result<PressureReport> {
    let per_truncation = (0..trans.truncation_schedule().len())
        .map(|i| transfer_pressure(phi, trans, i))
        .collect::<Result<Vec<_>>>()?;
    let pressure = per_truncation.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let incs: Vec<f64> = per_truncation.windows(2).map(|w| w[1] - w[0]).collect();
    let last_increments = incs[incs.len().saturating_sub(2)..].to_vec();
    Ok(PressureReport {
        pressure,
        per_truncation,
        last_increments,
    })
}

/// `P_ab = L_ab r_b / (λ r_a)`, `π ∝ l_a r_a`. Rows whose right-vector entry
/// vanishes carry no stationary mass and get a uniform row on their support.
fn stochasticize(l: &[Vec<f64>], pp: &PerronPair) -> Result<ShiftMeasure> {
    let m = l.len();
    let mut p = vec![vec![0.0; m]; m];
    for a in 0..m {
        if pp.right[a] > 0.0 {
            for b in 0..m {
                p[a][b] = l[a][b] * pp.right[b] / (pp.value * pp.right[a]);
            }
            let s: f64 = p[a].iter().sum();
            p[a].iter_mut().for_each(|x| *x /= s);
        } else {
            let support = l[a].iter().filter(|&&x| x > 0.0).count().max(1);
            for b in 0..m {
                if l[a][b] > 0.0 || (support == 1 && l[a].iter().all(|&x| x == 0.0) && b == a) {
                    p[a][b] = 1.0 / support as f64;
                }
            }
        }
    }
    let raw: Vec<f64> = (0..m).map(|a| pp.left[a] * pp.right[a]).collect();
    let s: f64 = raw.iter().sum();
    let pi = raw.into_iter().map(|x| x / s).collect();
    ShiftMeasure::markov_with_stationary(p, pi)
}

/// The Ruelle–Perron–Frobenius equilibrium state of `φ` on a truncation.
pub fn rpf_equilibrium(phi: &Potential, trans: &TransitionStructure, truncation_index: usize) -> Result<ShiftMeasure> {
    let pp = perron_of(phi, trans, truncation_index)?;
    stochasticize(&transfer_matrix(phi, trans, truncation_index)?, &pp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GibbsVerdict {
    /// The distortion stops growing with the cylinder length.
    Bounded,
    /// `log G` keeps growing linearly in `N`.
    Growing,
    /// A null cylinder carries positive weight (or vice versa).
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsCertificate {
    pub pressure: f64,
    /// `exp(log_g)`; infinite for unbounded certificates.
    pub g: f64,
    pub log_g: f64,
    pub depth_tested: usize,
    pub worst_word: Option<Word>,
    /// `max |log μ([w]) + N P − S_N φ(w)|` over words of length exactly `N`.
    pub per_length_log_g: Vec<f64>,
    /// Growth rate of `log G` between `N/2` and `N`.
    pub growth_rate: f64,
    pub verdict: GibbsVerdict,
    pub boundary: BirkhoffBoundary,
}

const MAX_WINDOW: usize = 8;
const GROWTH_TOL: f64 = 1e-6;

#[derive(Clone)]
struct ScanState {
    mass: MassState,
    sum: f64,
    recent: [Symbol; MAX_WINDOW],
    len: usize,
}

enum WindowTable<'a> {
    One(Vec<f64>),
    Two(Vec<Vec<f64>>),
    General(&'a Potential),
}

impl WindowTable<'_> {
    fn value(&self, w: &[Symbol]) -> f64 {
        match self {
            WindowTable::One(t) => t[w[0]],
            WindowTable::Two(t) => t[w[0]][w[1]],
            WindowTable::General(p) => p.eval(w).unwrap_or(f64::NAN),
        }
    }
}

/// Undefined windows are stored as NaN and reported when reached.
fn window_table<'a>(phi: &'a Potential, trunc: &Truncation) -> WindowTable<'a> {
    let m = trunc.size();
    match phi.depth() {
        1 => WindowTable::One((0..m).map(|a| phi.eval(&[a]).unwrap_or(f64::NAN)).collect()),
        2 => WindowTable::Two(
            (0..m)
                .map(|a| (0..m).map(|b| phi.eval(&[a, b]).unwrap_or(f64::NAN)).collect())
                .collect(),
        ),
        _ => WindowTable::General(phi),
    }
}

#[derive(Clone)]
struct ScanResult {
    per_length: Vec<f64>,
    worst: Option<(f64, Vec<Symbol>)>,
    null_witness: Option<Vec<Symbol>>,
    undefined: Option<Vec<Symbol>>,
}

impl ScanResult {
    fn empty(n: usize) -> Self {
        ScanResult {
            per_length: vec![0.0; n],
            worst: None,
            null_witness: None,
            undefined: None,
        }
    }

    fn merge(mut self, other: ScanResult) -> ScanResult {
        for (a, b) in self.per_length.iter_mut().zip(&other.per_length) {
            *a = a.max(*b);
        }
        self.worst = match (self.worst, other.worst) {
            (Some(x), Some(y)) => Some(if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
            (x, y) => x.or(y),
        };
        self.null_witness = pick_min(self.null_witness, other.null_witness);
        self.undefined = pick_min(self.undefined, other.undefined);
        self
    }
}

fn pick_min(a: Option<Vec<Symbol>>, b: Option<Vec<Symbol>>) -> Option<Vec<Symbol>> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Gibbs certificate with interior Birkhoff sums.
pub fn gibbs_certificate(
    mu: &ShiftMeasure,
    phi: &Potential,
    pressure: f64,
    max_len: usize,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<GibbsCertificate> {
    gibbs_certificate_with(
        mu,
        phi,
        pressure,
        max_len,
        trans,
        truncation_index,
        BirkhoffBoundary::Interior,
    )
}

/// `G = exp(max |log μ([w]) + N·P − S_N φ(w)|)` over every admissible
/// cylinder of length `1..=max_len` in a truncation.
pub fn gibbs_certificate_with(
    mu: &ShiftMeasure,
    phi: &Potential,
    pressure: f64,
    max_len: usize,
    trans: &TransitionStructure,
    truncation_index: usize,
    boundary: BirkhoffBoundary,
) -> Result<GibbsCertificate> {
    if max_len == 0 {
        return Err(domain("max_len must be positive"));
    }
    let k = phi.depth();
    if k > MAX_WINDOW {
        return Err(domain(format!(
            "Gibbs scans support potentials of depth ≤ {MAX_WINDOW}"
        )));
    }
    let trunc = trans.truncation(truncation_index)?;
    let count: u128 = (1..=max_len)
        .map(|n| trunc.count_words(n))
        .fold(0, u128::saturating_add);
    if count > DEFAULT_BUDGET {
        return Err(Error::Budget {
            count,
            budget: DEFAULT_BUDGET,
        });
    }
    let table = window_table(phi, &trunc);
    let init = ScanState {
        mass: mu.start_state(),
        sum: 0.0,
        recent: [0; MAX_WINDOW],
        len: 0,
    };
    let push = |s: &ScanState, a: Symbol| {
        let mut recent = s.recent;
        recent.copy_within(1.., 0);
        recent[MAX_WINDOW - 1] = a;
        let len = s.len + 1;
        let sum = if len >= k {
            s.sum + table.value(&recent[MAX_WINDOW - k..])
        } else {
            s.sum
        };
        Some(ScanState {
            mass: mu.push_state(&s.mass, a),
            sum,
            recent,
            len,
        })
    };
    let scan_root = |first: Symbol| {
        let mut res = ScanResult::empty(max_len);
        trunc.walk_rooted(first, max_len, &init, &push, &mut |w: &[Symbol], s: &ScanState| {
            let mut sn = s.sum;
            if boundary == BirkhoffBoundary::LeastSuccessor && k > 1 {
                let full = phi.birkhoff_sum(w, boundary, Some(&trunc)).unwrap_or(f64::NAN);
                let interior = if w.len() >= k { s.sum } else { 0.0 };
                sn = interior
                    + (full
                        - phi
                            .birkhoff_sum(w, BirkhoffBoundary::Interior, None)
                            .unwrap_or(f64::NAN));
            }
            if sn.is_nan() {
                res.undefined = pick_min(res.undefined.take(), Some(w.to_vec()));
                return false;
            }
            let lm = mu.state_log_mass(&s.mass);
            if lm == f64::NEG_INFINITY {
                if sn > f64::NEG_INFINITY {
                    res.null_witness = pick_min(res.null_witness.take(), Some(w.to_vec()));
                }
                return false;
            }
            let dev = (lm + w.len() as f64 * pressure - sn).abs();
            let slot = &mut res.per_length[w.len() - 1];
            *slot = slot.max(dev);
            let better = match &res.worst {
                None => true,
                Some((d, _)) => dev > *d,
            };
            if better {
                res.worst = Some((dev, w.to_vec()));
            }
            true
        });
        res
    };
    let res = (0..trunc.size())
        .into_par_iter()
        .map(scan_root)
        .reduce(|| ScanResult::empty(max_len), ScanResult::merge);
    if let Some(w) = res.undefined {
        return Err(Error::UndefinedPotential(w));
    }
    let cumulative: Vec<f64> = res
        .per_length
        .iter()
        .scan(0.0f64, |acc, &x| {
            *acc = acc.max(x);
            Some(*acc)
        })
        .collect();
    let half = max_len.div_ceil(2);
    let growth_rate = if max_len > half {
        (cumulative[max_len - 1] - cumulative[half - 1]) / (max_len - half) as f64
    } else {
        0.0
    };
    let (log_g, worst_word, verdict) = match res.null_witness {
        Some(w) => (f64::INFINITY, Some(w), GibbsVerdict::Unbounded),
        None => {
            let (d, w) = res.worst.unwrap_or((0.0, vec![0]));
            let verdict = if growth_rate > GROWTH_TOL {
                GibbsVerdict::Growing
            } else {
                GibbsVerdict::Bounded
            };
            (d, Some(w), verdict)
        }
    };
    Ok(GibbsCertificate {
        pressure,
        g: log_g.exp(),
        log_g,
        depth_tested: max_len,
        worst_word: worst_word.map(|w| Word::new(w).expect("nonempty")),
        per_length_log_g: res.per_length,
        growth_rate,
        verdict,
        boundary,
    })
}

/// `P(φ) − (h(μ) + ∫φ dμ)`, nonnegative by the variational principle.
pub fn equilibrium_gap(
    mu: &ShiftMeasure,
    phi: &Potential,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<f64> {
    let p = transfer_pressure(phi, trans, truncation_index)?;
    let h = exact_entropy(mu)?;
    let integral = mu.integrate_cylinders(phi, trans, truncation_index)?;
    if integral.tail_bound > 0.0 {
        return Err(domain("measure charges symbols outside the truncation"));
    }
    Ok(p - (h + integral.value))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedPressureResult {
    pub budget: f64,
    /// `inf_{t ≥ 0} [P(f − tF) + tD]`.
    pub value: f64,
    pub multiplier: f64,
    pub active: bool,
    /// Equilibrium state of `f − t*F`.
    pub witness: ShiftMeasure,
    /// `∫F` under the witness.
    pub witness_constraint: f64,
    /// `D − ∫F`; nonnegative up to the search tolerance.
    pub slack: f64,
    /// `h + ∫f` under the witness.
    pub primal_value: f64,
}

const GOLDEN_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 64;

struct Dual {
    log_f: Vec<Vec<f64>>,
    shifted: Vec<f64>,
}

impl Dual {
    /// `L(t)_ab = exp(f(a,b) − t (F(a) − D))`; the shift by `D` keeps the
    /// dual `P(f − t(F − D))` free of `t·D` cancellation.
    fn matrix(&self, t: f64) -> Vec<Vec<f64>> {
        self.log_f
            .iter()
            .zip(&self.shifted)
            .map(|(row, g)| row.iter().map(|&x| (x - t * g).exp()).collect())
            .collect()
    }

    fn eval(&self, t: f64) -> Result<(f64, PerronPair, Vec<Vec<f64>>)> {
        let l = self.matrix(t);
        let pp = linalg::perron(&l).map_err(|_| domain("no invariant measure satisfies the constraint"))?;
        Ok((pp.value.ln(), pp, l))
    }

    /// Bisection on the sign of the slope near a golden-section minimizer,
    /// which only locates `t*` to about the square root of the tolerance.
    fn polish(&self, t: f64) -> Result<f64> {
        let w = 1e-4 * t.max(1.0);
        let mut lo = (t - w).max(0.0);
        let mut hi = t + w;
        let slope_at = |t: f64| self.eval(t).map(|(_, pp, _)| self.slope(&pp));
        if slope_at(lo)? >= 0.0 || slope_at(hi)? < 0.0 {
            return Ok(t);
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope_at(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// `D − ∫F dμ_t`.
    fn slope(&self, pp: &PerronPair) -> f64 {
        let w: Vec<f64> = pp.left.iter().zip(&pp.right).map(|(l, r)| l * r).collect();
        let s: f64 = w.iter().sum();
        -w.iter().zip(&self.shifted).map(|(p, g)| p * g).sum::<f64>() / s
    }
}

/// `sup { h(μ) + ∫f dμ : ∫F dμ ≤ D }` by Lagrangian duality.
pub fn constrained_pressure(
    f: &Potential,
    big_f: &Potential,
    budget: f64,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<ConstrainedPressureResult> {
    if big_f.depth() != 1 {
        return Err(domain("the constraint function must be depth-1"));
    }
    require_primitive(trans, truncation_index)?;
    let trunc = trans.truncation(truncation_index)?;
    let m = trunc.size();
    let fv: Vec<f64> = (0..m).map(|a| big_f.eval(&[a])).collect::<Result<_>>()?;
    if fv.iter().any(|&x| x < 0.0) {
        return Err(domain("the constraint function must be nonnegative"));
    }
    let min_f = fv.iter().copied().fold(f64::INFINITY, f64::min);
    if budget < min_f {
        return Err(domain(format!(
            "budget {budget} below min F = {min_f}: no admissible measure"
        )));
    }
    let base = transfer_matrix(f, trans, truncation_index)?;
    let dual = Dual {
        log_f: base.iter().map(|r| r.iter().map(|&x| x.ln()).collect()).collect(),
        shifted: fv.iter().map(|x| x - budget).collect(),
    };
    let (p0, pp0, l0) = dual.eval(0.0)?;
    let (t_star, value, pp, l) = if dual.slope(&pp0) >= 0.0 {
        (0.0, p0, pp0, l0)
    } else {
        let mut hi = 1.0;
        let mut found = false;
        for _ in 0..MAX_DOUBLINGS {
            let (_, pp, _) = dual.eval(hi)?;
            if dual.slope(&pp) >= 0.0 {
                found = true;
                break;
            }
            hi *= 2.0;
        }
        if found {
            let t = golden_section(|t| dual.eval(t).map(|x| x.0), 0.0, hi)?;
            let t = dual.polish(t)?;
            let (v, pp, l) = dual.eval(t)?;
            (t, v, pp, l)
        } else {
            // the infimum is the limit t → ∞, attained once exp(−t(F − D)) underflows
            let (v, pp, l) = dual.eval(hi)?;
            (hi, v, pp, l)
        }
    };
    let witness = stochasticize(&l, &pp)?;
    let witness_constraint = witness.integrate_symbol_fn(big_f)?.value;
    let h = exact_entropy(&witness)?;
    let fi = witness.integrate_cylinders(f, trans, truncation_index)?.value;
    Ok(ConstrainedPressureResult {
        budget,
        value,
        multiplier: t_star,
        active: t_star > 0.0,
        witness,
        witness_constraint,
        slack: budget - witness_constraint,
        primal_value: h + fi,
    })
}

fn golden_section(g: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    while b - a > GOLDEN_TOL * b.max(1.0) {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::markov_entropy;

    const GOLDEN_LOG: f64 = 0.481_211_825_059_603_4;

    #[test]
    fn pressure_examples() {
        let z = Potential::zero();
        assert!((transfer_pressure(&z, &TransitionStructure::full(2), 0).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((transfer_pressure(&z, &TransitionStructure::golden_mean(), 0).unwrap() - GOLDEN_LOG).abs() < 1e-12);
        for p in [0.1f64, 0.37, 0.5, 0.93] {
            let phi = Potential::depth1(&[p.ln(), (1.0 - p).ln()]).unwrap();
            assert!(transfer_pressure(&phi, &TransitionStructure::full(2), 0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn non_primitive_is_rejected() {
        let t = TransitionStructure::from_pattern(&[vec![false, true], vec![true, false]]).unwrap();
        assert!(matches!(
            transfer_pressure(&Potential::zero(), &t, 0),
            Err(Error::NotPrimitive { size: 2 })
        ));
    }

    #[test]
    fn rpf_examples() {
        let parry = rpf_equilibrium(&Potential::zero(), &TransitionStructure::golden_mean(), 0).unwrap();
        assert!((markov_entropy(&parry).unwrap() - GOLDEN_LOG).abs() < 1e-12);
        let u = rpf_equilibrium(&Potential::zero(), &TransitionStructure::full(3), 0).unwrap();
        assert!((u.cylinder_mass(&[2, 0]) - 1.0 / 9.0).abs() < 1e-14);
        let phi = Potential::depth1(&[0.3f64.ln(), 0.7f64.ln()]).unwrap();
        let b = rpf_equilibrium(&phi, &TransitionStructure::full(2), 0).unwrap();
        assert!((b.cylinder_mass(&[0, 1, 1]) - 0.3 * 0.7 * 0.7).abs() < 1e-13);
    }

    #[test]
    fn gibbs_examples() {
        let full = TransitionStructure::full(2);
        let u = ShiftMeasure::uniform(2).unwrap();
        let c = gibbs_certificate(&u, &Potential::constant(-2f64.ln()), 0.0, 10, &full, 0).unwrap();
        assert!(c.log_g < 1e-12);
        assert_eq!(c.verdict, GibbsVerdict::Bounded);

        let b = ShiftMeasure::bernoulli(vec![0.9, 0.1]).unwrap();
        let c = gibbs_certificate(&b, &Potential::zero(), 2f64.ln(), 10, &full, 0).unwrap();
        assert_eq!(c.verdict, GibbsVerdict::Growing);
        assert!((c.log_g - 10.0 * 5f64.ln()).abs() < 1e-9);

        let orb = ShiftMeasure::orbit(vec![0, 1]).unwrap();
        let c = gibbs_certificate(&orb, &Potential::zero(), 0.0, 6, &full, 0).unwrap();
        assert_eq!(c.verdict, GibbsVerdict::Unbounded);
        assert_eq!(c.worst_word.unwrap().symbols(), &[0, 0]);
    }

    #[test]
    fn equilibrium_gap_examples() {
        let full = TransitionStructure::full(2);
        let z = Potential::zero();
        let u = ShiftMeasure::uniform(2).unwrap();
        assert!(equilibrium_gap(&u, &z, &full, 0).unwrap().abs() < 1e-12);
        let b = ShiftMeasure::bernoulli(vec![0.9, 0.1]).unwrap();
        let h9 = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
        assert!((equilibrium_gap(&b, &z, &full, 0).unwrap() - (2f64.ln() - h9)).abs() < 1e-12);
    }

    #[test]
    fn constrained_examples() {
        let full = TransitionStructure::full(2);
        let big_f = Potential::depth1(&[0.0, 1.0]).unwrap();
        let r = constrained_pressure(&Potential::zero(), &big_f, 0.2, &full, 0).unwrap();
        let h02 = -(0.2f64 * 0.2f64.ln() + 0.8 * 0.8f64.ln());
        assert!((r.value - h02).abs() < 1e-9);
        assert!(r.active);
        assert!(r.slack > -1e-8);

        let r = constrained_pressure(&Potential::zero(), &big_f, 0.7, &full, 0).unwrap();
        assert_eq!(r.multiplier, 0.0);
        assert!((r.value - 2f64.ln()).abs() < 1e-12);

        let gm = TransitionStructure::golden_mean();
        let r = constrained_pressure(&Potential::zero(), &big_f, 0.0, &gm, 0).unwrap();
        assert!(r.value.abs() < 1e-9);
        assert!(r.witness_constraint < 1e-9);

        assert!(constrained_pressure(&Potential::zero(), &big_f.add_constant(1.0), 0.5, &full, 0).is_err());
    }
}
