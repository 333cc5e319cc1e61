//! Suspension flows under a roof `τ ≥ c > 0`.
//!
//! The flow space is never built: every flow quantity used here factors
//! through the base measure, the normalizer `∫τ dμ` and Abramov's formula
//! `h(flow) = h(base) / ∫τ dμ`.

use serde::{Deserialize, Serialize};

use crate::entropy::exact_entropy;
use crate::error::{domain, Error, Result};
use crate::measure::{vague_gap, Certified, ShiftMeasure};
use crate::potential::Potential;
use crate::shift::TransitionStructure;

/// A locally constant roof with a declared positive lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RoofJson", into = "RoofJson")]
pub struct Roof {
    tau: Potential,
    lower_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct RoofJson {
    #[serde(flatten)]
    tau: Potential,
    lower_bound: f64,
}

impl Roof {
    /// Checks `τ ≥ c` on the table and on the affine tail rule.
    pub fn new(tau: Potential, lower_bound: f64) -> Result<Self> {
        if !(lower_bound > 0.0) {
            return Err(domain("a roof must be bounded away from zero"));
        }
        if let Some((w, v)) = tau.table().iter().find(|(_, &v)| v < lower_bound) {
            return Err(domain(format!(
                "roof value {v} on {w:?} is below the bound {lower_bound}"
            )));
        }
        if let Some(af) = tau.affine_rule() {
            if af.slope < 0.0 || af.intercept < lower_bound {
                return Err(domain("affine roof rule drops below the declared bound"));
            }
        }
        Ok(Roof { tau, lower_bound })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Potential::constant(c), c)
    }

    /// Depth-1 roof `τ(a) = values[a]` with `c = min values`.
    pub fn depth1(values: &[f64]) -> Result<Self> {
        let c = values.iter().copied().fold(f64::INFINITY, f64::min);
        Self::new(Potential::depth1(values)?, c)
    }

    /// `τ(a) = intercept + slope·a`.
    pub fn affine(intercept: f64, slope: f64) -> Result<Self> {
        Self::new(Potential::affine(intercept, slope)?, intercept)
    }

    pub fn potential(&self) -> &Potential {
        &self.tau
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }
}

impl TryFrom<RoofJson> for Roof {
    type Error = Error;
    fn try_from(j: RoofJson) -> Result<Self> {
        Roof::new(j.tau, j.lower_bound)
    }
}

impl From<Roof> for RoofJson {
    fn from(r: Roof) -> Self {
        RoofJson {
            tau: r.tau,
            lower_bound: r.lower_bound,
        }
    }
}

/// `∫τ dμ = (μ × m)(Y_τ)`.
///
/// Depth-1 roofs are integrated over the whole alphabet (closed-form tails
/// for geometric weights); deeper roofs over the truncation's cylinders.
pub fn roof_integral(
    mu: &ShiftMeasure,
    roof: &Roof,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<Certified> {
    let tau = roof.potential();
    let c = if tau.depth() == 1 {
        mu.integrate_symbol_fn(tau)?
    } else {
        mu.integrate_cylinders(tau, trans, truncation_index)?
    };
    if !c.value.is_finite() || !c.tail_bound.is_finite() {
        return Err(Error::NotIntegrable("divergent roof integral".into()));
    }
    Ok(c)
}

/// `h / ∫τ`.
pub fn abramov(h_base: f64, roof_int: f64) -> Result<f64> {
    if !(roof_int > 0.0) {
        return Err(domain(format!("roof integral must be positive, got {roof_int}")));
    }
    if !(h_base >= 0.0) {
        return Err(domain(format!("entropy must be nonnegative, got {h_base}")));
    }
    Ok(h_base / roof_int)
}

/// The normalized lift `(μ × m)|_{Y_τ} / ∫τ dμ`, kept as base plus roof.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowMeasure {
    pub base: ShiftMeasure,
    pub roof: Roof,
    pub normalizer: f64,
    pub base_entropy: f64,
    pub flow_entropy: f64,
}

pub fn lift_measure(
    mu: &ShiftMeasure,
    roof: &Roof,
    trans: &TransitionStructure,
    truncation_index: usize,
) -> Result<FlowMeasure> {
    if !mu.is_probability() {
        return Err(domain("only probability measures lift to flow-invariant probabilities"));
    }
    let normalizer = roof_integral(mu, roof, trans, truncation_index)?;
    let base_entropy = exact_entropy(mu)?;
    Ok(FlowMeasure {
        base: mu.clone(),
        roof: roof.clone(),
        normalizer: normalizer.value,
        base_entropy,
        flow_entropy: abramov(base_entropy, normalizer.value)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRow {
    pub index: usize,
    pub vague_gap: f64,
    /// `None` when the roof integral is not certified finite.
    pub roof_integral: Option<f64>,
    pub base_entropy: f64,
    pub flow_entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSemicontinuityReport {
    pub rows: Vec<FlowRow>,
    /// Whether the vague gaps decrease over the tail of the sequence.
    pub vague_gap_decreasing: bool,
    pub limit_roof_integral: f64,
    /// Minimum of `∫τ dμ_n` over the last third of the sequence.
    pub tail_liminf_roof_integral: f64,
    /// `∫τ dμ ≤ liminf ∫τ dμ_n`.
    pub liminf_inequality_holds: bool,
    pub liminf_strict: bool,
    pub limit_flow_entropy: Option<f64>,
    /// Maximum flow entropy over the last third of the sequence.
    pub tail_limsup_flow_entropy: f64,
    /// `limsup h(ν_n) ≤ h(A(μ))`, checked when the limit is a probability.
    pub flow_entropy_inequality_holds: Option<bool>,
    pub tolerance: f64,
}

impl FlowSemicontinuityReport {
    pub fn holds(&self) -> bool {
        self.liminf_inequality_holds && self.flow_entropy_inequality_holds.unwrap_or(true)
    }
}

/// Index range of the last third of a sequence of length `len`.
pub(crate) fn tail_range(len: usize) -> std::ops::Range<usize> {
    let t = len.div_ceil(3).max(1).min(len);
    len - t..len
}

/// Checks `∫τ dμ ≤ liminf ∫τ dμ_n` and, for probability limits,
/// `limsup h(ν_n) ≤ h(A(μ))` along a sequence with known base entropies.
#[allow(clippy::too_many_arguments)]
pub fn flow_semicontinuity_check(
    seq: &[ShiftMeasure],
    entropies: &[f64],
    limit: &ShiftMeasure,
    limit_entropy: f64,
    roof: &Roof,
    trans: &TransitionStructure,
    truncation_index: usize,
    depth: usize,
    tolerance: f64,
) -> Result<FlowSemicontinuityReport> {
    if seq.is_empty() || seq.len() != entropies.len() {
        return Err(domain("need one entropy per measure in a nonempty sequence"));
    }
    let rows = seq
        .iter()
        .zip(entropies)
        .enumerate()
        .map(|(i, (mu, &h))| {
            let ri = roof_integral(mu, roof, trans, truncation_index)
                .ok()
                .map(|c| c.value + c.tail_bound);
            Ok(FlowRow {
                index: i,
                vague_gap: vague_gap(mu, limit, depth, trans, truncation_index)?,
                roof_integral: ri,
                base_entropy: h,
                flow_entropy: ri.map(|r| h / r),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = tail_range(rows.len());
    let tail_rows = &rows[tail];
    let vague_gap_decreasing = tail_rows.windows(2).all(|w| w[1].vague_gap <= w[0].vague_gap + 1e-15);
    let limit_ri = roof_integral(limit, roof, trans, truncation_index)?;
    let limit_roof_integral = limit_ri.value;
    let tail_liminf_roof_integral = tail_rows
        .iter()
        .map(|r| r.roof_integral.unwrap_or(f64::INFINITY))
        .fold(f64::INFINITY, f64::min);
    let liminf_inequality_holds = limit_roof_integral <= tail_liminf_roof_integral + tolerance;
    let liminf_strict = limit_roof_integral + tolerance < tail_liminf_roof_integral;
    let tail_limsup_flow_entropy = tail_rows
        .iter()
        .map(|r| r.flow_entropy.unwrap_or(0.0))
        .fold(0.0, f64::max);
    let (limit_flow_entropy, flow_entropy_inequality_holds) = if limit.is_probability() {
        let h = abramov(limit_entropy, limit_roof_integral)?;
        (Some(h), Some(tail_limsup_flow_entropy <= h + tolerance))
    } else {
        (None, None)
    };
    Ok(FlowSemicontinuityReport {
        rows,
        vague_gap_decreasing,
        limit_roof_integral,
        tail_liminf_roof_integral,
        liminf_inequality_holds,
        liminf_strict,
        limit_flow_entropy,
        tail_limsup_flow_entropy,
        flow_entropy_inequality_holds,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roof_integral_examples() {
        let full = TransitionStructure::full(2);
        let u = ShiftMeasure::uniform(2).unwrap();
        let c = roof_integral(&u, &Roof::constant(3.0).unwrap(), &full, 0).unwrap();
        assert!((c.value - 3.0).abs() < 1e-15);

        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let parry = ShiftMeasure::markov(vec![vec![1.0 / g, 1.0 / (g * g)], vec![1.0, 0.0]]).unwrap();
        let pi0 = g * g / (1.0 + g * g);
        let gm = TransitionStructure::golden_mean();
        let c = roof_integral(&parry, &Roof::depth1(&[1.0, 2.0]).unwrap(), &gm, 0).unwrap();
        assert!((c.value - (pi0 + 2.0 * (1.0 - pi0))).abs() < 1e-12);

        let nat = TransitionStructure::full_countable(vec![60]).unwrap();
        let geo = ShiftMeasure::geometric(0.5).unwrap();
        let c = roof_integral(&geo, &Roof::affine(1.0, 1.0).unwrap(), &nat, 0).unwrap();
        assert!((c.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn roof_bound_is_enforced() {
        assert!(Roof::new(Potential::depth1(&[1.0, 0.5]).unwrap(), 1.0).is_err());
        assert!(Roof::constant(0.0).is_err());
    }

    #[test]
    fn abramov_examples() {
        assert!((abramov(2f64.ln(), 2.0).unwrap() - 0.346_573_590_279_972_6).abs() < 1e-15);
        assert_eq!(abramov(0.0, 7.0).unwrap(), 0.0);
        assert_eq!(abramov(0.4, 1.0).unwrap(), 0.4);
        assert!(abramov(1.0, 0.0).is_err());
    }

    #[test]
    fn lift_examples() {
        let full = TransitionStructure::full(2);
        let u = ShiftMeasure::uniform(2).unwrap();
        let f = lift_measure(&u, &Roof::constant(1.0).unwrap(), &full, 0).unwrap();
        assert_eq!(f.flow_entropy, f.base_entropy);
        let f = lift_measure(&u, &Roof::constant(2.0).unwrap(), &full, 0).unwrap();
        assert!((f.flow_entropy - 2f64.ln() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn roof_json_round_trip() {
        let r: Roof = serde_json::from_str(r#"{"depth":1,"values":{"0":1.0,"1":2.0},"lower_bound":1.0}"#).unwrap();
        assert_eq!(r.lower_bound(), 1.0);
        let back: Roof = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
