//! Batch experiments driven by JSON configs: semicontinuity and escape of
//! mass, estimator sweeps, Gibbs audits, Kac first returns and suspension
//! flows.
//!
//! Every runner returns a typed report whose `rows` become the CSV/JSON table
//! and whose remaining fields go to `summary.json`. Rows are computed in
//! parallel and always emitted in index order.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{
    exact_entropy, katok_estimate_with, plugin_entropy, EntropyEstimate, KatokNormalization, KatokOptions,
};
use crate::error::{Error, Result};
use crate::measure::{kac_return_masses, vague_gap, ShiftMeasure};
use crate::potential::Potential;
use crate::shift::{Symbol, TransitionStructure};
use crate::suspension::{flow_semicontinuity_check, tail_range, FlowRow, Roof};
use crate::thermo::{equilibrium_gap, gibbs_certificate, rpf_equilibrium, transfer_pressure, GibbsVerdict};

/// Verdict tolerance when every entropy in the verdict is a closed form.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-6;
/// Verdict tolerance when estimators enter the verdict.
pub const ESTIMATOR_TOLERANCE: f64 = 0.05;

const TAIL_RULE: &str = "max over the last third of the index range";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    /// No entropy at infinity was supplied for a limit that lost mass.
    InequalityFormOnly,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Holds | Verdict::InequalityFormOnly => 0,
            Verdict::Violated => 2,
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }
}

// ---- configuration --------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Semicontinuity,
    Sweep,
    GibbsAudit,
    Kac,
    Suspend,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Semicontinuity => "semicontinuity",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::GibbsAudit => "gibbs_audit",
            ExperimentKind::Kac => "kac",
            ExperimentKind::Suspend => "suspend",
        }
    }
}

/// A measure given directly, as an equilibrium state, or by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    /// `"parry"`: the measure of maximal entropy of the configured shift.
    Named(String),
    Equilibrium {
        equilibrium: Potential,
    },
    Measure(ShiftMeasure),
}

impl MeasureSpec {
    pub fn resolve(&self, shift: &TransitionStructure, truncation_index: usize) -> Result<ShiftMeasure> {
        match self {
            MeasureSpec::Measure(m) => Ok(m.clone()),
            MeasureSpec::Equilibrium { equilibrium } => rpf_equilibrium(equilibrium, shift, truncation_index),
            MeasureSpec::Named(n) if n == "parry" => rpf_equilibrium(&Potential::zero(), shift, truncation_index),
            MeasureSpec::Named(n) => Err(Error::Config(format!("unknown measure name {n:?}"))),
        }
    }
}

fn default_base() -> MeasureSpec {
    MeasureSpec::Measure(ShiftMeasure::uniform(2).expect("valid"))
}

fn default_offset() -> f64 {
    10.0
}

/// Parametric measure families indexed by `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `Bernoulli(1/2 + 1/(n + offset), 1/2 − 1/(n + offset))`.
    BernoulliApproach {
        #[serde(default = "default_offset")]
        offset: f64,
    },
    /// `(1 − α) ν + α δ-orbit of the fixed point n^∞`.
    EscapingOrbit {
        alpha: f64,
        #[serde(default = "default_base")]
        base: MeasureSpec,
    },
    /// `(1 − α) ν + α uniform Bernoulli on {n, .., n + width}`.
    EscapingBlock {
        alpha: f64,
        width: usize,
        #[serde(default = "default_base")]
        base: MeasureSpec,
    },
    /// `(1 − 1/n) ν + (1/n) orbit of the fixed point (n²)^∞`.
    VanishingOrbit {
        #[serde(default = "default_base")]
        base: MeasureSpec,
    },
    Constant {
        measure: MeasureSpec,
    },
    /// Indices address the list.
    Explicit {
        measures: Vec<MeasureSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(flatten)]
    pub family: Family,
    pub start: usize,
    pub end: usize,
}

impl SequenceSpec {
    pub fn indices(&self) -> Vec<usize> {
        (self.start..=self.end).collect()
    }

    pub fn member(&self, n: usize, shift: &TransitionStructure, ti: usize) -> Result<ShiftMeasure> {
        match &self.family {
            Family::BernoulliApproach { offset } => {
                let e = 1.0 / (n as f64 + offset);
                if !(e < 0.5) {
                    return Err(Error::Config("bernoulli_approach needs n + offset > 2".into()));
                }
                ShiftMeasure::bernoulli(vec![0.5 + e, 0.5 - e])
            }
            Family::EscapingOrbit { alpha, base } => ShiftMeasure::mixture(vec![
                (1.0 - alpha, base.resolve(shift, ti)?),
                (*alpha, ShiftMeasure::orbit(vec![n])?),
            ]),
            Family::EscapingBlock { alpha, width, base } => ShiftMeasure::mixture(vec![
                (1.0 - alpha, base.resolve(shift, ti)?),
                (*alpha, ShiftMeasure::uniform_block(n, width + 1)?),
            ]),
            Family::VanishingOrbit { base } => {
                if n == 0 {
                    return Err(Error::Config("vanishing_orbit starts at n = 1".into()));
                }
                let w = 1.0 / n as f64;
                ShiftMeasure::mixture(vec![
                    (1.0 - w, base.resolve(shift, ti)?),
                    (w, ShiftMeasure::orbit(vec![n * n])?),
                ])
            }
            Family::Constant { measure } => measure.resolve(shift, ti),
            Family::Explicit { measures } => measures
                .get(n)
                .ok_or_else(|| Error::Config(format!("index {n} beyond the explicit list")))?
                .resolve(shift, ti),
        }
    }

    /// The vague limit the family is built to approach.
    pub fn default_limit(&self, shift: &TransitionStructure, ti: usize) -> Result<Option<ShiftMeasure>> {
        Ok(match &self.family {
            Family::BernoulliApproach { .. } => Some(ShiftMeasure::uniform(2)?),
            Family::EscapingOrbit { alpha, base } | Family::EscapingBlock { alpha, base, .. } => {
                Some(ShiftMeasure::mixture(vec![(1.0 - alpha, base.resolve(shift, ti)?)])?)
            }
            Family::VanishingOrbit { base } => Some(base.resolve(shift, ti)?),
            Family::Constant { measure } => Some(measure.resolve(shift, ti)?),
            Family::Explicit { .. } => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    #[default]
    Exact,
    Plugin,
    Katok,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub truncation_index: usize,
    pub normalization: KatokNormalization,
    pub relative_mass: bool,
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        EstimatorSpec {
            kind: EstimatorKind::Exact,
            n: 10,
            k: 0,
            delta: 0.3,
            truncation_index: 0,
            normalization: KatokNormalization::Horizon,
            relative_mass: false,
        }
    }
}

impl EstimatorSpec {
    fn options(&self) -> KatokOptions {
        KatokOptions {
            normalization: self.normalization,
            relative_mass: self.relative_mass,
        }
    }

    fn estimate(&self, mu: &ShiftMeasure, shift: &TransitionStructure) -> Result<EntropyEstimate> {
        match self.kind {
            EstimatorKind::Exact => EntropyEstimate::exact(mu),
            EstimatorKind::Plugin => plugin_entropy(mu, self.n, shift, self.truncation_index),
            EstimatorKind::Katok => katok_estimate_with(
                mu,
                self.n,
                self.k,
                self.delta,
                shift,
                self.truncation_index,
                self.options(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMeasure {
    pub id: String,
    pub measure: MeasureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub measures: Vec<NamedMeasure>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub delta: Vec<f64>,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub truncation_index: usize,
    #[serde(default)]
    pub normalization: KatokNormalization,
    /// Radius spreads above this at the largest `N` make the verdict fail.
    #[serde(default)]
    pub spread_tolerance: Option<f64>,
}

fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::Katok]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsCase {
    pub id: String,
    pub measure: MeasureSpec,
    pub potential: Potential,
    /// Defaults to the transfer pressure of the potential.
    #[serde(default)]
    pub pressure: Option<f64>,
}

fn default_max_len() -> usize {
    12
}

fn default_gap_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsAuditSpec {
    pub cases: Vec<GibbsCase>,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_gap_tolerance")]
    pub gap_tolerance: f64,
    #[serde(default)]
    pub truncation_index: usize,
}

fn default_n_max() -> usize {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KacSpec {
    pub measure: MeasureSpec,
    pub set: Vec<Symbol>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_vague_depth() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Which runner `entropy-lab run` dispatches to.
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub shift: TransitionStructure,
    #[serde(default)]
    pub sequence: Option<SequenceSpec>,
    #[serde(default)]
    pub limit: Option<MeasureSpec>,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub entropy_at_infinity: Option<f64>,
    #[serde(default)]
    pub roof: Option<Roof>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_vague_depth")]
    pub vague_depth: usize,
    #[serde(default)]
    pub truncation_index: usize,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub gibbs_audit: Option<GibbsAuditSpec>,
    #[serde(default)]
    pub kac: Option<KacSpec>,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.shift.truncation(self.truncation_index)?;
        if let Some(h) = self.entropy_at_infinity {
            if !(h >= 0.0) {
                return Err(Error::Config("entropy_at_infinity must be nonnegative".into()));
            }
        }
        if let Some(s) = &self.sequence {
            if s.start > s.end {
                return Err(Error::Config("sequence start exceeds end".into()));
            }
        }
        Ok(())
    }

    fn sequence(&self) -> Result<&SequenceSpec> {
        self.sequence
            .as_ref()
            .ok_or_else(|| Error::Config("this experiment needs a \"sequence\"".into()))
    }

    fn limit_measure(&self) -> Result<ShiftMeasure> {
        let ti = self.truncation_index;
        match &self.limit {
            Some(spec) => spec.resolve(&self.shift, ti),
            None => self
                .sequence()?
                .default_limit(&self.shift, ti)?
                .ok_or_else(|| Error::Config("no \"limit\" given and the family has no default".into())),
        }
    }
}

// ---- semicontinuity ------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemicontinuityRow {
    pub index: usize,
    pub total_mass: f64,
    pub vague_gap: Option<f64>,
    pub entropy_exact: Option<f64>,
    pub estimator: String,
    pub entropy_estimate: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemicontinuityReport {
    pub rows: Vec<SemicontinuityRow>,
    pub limit_mass: f64,
    /// Entropy of the normalized limit `μ / ‖μ‖`.
    pub limit_entropy: f64,
    pub entropy_at_infinity: Option<f64>,
    pub tail_rule: &'static str,
    pub tail_indices: Vec<usize>,
    pub tail_max_entropy: f64,
    /// `‖μ‖ h(μ/‖μ‖) + (1 − ‖μ‖) h∞`.
    pub bound: Option<f64>,
    pub closed_form: bool,
    pub tolerance: f64,
    pub verdict: Verdict,
}

pub fn run_semicontinuity(cfg: &ExperimentConfig) -> Result<SemicontinuityReport> {
    let seq = cfg.sequence()?;
    let limit = cfg.limit_measure()?;
    let ti = cfg.truncation_index;
    let estimator = format!("{:?}", cfg.estimator.kind).to_lowercase();
    let rows: Vec<SemicontinuityRow> = seq
        .indices()
        .into_par_iter()
        .map(|n| {
            let mu = match seq.member(n, &cfg.shift, ti) {
                Ok(mu) => mu,
                Err(e) => {
                    return SemicontinuityRow {
                        index: n,
                        total_mass: f64::NAN,
                        vague_gap: None,
                        entropy_exact: None,
                        estimator: estimator.clone(),
                        entropy_estimate: None,
                        error: Some(e.to_string()),
                    }
                }
            };
            let gap = vague_gap(&mu, &limit, cfg.vague_depth, &cfg.shift, ti);
            let est = cfg.estimator.estimate(&mu, &cfg.shift);
            let error = gap.as_ref().err().or(est.as_ref().err()).map(|e| e.to_string());
            SemicontinuityRow {
                index: n,
                total_mass: mu.total_mass(),
                vague_gap: gap.ok(),
                entropy_exact: exact_entropy(&mu).ok(),
                estimator: estimator.clone(),
                entropy_estimate: est.ok().map(|e| e.value),
                error,
            }
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::Config("empty index range".into()));
    }
    let closed_form = rows.iter().all(|r| r.entropy_exact.is_some());
    let tolerance = cfg.tolerance.unwrap_or(if closed_form {
        CLOSED_FORM_TOLERANCE
    } else {
        ESTIMATOR_TOLERANCE
    });
    let tail = tail_range(rows.len());
    let tail_indices: Vec<usize> = rows[tail.clone()].iter().map(|r| r.index).collect();
    let tail_max_entropy = rows[tail]
        .iter()
        .map(|r| {
            if closed_form {
                r.entropy_exact
            } else {
                r.entropy_estimate
            }
            .unwrap_or(f64::NAN)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let limit_mass = limit.total_mass();
    let limit_entropy = exact_entropy(&limit)?;
    let lost = 1.0 - limit_mass;
    let bound = if lost <= 1e-12 {
        Some(limit_entropy)
    } else {
        cfg.entropy_at_infinity.map(|h| limit_mass * limit_entropy + lost * h)
    };
    let verdict = match bound {
        Some(b) => Verdict::from_bool(tail_max_entropy <= b + tolerance),
        None => Verdict::InequalityFormOnly,
    };
    Ok(SemicontinuityReport {
        rows,
        limit_mass,
        limit_entropy,
        entropy_at_infinity: cfg.entropy_at_infinity,
        tail_rule: TAIL_RULE,
        tail_indices,
        tail_max_entropy,
        bound,
        closed_form,
        tolerance,
        verdict,
    })
}

// ---- sweep ------------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub measure_id: String,
    pub estimator: String,
    pub n: usize,
    pub k: Option<usize>,
    pub delta: Option<f64>,
    pub value: f64,
    pub count: Option<u64>,
    pub mass_deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadRow {
    pub measure_id: String,
    pub n: usize,
    pub delta: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub spreads: Vec<SpreadRow>,
    pub spread_tolerance: Option<f64>,
    pub verdict: Verdict,
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a \"sweep\" section".into()))?;
    let ti = spec.truncation_index;
    let opts = KatokOptions {
        normalization: spec.normalization,
        relative_mass: false,
    };
    let mut jobs = Vec::new();
    for m in &spec.measures {
        let mu = m.measure.resolve(&cfg.shift, ti)?;
        for &est in &spec.estimators {
            for &n in &spec.n {
                match est {
                    EstimatorKind::Katok => {
                        for &k in &spec.k {
                            for &d in &spec.delta {
                                jobs.push((m.id.clone(), mu.clone(), est, n, Some(k), Some(d)));
                            }
                        }
                    }
                    _ => jobs.push((m.id.clone(), mu.clone(), est, n, None, None)),
                }
            }
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(id, mu, est, n, k, d)| {
            let e = match est {
                EstimatorKind::Katok => {
                    katok_estimate_with(&mu, n, k.unwrap_or(0), d.unwrap_or(0.3), &cfg.shift, ti, opts)?
                }
                EstimatorKind::Plugin => plugin_entropy(&mu, n, &cfg.shift, ti)?,
                EstimatorKind::Exact => EntropyEstimate::exact(&mu)?,
            };
            Ok(SweepRow {
                measure_id: id,
                estimator: format!("{est:?}").to_lowercase(),
                n,
                k,
                delta: d,
                value: e.value,
                count: e.diagnostics.count,
                mass_deficit: e.diagnostics.mass_deficit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut spreads: Vec<SpreadRow> = Vec::new();
    for r in rows.iter().filter(|r| r.estimator == "katok") {
        let d = r.delta.unwrap_or(0.0);
        match spreads
            .iter_mut()
            .find(|s| s.measure_id == r.measure_id && s.n == r.n && s.delta == d)
        {
            Some(_) => {}
            None => {
                let vals: Vec<f64> = rows
                    .iter()
                    .filter(|x| {
                        x.estimator == "katok" && x.measure_id == r.measure_id && x.n == r.n && x.delta == Some(d)
                    })
                    .map(|x| x.value)
                    .collect();
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                spreads.push(SpreadRow {
                    measure_id: r.measure_id.clone(),
                    n: r.n,
                    delta: d,
                    spread: hi - lo,
                });
            }
        }
    }
    let verdict = match (spec.spread_tolerance, spec.n.iter().max()) {
        (Some(tol), Some(&n_max)) => {
            Verdict::from_bool(spreads.iter().filter(|s| s.n == n_max).all(|s| s.spread <= tol))
        }
        _ => Verdict::Holds,
    };
    Ok(SweepReport {
        rows,
        spreads,
        spread_tolerance: spec.spread_tolerance,
        verdict,
    })
}

// ---- Gibbs audit ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GibbsClass {
    GibbsEquilibrium,
    GibbsNotEquilibrium,
    NotGibbs,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsRow {
    pub case_id: String,
    pub pressure: f64,
    pub log_g: f64,
    pub depth_tested: usize,
    pub worst_word: Option<String>,
    pub growth_rate: f64,
    pub gibbs_verdict: GibbsVerdict,
    pub equilibrium_gap: Option<f64>,
    pub classification: GibbsClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsAuditReport {
    pub rows: Vec<GibbsRow>,
    pub gap_tolerance: f64,
    pub verdict: Verdict,
}

pub fn run_gibbs_audit(cfg: &ExperimentConfig) -> Result<GibbsAuditReport> {
    let spec = cfg
        .gibbs_audit
        .as_ref()
        .ok_or_else(|| Error::Config("gibbs-audit needs a \"gibbs_audit\" section".into()))?;
    let ti = spec.truncation_index;
    let rows = spec
        .cases
        .iter()
        .map(|case| {
            let mu = case.measure.resolve(&cfg.shift, ti)?;
            let p = match case.pressure {
                Some(p) => p,
                None => transfer_pressure(&case.potential, &cfg.shift, ti)?,
            };
            let cert = gibbs_certificate(&mu, &case.potential, p, spec.max_len, &cfg.shift, ti)?;
            let gap = equilibrium_gap(&mu, &case.potential, &cfg.shift, ti).ok();
            let equilibrium = gap.is_some_and(|g| g <= spec.gap_tolerance);
            let classification = match cert.verdict {
                GibbsVerdict::Unbounded => GibbsClass::Unbounded,
                GibbsVerdict::Growing => GibbsClass::NotGibbs,
                GibbsVerdict::Bounded if equilibrium => GibbsClass::GibbsEquilibrium,
                GibbsVerdict::Bounded => GibbsClass::GibbsNotEquilibrium,
            };
            Ok(GibbsRow {
                case_id: case.id.clone(),
                pressure: p,
                log_g: cert.log_g,
                depth_tested: cert.depth_tested,
                worst_word: cert.worst_word.map(|w| w.to_string()),
                growth_rate: cert.growth_rate,
                gibbs_verdict: cert.verdict,
                equilibrium_gap: gap,
                classification,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = Verdict::from_bool(rows.iter().all(|r| r.classification == GibbsClass::GibbsEquilibrium));
    Ok(GibbsAuditReport {
        rows,
        gap_tolerance: spec.gap_tolerance,
        verdict,
    })
}

// ---- Kac -------------------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KacRow {
    pub n: usize,
    pub mass: f64,
    pub weighted_partial_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KacExperimentReport {
    pub rows: Vec<KacRow>,
    pub set: Vec<Symbol>,
    pub mass_of_set: f64,
    pub total_mass: f64,
    pub weighted_sum: f64,
    pub tail_bound: f64,
    /// `Σ n μ(A_n) + tail ≥ ‖μ‖ − 1e−8`: equality certified.
    pub equality_certified: bool,
    pub verdict: Verdict,
}

pub fn run_kac(cfg: &ExperimentConfig) -> Result<KacExperimentReport> {
    let spec = cfg
        .kac
        .as_ref()
        .ok_or_else(|| Error::Config("kac needs a \"kac\" section".into()))?;
    let mu = spec.measure.resolve(&cfg.shift, cfg.truncation_index)?;
    let r = kac_return_masses(&mu, &spec.set, spec.n_max)?;
    let rows = r
        .masses
        .iter()
        .zip(r.weighted_partial_sums())
        .enumerate()
        .map(|(i, (&mass, s))| KacRow {
            n: i + 1,
            mass,
            weighted_partial_sum: s,
        })
        .collect();
    let total = mu.total_mass();
    Ok(KacExperimentReport {
        rows,
        set: spec.set.clone(),
        mass_of_set: r.mass_of_k,
        total_mass: total,
        weighted_sum: r.weighted_sum,
        tail_bound: r.tail_bound,
        equality_certified: r.weighted_sum + r.tail_bound >= total - 1e-8,
        verdict: Verdict::from_bool(r.weighted_sum <= total + 1e-12),
    })
}

// ---- suspension ----------------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuspendReport {
    pub rows: Vec<FlowRow>,
    pub limit_roof_integral: f64,
    pub tail_liminf_roof_integral: f64,
    pub liminf_inequality_holds: bool,
    pub liminf_strict: bool,
    pub limit_flow_entropy: Option<f64>,
    pub tail_limsup_flow_entropy: f64,
    pub vague_gap_decreasing: bool,
    pub tail_rule: &'static str,
    pub tolerance: f64,
    pub verdict: Verdict,
}

pub fn run_suspend(cfg: &ExperimentConfig) -> Result<SuspendReport> {
    let seq = cfg.sequence()?;
    let roof = cfg
        .roof
        .as_ref()
        .ok_or_else(|| Error::Config("suspend needs a \"roof\"".into()))?;
    let ti = cfg.truncation_index;
    let indices = seq.indices();
    let measures = indices
        .par_iter()
        .map(|&n| seq.member(n, &cfg.shift, ti))
        .collect::<Result<Vec<_>>>()?;
    let entropies = measures.iter().map(exact_entropy).collect::<Result<Vec<_>>>()?;
    let limit = cfg.limit_measure()?;
    let tolerance = cfg.tolerance.unwrap_or(CLOSED_FORM_TOLERANCE);
    let rep = flow_semicontinuity_check(
        &measures,
        &entropies,
        &limit,
        exact_entropy(&limit)?,
        roof,
        &cfg.shift,
        ti,
        cfg.vague_depth,
        tolerance,
    )?;
    let verdict = Verdict::from_bool(rep.holds());
    let rows = rep
        .rows
        .into_iter()
        .map(|mut r| {
            r.index = indices[r.index];
            r
        })
        .collect();
    Ok(SuspendReport {
        rows,
        limit_roof_integral: rep.limit_roof_integral,
        tail_liminf_roof_integral: rep.tail_liminf_roof_integral,
        liminf_inequality_holds: rep.liminf_inequality_holds,
        liminf_strict: rep.liminf_strict,
        limit_flow_entropy: rep.limit_flow_entropy,
        tail_limsup_flow_entropy: rep.tail_limsup_flow_entropy,
        vague_gap_decreasing: rep.vague_gap_decreasing,
        tail_rule: TAIL_RULE,
        tolerance,
        verdict,
    })
}

// ---- output ----------------------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// The result of one run, ready to be written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: ExperimentKind,
    pub verdict: Verdict,
    /// Table rows as JSON objects, in output order.
    pub rows: Vec<serde_json::Value>,
    /// Column order for CSV.
    pub columns: Vec<&'static str>,
    pub summary: serde_json::Value,
}

fn split<R: Serialize>(rows: &[R], report: &impl Serialize) -> Result<(Vec<serde_json::Value>, serde_json::Value)> {
    let rows = rows
        .iter()
        .map(serde_json::to_value)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut summary = serde_json::to_value(report)?;
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("rows");
    }
    Ok((rows, summary))
}

const SEMI_COLUMNS: &[&str] = &[
    "index",
    "total_mass",
    "vague_gap",
    "entropy_exact",
    "estimator",
    "entropy_estimate",
    "error",
];
const SWEEP_COLUMNS: &[&str] = &[
    "measure_id",
    "estimator",
    "n",
    "k",
    "delta",
    "value",
    "count",
    "mass_deficit",
];
const GIBBS_COLUMNS: &[&str] = &[
    "case_id",
    "pressure",
    "log_g",
    "depth_tested",
    "worst_word",
    "growth_rate",
    "gibbs_verdict",
    "equilibrium_gap",
    "classification",
];
const KAC_COLUMNS: &[&str] = &["n", "mass", "weighted_partial_sum"];
const SUSPEND_COLUMNS: &[&str] = &["index", "vague_gap", "roof_integral", "base_entropy", "flow_entropy"];

/// Runs one experiment and packages its table and summary.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<Outcome> {
    let (verdict, (rows, summary), columns) = match kind {
        ExperimentKind::Semicontinuity => {
            let r = run_semicontinuity(cfg)?;
            (r.verdict, split(&r.rows, &r)?, SEMI_COLUMNS)
        }
        ExperimentKind::Sweep => {
            let r = run_sweep(cfg)?;
            (r.verdict, split(&r.rows, &r)?, SWEEP_COLUMNS)
        }
        ExperimentKind::GibbsAudit => {
            let r = run_gibbs_audit(cfg)?;
            (r.verdict, split(&r.rows, &r)?, GIBBS_COLUMNS)
        }
        ExperimentKind::Kac => {
            let r = run_kac(cfg)?;
            (r.verdict, split(&r.rows, &r)?, KAC_COLUMNS)
        }
        ExperimentKind::Suspend => {
            let r = run_suspend(cfg)?;
            (r.verdict, split(&r.rows, &r)?, SUSPEND_COLUMNS)
        }
    };
    let mut summary = summary;
    if let Some(obj) = summary.as_object_mut() {
        obj.insert("experiment".into(), kind.name().into());
        obj.insert("seed".into(), cfg.seed.into());
    }
    Ok(Outcome {
        kind,
        verdict,
        rows,
        columns: columns.to_vec(),
        summary,
    })
}

fn cell(v: Option<&serde_json::Value>) -> String {
    match v {
        None | Some(serde_json::Value::Null) => String::new(),
        Some(serde_json::Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

impl Outcome {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(self.columns.iter().map(|c| cell(row.get(*c))))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }

    /// Writes `<experiment>.csv|json` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<()> {
        fs::create_dir_all(dir)?;
        let (ext, body) = match format {
            OutputFormat::Csv => ("csv", self.to_csv()?),
            OutputFormat::Json => ("json", self.to_json()?),
        };
        fs::write(dir.join(format!("{}.{ext}", self.kind.name())), body)?;
        let mut summary = self.summary.clone();
        if let Some(obj) = summary.as_object_mut() {
            obj.insert("verdict".into(), serde_json::to_value(self.verdict)?);
        }
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn semi(family: &str, h_inf: Option<f64>) -> ExperimentConfig {
        let h = h_inf
            .map(|h| format!(r#","entropy_at_infinity":{h}"#))
            .unwrap_or_default();
        ExperimentConfig::from_json_str(&format!(
            r#"{{"shift":{{"alphabet":{{"kind":"countable"}},"successors":{{"rule":"full"}},"truncations":[4]}},
                "sequence":{{{family},"start":1,"end":30}}{h}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn bernoulli_approach_holds() {
        let r = run_semicontinuity(&semi(r#""family":"bernoulli_approach""#, None)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let hs: Vec<f64> = r.rows.iter().map(|r| r.entropy_exact.unwrap()).collect();
        assert!(hs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn escaping_orbit_equality_at_zero() {
        let r = run_semicontinuity(&semi(r#""family":"escaping_orbit","alpha":0.4"#, Some(0.0))).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        for row in &r.rows {
            assert!((row.entropy_exact.unwrap() - 0.6 * 2f64.ln()).abs() < 1e-15);
        }
        assert!((r.bound.unwrap() - r.tail_max_entropy).abs() < 1e-12);
        let r = run_semicontinuity(&semi(r#""family":"escaping_orbit","alpha":0.4"#, None)).unwrap();
        assert_eq!(r.verdict, Verdict::InequalityFormOnly);
    }

    #[test]
    fn escaping_block_threshold() {
        let m = 3usize;
        let fam = format!(r#""family":"escaping_block","alpha":0.4,"width":{m}"#);
        let l = ((m + 1) as f64).ln();
        assert_eq!(
            run_semicontinuity(&semi(&fam, Some(l - 0.01))).unwrap().verdict,
            Verdict::Violated
        );
        assert_eq!(
            run_semicontinuity(&semi(&fam, Some(l))).unwrap().verdict,
            Verdict::Holds
        );
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"shift":{"alphabet":{"kind":"finite","size":2},"successors":{"rule":"full"}},
                "sweep":{"measures":[{"id":"u","measure":{"kind":"bernoulli","weights":[0.5,0.5]}}]}}"#,
        )
        .unwrap();
        let out = run(ExperimentKind::Sweep, &cfg).unwrap();
        assert_eq!(
            out.to_csv().unwrap(),
            "measure_id,estimator,n,k,delta,value,count,mass_deficit\n"
        );
    }
}
