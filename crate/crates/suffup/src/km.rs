//! Product-limit (Kaplan-Meier) estimation of the improper distribution F,
//! right-continuous step-function evaluation, and the plug-in variance
//! process v̂(t).
//!
//! The estimator is F̂(t) = 1 − ∏_{t̃₍ᵢ₎ ≤ t} (1 − dᵢ/Dᵢ), a product over the
//! distinct event times t̃₍ᵢ₎ with dᵢ events out of Dᵢ at risk. With a cure
//! fraction the limit is improper (total mass < 1): the curve plateaus after
//! the last event, and the plateau height is the naive non-cure estimate.

use serde::{Deserialize, Serialize};

use crate::data::{Observation, Status, SurvivalSample};
use crate::error::{Error, Result};

// ── Risk table ──────────────────────────────────────────────────────────────

/// One distinct event time with its event and at-risk counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskRow {
    /// Distinct event time t̃₍ᵢ₎.
    pub time: f64,
    /// dᵢ: number of events at this time.
    pub events: usize,
    /// Dᵢ: number of observations with time ≥ t̃₍ᵢ₎ (ties at t̃₍ᵢ₎ —
    /// censored or not — count as at risk there).
    pub at_risk: usize,
}

/// The event-time/at-risk table underlying a product-limit fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RiskTable {
    rows: Vec<RiskRow>,
}

impl RiskTable {
    pub fn rows(&self) -> &[RiskRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Builds the risk table of a sample. Samples without events yield an empty
/// table.
pub fn risk_table(sample: &SurvivalSample) -> RiskTable {
    let obs = sample.observations();
    let n = obs.len();
    let mut rows = Vec::new();
    let mut i = 0;
    while i < n {
        let t = obs[i].time();
        let mut j = i;
        let mut events = 0;
        while j < n && obs[j].time() == t {
            if obs[j].is_event() {
                events += 1;
            }
            j += 1;
        }
        if events > 0 {
            // Everything sorted at or after position i has time >= t.
            rows.push(RiskRow { time: t, events, at_risk: n - i });
        }
        i = j;
    }
    RiskTable { rows }
}

// ── Step functions ──────────────────────────────────────────────────────────

/// A right-continuous nondecreasing step map on [0, ∞) with values in [0, 1].
///
/// The value before the first knot is 0; at and after knot `k` the value is
/// `values[k]`. Knot lookup is by binary search with exact IEEE time
/// equality — knots originate from input data verbatim, so no epsilon is
/// wanted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// Builds a step function from parallel knot/value arrays, validating the
    /// invariants (strictly ascending finite knots; values nondecreasing in
    /// [0, 1]).
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::invalid("knots and values must have equal length"));
        }
        if !knots.iter().all(|k| k.is_finite()) {
            return Err(Error::invalid("knots must be finite"));
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("knots must be strictly ascending"));
        }
        if !values.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(Error::invalid("values must lie in [0, 1]"));
        }
        if !values.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::invalid("values must be nondecreasing"));
        }
        Ok(StepFunction { knots, values })
    }

    /// Internal constructor for fit output, which holds the invariants by
    /// construction.
    fn from_fit(knots: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(knots.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        StepFunction { knots, values }
    }

    /// Right-continuous evaluation: the value at the last knot ≤ `t`, or 0
    /// when `t` lies before every knot.
    pub fn eval(&self, t: f64) -> f64 {
        match self.knots.partition_point(|k| *k <= t) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }

    /// Left-limit evaluation: the value strictly before `t`.
    pub fn eval_left(&self, t: f64) -> f64 {
        match self.knots.partition_point(|k| *k < t) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Value after the last jump (0 for an empty function).
    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

// ── Product-limit fit ───────────────────────────────────────────────────────

/// Largest integer magnitude a f64 represents exactly; the exact-arithmetic
/// path below stays inside it.
const MAX_EXACT: u128 = 1 << 53;

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Running survival product over the risk table, one output value per row.
///
/// The survival ∏(1 − dᵢ/Dᵢ) is tracked as a gcd-reduced u128 rational for as
/// long as numerator and denominator fit in 2^53, and each emitted value is
/// the single correctly rounded division (den−num)/den. This keeps the fit
/// *exact* where exactness is observable: censoring-free samples reduce to
/// k/n (bitwise equal to the empirical CDF), and small fixtures yield exact
/// rationals like 1/3. Once a reduced term outgrows 2^53 the fit continues
/// with an ordinary floating product; values stay monotone via clamping (the
/// float path can under-round by an ulp at a step boundary).
fn fit_values(table: &RiskTable) -> Vec<f64> {
    let mut out = Vec::with_capacity(table.len());
    // Some((num, den)) while exact; None after falling back to floats.
    let mut exact: Option<(u128, u128)> = Some((1, 1));
    let mut survival = 1.0_f64;
    let mut prev = 0.0_f64;
    for row in table.rows() {
        let d = row.events as u128;
        let at_risk = row.at_risk as u128;
        let mut value = match exact {
            Some((num, den)) => {
                let (rn, rd) = {
                    let n2 = num * (at_risk - d);
                    let d2 = den * at_risk;
                    let g = gcd(n2, d2);
                    (n2 / g, d2 / g)
                };
                if rn <= MAX_EXACT && rd <= MAX_EXACT {
                    exact = Some((rn, rd));
                    ((rd - rn) as f64) / (rd as f64)
                } else {
                    survival = (num as f64 / den as f64)
                        * (1.0 - d as f64 / at_risk as f64);
                    exact = None;
                    1.0 - survival
                }
            }
            None => {
                survival *= 1.0 - d as f64 / at_risk as f64;
                1.0 - survival
            }
        };
        value = value.max(prev).min(1.0);
        prev = value;
        out.push(value);
    }
    out
}

/// Fits the product-limit estimator F̂ of the (improper) failure
/// distribution. Jumps sit at the distinct event times only; a sample without
/// events yields the zero function.
pub fn km_fit(sample: &SurvivalSample) -> StepFunction {
    let table = risk_table(sample);
    let knots = table.rows().iter().map(|r| r.time).collect();
    let values = fit_values(&table);
    StepFunction::from_fit(knots, values)
}

/// Fits the censoring distribution F̂_c by the reverse product-limit: the same
/// machinery with event/censored roles swapped (so at tied times the
/// censorings-as-events now follow the canonical re-sort of the flipped
/// sample).
pub fn censoring_km(sample: &SurvivalSample) -> StepFunction {
    let flipped: Vec<Observation> = sample
        .observations()
        .iter()
        .map(|o| {
            let status = match o.status() {
                Status::Event => Status::Censored,
                Status::Censored => Status::Event,
            };
            Observation::new(o.time(), status).expect("times already validated")
        })
        .collect();
    let sample = SurvivalSample::new(flipped).expect("flipping preserves non-emptiness");
    km_fit(&sample)
}

// ── Variance process ────────────────────────────────────────────────────────

/// Value of the plug-in variance process at a point, plus whether any term
/// had to be dropped for a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub truncated: bool,
}

/// Plug-in variance process
/// v̂(t) = Σ_{t̃₍ᵢ₎ ≤ t} ΔF̂(t̃₍ᵢ₎) / [(1−F̂(t̃₍ᵢ₎))·(1−F̂(t̃₍ᵢ₎⁻))·(1−F̂_c(t̃₍ᵢ₎⁻))].
///
/// Terms with a zero denominator (e.g. the last event when F̂ reaches 1) are
/// excluded and reported through the truncation flag rather than propagating
/// infinities; the diagnostics that consume v̂ are advisory.
pub fn variance_process(sample: &SurvivalSample, t: f64) -> VarianceEstimate {
    let f = km_fit(sample);
    let fc = censoring_km(sample);
    variance_process_with(&f, &fc, t)
}

/// As [`variance_process`], with the two fitted curves supplied by the caller
/// (used where several evaluation points share one fit).
pub(crate) fn variance_process_with(
    f: &StepFunction,
    fc: &StepFunction,
    t: f64,
) -> VarianceEstimate {
    let mut value = 0.0;
    let mut truncated = false;
    let mut prev = 0.0;
    for (&knot, &v) in f.knots().iter().zip(f.values()) {
        if knot > t {
            break;
        }
        let denom = (1.0 - v) * (1.0 - prev) * (1.0 - fc.eval_left(knot));
        if denom == 0.0 {
            truncated = true;
        } else {
            value += (v - prev) / denom;
        }
        prev = v;
    }
    VarianceEstimate { value, truncated }
}
