//! Cure-fraction estimation: the naive plateau estimate p̂ₙ, the data-driven
//! window width ε*, and the extrapolated estimate p̂_G(ε) obtained by a
//! geometric (Gumbel-type tail) extension of the fitted curve beyond the last
//! observation.
//!
//! Writing a = F̂(t₍ₙ₎−ε), b = F̂(t₍ₙ₎−ε/2), c = F̂(t₍ₙ₎), the extrapolant is
//!
//!   p̂_G(ε) = a + (b−a)² / (2b − a − c),
//!
//! i.e. the limit of the geometric series continuing the increments
//! (b−a), (c−b), … with ratio (c−b)/(b−a). The result is clamped back into
//! [p̂ₙ, 1] and the applied clamp is reported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::km::StepFunction;

/// Which rule produced an ε value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonBranch {
    /// 2(t₍ₙ₎ − t̃₍K₎) < t₍ₙ₎, so ε* = (9/8)·t₍ₙ₎ − (1/4)·t̃₍K₎.
    StarRule,
    /// Follow-up too short for the star rule; ε* falls back to t₍ₙ₎.
    TMaxFallback,
    /// ε supplied by the caller.
    UserSupplied,
}

impl std::fmt::Display for EpsilonBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EpsilonBranch::StarRule => "star_rule",
            EpsilonBranch::TMaxFallback => "t_max_fallback",
            EpsilonBranch::UserSupplied => "user_supplied",
        })
    }
}

/// An ε value together with the rule that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonChoice {
    epsilon: f64,
    branch: EpsilonBranch,
}

impl EpsilonChoice {
    /// Wraps a caller-chosen ε (must be finite and positive).
    pub fn user_supplied(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::invalid(format!(
                "epsilon must be finite and positive, got {epsilon}"
            )));
        }
        Ok(EpsilonChoice { epsilon, branch: EpsilonBranch::UserSupplied })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn branch(&self) -> EpsilonBranch {
        self.branch
    }
}

/// Data-driven window width.
///
/// With t = largest observation and t̃ = largest *event* time:
/// if 2(t − t̃) < t the window ε* = (9/8)t − (1/4)t̃ is used — it always
/// satisfies 2(t − t̃) < ε* < t, so the right evaluation point t − ε*/2 stays
/// inside the plateau while t − ε* stays inside the observed range. When the
/// follow-up is too short for that (2(t − t̃) ≥ t), ε* falls back to t itself.
pub fn epsilon_star(t_max: f64, t_max_event: Option<f64>) -> Result<EpsilonChoice> {
    let te = t_max_event.ok_or(Error::MissingEventTime)?;
    if !t_max.is_finite() || !te.is_finite() || te <= 0.0 || te > t_max {
        return Err(Error::invalid(format!(
            "need 0 < largest event time <= largest time, got {te} and {t_max}"
        )));
    }
    if 2.0 * (t_max - te) < t_max {
        Ok(EpsilonChoice {
            epsilon: 1.125 * t_max - 0.25 * te,
            branch: EpsilonBranch::StarRule,
        })
    } else {
        Ok(EpsilonChoice { epsilon: t_max, branch: EpsilonBranch::TMaxFallback })
    }
}

/// Naive cure-complement estimate: the fitted curve at the largest
/// observation (the plateau height when the last observation is censored).
pub fn phat_naive(f: &StepFunction, t_max: f64) -> f64 {
    f.eval(t_max)
}

/// Geometric extrapolation from the triple (a, b, c) = (F̂(t−ε), F̂(t−ε/2),
/// F̂(t)). Returns `None` when the denominator 2b − a − c vanishes.
///
/// When b = c the series ratio is 0 and the formula reduces *algebraically*
/// to b; that reduction is applied before dividing so a flat right window
/// yields exactly the plateau value rather than a rounded near-plateau value.
pub fn gumbel_extrapolate(a: f64, b: f64, c: f64) -> Option<f64> {
    if b == c {
        // 2b − a − c = b − a here; zero iff the whole window is flat.
        return if a == b { None } else { Some(b) };
    }
    let denom = 2.0 * b - a - c;
    if denom == 0.0 {
        return None;
    }
    let gap = b - a;
    Some(a + gap * gap / denom)
}

/// Which clamp, if any, produced the reported p̂_G from the raw extrapolant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clamp {
    /// Raw value already in [p̂ₙ, 1].
    None,
    /// 2b − a − c = 0: extrapolation undefined, fall back to p̂ₙ.
    DenominatorZero,
    /// Raw value below p̂ₙ: lifted to p̂ₙ.
    BelowNaive,
    /// Raw value above 1: capped at 1.
    AboveOne,
}

impl std::fmt::Display for Clamp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Clamp::None => "none",
            Clamp::DenominatorZero => "denominator_zero",
            Clamp::BelowNaive => "below_naive",
            Clamp::AboveOne => "above_one",
        })
    }
}

/// The pair of cure-complement estimates for one sample and window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CureRateEstimate {
    /// Plateau estimate p̂ₙ = F̂(t₍ₙ₎).
    pub p_naive: f64,
    /// Extrapolated estimate after clamping into [p̂ₙ, 1].
    pub p_gumbel: f64,
    /// Unclamped extrapolant; `None` when the denominator vanished.
    pub p_gumbel_raw: Option<f64>,
    /// The window the estimate was computed with.
    pub epsilon: EpsilonChoice,
    /// Which clamp fired (checked in the order denominator/below/above).
    pub clamp: Clamp,
}

/// Evaluates the extrapolated estimate p̂_G(ε) for a fitted curve.
///
/// `p_naive` is taken as an argument rather than recomputed so that callers
/// who already evaluated the plateau share the identical value. ε larger
/// than `t_max` is tolerated (evaluation points before time 0 read as 0);
/// that occurs in bootstrap resamples run under a held-fixed window.
pub fn phat_gumbel(
    f: &StepFunction,
    t_max: f64,
    epsilon: EpsilonChoice,
    p_naive: f64,
) -> CureRateEstimate {
    let eps = epsilon.epsilon();
    debug_assert!(eps > 0.0);
    let a = f.eval(t_max - eps);
    let b = f.eval(t_max - eps / 2.0);
    let c = f.eval(t_max);
    let (p_gumbel, p_gumbel_raw, clamp) = match gumbel_extrapolate(a, b, c) {
        None => (p_naive, None, Clamp::DenominatorZero),
        Some(raw) if raw < p_naive => (p_naive, Some(raw), Clamp::BelowNaive),
        Some(raw) if raw > 1.0 => (1.0, Some(raw), Clamp::AboveOne),
        Some(raw) => (raw, Some(raw), Clamp::None),
    };
    CureRateEstimate { p_naive, p_gumbel, p_gumbel_raw, epsilon, clamp }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(knots: &[f64], values: &[f64]) -> StepFunction {
        StepFunction::new(knots.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn epsilon_star_worked_examples() {
        // Long plateau: (9/8)·18.92 − (1/4)·12.50 = 18.16.
        let e = epsilon_star(18.92, Some(12.50)).unwrap();
        assert_eq!(e.branch(), EpsilonBranch::StarRule);
        assert!((e.epsilon() - 18.16).abs() < 5e-3);

        // Short plateau but still star-eligible: 2(18.92−18.25) = 1.34 < 18.92;
        // ε* = 21.285 − 4.5625 = 16.7225.
        let e = epsilon_star(18.92, Some(18.25)).unwrap();
        assert_eq!(e.branch(), EpsilonBranch::StarRule);
        assert!((e.epsilon() - 16.72).abs() < 5e-3);

        // No plateau to speak of: 2(10−4) = 12 ≥ 10 → fall back to t.
        let e = epsilon_star(10.0, Some(4.0)).unwrap();
        assert_eq!(e.branch(), EpsilonBranch::TMaxFallback);
        assert_eq!(e.epsilon(), 10.0);
    }

    #[test]
    fn epsilon_star_rejects_bad_inputs() {
        assert!(matches!(
            epsilon_star(10.0, None),
            Err(Error::MissingEventTime)
        ));
        assert!(epsilon_star(10.0, Some(11.0)).is_err());
        assert!(epsilon_star(10.0, Some(0.0)).is_err());
        assert!(epsilon_star(f64::INFINITY, Some(1.0)).is_err());
    }

    #[test]
    fn user_supplied_epsilon_validation() {
        assert!(EpsilonChoice::user_supplied(0.0).is_err());
        assert!(EpsilonChoice::user_supplied(-1.0).is_err());
        assert!(EpsilonChoice::user_supplied(f64::NAN).is_err());
        let e = EpsilonChoice::user_supplied(2.5).unwrap();
        assert_eq!(e.epsilon(), 2.5);
        assert_eq!(e.branch(), EpsilonBranch::UserSupplied);
    }

    #[test]
    fn extrapolation_worked_example() {
        // (0.5, 0.75, 0.875): increments 1/4, 1/8 → geometric sum to 1.
        assert_eq!(gumbel_extrapolate(0.5, 0.75, 0.875), Some(1.0));
    }

    #[test]
    fn extrapolation_flat_window_is_undefined() {
        assert_eq!(gumbel_extrapolate(0.25, 0.25, 0.25), None);
        assert_eq!(gumbel_extrapolate(0.0, 0.0, 0.0), None);
    }

    #[test]
    fn extrapolation_flat_right_half_returns_plateau_exactly() {
        // b == c reduces algebraically to b, bit-for-bit — no division noise.
        let b = 2.0 / 3.0;
        assert_eq!(gumbel_extrapolate(1.0 / 3.0, b, b), Some(b));
        let b = 0.1 + 0.2; // deliberately non-representable-looking value
        assert_eq!(gumbel_extrapolate(0.05, b, b), Some(b));
    }

    #[test]
    fn extrapolation_zero_denominator_nonflat() {
        // a=0, b=1/3, c=2/3: increments equal → ratio 1, no finite limit.
        assert_eq!(gumbel_extrapolate(0.0, 1.0 / 3.0, 2.0 / 3.0), None);
    }

    #[test]
    fn phat_gumbel_no_clamp() {
        let f = step(&[1.0, 2.0, 3.0], &[0.5, 0.75, 0.875]);
        let eps = EpsilonChoice::user_supplied(2.0).unwrap();
        let est = phat_gumbel(&f, 3.0, eps, phat_naive(&f, 3.0));
        assert_eq!(est.p_naive, 0.875);
        assert_eq!(est.p_gumbel, 1.0);
        assert_eq!(est.p_gumbel_raw, Some(1.0));
        assert_eq!(est.clamp, Clamp::None);
    }

    #[test]
    fn phat_gumbel_clamps_above_one() {
        // (0.5, 0.8, 0.95): ratio 1/2 from a larger first increment → raw 1.1.
        let f = step(&[1.0, 2.0, 3.0], &[0.5, 0.8, 0.95]);
        let eps = EpsilonChoice::user_supplied(2.0).unwrap();
        let est = phat_gumbel(&f, 3.0, eps, phat_naive(&f, 3.0));
        assert!((est.p_gumbel_raw.unwrap() - 1.1).abs() < 1e-15);
        assert_eq!(est.p_gumbel, 1.0);
        assert_eq!(est.clamp, Clamp::AboveOne);
    }

    #[test]
    fn phat_gumbel_clamps_below_naive() {
        // (0.5, 0.7, 0.95): accelerating increments flip the denominator sign
        // and push the raw value below the plateau → lift to p̂ₙ.
        let f = step(&[1.0, 2.0, 3.0], &[0.5, 0.7, 0.95]);
        let eps = EpsilonChoice::user_supplied(2.0).unwrap();
        let est = phat_gumbel(&f, 3.0, eps, phat_naive(&f, 3.0));
        assert!(est.p_gumbel_raw.unwrap() < 0.95);
        assert_eq!(est.p_gumbel, 0.95);
        assert_eq!(est.clamp, Clamp::BelowNaive);
    }

    #[test]
    fn phat_gumbel_denominator_zero_falls_back() {
        // Whole window flat at 0.25 → undefined extrapolation → p̂ₙ.
        let f = step(&[0.1], &[0.25]);
        let eps = EpsilonChoice::user_supplied(2.0).unwrap();
        let est = phat_gumbel(&f, 3.0, eps, phat_naive(&f, 3.0));
        assert_eq!(est.p_gumbel, 0.25);
        assert_eq!(est.p_gumbel_raw, None);
        assert_eq!(est.clamp, Clamp::DenominatorZero);
    }

    // ── Properties ──────────────────────────────────────────────────────────

    proptest! {
        #[test]
        fn epsilon_star_lands_in_the_admissible_interval(
            t in 0.1f64..1e6,
            // u > 1/2 with margin keeps the star branch active and the strict
            // inequalities robust to rounding.
            u in 0.500001f64..=1.0,
        ) {
            let te = t * u;
            let e = epsilon_star(t, Some(te)).unwrap();
            prop_assert_eq!(e.branch(), EpsilonBranch::StarRule);
            prop_assert!(2.0 * (t - te) < e.epsilon());
            prop_assert!(e.epsilon() < t);
        }

        #[test]
        fn epsilon_star_scales_exactly_under_dyadic_rescaling(
            t in 0.1f64..1e6,
            u in 0.1f64..=1.0,
            k in prop::sample::select(vec![0.25f64, 0.5, 2.0, 8.0]),
        ) {
            // Multiplying all times by a power of two is exact in IEEE
            // arithmetic, so the chosen window must scale bit-for-bit.
            let te = t * u;
            let base = epsilon_star(t, Some(te)).unwrap();
            let scaled = epsilon_star(k * t, Some(k * te)).unwrap();
            prop_assert_eq!(scaled.branch(), base.branch());
            prop_assert_eq!(scaled.epsilon(), k * base.epsilon());
        }

        #[test]
        fn extrapolant_is_clamped_into_unit_interval(
            a in 0.0f64..=1.0,
            db in 0.0f64..=0.5,
            dc in 0.0f64..=0.5,
            eps in 0.1f64..10.0,
        ) {
            // Build a nondecreasing triple, place it on a step function, and
            // check p̂ₙ ≤ p̂_G ≤ 1 regardless of which clamp fires.
            let b = (a + db).min(1.0);
            let c = (b + dc).min(1.0);
            let f = step(&[1.0, 1.5, 2.0], &[a, b, c]);
            let epsc = EpsilonChoice::user_supplied(eps).unwrap();
            let p_naive = phat_naive(&f, 2.0);
            let est = phat_gumbel(&f, 2.0, epsc, p_naive);
            prop_assert!(est.p_gumbel >= est.p_naive);
            prop_assert!(est.p_gumbel <= 1.0);
            prop_assert!(est.p_naive == p_naive);
        }
    }
}
