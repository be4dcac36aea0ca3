//! Testing for *sufficient follow-up* in right-censored survival data with a
//! cure fraction.
//!
//! In cure-rate settings a fraction of subjects never experiences the event;
//! the Kaplan-Meier curve then plateaus, and the plateau height estimates the
//! non-cure probability — but only if the study followed subjects long
//! enough. This crate implements a hypothesis test of that assumption:
//!
//! * the plateau estimate p̂ₙ = F̂(t₍ₙ₎) ([`km`], [`cure`]),
//! * a tail-extrapolated estimate p̂_G(ε) that geometrically continues the
//!   fitted curve beyond the data ([`cure`]),
//! * the statistic Tₙ = p̂_G(ε) − p̂ₙ with a resampling calibration: under
//!   sufficient follow-up the extrapolation adds nothing and Tₙ ≈ 0
//!   ([`followup`]),
//! * plug-in asymptotic diagnostics (bias and sandwich variance of the
//!   extrapolant) ([`followup`]),
//! * scenario generators and a Monte Carlo harness for empirical level and
//!   power, including a 48-cell benchmark grid ([`sim`]),
//! * CSV ingestion/summaries ([`data`]) and a CLI front end ([`cli`]).
//!
//! All randomized components are deterministic functions of an explicit
//! seed, independent of thread count.
//!
//! # Quick start
//!
//! ```
//! use suffup::followup::bootstrap_test;
//! use suffup::SurvivalSample;
//!
//! // Times with events (true) and censorings (false).
//! let sample = SurvivalSample::from_pairs(
//!     (1..=30).map(|i| (0.25 * i as f64, i % 4 != 0)),
//! )?;
//! let result = bootstrap_test(&sample, 0.05, 200, 7)?;
//! println!(
//!     "T_n = {:.4}, p = {:.4}, reject H0: {}",
//!     result.t_n_stat, result.p_value, result.reject
//! );
//! # Ok::<(), suffup::Error>(())
//! ```

pub mod cli;
pub mod cure;
pub mod data;
pub mod error;
pub mod followup;
pub mod km;
pub mod report;
mod seed;
pub mod sim;

pub use cure::{Clamp, CureRateEstimate, EpsilonBranch, EpsilonChoice};
pub use data::{Observation, SampleSummary, Status, SurvivalSample};
pub use error::{Error, Result};
pub use followup::{AsymptoticDiagnostic, BootstrapOptions, TestResult};
pub use km::{RiskRow, RiskTable, StepFunction, VarianceEstimate};
pub use sim::{
    CensoringModel, FailureModel, GenStats, MonteCarloConfig, PowerReport, Preset, Scenario,
};
