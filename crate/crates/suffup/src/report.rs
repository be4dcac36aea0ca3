//! Plain-text rendering of summaries, test results, diagnostics, and power
//! reports. Text mode rounds to 4 decimals for display; the JSON envelopes
//! (assembled by the CLI) carry full precision.

use std::fmt::Write;

use crate::data::SampleSummary;
use crate::followup::{AsymptoticDiagnostic, TestResult};
use crate::sim::PowerReport;

const KEY_WIDTH: usize = 22;

fn push_line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key:<KEY_WIDTH$}: {value}");
}

fn num(x: f64) -> String {
    format!("{x:.4}")
}

fn opt_num(x: Option<f64>) -> String {
    match x {
        Some(v) => num(v),
        None => "none".to_string(),
    }
}

/// Renders a [`SampleSummary`] as aligned key/value lines.
pub fn render_summary(summary: &SampleSummary) -> String {
    let mut out = String::new();
    push_line(&mut out, "n", summary.n);
    push_line(&mut out, "events", summary.n_events);
    push_line(&mut out, "censoring_rate", num(summary.censoring_rate));
    push_line(&mut out, "t_max", num(summary.t_max));
    push_line(&mut out, "t_max_event", opt_num(summary.t_max_event));
    push_line(&mut out, "median_event_time", opt_num(summary.median_event_time));
    push_line(&mut out, "plateau_censored_count", summary.plateau_censored_count);
    out
}

/// Renders a [`TestResult`] (with its sample's summary for context).
pub fn render_test(result: &TestResult, summary: &SampleSummary) -> String {
    let mut out = String::new();
    push_line(&mut out, "n", summary.n);
    push_line(&mut out, "events", summary.n_events);
    push_line(&mut out, "censoring_rate", num(summary.censoring_rate));
    let eps = result.estimate.epsilon;
    push_line(
        &mut out,
        "epsilon",
        format!("{} ({})", num(eps.epsilon()), eps.branch()),
    );
    push_line(&mut out, "p_naive", num(result.estimate.p_naive));
    push_line(&mut out, "p_gumbel", num(result.estimate.p_gumbel));
    push_line(&mut out, "p_gumbel_raw", opt_num(result.estimate.p_gumbel_raw));
    push_line(&mut out, "clamp", result.estimate.clamp);
    push_line(&mut out, "t_n", num(result.t_n_stat));
    push_line(&mut out, "critical_value", num(result.critical_value));
    push_line(&mut out, "p_value", num(result.p_value));
    push_line(&mut out, "reject_h0", result.reject);
    push_line(&mut out, "alpha", num(result.alpha));
    push_line(&mut out, "bootstrap_replicates", result.n_bootstrap);
    push_line(&mut out, "degenerate_replicates", result.n_degenerate_replicates);
    push_line(&mut out, "seed", result.seed);
    out
}

/// Renders the plug-in diagnostics block; `None` means the window was flat
/// so the diagnostics are undefined.
pub fn render_diagnostic(diagnostic: Option<&AsymptoticDiagnostic>) -> String {
    let mut out = String::new();
    match diagnostic {
        None => push_line(
            &mut out,
            "diagnostic",
            "unavailable (flat window: 2b - a - c = 0)",
        ),
        Some(d) => {
            push_line(&mut out, "s1", num(d.s1));
            push_line(&mut out, "s2", num(d.s2));
            push_line(&mut out, "s3", num(d.s3));
            push_line(&mut out, "bias", num(d.bias));
            push_line(&mut out, "variance", num(d.variance));
            push_line(&mut out, "variance_truncated", d.truncated);
        }
    }
    out
}

/// Renders a [`PowerReport`].
pub fn render_power(report: &PowerReport) -> String {
    let mut out = String::new();
    push_line(&mut out, "scenario", report.scenario.label());
    push_line(&mut out, "failure", report.scenario.failure());
    push_line(&mut out, "censoring", report.scenario.censoring());
    push_line(&mut out, "p", num(report.scenario.p()));
    push_line(&mut out, "n", report.scenario.n());
    push_line(&mut out, "runs", report.config.runs());
    push_line(&mut out, "bootstrap_replicates", report.config.n_bootstrap());
    push_line(&mut out, "alpha", num(report.config.alpha()));
    push_line(&mut out, "seed", report.config.seed());
    push_line(&mut out, "rejection_rate", num(report.rejection_rate));
    push_line(&mut out, "mc_standard_error", num(report.mc_standard_error));
    push_line(&mut out, "mean_censoring_rate", num(report.mean_censoring_rate));
    push_line(&mut out, "mean_cure_fraction", num(report.mean_cure_fraction_observed));
    push_line(&mut out, "runs_completed", report.runs_completed);
    out
}
