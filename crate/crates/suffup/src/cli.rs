//! Command-line front end: `test` (run the follow-up test on a CSV file),
//! `km` (export the fitted curve), `simulate` (Monte Carlo level/power), and
//! `summarize` (sample statistics).
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 output I/O error.
//! `SUFFUP_THREADS` caps the worker-thread count (default: machine
//! parallelism); results are byte-identical regardless of the cap.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cure::EpsilonChoice;
use crate::data::SurvivalSample;
use crate::error::Error;
use crate::followup::{
    asymptotic_diagnostic, bootstrap_test_with, AsymptoticDiagnostic, BootstrapOptions,
};
use crate::km::km_fit;
use crate::report;
use crate::sim::{
    rejection_rate, resolve_preset, CensoringModel, FailureModel, MonteCarloConfig, Scenario,
};

#[derive(Parser)]
#[command(
    name = "suffup",
    version,
    about = "Test for sufficient follow-up in right-censored survival data with a cure fraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the bootstrap-calibrated follow-up test on a survival CSV file
    Test(TestArgs),
    /// Export the fitted Kaplan-Meier curve as a plot-ready CSV
    Km(KmArgs),
    /// Estimate empirical level/power of the test on a simulated scenario
    Simulate(SimulateArgs),
    /// Print summary statistics of a survival CSV file
    Summarize(SummarizeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct TestArgs {
    /// Input CSV with header `time,status` (status: 1 event, 0 censored)
    #[arg(long)]
    input: PathBuf,
    /// Nominal level of the test
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Number of bootstrap replicates
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    /// Master RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extrapolation window; defaults to the data-driven choice
    #[arg(long)]
    epsilon: Option<f64>,
    /// Hold the window fixed across bootstrap replicates instead of
    /// re-deriving it from each resample
    #[arg(long)]
    fixed_epsilon: bool,
    /// Also report the plug-in asymptotic diagnostics (bias, variance)
    #[arg(long)]
    diagnostic: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct KmArgs {
    /// Input CSV with header `time,status`
    #[arg(long)]
    input: PathBuf,
    /// Output CSV path (`t,F_hat` rows starting at (0,0))
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Benchmark cell, e.g. table1:h0:lambda2.5:p0.9 (optional :nNNN suffix)
    #[arg(long)]
    preset: Option<String>,
    /// Failure law: weibull:<shape>:<scale>, exponential:<rate>, or
    /// lognormal:<mu>:<sigma>
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    failure: Option<String>,
    /// Censoring law: weibull:<shape>:<scale> or uniform:<lo>:<hi>
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    censor: Option<String>,
    /// Non-cure probability in (0,1)
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    p: Option<f64>,
    /// Sample size per run (with --preset: overrides the preset's size)
    #[arg(long)]
    n: Option<usize>,
    /// Number of Monte Carlo runs
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Bootstrap replicates per run
    #[arg(long, default_value_t = 199)]
    bootstrap: usize,
    /// Nominal level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Master RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Input CSV with header `time,status`
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// A command failure carrying its exit code; the message goes to stderr.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn data_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn output_error(message: impl Into<String>) -> Failure {
    Failure { code: 3, message: message.into() }
}

/// Runs the CLI on the given argument list and returns the process exit
/// code. Pure plumbing apart from the global thread-pool cap, which is
/// installed once per process.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap's own exit convention reserves 2 for usage errors; this
            // tool's contract uses 1, with 2 meaning a data error.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return 1;
    }
    let outcome = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Km(args) => cmd_km(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Summarize(args) => cmd_summarize(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

/// Applies `SUFFUP_THREADS` to the global worker pool. The pool can only be
/// installed once per process; the parsed cap is validated on every call so
/// a bad value fails loudly regardless.
fn configure_threads() -> Result<(), String> {
    let threads = match std::env::var("SUFFUP_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => {
            return Err("SUFFUP_THREADS must be valid unicode".into())
        }
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => {
                return Err(format!(
                    "SUFFUP_THREADS must be a positive integer, got '{raw}'"
                ))
            }
        },
    };
    static POOL: OnceLock<Result<(), String>> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())
    })
    .clone()
}

fn load_sample(path: &Path) -> Result<SurvivalSample, Failure> {
    let file = std::fs::File::open(path)
        .map_err(|e| data_error(format!("cannot read {}: {e}", path.display())))?;
    SurvivalSample::load_csv(std::io::BufReader::new(file))
        .map_err(|e| data_error(e.to_string()))
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--alpha must lie strictly between 0 and 1, got {alpha}")))
    }
}

/// JSON payload of `test` (stable key order; full precision).
#[derive(Serialize)]
struct TestEnvelope {
    t_n: f64,
    p_naive: f64,
    p_gumbel: f64,
    p_gumbel_raw: Option<f64>,
    epsilon: f64,
    epsilon_branch: String,
    clamp: String,
    critical_value: f64,
    p_value: f64,
    reject: bool,
    alpha: f64,
    n_bootstrap: usize,
    n_degenerate_replicates: usize,
    seed: u64,
    n: usize,
    n_events: usize,
    /// Omitted unless requested; null when the window is flat.
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<Option<AsymptoticDiagnostic>>,
}

fn print_json<T: Serialize>(payload: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(payload).expect("report types serialize infallibly")
    );
}

fn cmd_test(args: TestArgs) -> Result<(), Failure> {
    check_alpha(args.alpha)?;
    let sample = load_sample(&args.input)?;

    let epsilon = match args.epsilon {
        None => None,
        Some(e) => {
            let choice =
                EpsilonChoice::user_supplied(e).map_err(|err| usage(err.to_string()))?;
            if e > sample.t_max() {
                return Err(usage(format!(
                    "--epsilon {e} exceeds the largest observation {}",
                    sample.t_max()
                )));
            }
            if let Some(te) = sample.t_max_event() {
                let gap = sample.t_max() - te;
                if e <= gap || e >= sample.t_max() {
                    eprintln!(
                        "warning: epsilon {e} lies outside the recommended window \
                         ({gap}, {}); the statistic may be degenerate",
                        sample.t_max()
                    );
                }
            }
            Some(choice)
        }
    };

    let result = bootstrap_test_with(
        &sample,
        args.alpha,
        args.bootstrap,
        args.seed,
        BootstrapOptions { fixed_epsilon: args.fixed_epsilon, epsilon },
    )
    .map_err(|err| match err {
        Error::InvalidParameter(_) => usage(err.to_string()),
        other => data_error(other.to_string()),
    })?;

    let diagnostic = if args.diagnostic {
        match asymptotic_diagnostic(&sample, &result.estimate.epsilon) {
            Ok(d) => Some(Some(d)),
            Err(Error::DegenerateDenominator) => Some(None),
            Err(other) => return Err(data_error(other.to_string())),
        }
    } else {
        None
    };

    match args.format {
        Format::Text => {
            let mut text = report::render_test(&result, &sample.summarize());
            if let Some(d) = &diagnostic {
                text.push_str(&report::render_diagnostic(d.as_ref()));
            }
            print!("{text}");
        }
        Format::Json => {
            let est = &result.estimate;
            print_json(&TestEnvelope {
                t_n: result.t_n_stat,
                p_naive: est.p_naive,
                p_gumbel: est.p_gumbel,
                p_gumbel_raw: est.p_gumbel_raw,
                epsilon: est.epsilon.epsilon(),
                epsilon_branch: est.epsilon.branch().to_string(),
                clamp: est.clamp.to_string(),
                critical_value: result.critical_value,
                p_value: result.p_value,
                reject: result.reject,
                alpha: result.alpha,
                n_bootstrap: result.n_bootstrap,
                n_degenerate_replicates: result.n_degenerate_replicates,
                seed: result.seed,
                n: sample.n(),
                n_events: sample.n_events(),
                diagnostic,
            });
        }
    }
    Ok(())
}

fn cmd_km(args: KmArgs) -> Result<(), Failure> {
    let sample = load_sample(&args.input)?;
    let f = km_fit(&sample);
    let mut out = String::from("t,F_hat\n0,0\n");
    for (knot, value) in f.knots().iter().zip(f.values()) {
        let _ = writeln!(out, "{knot},{value}");
    }
    std::fs::write(&args.out, out)
        .map_err(|e| output_error(format!("cannot write {}: {e}", args.out.display())))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    check_alpha(args.alpha)?;
    let scenario = match &args.preset {
        Some(name) => {
            let preset = resolve_preset(name).map_err(|err| usage(err.to_string()))?;
            match args.n {
                Some(n) => preset.with_n(n).map_err(|err| usage(err.to_string()))?,
                None => preset,
            }
        }
        None => {
            // clap enforces presence of the scenario flags when there is no
            // preset; `--n` stays optional there only because it doubles as
            // the preset override, so check it here.
            let n = args
                .n
                .ok_or_else(|| usage("--n is required unless --preset is given"))?;
            let failure: FailureModel = args
                .failure
                .as_deref()
                .expect("clap enforces --failure")
                .parse()
                .map_err(|err: Error| usage(err.to_string()))?;
            let censoring: CensoringModel = args
                .censor
                .as_deref()
                .expect("clap enforces --censor")
                .parse()
                .map_err(|err: Error| usage(err.to_string()))?;
            let p = args.p.expect("clap enforces --p");
            let label = format!("{failure} | {censoring} | p={p} | n={n}");
            Scenario::new(failure, censoring, p, n, label)
                .map_err(|err| usage(err.to_string()))?
        }
    };
    let config = MonteCarloConfig::new(args.runs, args.bootstrap, args.alpha, args.seed)
        .map_err(|err| usage(err.to_string()))?;

    let report = rejection_rate(&scenario, &config);
    match args.format {
        Format::Text => print!("{}", report::render_power(&report)),
        Format::Json => print_json(&report),
    }
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<(), Failure> {
    let sample = load_sample(&args.input)?;
    let summary = sample.summarize();
    match args.format {
        Format::Text => print!("{}", report::render_summary(&summary)),
        Format::Json => print_json(&summary),
    }
    Ok(())
}
