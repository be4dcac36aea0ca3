//! Data model for right-censored survival samples.
//!
//! A sample is a list of `(time, status)` pairs: the observed time is the
//! minimum of the latent failure time and the censoring time, and the status
//! records which of the two it was. Everything downstream (product-limit
//! estimation, the follow-up test, the simulation harness) consumes the
//! validated, sorted [`SurvivalSample`] built here.
//!
//! File format: CSV with header `time,status`, one record per observation,
//! decimal point `.`, status `1` = event and `0` = censored; LF and CRLF both
//! accepted.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether an observed time is an event or a right-censoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The failure was observed (δ = 1).
    Event,
    /// Follow-up ended before the failure (δ = 0).
    Censored,
}

/// One observation: a strictly positive, finite time plus its status.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    time: f64,
    status: Status,
}

impl Observation {
    /// Builds an observation, rejecting non-finite or non-positive times.
    pub fn new(time: f64, status: Status) -> Result<Self> {
        if !time.is_finite() || time <= 0.0 {
            return Err(Error::NonPositiveTime { line: 0, value: time });
        }
        Ok(Observation { time, status })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_event(&self) -> bool {
        self.status == Status::Event
    }
}

/// A validated sample of `n >= 1` observations, sorted ascending by time with
/// events placed before censorings at tied times.
///
/// The tie order is the standard product-limit convention and is what makes
/// the at-risk counts well defined under ties; it is established once at
/// construction, so downstream consumers may rely on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSample {
    observations: Vec<Observation>,
}

/// Descriptive statistics of a sample, in reporting-friendly form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    /// Number of observations.
    pub n: usize,
    /// Number of events (uncensored observations).
    pub n_events: usize,
    /// `(n - n_events) / n`.
    pub censoring_rate: f64,
    /// Largest observed time, censored or not.
    pub t_max: f64,
    /// Largest event time; `None` when the sample has no events.
    pub t_max_event: Option<f64>,
    /// Median of the event times (mid-average for even counts); `None` when
    /// the sample has no events.
    pub median_event_time: Option<f64>,
    /// Number of censored observations strictly beyond the largest event
    /// time, i.e. sitting on the Kaplan-Meier plateau. With no events the
    /// whole curve is plateau, so the count is the full censored count.
    pub plateau_censored_count: usize,
}

impl SurvivalSample {
    /// Builds a sample from observations, sorting them into canonical order.
    ///
    /// Errors with [`Error::EmptySample`] on empty input. Observations are
    /// assumed individually valid (see [`Observation::new`]).
    pub fn new(mut observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        observations.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then_with(|| b.is_event().cmp(&a.is_event()))
        });
        Ok(SurvivalSample { observations })
    }

    /// Convenience constructor from `(time, is_event)` pairs.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, bool)>,
    {
        let observations = pairs
            .into_iter()
            .map(|(time, is_event)| {
                Observation::new(time, if is_event { Status::Event } else { Status::Censored })
            })
            .collect::<Result<Vec<_>>>()?;
        SurvivalSample::new(observations)
    }

    /// Parses the `time,status` CSV format.
    ///
    /// Row order in the file is irrelevant; the constructed sample is always
    /// in canonical order.
    pub fn load_csv<R: io::Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);

        {
            let headers = reader.headers().map_err(csv_error)?;
            let fields: Vec<&str> = headers.iter().collect();
            if fields != ["time", "status"] {
                return Err(Error::MalformedRow {
                    line: 1,
                    reason: format!("expected header \"time,status\", got {:?}", fields.join(",")),
                });
            }
        }

        let mut observations = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 2 {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("expected 2 columns, got {}", record.len()),
                });
            }
            let time: f64 = record[0].parse().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("unparseable time {:?}", &record[0]),
            })?;
            if !time.is_finite() || time <= 0.0 {
                return Err(Error::NonPositiveTime { line, value: time });
            }
            let status = match &record[1] {
                "1" => Status::Event,
                "0" => Status::Censored,
                token => {
                    return Err(Error::UnknownStatus { line, token: token.to_string() });
                }
            };
            observations.push(Observation { time, status });
        }
        SurvivalSample::new(observations)
    }

    /// Writes the sample back out in the same CSV format (canonical order).
    ///
    /// Times are printed with Rust's shortest round-trip float formatting, so
    /// `load_csv(to_csv(s)) == s` exactly.
    pub fn to_csv<W: io::Write>(&self, sink: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(sink);
        writer
            .write_record(["time", "status"])
            .map_err(csv_error)?;
        for obs in &self.observations {
            let status = if obs.is_event() { "1" } else { "0" };
            writer
                .write_record([obs.time.to_string().as_str(), status])
                .map_err(csv_error)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn n_events(&self) -> usize {
        self.observations.iter().filter(|o| o.is_event()).count()
    }

    /// Largest observed time (event or censored).
    pub fn t_max(&self) -> f64 {
        self.observations[self.observations.len() - 1].time
    }

    /// Largest event time, if any event was observed.
    pub fn t_max_event(&self) -> Option<f64> {
        self.observations
            .iter()
            .rev()
            .find(|o| o.is_event())
            .map(|o| o.time)
    }

    /// Computes the descriptive summary.
    pub fn summarize(&self) -> SampleSummary {
        let n = self.n();
        let mut event_times: Vec<f64> = self
            .observations
            .iter()
            .filter(|o| o.is_event())
            .map(|o| o.time)
            .collect();
        event_times.sort_by(f64::total_cmp);
        let n_events = event_times.len();
        let t_max_event = event_times.last().copied();
        let median_event_time = match n_events {
            0 => None,
            k if k % 2 == 1 => Some(event_times[k / 2]),
            k => Some((event_times[k / 2 - 1] + event_times[k / 2]) / 2.0),
        };
        let plateau_censored_count = match t_max_event {
            Some(te) => self
                .observations
                .iter()
                .filter(|o| !o.is_event() && o.time > te)
                .count(),
            None => n,
        };
        SampleSummary {
            n,
            n_events,
            censoring_rate: (n - n_events) as f64 / n as f64,
            t_max: self.t_max(),
            t_max_event,
            median_event_time,
            plateau_censored_count,
        }
    }
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => Error::Io(io_err),
        kind => Error::MalformedRow { line, reason: format!("{kind:?}") },
    }
}
