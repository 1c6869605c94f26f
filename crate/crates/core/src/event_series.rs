//! Event-series ingestion and inter-event durations.
//!
//! An [`EventSeries`] is an ordered list of event timestamps (seconds, or
//! abstract time units) together with the observation window they were
//! recorded in. [`InterEventSeries`] holds the durations between successive
//! events, derived under an explicit tie policy: day-resolution logs produce
//! exact zero gaps, which are either kept as-is or broken by seeded jitter.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from parsing and series construction.
#[derive(Debug, Error)]
pub enum EventSeriesError {
    #[error("row {row}: malformed record: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("no rows matched network id {0:?}")]
    EmptySelection(String),

    #[error("row {row}: non-finite timestamp")]
    NonFiniteTimestamp { row: usize },

    #[error("window ({0}, {1}) excludes some events")]
    WindowExcludesEvents(f64, f64),

    #[error("window ({0}, {1}) is not a valid interval")]
    InvalidWindow(f64, f64),

    #[error("need at least {need} events, got {got}")]
    InsufficientEvents { need: usize, got: usize },

    #[error("window has zero length")]
    ZeroLengthWindow,

    #[error("series is empty")]
    EmptySeries,
}

/// How duplicate (zero-gap) timestamps are treated when deriving durations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Keep zero durations exactly as observed.
    KeepZeros,
    /// Perturb each timestamp by an independent uniform offset on
    /// `[0, resolution)` before differencing, so all durations are strictly
    /// positive. `resolution` is one unit of the raw data's time grid
    /// (86400 for day-resolution logs stored in seconds).
    Jitter { seed: u64, resolution: f64 },
}

impl TiePolicy {
    /// Jitter with a unit time grid.
    pub fn jitter(seed: u64) -> Self {
        TiePolicy::Jitter {
            seed,
            resolution: 1.0,
        }
    }
}

/// An ordered series of event timestamps within an observation window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventSeries {
    network_id: String,
    timestamps: Vec<f64>,
    window: (f64, f64),
}

impl EventSeries {
    /// Validates and constructs a series. Timestamps are sorted internally;
    /// every timestamp must lie inside `window`, and the window must be a
    /// proper interval when the series is non-empty.
    pub fn new(
        network_id: impl Into<String>,
        mut timestamps: Vec<f64>,
        window: (f64, f64),
    ) -> Result<Self, EventSeriesError> {
        if timestamps.iter().any(|t| !t.is_finite()) {
            return Err(EventSeriesError::NonFiniteTimestamp { row: 0 });
        }
        timestamps.sort_unstable_by(f64::total_cmp);
        let (t0, t1) = window;
        if !t0.is_finite() || !t1.is_finite() || (!timestamps.is_empty() && t0 >= t1) {
            return Err(EventSeriesError::InvalidWindow(t0, t1));
        }
        if let (Some(first), Some(last)) = (timestamps.first(), timestamps.last()) {
            if *first < t0 || *last > t1 {
                return Err(EventSeriesError::WindowExcludesEvents(t0, t1));
            }
        }
        Ok(Self {
            network_id: network_id.into(),
            timestamps,
            window,
        })
    }

    /// Convenience constructor: window spans the data exactly.
    pub fn from_timestamps(
        network_id: impl Into<String>,
        timestamps: Vec<f64>,
    ) -> Result<Self, EventSeriesError> {
        if timestamps.is_empty() {
            return Err(EventSeriesError::EmptySeries);
        }
        let lo = timestamps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = timestamps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // A single event (or all-tied events) spans no interval; widen so the
        // window stays a proper interval.
        let window = if lo == hi { (lo, hi + 1.0) } else { (lo, hi) };
        Self::new(network_id, timestamps, window)
    }

    pub fn network_id(&self) -> &str {
        &self.network_id
    }

    /// Sorted, non-decreasing event times.
    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Maximum-likelihood event rate: `n / (t_end - t_start)`.
    pub fn mle_rate(&self) -> Result<f64, EventSeriesError> {
        if self.timestamps.is_empty() {
            return Err(EventSeriesError::EmptySeries);
        }
        let span = self.window.1 - self.window.0;
        if span <= 0.0 {
            return Err(EventSeriesError::ZeroLengthWindow);
        }
        Ok(self.timestamps.len() as f64 / span)
    }

    /// Durations between successive events under the given tie policy.
    ///
    /// Under [`TiePolicy::Jitter`] every timestamp is first perturbed by an
    /// independent uniform offset on `[0, resolution)`, the perturbed times
    /// are re-sorted, and the differences of those are returned; all
    /// durations are then strictly positive almost surely.
    pub fn inter_event_times(
        &self,
        policy: TiePolicy,
    ) -> Result<InterEventSeries, EventSeriesError> {
        let n = self.timestamps.len();
        if n < 2 {
            return Err(EventSeriesError::InsufficientEvents { need: 2, got: n });
        }
        let durations = match policy {
            TiePolicy::KeepZeros => self
                .timestamps
                .windows(2)
                .map(|w| w[1] - w[0])
                .collect::<Vec<_>>(),
            TiePolicy::Jitter { seed, resolution } => {
                let mut rng = crate::seeded_rng(seed, 0);
                let mut jittered: Vec<f64> = self
                    .timestamps
                    .iter()
                    .map(|t| t + rng.random::<f64>() * resolution)
                    .collect();
                jittered.sort_unstable_by(f64::total_cmp);
                jittered.windows(2).map(|w| w[1] - w[0]).collect()
            }
        };
        Ok(InterEventSeries {
            durations,
            source_count: n,
            tie_policy: policy,
        })
    }
}

/// Ordered inter-event durations derived from an [`EventSeries`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterEventSeries {
    durations: Vec<f64>,
    source_count: usize,
    tie_policy: TiePolicy,
}

impl InterEventSeries {
    /// Wraps raw durations (all must be finite and non-negative).
    pub fn from_durations(durations: Vec<f64>) -> Result<Self, EventSeriesError> {
        if durations.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(EventSeriesError::NonFiniteTimestamp { row: 0 });
        }
        let source_count = durations.len() + 1;
        Ok(Self {
            durations,
            source_count,
            tie_policy: TiePolicy::KeepZeros,
        })
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    /// Number of events in the parent series.
    pub fn source_count(&self) -> usize {
        self.source_count
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    pub fn mean(&self) -> f64 {
        self.durations.iter().sum::<f64>() / self.durations.len() as f64
    }
}

/// Timestamp formats accepted by [`parse_events`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeFormat {
    /// Try numeric seconds first, then ISO-8601.
    Auto,
    /// Numeric seconds since epoch (or any abstract origin).
    EpochSeconds,
    /// `YYYY-MM-DD` (maps to midnight UTC) or `YYYY-MM-DDTHH:MM:SS`.
    Iso8601,
}

/// Ingestion configuration for [`parse_events`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Which network id to extract.
    pub network: String,
    /// Column delimiter (default `,`).
    pub delimiter: char,
    /// Whether the first row is a `network_id,timestamp` header.
    pub has_header: bool,
    pub time_format: TimeFormat,
    /// Observation window override; defaults to the data span.
    pub window: Option<(f64, f64)>,
}

impl IngestConfig {
    pub fn new(network: impl Into<String>) -> Self {
        Self {
            network: network.into(),
            delimiter: ',',
            has_header: true,
            time_format: TimeFormat::Auto,
            window: None,
        }
    }
}

/// Granularity of the timestamps that were actually parsed, used to pick a
/// jitter resolution that matches the data grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeResolution {
    /// At least one record carried a sub-day or numeric timestamp.
    Unit,
    /// Every record was a date-only ISO string (midnight-aligned seconds).
    Day,
}

impl TimeResolution {
    /// Width of one grid cell in series time units.
    pub fn seconds(self) -> f64 {
        match self {
            TimeResolution::Unit => 1.0,
            TimeResolution::Day => 86_400.0,
        }
    }
}

/// Parses delimiter-separated `network_id,timestamp` rows, keeping rows whose
/// network id matches the config, and reports the detected time resolution.
///
/// Row indices in errors are 1-based over the raw input, header included.
pub fn parse_events_with_meta(
    text: &str,
    config: &IngestConfig,
) -> Result<(EventSeries, TimeResolution), EventSeriesError> {
    let mut timestamps = Vec::new();
    let mut all_day_resolution = true;
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if config.has_header && idx == 0 {
            continue;
        }
        let mut parts = line.splitn(2, config.delimiter);
        let id = parts.next().unwrap_or("").trim();
        let raw_ts = parts
            .next()
            .ok_or_else(|| EventSeriesError::MalformedRow {
                row,
                reason: format!("expected 2 columns separated by {:?}", config.delimiter),
            })?
            .trim();
        if id != config.network {
            continue;
        }
        let (ts, day_res) = parse_timestamp(raw_ts, config.time_format, row)?;
        if !ts.is_finite() {
            return Err(EventSeriesError::NonFiniteTimestamp { row });
        }
        all_day_resolution &= day_res;
        timestamps.push(ts);
    }
    if timestamps.is_empty() {
        return Err(EventSeriesError::EmptySelection(config.network.clone()));
    }
    let resolution = if all_day_resolution {
        TimeResolution::Day
    } else {
        TimeResolution::Unit
    };
    let series = match config.window {
        Some(window) => EventSeries::new(&config.network, timestamps, window)?,
        None => EventSeries::from_timestamps(&config.network, timestamps)?,
    };
    Ok((series, resolution))
}

/// [`parse_events_with_meta`] without the resolution metadata.
pub fn parse_events(text: &str, config: &IngestConfig) -> Result<EventSeries, EventSeriesError> {
    parse_events_with_meta(text, config).map(|(series, _)| series)
}

/// Returns `(seconds, was_date_only)`.
fn parse_timestamp(
    raw: &str,
    format: TimeFormat,
    row: usize,
) -> Result<(f64, bool), EventSeriesError> {
    let numeric = || -> Option<f64> { raw.parse::<f64>().ok() };
    let iso = || -> Option<(f64, bool)> {
        if let Ok(date) = chrono::NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
            let midnight = date.and_hms_opt(0, 0, 0).expect("midnight is valid");
            return Some((midnight.and_utc().timestamp() as f64, true));
        }
        if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S") {
            return Some((dt.and_utc().timestamp() as f64, false));
        }
        None
    };
    let parsed = match format {
        TimeFormat::EpochSeconds => numeric().map(|v| (v, false)),
        TimeFormat::Iso8601 => iso(),
        TimeFormat::Auto => numeric().map(|v| (v, false)).or_else(iso),
    };
    parsed.ok_or_else(|| EventSeriesError::MalformedRow {
        row,
        reason: format!("unparseable timestamp {raw:?}"),
    })
}
