//! One-dimensional modified Ripley K analysis.
//!
//! For each event `x_i` and half-width `t`, `C(x_i, t)` counts the other
//! events within distance `t`. Under a homogeneous Poisson null with rate
//! `lambda`, `C ~ Poisson(2 lambda t)`, so the normalized excess
//! `(C - 2 lambda t) / sqrt(t)` has zero mean and variance `2 lambda`, and
//! its average over `N` events is treated as Gaussian with variance
//! `2 lambda / N`. P-values are one-sided (clustering is an excess of
//! neighbors). The variance treats per-event counts as independent even
//! though windows overlap; calibration of the resulting approximation is
//! checked by Monte Carlo in the test suite rather than corrected here.
//!
//! Events closer than `t` to a window boundary see a truncated window, which
//! deflates their counts; the default `InteriorOnly` policy averages only
//! over events at distance at least `t` from both boundaries, which keeps
//! the Poisson(2 lambda t) null exact. `Uncorrected` averages over all
//! events for comparison.

use crate::event_series::EventSeries;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RipleyError {
    #[error("event index {index} out of range for series of {len} events")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("window half-width must be positive, got {0}")]
    NonPositiveHalfWidth(f64),

    #[error("need at least 2 events, got {0}")]
    TooFewEvents(usize),

    #[error("no events lie at distance >= {t} from both window boundaries")]
    NoContributingEvents { t: f64 },

    #[error("grid must be non-empty, strictly increasing, and positive")]
    InvalidGrid,

    #[error(transparent)]
    Series(#[from] crate::event_series::EventSeriesError),
}

/// Boundary handling for the per-event average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgePolicy {
    /// Average only over events at distance >= t from both window edges.
    InteriorOnly,
    /// Average over every event, boundary truncation included.
    Uncorrected,
}

/// Normalized clustering statistic at one half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KmodStat {
    /// Average of `(C(x_i, t) - 2 lambda t) / sqrt(t)` over contributing events.
    pub mean_kmod: f64,
    /// `mean_kmod / sqrt(2 lambda / N)`.
    pub z: f64,
    /// One-sided upper-tail Gaussian p-value of `z`.
    pub p_value: f64,
    /// Number of events that entered the average.
    pub n_contributing: usize,
}

/// One grid point of a [`RipleyProfile`]; `stat` is `None` when the statistic
/// was unavailable at this half-width (with the reason alongside).
#[derive(Debug, Clone, Serialize)]
pub struct ProfileEntry {
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stat: Option<KmodStat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unavailable: Option<String>,
}

/// K_mod statistics across a grid of half-widths.
#[derive(Debug, Clone, Serialize)]
pub struct RipleyProfile {
    pub lambda_hat: f64,
    pub edge_policy: EdgePolicy,
    /// Entries sorted by `t` ascending.
    pub entries: Vec<ProfileEntry>,
}

impl RipleyProfile {
    /// Smallest p-value among available entries.
    pub fn min_p_value(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.stat.as_ref().map(|s| s.p_value))
            .min_by(f64::total_cmp)
    }

    /// Plot-ready CSV: one row per grid point, empty stat fields when the
    /// entry was unavailable.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,mean_kmod,z,p_value,n_contributing")?;
        for e in &self.entries {
            match &e.stat {
                Some(s) => writeln!(
                    w,
                    "{},{},{},{},{}",
                    e.t, s.mean_kmod, s.z, s.p_value, s.n_contributing
                )?,
                None => writeln!(w, "{},,,,", e.t)?,
            }
        }
        Ok(())
    }
}

/// Number of events `j != i` with `|x_i - x_j| <= t`, by binary search over
/// the sorted timestamps.
pub fn count_within(series: &EventSeries, i: usize, t: f64) -> Result<usize, RipleyError> {
    let ts = series.timestamps();
    if i >= ts.len() {
        return Err(RipleyError::IndexOutOfRange {
            index: i,
            len: ts.len(),
        });
    }
    if t <= 0.0 {
        return Err(RipleyError::NonPositiveHalfWidth(t));
    }
    let x = ts[i];
    let lo = ts.partition_point(|&v| v < x - t);
    let hi = ts.partition_point(|&v| v <= x + t);
    Ok(hi - lo - 1)
}

/// Upper-tail standard normal probability.
fn normal_upper_tail(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

/// Computes the averaged K_mod statistic at half-width `t`.
pub fn kmod_stat(
    series: &EventSeries,
    t: f64,
    edge_policy: EdgePolicy,
) -> Result<KmodStat, RipleyError> {
    let n = series.len();
    if n < 2 {
        return Err(RipleyError::TooFewEvents(n));
    }
    if t <= 0.0 {
        return Err(RipleyError::NonPositiveHalfWidth(t));
    }
    let lambda = series.mle_rate()?;
    let (w0, w1) = series.window();
    let ts = series.timestamps();

    let mut sum = 0.0f64;
    let mut contributing = 0usize;
    for i in 0..n {
        if edge_policy == EdgePolicy::InteriorOnly && (ts[i] < w0 + t || ts[i] > w1 - t) {
            continue;
        }
        let c = count_within(series, i, t)? as f64;
        sum += (c - 2.0 * lambda * t) / t.sqrt();
        contributing += 1;
    }
    if contributing == 0 {
        return Err(RipleyError::NoContributingEvents { t });
    }
    let mean_kmod = sum / contributing as f64;
    let z = mean_kmod / (2.0 * lambda / contributing as f64).sqrt();
    Ok(KmodStat {
        mean_kmod,
        z,
        p_value: normal_upper_tail(z),
        n_contributing: contributing,
    })
}

/// Default half-width grid: 20 logarithmically spaced values from
/// `span / n` to `span / 4`.
pub fn default_grid(series: &EventSeries) -> Result<Vec<f64>, RipleyError> {
    let n = series.len();
    let (w0, w1) = series.window();
    let span = w1 - w0;
    if n < 5 || span <= 0.0 {
        return Err(RipleyError::InvalidGrid);
    }
    let lo = span / n as f64;
    let hi = span / 4.0;
    let count = 20usize;
    let log_lo = lo.ln();
    let step = (hi.ln() - log_lo) / (count - 1) as f64;
    Ok((0..count).map(|k| (log_lo + step * k as f64).exp()).collect())
}

/// Evaluates [`kmod_stat`] at every grid point. A failing grid point is
/// recorded as unavailable instead of aborting the profile.
pub fn k_profile(
    series: &EventSeries,
    grid: &[f64],
    edge_policy: EdgePolicy,
) -> Result<RipleyProfile, RipleyError> {
    if grid.is_empty()
        || grid[0] <= 0.0
        || grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(RipleyError::InvalidGrid);
    }
    let lambda_hat = series.mle_rate()?;
    let entries = grid
        .iter()
        .map(|&t| match kmod_stat(series, t, edge_policy) {
            Ok(stat) => ProfileEntry {
                t,
                stat: Some(stat),
                unavailable: None,
            },
            Err(err) => ProfileEntry {
                t,
                stat: None,
                unavailable: Some(err.to_string()),
            },
        })
        .collect();
    Ok(RipleyProfile {
        lambda_hat,
        edge_policy,
        entries,
    })
}
