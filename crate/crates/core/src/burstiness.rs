//! Burstiness and memory coefficients with Monte Carlo null envelopes.
//!
//! The burstiness coefficient compares the dispersion of inter-event times
//! with the exponential benchmark: `delta = (sigma - m) / (sigma + m)` is
//! -1 for a perfectly regular series, 0 for Poisson, and approaches +1 as
//! the dispersion blows up. The memory coefficient `mu` is the lag-1
//! Pearson correlation between consecutive durations. Both use population
//! (biased) moments, which keeps them exactly scale-invariant.
//!
//! Significance is judged against an empirical null envelope: `trials`
//! trajectories of `n_events - 1` i.i.d. exponential durations (the rate is
//! irrelevant by scale invariance), with the coverage quantiles taken by
//! nearest rank. Envelope endpoints are inclusive: a value exactly at an
//! endpoint is not significant.

use crate::event_series::InterEventSeries;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BurstinessError {
    #[error("need at least {need} durations, got {got}")]
    TooFewDurations { need: usize, got: usize },

    #[error("all durations are zero; coefficient undefined")]
    AllZeroDurations,

    #[error("memory is undefined: a lag subsequence has zero variance")]
    DegenerateMemory,

    #[error("need at least 4 events for a null envelope, got {0}")]
    TooFewEventsForEnvelope(usize),

    #[error("need at least 100 trials, got {0}")]
    TooFewTrials(usize),

    #[error("coverage must lie strictly between 0 and 1, got {0}")]
    InvalidCoverage(f64),
}

/// Burstiness and memory of one series, with its matched-n Monte Carlo
/// envelope and significance flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurstinessMemory {
    pub delta: f64,
    pub mu: f64,
    pub mc_range_delta: (f64, f64),
    pub mc_range_mu: (f64, f64),
    pub trials: usize,
    pub seed: u64,
    pub significant_delta: bool,
    pub significant_mu: bool,
}

/// Empirical null envelope for series of a fixed event count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullEnvelope {
    pub n_events: usize,
    pub trials: usize,
    pub seed: u64,
    pub coverage: f64,
    pub range_delta: (f64, f64),
    pub range_mu: (f64, f64),
}

pub(crate) fn delta_of(durations: &[f64]) -> Result<f64, BurstinessError> {
    if durations.len() < 2 {
        return Err(BurstinessError::TooFewDurations {
            need: 2,
            got: durations.len(),
        });
    }
    let n = durations.len() as f64;
    let mean = durations.iter().sum::<f64>() / n;
    let var = durations.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd + mean == 0.0 {
        return Err(BurstinessError::AllZeroDurations);
    }
    Ok((sd - mean) / (sd + mean))
}

pub(crate) fn mu_of(durations: &[f64]) -> Result<f64, BurstinessError> {
    if durations.len() < 3 {
        return Err(BurstinessError::TooFewDurations {
            need: 3,
            got: durations.len(),
        });
    }
    let lead = &durations[..durations.len() - 1];
    let trail = &durations[1..];
    let k = lead.len() as f64;
    let m1 = lead.iter().sum::<f64>() / k;
    let m2 = trail.iter().sum::<f64>() / k;
    let mut cov = 0.0;
    let mut v1 = 0.0;
    let mut v2 = 0.0;
    for (a, b) in lead.iter().zip(trail) {
        cov += (a - m1) * (b - m2);
        v1 += (a - m1) * (a - m1);
        v2 += (b - m2) * (b - m2);
    }
    if v1 == 0.0 || v2 == 0.0 {
        return Err(BurstinessError::DegenerateMemory);
    }
    Ok(cov / (v1.sqrt() * v2.sqrt()))
}

/// Burstiness coefficient `(sigma - m) / (sigma + m)` of the durations,
/// with population standard deviation.
pub fn burstiness_delta(iets: &InterEventSeries) -> Result<f64, BurstinessError> {
    delta_of(iets.durations())
}

/// Lag-1 Pearson correlation between consecutive durations, population
/// moments throughout.
pub fn memory_mu(iets: &InterEventSeries) -> Result<f64, BurstinessError> {
    mu_of(iets.durations())
}

/// Nearest-rank empirical quantile of an ascending-sorted slice.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = (q * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Simulates the homogeneous-Poisson null for series of `n_events` events
/// and returns the central `coverage` envelope of both coefficients.
///
/// Each trial draws `n_events - 1` i.i.d. exponential durations from its own
/// ChaCha stream (stream = trial index under `seed`), so the envelope is
/// deterministic and independent of evaluation order.
pub fn mc_null_envelope(
    n_events: usize,
    trials: usize,
    seed: u64,
    coverage: f64,
) -> Result<NullEnvelope, BurstinessError> {
    if n_events < 4 {
        return Err(BurstinessError::TooFewEventsForEnvelope(n_events));
    }
    if trials < 100 {
        return Err(BurstinessError::TooFewTrials(trials));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(BurstinessError::InvalidCoverage(coverage));
    }
    let k = n_events - 1;
    let pairs: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = crate::seeded_rng(seed, trial);
            let durations: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
            let d = delta_of(&durations).expect("continuous draws are non-degenerate");
            let m = mu_of(&durations).expect("continuous draws are non-degenerate");
            (d, m)
        })
        .collect();
    let mut deltas: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut mus: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    deltas.sort_unstable_by(f64::total_cmp);
    mus.sort_unstable_by(f64::total_cmp);
    let q_lo = (1.0 - coverage) / 2.0;
    let q_hi = 1.0 - q_lo;
    Ok(NullEnvelope {
        n_events,
        trials,
        seed,
        coverage,
        range_delta: (nearest_rank(&deltas, q_lo), nearest_rank(&deltas, q_hi)),
        range_mu: (nearest_rank(&mus, q_lo), nearest_rank(&mus, q_hi)),
    })
}

/// Flags the observed coefficients against an existing envelope.
pub fn assess_with_envelope(
    iets: &InterEventSeries,
    envelope: &NullEnvelope,
) -> Result<BurstinessMemory, BurstinessError> {
    let delta = burstiness_delta(iets)?;
    let mu = memory_mu(iets)?;
    let (dlo, dhi) = envelope.range_delta;
    let (mlo, mhi) = envelope.range_mu;
    Ok(BurstinessMemory {
        delta,
        mu,
        mc_range_delta: envelope.range_delta,
        mc_range_mu: envelope.range_mu,
        trials: envelope.trials,
        seed: envelope.seed,
        significant_delta: delta < dlo || delta > dhi,
        significant_mu: mu < mlo || mu > mhi,
    })
}

/// Computes both coefficients, the envelope matched on the parent series'
/// event count, and the significance flags.
pub fn assess(
    iets: &InterEventSeries,
    trials: usize,
    seed: u64,
    coverage: f64,
) -> Result<BurstinessMemory, BurstinessError> {
    let envelope = mc_null_envelope(iets.source_count(), trials, seed, coverage)?;
    assess_with_envelope(iets, &envelope)
}

/// Binned comparison of the normalized inter-event distribution with the
/// unit-rate exponential law (the shape behind a fat-tail diagnostic plot).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedInterEventProfile {
    /// `ceil(sqrt(k)) + 1` ascending edges from 0 to the maximum
    /// mean-normalized duration.
    pub bin_edges: Vec<f64>,
    /// Fraction of durations per bin; sums to 1.
    pub empirical_probs: Vec<f64>,
    /// Unit-rate exponential CDF differences over the same edges, with the
    /// tail mass beyond the last edge folded into the final bin; sums to 1.
    pub exponential_probs: Vec<f64>,
}

impl BinnedInterEventProfile {
    pub fn bin_count(&self) -> usize {
        self.empirical_probs.len()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_left,bin_right,empirical,exponential")?;
        for i in 0..self.bin_count() {
            writeln!(
                w,
                "{},{},{},{}",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                self.empirical_probs[i],
                self.exponential_probs[i]
            )?;
        }
        Ok(())
    }
}

/// Bins the mean-normalized durations into `ceil(sqrt(k))` equal-width bins
/// and tabulates empirical against exponential bin probabilities.
pub fn binned_profile(iets: &InterEventSeries) -> Result<BinnedInterEventProfile, BurstinessError> {
    let k = iets.len();
    if k < 4 {
        return Err(BurstinessError::TooFewDurations { need: 4, got: k });
    }
    let mean = iets.mean();
    if mean <= 0.0 {
        return Err(BurstinessError::AllZeroDurations);
    }
    let normalized: Vec<f64> = iets.durations().iter().map(|d| d / mean).collect();
    let max = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = (k as f64).sqrt().ceil() as usize;
    let width = max / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();

    let mut counts = vec![0usize; bins];
    for y in &normalized {
        let idx = if width > 0.0 {
            ((y / width) as usize).min(bins - 1)
        } else {
            bins - 1
        };
        counts[idx] += 1;
    }
    let empirical_probs: Vec<f64> = counts.iter().map(|c| *c as f64 / k as f64).collect();

    let cdf = |x: f64| 1.0 - (-x).exp();
    let mut exponential_probs: Vec<f64> = (0..bins)
        .map(|i| cdf(edges[i + 1]) - cdf(edges[i]))
        .collect();
    // Fold the tail beyond the last edge into the final bin so both columns
    // are proper distributions over the same support.
    *exponential_probs.last_mut().unwrap() += 1.0 - cdf(edges[bins]);

    Ok(BinnedInterEventProfile {
        bin_edges: edges,
        empirical_probs,
        exponential_probs,
    })
}
