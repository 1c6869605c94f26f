//! Kolmogorov tests against the homogeneous-Poisson null.
//!
//! Two checks are exposed: arrival times against the uniform law on the
//! observation window, and inter-event durations against an exponential law
//! whose rate is supplied or fitted by maximum likelihood. P-values use the
//! asymptotic Kolmogorov tail series with the Stephens small-sample factor
//! `sqrt(n) + 0.12 + 0.11/sqrt(n)`; with an MLE-fitted rate they are
//! conservative (the estimated-parameter situation), which is documented
//! rather than corrected.

use crate::event_series::{EventSeries, InterEventSeries};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatTestError {
    #[error("sample is empty")]
    EmptySample,

    #[error("null CDF decreases at sample index {index}")]
    NonMonotoneCdf { index: usize },

    #[error("null CDF value {value} at sample index {index} is outside [0, 1]")]
    CdfOutOfRange { index: usize, value: f64 },

    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },

    #[error("observation window has zero length")]
    DegenerateWindow,

    #[error("all durations are zero; fitted exponential rate is infinite")]
    AllZeroDurations,
}

/// Which null hypothesis a [`KolmogorovResult`] tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullFamily {
    UniformArrivals,
    ExponentialInterevents,
}

/// Outcome of a Kolmogorov test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KolmogorovResult {
    /// Sup-distance of the empirical CDF from the null CDF, in [0, 1].
    pub statistic: f64,
    pub p_value: f64,
    /// Sample size.
    pub n: usize,
    pub null_family: NullFamily,
    /// Rate used for the exponential null; absent for uniform arrivals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_rate: Option<f64>,
}

/// Exact sup-distance between the empirical CDF of an ascending `sample`
/// and a monotone null CDF evaluated pointwise by `null_cdf`:
/// `D = max_i max(i/n - F(x_i), F(x_i) - (i-1)/n)`.
pub fn ks_statistic<F>(sample: &[f64], null_cdf: F) -> Result<f64, StatTestError>
where
    F: Fn(f64) -> f64,
{
    if sample.is_empty() {
        return Err(StatTestError::EmptySample);
    }
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    let mut prev = f64::NEG_INFINITY;
    for (i, &x) in sample.iter().enumerate() {
        let f = null_cdf(x);
        if f < prev - 1e-12 {
            return Err(StatTestError::NonMonotoneCdf { index: i });
        }
        if !(-1e-12..=1.0 + 1e-12).contains(&f) {
            return Err(StatTestError::CdfOutOfRange { index: i, value: f });
        }
        let f = f.clamp(0.0, 1.0);
        prev = f;
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sided Kolmogorov p-value for statistic `d` on a sample of size `n`:
/// `Q(lambda) = 2 Σ_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)` with
/// `lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) d`, truncated once a term drops
/// below 1e-16 in magnitude and clamped to [0, 1].
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    debug_assert!((0.0..=1.0).contains(&d));
    debug_assert!(n >= 1);
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    // Below this the tail mass is within 1e-50 of 1 and the series needs
    // hundreds of terms; cut straight to the limit.
    if lambda < 0.1 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    let mut sign = 1.0f64;
    for k in 1..=1000 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Tests event arrival times against the uniform law on the window.
pub fn test_arrival_uniformity(series: &EventSeries) -> Result<KolmogorovResult, StatTestError> {
    let n = series.len();
    if n < 2 {
        return Err(StatTestError::TooFewObservations { need: 2, got: n });
    }
    let (t0, t1) = series.window();
    let span = t1 - t0;
    if span <= 0.0 {
        return Err(StatTestError::DegenerateWindow);
    }
    let d = ks_statistic(series.timestamps(), |x| (x - t0) / span)?;
    Ok(KolmogorovResult {
        statistic: d,
        p_value: ks_pvalue(d, n),
        n,
        null_family: NullFamily::UniformArrivals,
        fitted_rate: None,
    })
}

/// Tests inter-event durations against `F(t) = 1 - exp(-rate t)`. When
/// `rate` is `None` it is fitted as `1 / mean(durations)` and recorded on
/// the result.
pub fn test_interevent_exponential(
    iets: &InterEventSeries,
    rate: Option<f64>,
) -> Result<KolmogorovResult, StatTestError> {
    let n = iets.len();
    if n < 2 {
        return Err(StatTestError::TooFewObservations { need: 2, got: n });
    }
    let lambda = match rate {
        Some(r) => r,
        None => {
            let mean = iets.mean();
            if mean <= 0.0 {
                return Err(StatTestError::AllZeroDurations);
            }
            1.0 / mean
        }
    };
    let mut sorted = iets.durations().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let d = ks_statistic(&sorted, |t| 1.0 - (-lambda * t).exp())?;
    Ok(KolmogorovResult {
        statistic: d,
        p_value: ks_pvalue(d, n),
        n,
        null_family: NullFamily::ExponentialInterevents,
        fitted_rate: Some(lambda),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_series::TiePolicy;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn statistic_hand_enumerated_example() {
        // Steps at 0.1, 0.2, 0.9 against F(x) = x: the largest gap is
        // 2/3 - 0.2 just after the second point.
        let d = ks_statistic(&[0.1, 0.2, 0.9], |x| x).unwrap();
        assert_close(d, 2.0 / 3.0 - 0.2, 1e-12);
    }

    #[test]
    fn statistic_mid_quantile_grid() {
        // Sample at the F-quantiles of (i - 1/2)/n leaves D = 1/(2n).
        let n = 8;
        let sample: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let d = ks_statistic(&sample, |x| x).unwrap();
        assert_close(d, 1.0 / (2.0 * n as f64), 1e-12);
    }

    #[test]
    fn statistic_single_point() {
        let d = ks_statistic(&[3.0], |_| 0.5).unwrap();
        assert_close(d, 0.5, 1e-12);
    }

    #[test]
    fn statistic_rejects_bad_cdfs() {
        assert!(matches!(
            ks_statistic(&[], |x| x),
            Err(StatTestError::EmptySample)
        ));
        assert!(matches!(
            ks_statistic(&[0.1, 0.2], |x| if x > 0.15 { 0.1 } else { 0.9 }),
            Err(StatTestError::NonMonotoneCdf { index: 1 })
        ));
        assert!(matches!(
            ks_statistic(&[0.1], |_| 1.5),
            Err(StatTestError::CdfOutOfRange { .. })
        ));
    }

    #[test]
    fn statistic_invariant_under_monotone_transform() {
        let sample = [0.05, 0.3, 0.31, 0.7, 0.95];
        let d1 = ks_statistic(&sample, |x| x).unwrap();
        let transformed: Vec<f64> = sample.iter().map(|x| x.powi(3)).collect();
        let d2 = ks_statistic(&transformed, |y| y.cbrt()).unwrap();
        assert_close(d1, d2, 1e-12);
    }

    #[test]
    fn pvalue_reference_points() {
        assert_eq!(ks_pvalue(0.0, 10), 1.0);
        // Oracle values from summing the tail series to convergence.
        assert_close(ks_pvalue(0.136, 100), 0.044886509575881764, 1e-12);
        assert!((ks_pvalue(0.136, 100) - 0.05).abs() < 0.01);
        // At the classical 5% critical point 1.36/sqrt(n) without the
        // small-sample factor the series gives 0.0494; the factor tightens it.
        assert!(ks_pvalue(0.2037, 916) < 1e-12);
        assert_close(ks_pvalue(0.08115, 916), 1.0439327920605135e-5, 1e-12);
    }

    #[test]
    fn pvalue_degenerate_ends() {
        assert_eq!(ks_pvalue(0.0, 1_000_000), 1.0);
        assert!(ks_pvalue(1.0, 1_000_000) < 1e-300);
    }

    #[test]
    fn arrival_uniformity_best_and_worst_case() {
        // Events on the mid-quantile grid of the window: D = 1/(2n), p ~ 1.
        let n = 40usize;
        let ts: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64 * 100.0).collect();
        let series = EventSeries::new("x", ts, (0.0, 100.0)).unwrap();
        let res = test_arrival_uniformity(&series).unwrap();
        assert_close(res.statistic, 1.0 / (2.0 * n as f64), 1e-12);
        assert!(res.p_value > 0.999);
        assert_eq!(res.null_family, NullFamily::UniformArrivals);
        assert!(res.fitted_rate.is_none());

        // Everything piled at the right edge: D -> 1, p ~ 0.
        let clustered = EventSeries::new("x", vec![100.0; n], (0.0, 100.0)).unwrap();
        let res = test_arrival_uniformity(&clustered).unwrap();
        assert!(res.statistic > 0.97);
        assert!(res.p_value < 1e-12);
    }

    #[test]
    fn interevent_constant_durations() {
        let iets = InterEventSeries::from_durations(vec![1.0; 5]).unwrap();
        let res = test_interevent_exponential(&iets, None).unwrap();
        assert_eq!(res.fitted_rate, Some(1.0));
        assert_close(res.statistic, 1.0 - (-1.0f64).exp(), 1e-9);
    }

    #[test]
    fn interevent_constructed_best_case() {
        // Durations at the exponential mid-quantiles of the fitted rate are
        // as close to the null as a discrete sample can be.
        let n = 64usize;
        let quantiles: Vec<f64> = (1..=n)
            .map(|i| -(1.0 - (i as f64 - 0.5) / n as f64).ln())
            .collect();
        let iets = InterEventSeries::from_durations(quantiles).unwrap();
        let res = test_interevent_exponential(&iets, None).unwrap();
        // Fitting shifts the rate slightly away from 1, so allow slack on
        // top of the 1/(2n) grid bound.
        assert!(res.statistic <= 1.0 / (2.0 * n as f64) + 0.02);
        assert!(res.p_value > 0.9);
    }

    #[test]
    fn interevent_all_zero_is_an_error() {
        let iets = InterEventSeries::from_durations(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            test_interevent_exponential(&iets, None),
            Err(StatTestError::AllZeroDurations)
        ));
    }

    #[test]
    fn interevent_supplied_rate_is_recorded() {
        let iets = InterEventSeries::from_durations(vec![0.5, 1.5, 3.0]).unwrap();
        let res = test_interevent_exponential(&iets, Some(2.0)).unwrap();
        assert_eq!(res.fitted_rate, Some(2.0));
    }

    #[test]
    fn zero_durations_are_admitted_as_ties() {
        let series =
            EventSeries::from_timestamps("x", vec![0.0, 1.0, 1.0, 2.0, 5.0, 9.0]).unwrap();
        let iets = series.inter_event_times(TiePolicy::KeepZeros).unwrap();
        let res = test_interevent_exponential(&iets, None).unwrap();
        assert!(res.statistic > 0.0 && res.statistic <= 1.0);
    }

    #[test]
    fn result_serializes_with_spec_field_names() {
        let iets = InterEventSeries::from_durations(vec![1.0, 2.0, 4.0]).unwrap();
        let res = test_interevent_exponential(&iets, None).unwrap();
        let json = serde_json::to_value(&res).unwrap();
        assert!(json["statistic"].is_number());
        assert!(json["p_value"].is_number());
        assert_eq!(json["n"], 3);
        assert_eq!(json["null_family"], "exponential-interevents");
        assert!(json["fitted_rate"].is_number());

        let series = EventSeries::from_timestamps("x", vec![0.0, 1.0, 3.0]).unwrap();
        let json = serde_json::to_value(test_arrival_uniformity(&series).unwrap()).unwrap();
        assert_eq!(json["null_family"], "uniform-arrivals");
        assert!(json.get("fitted_rate").is_none());
    }
}
