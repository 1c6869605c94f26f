//! Statistical toolkit for detecting and modeling burstiness in timestamped
//! event series, built for network-security incident-report logs but agnostic
//! to the event source.
//!
//! The crate provides four layers:
//!
//! - [`event_series`]: ingestion of `(network_id, timestamp)` records into
//!   validated [`event_series::EventSeries`] values, inter-event durations,
//!   and rate estimation.
//! - Tests against the homogeneous-Poisson null: Kolmogorov tests on arrival
//!   and inter-event times ([`stat_tests`]), a one-dimensional modified
//!   Ripley K statistic over a grid of window sizes ([`ripley`]), and
//!   burstiness/memory coefficients with Monte Carlo null envelopes
//!   ([`burstiness`]).
//! - A generative continuous-time two-state (normal/excited) model with
//!   exponential waits and geometric run lengths ([`two_state`]).
//! - A Gibbs sampler that fits the two-state model to observed durations,
//!   with conjugate priors, multi-chain execution, and Gelman-Rubin
//!   convergence diagnostics ([`gibbs`]).
//!
//! All stochastic entry points take explicit `u64` seeds and are
//! bit-reproducible; parallel Monte Carlo work derives one ChaCha stream per
//! task from the master seed (see [`seeded_rng`]).

pub mod burstiness;
pub mod event_series;
pub mod gibbs;
pub mod ripley;
pub mod stat_tests;
pub mod two_state;

pub use rand_chacha::ChaCha8Rng;

/// Builds the RNG for subtask `stream` of a seeded computation.
///
/// This is the crate-wide seed-mixing convention: a ChaCha8 generator keyed
/// by the master seed, advanced to an independent stream per subtask (Monte
/// Carlo trial, sampler chain, ...). Identical `(seed, stream)` pairs always
/// yield identical draws, so parallel and sequential execution agree.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
