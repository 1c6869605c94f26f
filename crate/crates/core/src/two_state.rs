//! Generative continuous-time two-state model.
//!
//! The process alternates between a low-rate "normal" regime (state 0) and a
//! high-rate "excited" regime (state 1). While in state `s`, the wait to the
//! next event is `Exponential(lambda_s)`; after each emission the next state
//! is excited with probability `p_s`, so the number of consecutive emissions
//! in a state is geometric in the switch probability.
//!
//! Indexing convention: a trajectory of `n` events carries states
//! `S_0..S_{n-1}` and durations `d_0..d_{n-2}`, where `d_i` (the wait before
//! event `i+1`) was drawn from the rate of `S_i`. The final state emits no
//! observed duration.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;
use thiserror::Error;

/// Duration floor substituted for non-positive waits inside likelihood
/// evaluation (ties from day-resolution data under the keep-zeros policy).
pub const DURATION_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TwoStateError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("need at least 1 event, got {0}")]
    EmptyTrajectory(usize),

    #[error("states ({states}) and event times ({times}) are misaligned")]
    MisalignedLengths { states: usize, times: usize },

    #[error("state value {0} is not 0 or 1")]
    InvalidState(u8),
}

/// Rates and transition probabilities of the two-state model. State 1 is the
/// excited state; the excited-to-normal switch probability is `1 - p1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoStateParams {
    /// Event rate in the normal state (events per unit time).
    pub lambda0: f64,
    /// Event rate in the excited state.
    pub lambda1: f64,
    /// P(next state is excited | current state normal).
    pub p0: f64,
    /// P(next state is excited | current state excited).
    pub p1: f64,
}

impl TwoStateParams {
    pub fn new(lambda0: f64, lambda1: f64, p0: f64, p1: f64) -> Result<Self, TwoStateError> {
        for (name, rate) in [("lambda0", lambda0), ("lambda1", lambda1)] {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(TwoStateError::InvalidParams(format!(
                    "{name} must be a positive finite rate, got {rate}"
                )));
            }
        }
        for (name, p) in [("p0", p0), ("p1", p1)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(TwoStateError::InvalidParams(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(Self {
            lambda0,
            lambda1,
            p0,
            p1,
        })
    }

    /// Rate of state `s`.
    pub fn rate(&self, s: u8) -> f64 {
        if s == 0 {
            self.lambda0
        } else {
            self.lambda1
        }
    }

    /// P(next state excited | current state `s`).
    pub fn p_excited(&self, s: u8) -> f64 {
        if s == 0 {
            self.p0
        } else {
            self.p1
        }
    }
}

/// Initial hidden state of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    FixedNormal,
    FixedExcited,
    /// Bernoulli(0.5), matching the model's initial-state prior.
    Random,
}

/// A simulated trajectory: event times, the hidden states that generated
/// them, and the configuration needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Strictly increasing; starts at 0.
    pub event_times: Vec<f64>,
    /// One state in {0, 1} per event.
    pub states: Vec<u8>,
    pub params_used: TwoStateParams,
    pub seed: u64,
}

impl Trajectory {
    /// Durations between successive events; `durations[i]` was drawn from
    /// the rate of `states[i]`.
    pub fn durations(&self) -> Vec<f64> {
        self.event_times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Hidden states are included: simulation ground truth drives fitter
    /// validation.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "event_time,hidden_state")?;
        for (t, s) in self.event_times.iter().zip(&self.states) {
            writeln!(w, "{t},{s}")?;
        }
        Ok(())
    }
}

/// Simulates `n_events` events. Per step `i`: the wait is drawn from the
/// rate of `S_{i-1}`, then `S_i` is Bernoulli in `p_{S_{i-1}}`.
pub fn simulate(
    params: &TwoStateParams,
    n_events: usize,
    initial: InitialState,
    seed: u64,
) -> Result<Trajectory, TwoStateError> {
    if n_events == 0 {
        return Err(TwoStateError::EmptyTrajectory(0));
    }
    let mut rng = crate::seeded_rng(seed, 0);
    let mut states = Vec::with_capacity(n_events);
    let mut event_times = Vec::with_capacity(n_events);
    let first = match initial {
        InitialState::FixedNormal => 0,
        InitialState::FixedExcited => 1,
        InitialState::Random => u8::from(rng.random::<f64>() < 0.5),
    };
    states.push(first);
    event_times.push(0.0);
    for i in 1..n_events {
        let prev = states[i - 1];
        let standard_wait: f64 = Exp1.sample(&mut rng);
        let wait = standard_wait / params.rate(prev);
        event_times.push(event_times[i - 1] + wait);
        states.push(u8::from(rng.random::<f64>() < params.p_excited(prev)));
    }
    Ok(Trajectory {
        event_times,
        states,
        params_used: *params,
        seed,
    })
}

/// Lengths of maximal constant runs, partitioned by state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunLengths {
    pub normal: Vec<usize>,
    pub excited: Vec<usize>,
}

/// Scans the hidden-state sequence into per-state run lengths.
pub fn run_lengths(traj: &Trajectory) -> Result<RunLengths, TwoStateError> {
    run_lengths_of(&traj.states)
}

/// [`run_lengths`] on a bare state sequence.
pub fn run_lengths_of(states: &[u8]) -> Result<RunLengths, TwoStateError> {
    if states.is_empty() {
        return Err(TwoStateError::EmptyTrajectory(0));
    }
    if let Some(&bad) = states.iter().find(|s| **s > 1) {
        return Err(TwoStateError::InvalidState(bad));
    }
    let mut out = RunLengths {
        normal: Vec::new(),
        excited: Vec::new(),
    };
    let mut current = states[0];
    let mut len = 1usize;
    for &s in &states[1..] {
        if s == current {
            len += 1;
        } else {
            if current == 0 {
                out.normal.push(len);
            } else {
                out.excited.push(len);
            }
            current = s;
            len = 1;
        }
    }
    if current == 0 {
        out.normal.push(len);
    } else {
        out.excited.push(len);
    }
    Ok(out)
}

/// Log joint likelihood of a state sequence and the durations implied by
/// `event_times` under the model, with the initial state weighted 0.5.
///
/// Non-positive durations (possible only in ingested tie-containing data)
/// are clamped to [`DURATION_FLOOR`] and reported through a warning; seeded
/// jitter at ingestion is the recommended alternative.
pub fn loglik(
    event_times: &[f64],
    states: &[u8],
    params: &TwoStateParams,
) -> Result<f64, TwoStateError> {
    if states.len() != event_times.len() {
        return Err(TwoStateError::MisalignedLengths {
            states: states.len(),
            times: event_times.len(),
        });
    }
    if states.is_empty() {
        return Err(TwoStateError::EmptyTrajectory(0));
    }
    if let Some(&bad) = states.iter().find(|s| **s > 1) {
        return Err(TwoStateError::InvalidState(bad));
    }
    let mut clamped = 0usize;
    let mut ll = 0.5f64.ln();
    for i in 1..states.len() {
        let p = params.p_excited(states[i - 1]);
        ll += if states[i] == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    for i in 0..states.len() - 1 {
        let mut d = event_times[i + 1] - event_times[i];
        if d <= 0.0 {
            d = DURATION_FLOOR;
            clamped += 1;
        }
        let rate = params.rate(states[i]);
        ll += rate.ln() - rate * d;
    }
    if clamped > 0 {
        log::warn!("loglik clamped {clamped} non-positive durations to {DURATION_FLOOR}");
    }
    Ok(ll)
}
