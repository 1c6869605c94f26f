//! Bayesian inference for [`TwoStateParams`](crate::two_state::TwoStateParams)
//! from observed durations only.
//!
//! The sampler alternates two blocks: a left-to-right sweep that redraws each
//! hidden state from its full conditional (transition-in, transition-out, and
//! the density of the outgoing duration), and conjugate redraws of the rates
//! and transition probabilities given the state assignment. Priors are
//! `Beta(1,1)` on both transition parameters and shape-rate
//! `Gamma(1,2)` / `Gamma(3,2)` on the normal/excited rates, which puts the
//! excited prior mean (1.5) above the normal one (0.5); that asymmetry, not
//! any ordering constraint, is what breaks the label symmetry between the
//! two states. No draw is ever rejected or clamped for `lambda1 < lambda0`.
//!
//! Multiple chains run from independent random initial conditions;
//! convergence is judged by the classic potential scale reduction factor.
//! A non-converged fit is a flagged result, never a silent one.

use crate::two_state::TwoStateParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GibbsError {
    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("states ({states}) must be one longer than durations ({durations})")]
    MisalignedInputs { states: usize, durations: usize },

    #[error("state value {0} is not 0 or 1")]
    InvalidState(u8),

    #[error("site {site} has non-finite conditional likelihood")]
    NonFiniteLikelihood { site: usize },

    #[error("need at least {need} {what}, got {got}")]
    TooFew {
        what: &'static str,
        need: usize,
        got: usize,
    },

    #[error("burn-in {burn_in} must be smaller than iterations {iterations}")]
    BurnInTooLarge { burn_in: usize, iterations: usize },

    #[error("chains must have equal lengths >= 2")]
    UnequalChains,

    #[error("diagnostic undefined: all chains are constant")]
    UndefinedDiagnostic,

    #[error(transparent)]
    Model(#[from] crate::two_state::TwoStateError),
}

/// Shape-rate Gamma prior (mean = shape / rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        Gamma::new(self.shape, 1.0 / self.rate)
            .expect("validated prior")
            .sample(rng)
    }
}

/// Beta prior on a transition probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaPrior {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        Beta::new(self.alpha, self.beta)
            .expect("validated prior")
            .sample(rng)
    }
}

/// Conjugate priors for the four model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorConfig {
    /// Shared prior for both transition parameters.
    pub p_prior: BetaPrior,
    pub lambda0_prior: GammaPrior,
    pub lambda1_prior: GammaPrior,
}

impl Default for PriorConfig {
    /// Uninformative transition priors; weak but informative rate priors
    /// whose means (0.5 vs 1.5) order the states.
    fn default() -> Self {
        Self {
            p_prior: BetaPrior {
                alpha: 1.0,
                beta: 1.0,
            },
            lambda0_prior: GammaPrior {
                shape: 1.0,
                rate: 2.0,
            },
            lambda1_prior: GammaPrior {
                shape: 3.0,
                rate: 2.0,
            },
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<(), GibbsError> {
        let positive = [
            ("p alpha", self.p_prior.alpha),
            ("p beta", self.p_prior.beta),
            ("lambda0 shape", self.lambda0_prior.shape),
            ("lambda0 rate", self.lambda0_prior.rate),
            ("lambda1 shape", self.lambda1_prior.shape),
            ("lambda1 rate", self.lambda1_prior.rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(GibbsError::InvalidPrior(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.lambda1_prior.mean() < self.lambda0_prior.mean() {
            return Err(GibbsError::InvalidPrior(format!(
                "excited prior mean {} must not fall below normal prior mean {}",
                self.lambda1_prior.mean(),
                self.lambda0_prior.mean()
            )));
        }
        Ok(())
    }
}

/// One recorded draw of the four parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamDraw {
    pub lambda0: f64,
    pub lambda1: f64,
    pub p0: f64,
    pub p1: f64,
}

pub const PARAM_NAMES: [&str; 4] = ["lambda0", "lambda1", "p0", "p1"];

impl ParamDraw {
    pub fn by_index(&self, i: usize) -> f64 {
        match i {
            0 => self.lambda0,
            1 => self.lambda1,
            2 => self.p0,
            _ => self.p1,
        }
    }

    fn params(&self) -> TwoStateParams {
        TwoStateParams {
            lambda0: self.lambda0,
            lambda1: self.lambda1,
            p0: self.p0,
            p1: self.p1,
        }
    }
}

fn check_alignment(durations: &[f64], states: &[u8]) -> Result<(), GibbsError> {
    if states.len() != durations.len() + 1 {
        return Err(GibbsError::MisalignedInputs {
            states: states.len(),
            durations: durations.len(),
        });
    }
    if let Some(&bad) = states.iter().find(|s| **s > 1) {
        return Err(GibbsError::InvalidState(bad));
    }
    Ok(())
}

/// Full-conditional probability that site `i` is excited, given the current
/// values of every other site.
///
/// The conditional multiplies the transition into `S_i` (replaced by the
/// uniform initial prior at `i = 0`), the transition out of `S_i`, and the
/// density of the outgoing duration (absent at the final site, which emits
/// none). Computation is a stable log-odds evaluation.
pub fn site_excited_probability(
    durations: &[f64],
    states: &[u8],
    i: usize,
    params: &TwoStateParams,
) -> Result<f64, GibbsError> {
    check_alignment(durations, states)?;
    if i >= states.len() {
        return Err(GibbsError::TooFew {
            what: "sites",
            need: i + 1,
            got: states.len(),
        });
    }
    let terms = SweepTerms::new(params);
    let odds = terms.log_odds(durations, states, i);
    let p = 1.0 / (1.0 + (-odds).exp());
    if p.is_nan() {
        return Err(GibbsError::NonFiniteLikelihood { site: i });
    }
    Ok(p)
}

/// Precomputed per-sweep log terms. `log_odds` returns
/// `log P(S_i = 1 | rest) - log P(S_i = 0 | rest)`.
struct SweepTerms {
    // transition-in: log(p_prev / (1 - p_prev)) indexed by previous state
    in_odds: [f64; 2],
    // transition-out: log(P(next | 1) / P(next | 0)) indexed by next state
    out_odds: [f64; 2],
    log_rate_diff: f64,
    rate_diff: f64,
}

impl SweepTerms {
    fn new(params: &TwoStateParams) -> Self {
        let (p0, p1) = (params.p0, params.p1);
        Self {
            in_odds: [
                p0.ln() - (1.0 - p0).ln(),
                p1.ln() - (1.0 - p1).ln(),
            ],
            out_odds: [
                (1.0 - p1).ln() - (1.0 - p0).ln(),
                p1.ln() - p0.ln(),
            ],
            log_rate_diff: params.lambda1.ln() - params.lambda0.ln(),
            rate_diff: params.lambda1 - params.lambda0,
        }
    }

    #[inline]
    fn log_odds(&self, durations: &[f64], states: &[u8], i: usize) -> f64 {
        let n = states.len();
        let mut odds = 0.0;
        if i > 0 {
            odds += self.in_odds[states[i - 1] as usize];
        }
        if i < n - 1 {
            odds += self.out_odds[states[i + 1] as usize];
            odds += self.log_rate_diff - self.rate_diff * durations[i];
        }
        odds
    }
}

/// One full Gibbs sweep over the hidden states, left to right, each site
/// redrawn from its full conditional given the sites already updated.
fn sweep_states(
    durations: &[f64],
    states: &mut [u8],
    params: &TwoStateParams,
    rng: &mut ChaCha8Rng,
) -> Result<(), GibbsError> {
    let terms = SweepTerms::new(params);
    for i in 0..states.len() {
        let odds = terms.log_odds(durations, states, i);
        let p = 1.0 / (1.0 + (-odds).exp());
        if p.is_nan() {
            return Err(GibbsError::NonFiniteLikelihood { site: i });
        }
        states[i] = u8::from(rng.random::<f64>() < p);
    }
    Ok(())
}

/// Returns a freshly sampled state sequence after one full sweep starting
/// from `current_states`.
pub fn sample_states(
    durations: &[f64],
    current_states: &[u8],
    params: &TwoStateParams,
    seed: u64,
) -> Result<Vec<u8>, GibbsError> {
    check_alignment(durations, current_states)?;
    let mut states = current_states.to_vec();
    let mut rng = crate::seeded_rng(seed, 0);
    sweep_states(durations, &mut states, params, &mut rng)?;
    Ok(states)
}

/// Gamma posteriors for the two rates given a state assignment:
/// `Gamma(prior_shape + n_s, prior_rate + sum of state-s durations)`.
pub fn rate_posteriors(
    states: &[u8],
    durations: &[f64],
    priors: &PriorConfig,
) -> Result<(GammaPrior, GammaPrior), GibbsError> {
    check_alignment(durations, states)?;
    let mut n = [0usize; 2];
    let mut sum = [0.0f64; 2];
    for (d, &s) in durations.iter().zip(states) {
        n[s as usize] += 1;
        sum[s as usize] += d;
    }
    Ok((
        GammaPrior {
            shape: priors.lambda0_prior.shape + n[0] as f64,
            rate: priors.lambda0_prior.rate + sum[0],
        },
        GammaPrior {
            shape: priors.lambda1_prior.shape + n[1] as f64,
            rate: priors.lambda1_prior.rate + sum[1],
        },
    ))
}

/// Draws `(lambda0, lambda1)` from their conjugate posteriors. A state with
/// no attributed durations collapses to its prior.
pub fn update_rates(
    states: &[u8],
    durations: &[f64],
    priors: &PriorConfig,
    seed: u64,
) -> Result<(f64, f64), GibbsError> {
    priors.validate()?;
    let mut rng = crate::seeded_rng(seed, 0);
    draw_rates(states, durations, priors, &mut rng)
}

fn draw_rates(
    states: &[u8],
    durations: &[f64],
    priors: &PriorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64), GibbsError> {
    let (post0, post1) = rate_posteriors(states, durations, priors)?;
    Ok((post0.sample(rng), post1.sample(rng)))
}

/// Beta posteriors for the transition parameters:
/// `Beta(alpha + #{j -> 1}, beta + #{j -> 0})` over consecutive state pairs.
pub fn transition_posteriors(
    states: &[u8],
    priors: &PriorConfig,
) -> Result<(BetaPrior, BetaPrior), GibbsError> {
    if states.len() < 2 {
        return Err(GibbsError::TooFew {
            what: "states",
            need: 2,
            got: states.len(),
        });
    }
    if let Some(&bad) = states.iter().find(|s| **s > 1) {
        return Err(GibbsError::InvalidState(bad));
    }
    let mut to_excited = [0usize; 2];
    let mut to_normal = [0usize; 2];
    for w in states.windows(2) {
        let from = w[0] as usize;
        if w[1] == 1 {
            to_excited[from] += 1;
        } else {
            to_normal[from] += 1;
        }
    }
    let posterior = |j: usize| BetaPrior {
        alpha: priors.p_prior.alpha + to_excited[j] as f64,
        beta: priors.p_prior.beta + to_normal[j] as f64,
    };
    Ok((posterior(0), posterior(1)))
}

/// Draws `(p0, p1)` from their conjugate posteriors. A state with no
/// outgoing transitions collapses to its prior.
pub fn update_transitions(
    states: &[u8],
    priors: &PriorConfig,
    seed: u64,
) -> Result<(f64, f64), GibbsError> {
    priors.validate()?;
    let mut rng = crate::seeded_rng(seed, 0);
    draw_transitions(states, priors, &mut rng)
}

fn draw_transitions(
    states: &[u8],
    priors: &PriorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64), GibbsError> {
    let (post0, post1) = transition_posteriors(states, priors)?;
    Ok((post0.sample(rng), post1.sample(rng)))
}

/// How a chain picks its random initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ChainInit {
    /// Split the durations at a uniformly drawn quantile in (0.2, 0.8):
    /// shorter waits start excited, longer waits normal, the final
    /// (duration-less) state is a coin flip; parameters then start from
    /// their conditionals given that assignment. Chains are overdispersed
    /// in the split point but all start in the labeling the priors favor,
    /// which single-site sweeps could never reach from the mirror-image
    /// labeling on strongly bimodal data.
    #[default]
    QuantileSplit,
    /// Independent prior draws for the parameters and fair-coin states.
    /// When the observed rates sit far below the prior scale, the first
    /// sweep collapses every site onto the slower state and chains take
    /// thousands of sweeps to find the excited component; kept for data
    /// whose rates match the prior scale.
    PriorDraws,
}

/// Output of one chain: every recorded draw plus per-site excited counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub draws: Vec<ParamDraw>,
    /// Number of recorded sweeps (from `occupancy_from` on) in which each
    /// site was excited.
    pub excited_counts: Vec<u64>,
    /// Iteration index occupancy accumulation started at.
    pub occupancy_from: usize,
}

fn run_chain_with(
    durations: &[f64],
    priors: &PriorConfig,
    iterations: usize,
    occupancy_from: usize,
    init: ChainInit,
    mut rng: ChaCha8Rng,
) -> Result<ChainRun, GibbsError> {
    let n_states = durations.len() + 1;
    let (mut states, mut draw) = match init {
        ChainInit::PriorDraws => {
            let draw = ParamDraw {
                lambda0: priors.lambda0_prior.sample(&mut rng),
                lambda1: priors.lambda1_prior.sample(&mut rng),
                p0: priors.p_prior.sample(&mut rng),
                p1: priors.p_prior.sample(&mut rng),
            };
            let states: Vec<u8> = (0..n_states)
                .map(|_| u8::from(rng.random::<f64>() < 0.5))
                .collect();
            (states, draw)
        }
        ChainInit::QuantileSplit => {
            let q = 0.2 + 0.6 * rng.random::<f64>();
            let mut sorted = durations.to_vec();
            sorted.sort_unstable_by(f64::total_cmp);
            let threshold = sorted[((q * sorted.len() as f64) as usize).min(sorted.len() - 1)];
            let mut states: Vec<u8> =
                durations.iter().map(|d| u8::from(*d <= threshold)).collect();
            states.push(u8::from(rng.random::<f64>() < 0.5));
            let (lambda0, lambda1) = draw_rates(&states, durations, priors, &mut rng)?;
            let (p0, p1) = draw_transitions(&states, priors, &mut rng)?;
            let mut draw = ParamDraw {
                lambda0,
                lambda1,
                p0,
                p1,
            };
            // Heavily tied data can leave the split one-sided and the drawn
            // rates inverted; flip the whole initial labeling back to the
            // prior-consistent ordering. Only the starting point is
            // normalized, every subsequent draw is unconstrained.
            if draw.lambda1 < draw.lambda0 {
                for s in &mut states {
                    *s = 1 - *s;
                }
                draw = ParamDraw {
                    lambda0: draw.lambda1,
                    lambda1: draw.lambda0,
                    p0: 1.0 - draw.p1,
                    p1: 1.0 - draw.p0,
                };
            }
            (states, draw)
        }
    };

    let mut draws = Vec::with_capacity(iterations);
    let mut excited_counts = vec![0u64; n_states];
    for iter in 0..iterations {
        sweep_states(durations, &mut states, &draw.params(), &mut rng)?;
        let (lambda0, lambda1) = draw_rates(&states, durations, priors, &mut rng)?;
        let (p0, p1) = draw_transitions(&states, priors, &mut rng)?;
        draw = ParamDraw {
            lambda0,
            lambda1,
            p0,
            p1,
        };
        draws.push(draw);
        if iter >= occupancy_from {
            for (count, &s) in excited_counts.iter_mut().zip(&states) {
                *count += u64::from(s);
            }
        }
    }
    Ok(ChainRun {
        draws,
        excited_counts,
        occupancy_from,
    })
}

/// Runs a single chain: fair-coin initial states, parameters started from
/// their conditionals given those states, then `iterations` rounds of state
/// sweep, rate redraw, and transition redraw, recording the parameters
/// after each round.
pub fn run_chain(
    durations: &[f64],
    priors: &PriorConfig,
    iterations: usize,
    seed: u64,
) -> Result<ChainRun, GibbsError> {
    priors.validate()?;
    if durations.len() < 2 {
        return Err(GibbsError::TooFew {
            what: "durations",
            need: 2,
            got: durations.len(),
        });
    }
    if iterations == 0 {
        return Err(GibbsError::TooFew {
            what: "iterations",
            need: 1,
            got: 0,
        });
    }
    run_chain_with(
        durations,
        priors,
        iterations,
        0,
        ChainInit::default(),
        crate::seeded_rng(seed, 0),
    )
}

/// Classic potential scale reduction factor for one parameter:
/// `sqrt(((L-1)/L * W + B/L) / W)` with `W` the mean within-chain sample
/// variance and `B/L` the sample variance of the chain means.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Result<f64, GibbsError> {
    if chains.len() < 2 {
        return Err(GibbsError::TooFew {
            what: "chains",
            need: 2,
            got: chains.len(),
        });
    }
    let len = chains[0].len();
    if len < 2 || chains.iter().any(|c| c.len() != len) {
        return Err(GibbsError::UnequalChains);
    }
    let l = len as f64;
    let means: Vec<f64> = chains
        .iter()
        .map(|c| c.iter().sum::<f64>() / l)
        .collect();
    let within = chains
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (l - 1.0))
        .sum::<f64>()
        / chains.len() as f64;
    if within == 0.0 {
        return Err(GibbsError::UndefinedDiagnostic);
    }
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    let b_over_l = means
        .iter()
        .map(|m| (m - grand) * (m - grand))
        .sum::<f64>()
        / (means.len() - 1) as f64;
    Ok((((l - 1.0) / l * within + b_over_l) / within).sqrt())
}

/// Multi-chain schedule; defaults are 10 chains of 5000 sweeps with the
/// first 1500 discarded, pooling 35000 draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitConfig {
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    /// Chain `c` draws from stream `c` of this master seed.
    pub master_seed: u64,
    /// Convergence is flagged when any parameter's R-hat exceeds this.
    pub rhat_threshold: f64,
    /// Initial-condition scheme per chain.
    pub init: ChainInit,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            chains: 10,
            iterations: 5000,
            burn_in: 1500,
            master_seed: 0,
            rhat_threshold: 1.1,
            init: ChainInit::default(),
        }
    }
}

/// Posterior summary of one parameter over the pooled post-burn-in draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub sd: f64,
    pub q2_5: f64,
    pub q97_5: f64,
}

/// Multi-chain posterior draws with burn-in bookkeeping and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    /// Full per-chain draws, burn-in included.
    pub chains: Vec<Vec<ParamDraw>>,
    pub iterations_per_chain: usize,
    pub burn_in: usize,
    /// R-hat per parameter, in [`PARAM_NAMES`] order; `None` with a single
    /// chain (the diagnostic needs at least two).
    pub rhat: Option<[f64; 4]>,
    /// Pooled post-burn-in summaries, in [`PARAM_NAMES`] order.
    pub pooled_summary: [ParamSummary; 4],
    /// Post-burn-in frequency of the excited state per site, averaged over
    /// chains.
    pub state_occupancy: Vec<f64>,
    pub rhat_threshold: f64,
    /// `Some(false)` when any R-hat exceeds the threshold; `None` when the
    /// diagnostic was unavailable.
    pub converged: Option<bool>,
}

impl PosteriorSamples {
    /// Number of pooled post-burn-in draws.
    pub fn pooled_len(&self) -> usize {
        self.chains.len() * (self.iterations_per_chain - self.burn_in)
    }

    /// Post-burn-in draws of one parameter, per chain.
    pub fn parameter_chains(&self, index: usize) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c[self.burn_in..].iter().map(|d| d.by_index(index)).collect())
            .collect()
    }

    /// Summary report (pooled statistics, diagnostics, flags).
    pub fn report(&self) -> PosteriorReport {
        let param = |i: usize| ParamReport {
            mean: self.pooled_summary[i].mean,
            sd: self.pooled_summary[i].sd,
            q2_5: self.pooled_summary[i].q2_5,
            q97_5: self.pooled_summary[i].q97_5,
            rhat: self.rhat.map(|r| r[i]),
        };
        PosteriorReport {
            chains: self.chains.len(),
            iterations_per_chain: self.iterations_per_chain,
            burn_in: self.burn_in,
            pooled_draws: self.pooled_len(),
            rhat_threshold: self.rhat_threshold,
            converged: self.converged,
            lambda0: param(0),
            lambda1: param(1),
            p0: param(2),
            p1: param(3),
        }
    }

    /// One row per retained draw: `chain,iteration,lambda0,lambda1,p0,p1`.
    /// `thin` keeps every `thin`-th retained draw (1 keeps all).
    pub fn write_draws_csv<W: std::io::Write>(&self, mut w: W, thin: usize) -> std::io::Result<()> {
        let thin = thin.max(1);
        writeln!(w, "chain,iteration,lambda0,lambda1,p0,p1")?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (offset, draw) in chain[self.burn_in..].iter().enumerate() {
                if offset % thin != 0 {
                    continue;
                }
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    c,
                    self.burn_in + offset,
                    draw.lambda0,
                    draw.lambda1,
                    draw.p0,
                    draw.p1
                )?;
            }
        }
        Ok(())
    }
}

/// JSON-facing posterior summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorReport {
    pub chains: usize,
    pub iterations_per_chain: usize,
    pub burn_in: usize,
    pub pooled_draws: usize,
    pub rhat_threshold: f64,
    pub converged: Option<bool>,
    pub lambda0: ParamReport,
    pub lambda1: ParamReport,
    pub p0: ParamReport,
    pub p1: ParamReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamReport {
    pub mean: f64,
    pub sd: f64,
    pub q2_5: f64,
    pub q97_5: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhat: Option<f64>,
}

fn summarize(values: &mut Vec<f64>) -> ParamSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    values.sort_unstable_by(f64::total_cmp);
    let quantile = |q: f64| {
        let rank = (q * n).ceil() as usize;
        values[rank.clamp(1, values.len()) - 1]
    };
    ParamSummary {
        mean,
        sd: var.sqrt(),
        q2_5: quantile(0.025),
        q97_5: quantile(0.975),
    }
}

/// Fits the two-state model to observed durations: `config.chains`
/// independent chains (chain `c` seeded from stream `c` of the master seed,
/// executed in parallel with order-independent pooling), burn-in discarded
/// per chain, R-hat per parameter, pooled summaries, and per-site excited
/// occupancy averaged over post-burn-in sweeps.
pub fn fit(
    durations: &[f64],
    priors: &PriorConfig,
    config: &FitConfig,
) -> Result<PosteriorSamples, GibbsError> {
    priors.validate()?;
    if durations.len() < 2 {
        return Err(GibbsError::TooFew {
            what: "durations",
            need: 2,
            got: durations.len(),
        });
    }
    if config.chains == 0 {
        return Err(GibbsError::TooFew {
            what: "chains",
            need: 1,
            got: 0,
        });
    }
    if config.burn_in >= config.iterations {
        return Err(GibbsError::BurnInTooLarge {
            burn_in: config.burn_in,
            iterations: config.iterations,
        });
    }

    let runs: Vec<Result<ChainRun, GibbsError>> = (0..config.chains as u64)
        .into_par_iter()
        .map(|c| {
            run_chain_with(
                durations,
                priors,
                config.iterations,
                config.burn_in,
                config.init,
                crate::seeded_rng(config.master_seed, c),
            )
        })
        .collect();
    let mut chains = Vec::with_capacity(config.chains);
    let mut counts_sum = vec![0u64; durations.len() + 1];
    for run in runs {
        let run = run?;
        for (acc, c) in counts_sum.iter_mut().zip(&run.excited_counts) {
            *acc += c;
        }
        chains.push(run.draws);
    }

    let kept = config.iterations - config.burn_in;
    let occupancy_draws = (config.chains * kept) as f64;
    let state_occupancy: Vec<f64> = counts_sum
        .iter()
        .map(|c| *c as f64 / occupancy_draws)
        .collect();

    let mut pooled_summary = [ParamSummary {
        mean: 0.0,
        sd: 0.0,
        q2_5: 0.0,
        q97_5: 0.0,
    }; 4];
    let mut rhat_values = [0.0f64; 4];
    let mut rhat_available = config.chains >= 2;
    for p in 0..4 {
        let per_chain: Vec<Vec<f64>> = chains
            .iter()
            .map(|c| c[config.burn_in..].iter().map(|d| d.by_index(p)).collect())
            .collect();
        let mut pooled: Vec<f64> = per_chain.iter().flatten().copied().collect();
        pooled_summary[p] = summarize(&mut pooled);
        if rhat_available {
            match gelman_rubin(&per_chain) {
                Ok(r) => rhat_values[p] = r,
                Err(GibbsError::UndefinedDiagnostic) => rhat_available = false,
                Err(e) => return Err(e),
            }
        }
    }
    let rhat = rhat_available.then_some(rhat_values);
    let converged = rhat.map(|r| r.iter().all(|v| *v <= config.rhat_threshold));
    if converged == Some(false) {
        log::warn!(
            "fit did not converge: max R-hat {:.4} exceeds {}",
            rhat_values.iter().cloned().fold(f64::MIN, f64::max),
            config.rhat_threshold
        );
    }

    Ok(PosteriorSamples {
        chains,
        iterations_per_chain: config.iterations,
        burn_in: config.burn_in,
        rhat,
        pooled_summary,
        state_occupancy,
        rhat_threshold: config.rhat_threshold,
        converged,
    })
}
