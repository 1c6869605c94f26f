//! Recovery of known parameters must not depend on a lucky seed: the full
//! default schedule is exercised at several master seeds and every run must
//! converge with accurate posterior means.

use burstlab_core::gibbs::{fit, ChainInit, FitConfig, PriorConfig};
use burstlab_core::two_state::{simulate, InitialState, TwoStateParams};

#[test]
fn default_schedule_recovery_is_seed_robust() {
    let truth = TwoStateParams::new(0.007, 0.05, 0.1, 0.95).unwrap();
    let traj = simulate(&truth, 2000, InitialState::Random, 0x5EC0).unwrap();
    let durations = traj.durations();
    for master_seed in [1u64, 2, 3, 4, 5] {
        let samples = fit(
            &durations,
            &PriorConfig::default(),
            &FitConfig {
                chains: 10,
                iterations: 5000,
                burn_in: 1500,
                master_seed,
                rhat_threshold: 1.1,
            init: ChainInit::default(),
        },
        )
        .unwrap();
        let rhat = samples.rhat.unwrap();
        let max_rhat = rhat.iter().cloned().fold(f64::MIN, f64::max);
        assert!(
            samples.converged == Some(true),
            "seed {master_seed}: max R-hat {max_rhat:.3}"
        );
        let l0 = samples.pooled_summary[0].mean;
        let l1 = samples.pooled_summary[1].mean;
        assert!(
            (l0 - 0.007).abs() / 0.007 <= 0.25,
            "seed {master_seed}: lambda0 mean {l0}"
        );
        assert!(
            (l1 - 0.05).abs() / 0.05 <= 0.25,
            "seed {master_seed}: lambda1 mean {l1}"
        );
    }
}
