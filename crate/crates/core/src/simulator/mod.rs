//! Episodes, Monte Carlo experiments, Bayesian risk estimation and
//! per-step lemma checking.

mod config;
mod episode;
mod lemmas;
mod monte_carlo;
mod prior;

pub use config::{ExperimentConfig, DEFAULT_CHECKPOINTS};
pub use episode::{run_episode, run_episode_with, EpisodeOptions, EpisodeResult, StepRecord, Trace, RECENT_STEPS};
pub use lemmas::{check_lemmas, LemmaKind, LemmaReport, LemmaViolation, LEMMA_TOL};
pub use monte_carlo::{
    estimate_bayes_risk, estimate_bayes_risk_at, fixed_theta_bounds, mean_se, prior_bounds, replication_rng,
    run_monte_carlo, AggregateResult, CheckpointStats, LemmaSummary, RiskPoint,
};
pub use prior::{PriorShape, PriorSpec};

use crate::error::{GmabError, Result};

/// Up to `n` log-spaced integer steps from 1 to `horizon`, always ending at
/// `horizon`. Empty for a zero horizon.
pub fn log_checkpoints(horizon: u64, n: usize) -> Vec<u64> {
    if horizon == 0 {
        return Vec::new();
    }
    if n < 2 || horizon == 1 {
        return vec![horizon];
    }
    let top = (horizon as f64).ln();
    let mut out: Vec<u64> = (0..n)
        .map(|i| ((top * i as f64 / (n - 1) as f64).exp().round() as u64).clamp(1, horizon))
        .collect();
    out.dedup();
    if *out.last().unwrap() != horizon {
        out.push(horizon);
    }
    out
}

/// Checkpoints must be strictly increasing and lie in `1..=horizon`.
pub fn validate_checkpoints(checkpoints: &[u64], horizon: u64) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(GmabError::config("checkpoints", "list is empty"));
    }
    if checkpoints[0] == 0 {
        return Err(GmabError::config("checkpoints", "steps are numbered from 1"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GmabError::config("checkpoints", "must be strictly increasing"));
    }
    let last = *checkpoints.last().unwrap();
    if last > horizon {
        return Err(GmabError::config(
            "checkpoints",
            format!("{last} exceeds the horizon {horizon}"),
        ));
    }
    Ok(())
}
