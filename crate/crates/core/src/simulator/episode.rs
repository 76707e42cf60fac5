use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{log_checkpoints, validate_checkpoints};
use crate::error::Result;
use crate::policies::PolicyConfig;
use crate::reward_models::BanditInstance;

/// Length of the trailing window of per-step records kept by every episode.
pub const RECENT_STEPS: usize = 100;

/// One interaction step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub arm: usize,
    pub reward: f64,
    pub regret: f64,
    /// Estimate after the update at step `t`.
    pub estimate: Option<f64>,
}

/// Complete per-step history, kept only when requested.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub choices: Vec<usize>,
    pub rewards: Vec<f64>,
    pub step_regret: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeOptions {
    /// Sorted, within `1..=horizon`. Empty selects a log-spaced grid.
    pub checkpoints: Vec<u64>,
    pub full_trace: bool,
}

/// Outcome of one episode. Checkpoint vectors are aligned with `checkpoints`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub theta_star: f64,
    pub horizon: u64,
    pub policy: PolicyConfig,
    pub optimal_arms: Vec<usize>,
    pub pulls: Vec<u64>,
    pub total_regret: f64,
    pub checkpoints: Vec<u64>,
    pub cumulative_regret: Vec<f64>,
    /// `r_t` at each checkpoint step.
    pub step_regret: Vec<f64>,
    /// Whether the arm pulled at each checkpoint step was suboptimal.
    pub suboptimal: Vec<bool>,
    pub estimates: Vec<Option<f64>>,
    /// Suboptimal pulls in `(previous checkpoint, checkpoint]`.
    pub window_subopt_pulls: Vec<u64>,
    pub recent: VecDeque<StepRecord>,
    pub trace: Option<Trace>,
}

/// Runs `horizon` steps with a full trace and a log-spaced checkpoint grid.
/// The random stream is ChaCha8 seeded with `seed`.
pub fn run_episode(
    instance: &BanditInstance,
    theta_star: f64,
    policy: &PolicyConfig,
    horizon: u64,
    seed: u64,
) -> Result<EpisodeResult> {
    let options = EpisodeOptions {
        checkpoints: Vec::new(),
        full_trace: true,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_episode_with(instance, theta_star, policy, horizon, &options, &mut rng)
}

/// Select, sample at `theta_star`, update; regret is measured with the true
/// mean of the chosen arm.
pub fn run_episode_with(
    instance: &BanditInstance,
    theta_star: f64,
    policy: &PolicyConfig,
    horizon: u64,
    options: &EpisodeOptions,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeResult> {
    instance.space().check(theta_star)?;
    let checkpoints = if options.checkpoints.is_empty() {
        log_checkpoints(horizon, 20)
    } else {
        validate_checkpoints(&options.checkpoints, horizon)?;
        options.checkpoints.clone()
    };
    let mut state = policy.build(instance)?;

    let means = instance.means_at(theta_star);
    let best = instance.optimal_mean(theta_star);
    let optimal_arms = instance.optimal_arms(theta_star);
    let regret_of: Vec<f64> = means.iter().map(|m| best - m).collect();
    let is_subopt: Vec<bool> = (0..means.len()).map(|k| !optimal_arms.contains(&k)).collect();

    let n = checkpoints.len();
    let mut out = EpisodeResult {
        theta_star,
        horizon,
        policy: policy.clone(),
        optimal_arms,
        pulls: vec![0; means.len()],
        total_regret: 0.0,
        cumulative_regret: Vec::with_capacity(n),
        step_regret: Vec::with_capacity(n),
        suboptimal: Vec::with_capacity(n),
        estimates: Vec::with_capacity(n),
        window_subopt_pulls: Vec::with_capacity(n),
        checkpoints,
        recent: VecDeque::with_capacity(RECENT_STEPS),
        trace: options.full_trace.then(|| Trace {
            choices: Vec::with_capacity(horizon as usize),
            rewards: Vec::with_capacity(horizon as usize),
            step_regret: Vec::with_capacity(horizon as usize),
        }),
    };

    let mut next_cp = 0;
    let mut window_pulls = 0u64;
    let recent_from = horizon.saturating_sub(RECENT_STEPS as u64);
    for t in 1..=horizon {
        let arm = state.select(instance, rng).arm;
        let reward = instance.sample(arm, theta_star, rng);
        state.update(arm, reward, instance)?;

        let r = regret_of[arm];
        out.total_regret += r;
        out.pulls[arm] += 1;
        if is_subopt[arm] {
            window_pulls += 1;
        }
        if let Some(trace) = out.trace.as_mut() {
            trace.choices.push(arm);
            trace.rewards.push(reward);
            trace.step_regret.push(r);
        }
        if t > recent_from {
            out.recent.push_back(StepRecord {
                t,
                arm,
                reward,
                regret: r,
                estimate: state.estimate(),
            });
        }
        if next_cp < n && out.checkpoints[next_cp] == t {
            out.cumulative_regret.push(out.total_regret);
            out.step_regret.push(r);
            out.suboptimal.push(is_subopt[arm]);
            out.estimates.push(state.estimate());
            out.window_subopt_pulls.push(window_pulls);
            window_pulls = 0;
            next_cp += 1;
        }
    }
    Ok(out)
}
