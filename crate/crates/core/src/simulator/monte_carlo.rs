use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_lemmas, log_checkpoints, run_episode_with, validate_checkpoints, EpisodeOptions, EpisodeResult,
    ExperimentConfig, LemmaReport, PriorSpec,
};
use crate::analysis::{optimality_partition, regime_constants, subopt_distance, BoundCurve, DEFAULT_RESOLUTION};
use crate::error::Result;
use crate::policies::PolicyConfig;
use crate::reward_models::BanditInstance;

/// Random stream of replication `rep`: ChaCha8 seeded with `seed`, on stream
/// number `rep`. Streams never overlap, so replications are independent of
/// scheduling.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub t: u64,
    pub regret_mean: f64,
    pub regret_se: f64,
    pub step_regret_mean: f64,
    pub step_regret_se: f64,
    /// Empirical probability that the arm pulled at step `t` is suboptimal.
    pub subopt_prob: f64,
    pub subopt_prob_se: f64,
    /// Mean suboptimal pulls since the previous checkpoint.
    pub subopt_pulls_mean: f64,
    pub estimate_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub episodes: u64,
    pub steps_checked: u64,
    pub violations: u64,
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub replications: u64,
    pub horizon: u64,
    pub checkpoints: Vec<CheckpointStats>,
    pub bounds: Vec<BoundCurve>,
    pub lemmas: Option<LemmaSummary>,
}

impl AggregateResult {
    pub fn at(&self, t: u64) -> Option<&CheckpointStats> {
        self.checkpoints.iter().find(|c| c.t == t)
    }
}

/// Mean and standard error of the mean (sample deviation, zero for one value).
pub fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

enum ThetaSource<'a> {
    Fixed(f64),
    Prior(&'a PriorSpec),
}

struct Replicated {
    episodes: Vec<EpisodeResult>,
    lemmas: Option<LemmaSummary>,
}

#[allow(clippy::too_many_arguments)]
fn replicate(
    instance: &BanditInstance,
    policy: &PolicyConfig,
    theta: ThetaSource,
    horizon: u64,
    reps: u64,
    seed: u64,
    checkpoints: &[u64],
    lemmas: bool,
) -> Result<Replicated> {
    let cert = instance.certificate().copied();
    let do_lemmas = lemmas && cert.is_some();
    let options = EpisodeOptions {
        checkpoints: checkpoints.to_vec(),
        full_trace: do_lemmas,
    };
    let results: Vec<(EpisodeResult, Option<LemmaReport>)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let theta_star = match theta {
                ThetaSource::Fixed(t) => t,
                ThetaSource::Prior(p) => p.sample(&mut rng),
            };
            let mut ep = run_episode_with(instance, theta_star, policy, horizon, &options, &mut rng)?;
            let report = match (do_lemmas, cert) {
                (true, Some(c)) => Some(check_lemmas(&ep, instance, theta_star, &c)),
                _ => None,
            };
            ep.trace = None;
            Ok((ep, report))
        })
        .collect::<Result<_>>()?;

    let mut summary = lemmas.then(LemmaSummary::default);
    let mut episodes = Vec::with_capacity(results.len());
    for (ep, report) in results {
        if let Some(s) = summary.as_mut() {
            s.episodes += 1;
            match report {
                Some(r) if r.skipped.is_none() => {
                    s.steps_checked += r.steps_checked;
                    s.violations += r.violations();
                }
                _ => s.skipped += 1,
            }
        }
        episodes.push(ep);
    }
    Ok(Replicated {
        episodes,
        lemmas: summary,
    })
}

fn aggregate(episodes: &[EpisodeResult], checkpoints: &[u64]) -> Vec<CheckpointStats> {
    let r = episodes.len() as f64;
    checkpoints
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (regret_mean, regret_se) = mean_se(episodes.iter().map(|e| e.cumulative_regret[i]));
            let (step_regret_mean, step_regret_se) = mean_se(episodes.iter().map(|e| e.step_regret[i]));
            let p = episodes.iter().filter(|e| e.suboptimal[i]).count() as f64 / r;
            let subopt_pulls_mean = episodes.iter().map(|e| e.window_subopt_pulls[i] as f64).sum::<f64>() / r;
            let estimates: Vec<f64> = episodes.iter().filter_map(|e| e.estimates[i]).collect();
            let estimate_mean = (!estimates.is_empty()).then(|| estimates.iter().sum::<f64>() / estimates.len() as f64);
            CheckpointStats {
                t,
                regret_mean,
                regret_se,
                step_regret_mean,
                step_regret_se,
                subopt_prob: p,
                subopt_prob_se: (p * (1.0 - p) / r).sqrt(),
                subopt_pulls_mean,
                estimate_mean,
            }
        })
        .collect()
}

/// Bound curves that apply to a fixed true parameter.
pub fn fixed_theta_bounds(instance: &BanditInstance, theta_star: f64, ts: &[u64]) -> Result<Vec<BoundCurve>> {
    let Some(cert) = instance.certificate() else {
        return Ok(Vec::new());
    };
    let k = instance.num_arms();
    let mut curves = vec![BoundCurve::one_step(ts, k, cert), BoundCurve::cumulative(ts, k, cert)];
    let partition = optimality_partition(instance, DEFAULT_RESOLUTION)?;
    let delta = subopt_distance(instance, theta_star, &partition)?;
    if let Ok(rc) = regime_constants(delta, k, cert) {
        curves.push(BoundCurve::subopt_prob(ts, delta, k, cert));
        curves.push(BoundCurve::three_regime(ts, &rc));
    }
    Ok(curves)
}

/// Bound curves that apply to a parameter drawn from `prior`.
pub fn prior_bounds(instance: &BanditInstance, prior: &PriorSpec, ts: &[u64]) -> Vec<BoundCurve> {
    let Some(cert) = instance.certificate() else {
        return Vec::new();
    };
    let k = instance.num_arms();
    vec![
        BoundCurve::one_step(ts, k, cert),
        BoundCurve::cumulative(ts, k, cert),
        BoundCurve::bayes_risk(ts, prior.density_bound, k, cert),
    ]
}

/// Runs every replication of `config` in parallel and reduces the results in
/// replication order, so the output does not depend on scheduling.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<AggregateResult> {
    let instance = config.validate()?;
    let checkpoints = config.resolved_checkpoints();
    let (theta, bounds) = match (&config.theta_star, &config.prior) {
        (Some(t), _) => (ThetaSource::Fixed(*t), fixed_theta_bounds(&instance, *t, &checkpoints)?),
        (None, Some(p)) => (ThetaSource::Prior(p), prior_bounds(&instance, p, &checkpoints)),
        (None, None) => unreachable!("validated config has a parameter source"),
    };
    let run = replicate(
        &instance,
        &config.policy,
        theta,
        config.horizon,
        config.replications,
        config.seed,
        &checkpoints,
        config.check_lemmas,
    )?;
    Ok(AggregateResult {
        replications: config.replications,
        horizon: config.horizon,
        checkpoints: aggregate(&run.episodes, &checkpoints),
        bounds,
        lemmas: run.lemmas,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskPoint {
    pub t: u64,
    pub mean: f64,
    pub stderr: f64,
}

/// Bayesian risk of the greedy policy: `theta_star` is drawn from `prior`
/// in each replication and cumulative regret is averaged at the log-spaced
/// checkpoints up to `horizon`.
pub fn estimate_bayes_risk(
    instance: &BanditInstance,
    prior: &PriorSpec,
    horizon: u64,
    reps: u64,
    seed: u64,
) -> Result<Vec<RiskPoint>> {
    estimate_bayes_risk_at(instance, prior, &log_checkpoints(horizon, 20), horizon, reps, seed)
}

/// [`estimate_bayes_risk`] at explicit checkpoints.
pub fn estimate_bayes_risk_at(
    instance: &BanditInstance,
    prior: &PriorSpec,
    checkpoints: &[u64],
    horizon: u64,
    reps: u64,
    seed: u64,
) -> Result<Vec<RiskPoint>> {
    prior.validate(instance.space())?;
    if horizon == 0 {
        return Ok(vec![RiskPoint {
            t: 0,
            mean: 0.0,
            stderr: 0.0,
        }]);
    }
    validate_checkpoints(checkpoints, horizon)?;
    let run = replicate(
        instance,
        &PolicyConfig::Greedy,
        ThetaSource::Prior(prior),
        horizon,
        reps.max(1),
        seed,
        checkpoints,
        false,
    )?;
    Ok(aggregate(&run.episodes, checkpoints)
        .into_iter()
        .map(|c| RiskPoint {
            t: c.t,
            mean: c.regret_mean,
            stderr: c.regret_se,
        })
        .collect())
}
