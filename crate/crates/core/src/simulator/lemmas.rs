use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EpisodeResult;
use crate::analysis::{optimality_partition, subopt_distance, DEFAULT_RESOLUTION};
use crate::policies::GreedyState;
use crate::reward_models::{BanditInstance, HolderCertificate};

/// Slack on every inequality, to absorb rounding in the estimates.
pub const LEMMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaKind {
    /// Estimate error against the weighted sample-mean deviations.
    EstimateError,
    /// One-step regret against the estimate used for selection.
    OneStepRegret,
    /// Large estimate error requires some large sample-mean deviation.
    DeviationEvent,
    /// Replaying the greedy policy did not reproduce the recorded choice.
    ReplayMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub t: u64,
    pub kind: LemmaKind,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LemmaReport {
    pub steps_checked: u64,
    pub estimate_error: u64,
    pub one_step_regret: u64,
    pub deviation_event: u64,
    pub replay_mismatch: u64,
    pub first_violation: Option<LemmaViolation>,
    /// Set when the episode could not be checked at all.
    pub skipped: Option<String>,
}

impl LemmaReport {
    pub fn violations(&self) -> u64 {
        self.estimate_error + self.one_step_regret + self.deviation_event + self.replay_mismatch
    }

    fn record(&mut self, v: LemmaViolation) {
        match v.kind {
            LemmaKind::EstimateError => self.estimate_error += 1,
            LemmaKind::OneStepRegret => self.one_step_regret += 1,
            LemmaKind::DeviationEvent => self.deviation_event += 1,
            LemmaKind::ReplayMismatch => self.replay_mismatch += 1,
        }
        self.first_violation.get_or_insert(v);
    }
}

/// Replays the greedy policy over a full-trace episode and checks, at every
/// step, the estimate-error, one-step-regret and deviation-event inequalities.
///
/// The deviation event is tested at `x` in `{Delta/2, Delta, 2 Delta}` where
/// `Delta` is the suboptimality distance of `theta_star`.
pub fn check_lemmas(
    episode: &EpisodeResult,
    instance: &BanditInstance,
    theta_star: f64,
    cert: &HolderCertificate,
) -> LemmaReport {
    let mut report = LemmaReport::default();
    let Some(trace) = episode.trace.as_ref() else {
        report.skipped = Some("episode has no full trace".into());
        return report;
    };
    if !episode.policy.is_greedy() {
        report.skipped = Some("lemmas describe the greedy policy".into());
        return report;
    }
    let delta = match optimality_partition(instance, DEFAULT_RESOLUTION)
        .and_then(|p| subopt_distance(instance, theta_star, &p))
    {
        Ok(d) => d,
        Err(e) => {
            report.skipped = Some(e.to_string());
            return report;
        }
    };
    let xs = [delta / 2.0, delta, 2.0 * delta];
    let thresholds: Vec<f64> = xs.iter().map(|x| (x / cert.d1()).powf(1.0 / cert.gamma1())).collect();
    let true_means = instance.means_at(theta_star);
    let best = instance.optimal_mean(theta_star);

    // Selection after the first step never consults the stream.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut state = GreedyState::new(instance);
    for (i, (&arm, &reward)) in trace.choices.iter().zip(&trace.rewards).enumerate() {
        let t = i as u64 + 1;
        let prev_estimate = state.estimate();
        if let Some(est) = prev_estimate {
            let replayed = state.select(instance, &mut rng).arm;
            if replayed != arm {
                report.record(LemmaViolation {
                    t,
                    kind: LemmaKind::ReplayMismatch,
                    lhs: replayed as f64,
                    rhs: arm as f64,
                });
                return report;
            }
            let r = best - true_means[arm];
            let bound = 2.0 * cert.d2() * (theta_star - est).abs().powf(cert.gamma2());
            if r > bound + LEMMA_TOL {
                report.record(LemmaViolation {
                    t,
                    kind: LemmaKind::OneStepRegret,
                    lhs: r,
                    rhs: bound,
                });
            }
        }
        if state.update(arm, reward, instance).is_err() {
            report.skipped = Some(format!("recorded step {t} is not a valid update"));
            return report;
        }
        report.steps_checked += 1;

        let est = state.estimate().expect("estimate exists after an update");
        let err = (est - theta_star).abs();
        let mut weighted = 0.0;
        let mut max_dev: f64 = 0.0;
        for (j, &k) in state.arms().iter().enumerate() {
            if state.counts()[j] == 0 {
                continue;
            }
            let dev = (state.sample_means()[j] - true_means[k]).abs();
            weighted += state.weights()[j] * cert.d1() * dev.powf(cert.gamma1());
            max_dev = max_dev.max(dev);
        }
        if err > weighted + LEMMA_TOL {
            report.record(LemmaViolation {
                t,
                kind: LemmaKind::EstimateError,
                lhs: err,
                rhs: weighted,
            });
        }
        for (x, thr) in xs.iter().zip(&thresholds) {
            if err > x + LEMMA_TOL && max_dev <= *thr {
                report.record(LemmaViolation {
                    t,
                    kind: LemmaKind::DeviationEvent,
                    lhs: max_dev,
                    rhs: *thr,
                });
            }
        }
    }
    report
}
