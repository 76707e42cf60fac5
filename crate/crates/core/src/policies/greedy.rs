use rand::Rng;

use super::{ArmChoice, SelectionReason};
use crate::error::{GmabError, Result};
use crate::reward_models::BanditInstance;

/// State of the greedy global-parameter policy over a subset of arms.
///
/// Each pulled arm contributes an individual estimate `mu_k^{-1}(X_k)`; the
/// blended estimate is their average weighted by pull share `N_k / t`.
/// Arms that were never pulled carry no estimate and zero weight.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyState {
    arms: Vec<usize>,
    means: Vec<f64>,
    counts: Vec<u64>,
    weights: Vec<f64>,
    arm_estimates: Vec<Option<f64>>,
    estimate: Option<f64>,
    t: u64,
}

impl GreedyState {
    /// Fresh state over every arm of the instance.
    pub fn new(instance: &BanditInstance) -> Self {
        Self::for_arms((0..instance.num_arms()).collect())
    }

    /// Fresh state restricted to the listed (instance-level) arm indices.
    pub fn for_arms(arms: Vec<usize>) -> Self {
        let n = arms.len();
        Self {
            arms,
            means: vec![0.0; n],
            counts: vec![0; n],
            weights: vec![0.0; n],
            arm_estimates: vec![None; n],
            estimate: None,
            t: 0,
        }
    }

    /// Instance-level indices this state selects among.
    pub fn arms(&self) -> &[usize] {
        &self.arms
    }

    /// Completed pulls.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Per-arm sample means, aligned with [`arms`](Self::arms).
    pub fn sample_means(&self) -> &[f64] {
        &self.means
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn arm_estimates(&self) -> &[Option<f64>] {
        &self.arm_estimates
    }

    /// Blended estimate; `None` before the first pull.
    pub fn estimate(&self) -> Option<f64> {
        self.estimate
    }

    fn local_index(&self, arm: usize) -> Option<usize> {
        self.arms.iter().position(|&a| a == arm)
    }

    /// Uniformly random arm before any pull, otherwise the arm maximizing
    /// `mu_k(theta_hat)` with ties going to the lowest index.
    pub fn select<R: Rng + ?Sized>(&self, instance: &BanditInstance, rng: &mut R) -> ArmChoice {
        let Some(theta) = self.estimate else {
            return ArmChoice {
                arm: self.arms[rng.gen_range(0..self.arms.len())],
                reason: SelectionReason::RandomInit,
                tie_broken: false,
            };
        };
        let mut best = self.arms[0];
        let mut best_mean = instance.mean(best, theta);
        let mut tied = false;
        for &arm in &self.arms[1..] {
            let m = instance.mean(arm, theta);
            if m > best_mean {
                best = arm;
                best_mean = m;
                tied = false;
            } else if m == best_mean {
                tied = true;
            }
        }
        ArmChoice {
            arm: best,
            reason: SelectionReason::GreedyArgmax,
            tie_broken: tied,
        }
    }

    /// Folds one observed reward into the running mean of `arm`, re-inverts
    /// that arm and recomputes weights and the blended estimate.
    pub fn update(&mut self, arm: usize, reward: f64, instance: &BanditInstance) -> Result<()> {
        let i = self.local_index(arm).ok_or(GmabError::InvalidArm {
            arm,
            arms: instance.num_arms(),
        })?;
        if !(0.0..=1.0).contains(&reward) {
            return Err(GmabError::invalid(
                "reward",
                format!("must lie in [0, 1], got {reward}"),
            ));
        }
        let n = self.counts[i] as f64;
        self.means[i] = (self.means[i] * n + reward) / (n + 1.0);
        self.counts[i] += 1;
        self.t += 1;
        self.arm_estimates[i] = Some(instance.invert(arm, self.means[i]));

        let t = self.t as f64;
        let mut blended = 0.0;
        for j in 0..self.arms.len() {
            self.weights[j] = self.counts[j] as f64 / t;
            if let Some(est) = self.arm_estimates[j] {
                blended += self.weights[j] * est;
            }
        }
        self.estimate = Some(instance.space().clamp(blended));
        Ok(())
    }
}
