use super::{ArmChoice, SelectionReason};
use crate::error::{GmabError, Result};

/// UCB1 statistics over `n` options (arms or groups).
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    means: Vec<f64>,
    counts: Vec<u64>,
    t: u64,
}

impl UcbState {
    pub fn new(n: usize) -> Self {
        Self {
            means: vec![0.0; n],
            counts: vec![0; n],
            t: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `X_k + sqrt(2 ln t / N_k)`; infinite for unpulled options.
    pub fn index(&self, k: usize) -> f64 {
        if self.counts[k] == 0 {
            return f64::INFINITY;
        }
        self.means[k] + (2.0 * (self.t as f64).ln() / self.counts[k] as f64).sqrt()
    }

    /// Lowest-index unpulled option first, then the largest index with ties
    /// going to the lowest position.
    pub fn select(&self) -> ArmChoice {
        if let Some(k) = self.counts.iter().position(|&n| n == 0) {
            return ArmChoice {
                arm: k,
                reason: SelectionReason::UcbIndex,
                tie_broken: self.counts[k + 1..].contains(&0),
            };
        }
        let mut best = 0;
        let mut best_index = self.index(0);
        let mut tied = false;
        for k in 1..self.len() {
            let idx = self.index(k);
            if idx > best_index {
                best = k;
                best_index = idx;
                tied = false;
            } else if idx == best_index {
                tied = true;
            }
        }
        ArmChoice {
            arm: best,
            reason: SelectionReason::UcbIndex,
            tie_broken: tied,
        }
    }

    pub fn update(&mut self, k: usize, reward: f64) -> Result<()> {
        if k >= self.len() {
            return Err(GmabError::InvalidArm {
                arm: k,
                arms: self.len(),
            });
        }
        let n = self.counts[k] as f64;
        self.means[k] = (self.means[k] * n + reward) / (n + 1.0);
        self.counts[k] += 1;
        self.t += 1;
        Ok(())
    }
}
