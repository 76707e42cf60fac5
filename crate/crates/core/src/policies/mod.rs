//! Online arm-selection policies.
//!
//! Arm indices are 0-based throughout the library.

mod greedy;
mod hierarchical;
mod ucb;

pub use greedy::GreedyState;
pub use hierarchical::HierarchicalState;
pub use ucb::UcbState;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::reward_models::BanditInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionReason {
    RandomInit,
    GreedyArgmax,
    UcbIndex,
    GroupThenGreedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmChoice {
    pub arm: usize,
    pub reason: SelectionReason,
    /// Another option shared the winning score and lost on index order.
    pub tie_broken: bool,
}

/// Which policy an experiment runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyConfig {
    #[default]
    Greedy,
    Ucb1,
    Hierarchical {
        groups: Vec<Vec<usize>>,
    },
}

impl PolicyConfig {
    pub fn build(&self, instance: &BanditInstance) -> Result<Policy> {
        Ok(match self {
            PolicyConfig::Greedy => Policy::Greedy(GreedyState::new(instance)),
            PolicyConfig::Ucb1 => Policy::Ucb1(UcbState::new(instance.num_arms())),
            PolicyConfig::Hierarchical { groups } => {
                Policy::Hierarchical(HierarchicalState::new(groups.clone(), instance)?)
            }
        })
    }

    pub fn is_greedy(&self) -> bool {
        matches!(self, PolicyConfig::Greedy)
    }
}

/// A policy with its mutable state.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Greedy(GreedyState),
    Ucb1(UcbState),
    Hierarchical(HierarchicalState),
}

impl Policy {
    pub fn select<R: Rng + ?Sized>(&self, instance: &BanditInstance, rng: &mut R) -> ArmChoice {
        match self {
            Policy::Greedy(s) => s.select(instance, rng),
            Policy::Ucb1(s) => s.select(),
            Policy::Hierarchical(s) => s.select(instance, rng),
        }
    }

    pub fn update(&mut self, arm: usize, reward: f64, instance: &BanditInstance) -> Result<()> {
        match self {
            Policy::Greedy(s) => s.update(arm, reward, instance),
            Policy::Ucb1(s) => {
                instance.check_arm(arm)?;
                s.update(arm, reward)
            }
            Policy::Hierarchical(s) => s.update(arm, reward, instance),
        }
    }

    /// Current global-parameter estimate, for policies that keep one.
    pub fn estimate(&self) -> Option<f64> {
        match self {
            Policy::Greedy(s) => s.estimate(),
            _ => None,
        }
    }
}
