use rand::Rng;

use super::{ArmChoice, GreedyState, SelectionReason, UcbState};
use crate::error::{GmabError, Result};
use crate::reward_models::BanditInstance;

/// UCB1 over groups, greedy estimation within the chosen group.
///
/// The group-level statistic is the reward of whichever member arm was
/// pulled. Each group keeps its own greedy state, so observations never cross
/// group boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalState {
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    group_stats: UcbState,
    within: Vec<GreedyState>,
}

impl HierarchicalState {
    /// Groups must be non-empty, disjoint and cover every arm.
    pub fn new(groups: Vec<Vec<usize>>, instance: &BanditInstance) -> Result<Self> {
        let k = instance.num_arms();
        if groups.is_empty() {
            return Err(GmabError::invalid("groups", "need at least one group"));
        }
        let mut group_of = vec![usize::MAX; k];
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(GmabError::invalid("groups", format!("group {g} is empty")));
            }
            for &arm in members {
                instance.check_arm(arm)?;
                if group_of[arm] != usize::MAX {
                    return Err(GmabError::invalid(
                        "groups",
                        format!("arm {arm} appears in groups {} and {g}", group_of[arm]),
                    ));
                }
                group_of[arm] = g;
            }
        }
        if let Some(arm) = group_of.iter().position(|&g| g == usize::MAX) {
            return Err(GmabError::invalid("groups", format!("arm {arm} is in no group")));
        }
        let within = groups.iter().map(|m| GreedyState::for_arms(m.clone())).collect();
        Ok(Self {
            group_stats: UcbState::new(groups.len()),
            groups,
            group_of,
            within,
        })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_stats(&self) -> &UcbState {
        &self.group_stats
    }

    pub fn group_state(&self, g: usize) -> &GreedyState {
        &self.within[g]
    }

    pub fn group_of(&self, arm: usize) -> Option<usize> {
        self.group_of.get(arm).copied()
    }

    pub fn select<R: Rng + ?Sized>(&self, instance: &BanditInstance, rng: &mut R) -> ArmChoice {
        let group = self.group_stats.select();
        let inner = self.within[group.arm].select(instance, rng);
        ArmChoice {
            arm: inner.arm,
            reason: SelectionReason::GroupThenGreedy,
            tie_broken: group.tie_broken || inner.tie_broken,
        }
    }

    pub fn update(&mut self, arm: usize, reward: f64, instance: &BanditInstance) -> Result<()> {
        let g = self.group_of(arm).ok_or(GmabError::InvalidArm {
            arm,
            arms: self.group_of.len(),
        })?;
        self.within[g].update(arm, reward, instance)?;
        self.group_stats.update(g, reward)
    }
}
