//! Bundled experiment scenarios.

use std::fmt;
use std::str::FromStr;

use gmab::policies::PolicyConfig;
use gmab::reward_models::{HolderCertificate, InstanceSpec, NoiseSpec, ParameterSpace, RewardModel};
use gmab::simulator::{log_checkpoints, ExperimentConfig, PriorSpec, DEFAULT_CHECKPOINTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioPreset {
    ThreeArmDemo,
    LinearWorstcase,
    BayesTwoArm,
    Counterexample,
    Pricing,
    Groups,
}

impl ScenarioPreset {
    pub const ALL: [ScenarioPreset; 6] = [
        ScenarioPreset::ThreeArmDemo,
        ScenarioPreset::LinearWorstcase,
        ScenarioPreset::BayesTwoArm,
        ScenarioPreset::Counterexample,
        ScenarioPreset::Pricing,
        ScenarioPreset::Groups,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioPreset::ThreeArmDemo => "three-arm-demo",
            ScenarioPreset::LinearWorstcase => "linear-worstcase",
            ScenarioPreset::BayesTwoArm => "bayes-two-arm",
            ScenarioPreset::Counterexample => "counterexample",
            ScenarioPreset::Pricing => "pricing",
            ScenarioPreset::Groups => "groups",
        }
    }

    /// Wall-clock budget for the full preset on a desktop machine.
    pub fn budget_secs(&self) -> u64 {
        match self {
            ScenarioPreset::ThreeArmDemo => 180,
            ScenarioPreset::LinearWorstcase => 60,
            ScenarioPreset::BayesTwoArm => 300,
            ScenarioPreset::Counterexample => 60,
            ScenarioPreset::Pricing => 120,
            ScenarioPreset::Groups => 60,
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        match self {
            ScenarioPreset::ThreeArmDemo => ExperimentConfig {
                instance: three_arm_demo(),
                policy: PolicyConfig::Greedy,
                theta_star: Some(0.2),
                prior: None,
                horizon: 200_000,
                replications: 200,
                seed: 0,
                checkpoints: checkpoints(200_000, &[100_000]),
                check_lemmas: false,
            },
            ScenarioPreset::LinearWorstcase => ExperimentConfig {
                instance: two_arm_linear(),
                policy: PolicyConfig::Greedy,
                theta_star: Some(0.501),
                prior: None,
                horizon: 100_000,
                replications: 200,
                seed: 0,
                checkpoints: checkpoints(100_000, &[100, 1_000, 10_000]),
                check_lemmas: false,
            },
            ScenarioPreset::BayesTwoArm => ExperimentConfig {
                instance: two_arm_linear(),
                policy: PolicyConfig::Greedy,
                theta_star: None,
                // Uniform parameter: the distance to the 0.5 boundary has density 2 on [0, 0.5].
                prior: Some(PriorSpec::uniform(0.0, 1.0, 2.0)),
                horizon: 100_000,
                replications: 2000,
                seed: 0,
                checkpoints: checkpoints(100_000, &[10_000]),
                check_lemmas: false,
            },
            ScenarioPreset::Counterexample => ExperimentConfig {
                instance: InstanceSpec::Counterexample {
                    space: ParameterSpace::unit(),
                    values: vec![0.2, 0.5, 0.8],
                    noise: NoiseSpec::Bernoulli,
                },
                policy: PolicyConfig::Greedy,
                theta_star: None,
                prior: Some(PriorSpec::uniform(0.0, 1.0, 1.0)),
                horizon: 10_000,
                replications: 100,
                seed: 0,
                checkpoints: checkpoints(10_000, &[5_000]),
                check_lemmas: false,
            },
            ScenarioPreset::Pricing => ExperimentConfig {
                instance: pricing(),
                policy: PolicyConfig::Greedy,
                theta_star: Some(0.35),
                prior: None,
                horizon: 100_000,
                replications: 200,
                seed: 0,
                checkpoints: checkpoints(100_000, &[50_000]),
                check_lemmas: false,
            },
            ScenarioPreset::Groups => ExperimentConfig {
                instance: groups(),
                policy: PolicyConfig::Hierarchical {
                    groups: vec![vec![0, 1], vec![2, 3], vec![4, 5]],
                },
                theta_star: Some(0.3),
                prior: None,
                horizon: 20_000,
                replications: 200,
                seed: 0,
                checkpoints: checkpoints(20_000, &[1_000, 2_000, 10_000]),
                check_lemmas: false,
            },
        }
    }
}

impl fmt::Display for ScenarioPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset `{s}`; expected one of {}", names.join(", "))
        })
    }
}

fn checkpoints(horizon: u64, extra: &[u64]) -> Vec<u64> {
    let mut out = log_checkpoints(horizon, DEFAULT_CHECKPOINTS);
    out.extend_from_slice(extra);
    out.sort_unstable();
    out.dedup();
    out
}

/// `1 - sqrt(theta)`, `0.8 theta` and `theta^2` on `[0, 1]`.
pub fn three_arm_demo() -> InstanceSpec {
    InstanceSpec::Standard {
        space: ParameterSpace::unit(),
        arms: vec![
            RewardModel::one_minus_sqrt(),
            RewardModel::linear(0.8, 0.0),
            RewardModel::power(1.0, 2.0),
        ],
        certificate: Some(HolderCertificate::new(1.25, 0.5, 1.25, 0.5).expect("valid constants")),
    }
}

/// `theta` and `1 - theta` on `[0, 1]`.
pub fn two_arm_linear() -> InstanceSpec {
    InstanceSpec::Standard {
        space: ParameterSpace::unit(),
        arms: vec![RewardModel::linear(1.0, 0.0), RewardModel::linear(-1.0, 1.0)],
        certificate: Some(HolderCertificate::unit()),
    }
}

/// Posted prices `p` with purchase probability `exp(-c p (1 - theta))`,
/// where `theta` is the market's willingness to pay. The expected revenue
/// `p exp(-c p) exp(c p theta)` is exponential in `theta`.
pub fn pricing() -> InstanceSpec {
    const C: f64 = 2.5;
    let arms = [0.4, 0.6, 0.9]
        .iter()
        .map(|&p: &f64| RewardModel::exponential(p * (-C * p).exp(), C * p))
        .collect();
    InstanceSpec::Standard {
        space: ParameterSpace::unit(),
        arms,
        certificate: Some(HolderCertificate::new(7.0, 1.0, 2.1, 1.0).expect("valid constants")),
    }
}

/// Three pairs of mirrored linear arms; the pair with the steepest slope has
/// the highest means.
pub fn groups() -> InstanceSpec {
    InstanceSpec::Standard {
        space: ParameterSpace::unit(),
        arms: vec![
            RewardModel::linear(0.6, 0.2),
            RewardModel::linear(-0.6, 0.8),
            RewardModel::linear(0.5, 0.1),
            RewardModel::linear(-0.5, 0.6),
            RewardModel::linear(0.4, 0.05),
            RewardModel::linear(-0.4, 0.45),
        ],
        certificate: Some(HolderCertificate::new(2.5, 1.0, 0.6, 1.0).expect("valid constants")),
    }
}
