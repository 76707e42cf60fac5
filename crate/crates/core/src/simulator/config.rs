use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{log_checkpoints, validate_checkpoints, PriorSpec};
use crate::error::{GmabError, Result};
use crate::policies::PolicyConfig;
use crate::reward_models::{BanditInstance, InstanceSpec};

/// Number of log-spaced checkpoints used when none are given.
pub const DEFAULT_CHECKPOINTS: usize = 20;

/// A complete experiment: instance, policy, true parameter (fixed or drawn
/// from a prior), horizon, replications and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSpec>,
    pub horizon: u64,
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    /// Sorted steps in `1..=horizon`; empty selects a log-spaced grid.
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub check_lemmas: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_string() } else { path };
            GmabError::config(field, e.into_inner().to_string())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Checks every field and builds the instance.
    pub fn validate(&self) -> Result<BanditInstance> {
        if self.horizon == 0 {
            return Err(GmabError::config("horizon", "must be at least 1"));
        }
        if self.replications == 0 {
            return Err(GmabError::config("replications", "must be at least 1"));
        }
        if !self.checkpoints.is_empty() {
            validate_checkpoints(&self.checkpoints, self.horizon)?;
        }
        let instance = self.instance.build()?;
        match (&self.theta_star, &self.prior) {
            (Some(theta), None) => {
                if !instance.space().contains(*theta) {
                    return Err(GmabError::config(
                        "theta_star",
                        format!(
                            "{theta} lies outside the parameter space [{}, {}]",
                            instance.space().lo(),
                            instance.space().hi()
                        ),
                    ));
                }
            }
            (None, Some(prior)) => prior.validate(instance.space())?,
            _ => {
                return Err(GmabError::config(
                    "theta_star",
                    "give exactly one of `theta_star` and `prior`",
                ))
            }
        }
        self.policy.build(&instance)?;
        Ok(instance)
    }

    pub fn resolved_checkpoints(&self) -> Vec<u64> {
        if self.checkpoints.is_empty() {
            log_checkpoints(self.horizon, DEFAULT_CHECKPOINTS)
        } else {
            self.checkpoints.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reward_models::{HolderCertificate, ParameterSpace, RewardModel};

    fn two_arm() -> ExperimentConfig {
        ExperimentConfig {
            instance: InstanceSpec::Standard {
                space: ParameterSpace::unit(),
                arms: vec![RewardModel::linear(1.0, 0.0), RewardModel::linear(-1.0, 1.0)],
                certificate: Some(HolderCertificate::unit()),
            },
            policy: PolicyConfig::Greedy,
            theta_star: Some(0.3),
            prior: None,
            horizon: 100,
            replications: 4,
            seed: 1,
            checkpoints: vec![],
            check_lemmas: false,
        }
    }

    #[test]
    fn json_round_trip() {
        let c = two_arm();
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn validation_names_fields() {
        let field_of = |c: &ExperimentConfig| match c.validate().unwrap_err() {
            GmabError::Config { field, .. } => field,
            e => panic!("unexpected {e:?}"),
        };
        let mut c = two_arm();
        c.horizon = 0;
        assert_eq!(field_of(&c), "horizon");
        let mut c = two_arm();
        c.replications = 0;
        assert_eq!(field_of(&c), "replications");
        let mut c = two_arm();
        c.checkpoints = vec![10, 200];
        assert_eq!(field_of(&c), "checkpoints");
        let mut c = two_arm();
        c.theta_star = Some(2.0);
        assert_eq!(field_of(&c), "theta_star");
        let mut c = two_arm();
        c.prior = Some(PriorSpec::uniform(0.0, 1.0, 2.0));
        assert_eq!(field_of(&c), "theta_star");
        let mut c = two_arm();
        c.theta_star = None;
        c.prior = Some(PriorSpec::uniform(0.0, 3.0, 2.0));
        assert_eq!(field_of(&c), "prior");
    }

    #[test]
    fn bad_exponent_is_reported_with_its_range() {
        let text = two_arm().to_json().replace("\"gamma1\": 1.0", "\"gamma1\": 1.5");
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("certificate"), "{msg}");
        assert!(msg.contains("(0, 1]"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = two_arm().to_json().replace("\"horizon\"", "\"horizn\"");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }
}
