use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{verify_holder, Family, HolderCertificate, NoiseSpec, ParameterSpace, RewardModel};
use crate::error::{GmabError, Result};

/// Grid size used to validate monotonicity, round trips and certificates at
/// construction time.
pub const VALIDATION_GRID: usize = 501;

/// Two means closer than this are treated as tied when deciding optimality.
pub const TIE_TOL: f64 = 1e-12;

const ROUND_TRIP_TOL: f64 = 1e-8;
const MAX_COUNTEREXAMPLE_ARMS: usize = 8;

/// `K` arms over a shared parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    space: ParameterSpace,
    arms: Vec<RewardModel>,
    cert: Option<HolderCertificate>,
    invertible: bool,
    images: Vec<(f64, f64)>,
}

impl BanditInstance {
    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn arms(&self) -> &[RewardModel] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    /// Worst-case Hölder constants over all arms. Absent for the
    /// counter-example, which has no inverse to certify.
    pub fn certificate(&self) -> Option<&HolderCertificate> {
        self.cert.as_ref()
    }

    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    pub fn check_arm(&self, arm: usize) -> Result<()> {
        if arm < self.arms.len() {
            Ok(())
        } else {
            Err(GmabError::InvalidArm {
                arm,
                arms: self.arms.len(),
            })
        }
    }

    /// `mu_arm(theta)` without the domain check.
    #[inline]
    pub fn mean(&self, arm: usize, theta: f64) -> f64 {
        self.arms[arm].family.mean(theta)
    }

    pub fn eval_mean(&self, arm: usize, theta: f64) -> Result<f64> {
        self.check_arm(arm)?;
        self.arms[arm].eval_mean(&self.space, theta)
    }

    pub fn means_at(&self, theta: f64) -> Vec<f64> {
        (0..self.arms.len()).map(|k| self.mean(k, theta)).collect()
    }

    pub fn image(&self, arm: usize) -> (f64, f64) {
        self.images[arm]
    }

    /// Parameter estimate from one arm's sample mean. The sample mean is
    /// clamped into the arm's image first; non-invertible arms fall back to
    /// the generalized inverse.
    #[inline]
    pub fn invert(&self, arm: usize, y: f64) -> f64 {
        let (lo, hi) = self.images[arm];
        self.arms[arm].invert_within(&self.space, y.clamp(lo, hi))
    }

    pub fn sample<R: Rng + ?Sized>(&self, arm: usize, theta: f64, rng: &mut R) -> f64 {
        self.arms[arm].noise.sample(self.mean(arm, theta), rng)
    }

    /// `max_k mu_k(theta)`.
    pub fn optimal_mean(&self, theta: f64) -> f64 {
        (0..self.arms.len())
            .map(|k| self.mean(k, theta))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `k*(theta)`: every arm within [`TIE_TOL`] of the best mean.
    pub fn optimal_arms(&self, theta: f64) -> Vec<usize> {
        let means = self.means_at(theta);
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (0..means.len()).filter(|&k| means[k] >= best - TIE_TOL).collect()
    }

    /// Description that rebuilds this instance.
    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec::Standard {
            space: self.space,
            arms: self.arms.clone(),
            certificate: self.cert,
        }
    }
}

/// Validates standard arms and wraps them into an invertible instance.
///
/// Every arm must be strictly monotone on the space with image inside
/// `[0, 1]`, must invert back to within `1e-8` on the validation grid, and
/// must satisfy `cert` on the validation grid.
pub fn make_instance(
    models: Vec<RewardModel>,
    space: ParameterSpace,
    cert: HolderCertificate,
) -> Result<BanditInstance> {
    if models.is_empty() {
        return Err(GmabError::invalid("arms", "an instance needs at least one arm"));
    }
    for (k, model) in models.iter().enumerate() {
        validate_arm(k, model, &space, &cert)?;
    }
    let images = models.iter().map(|m| m.image(&space)).collect();
    Ok(BanditInstance {
        space,
        arms: models,
        cert: Some(cert),
        invertible: true,
        images,
    })
}

fn validate_arm(k: usize, model: &RewardModel, space: &ParameterSpace, cert: &HolderCertificate) -> Result<()> {
    let fail = |reason: String| Err(GmabError::Construction { arm: k, reason });
    if let Err(e) = model.validate(space) {
        return fail(e.to_string());
    }
    if !model.is_invertible() {
        return fail(format!("{} reward function is not invertible", model.family.name()));
    }

    let grid = space.grid(VALIDATION_GRID);
    let mus: Vec<f64> = grid.iter().map(|&t| model.family.mean(t)).collect();
    if let Some(i) = mus.iter().position(|m| !(0.0..=1.0).contains(m)) {
        return fail(format!("mean {} at theta = {} lies outside [0, 1]", mus[i], grid[i]));
    }
    let increasing = mus[mus.len() - 1] > mus[0];
    for (i, w) in mus.windows(2).enumerate() {
        let strict = if increasing { w[1] > w[0] } else { w[1] < w[0] };
        if !strict {
            return fail(format!(
                "not strictly monotone between theta = {} and theta = {} (means {} and {})",
                grid[i],
                grid[i + 1],
                w[0],
                w[1]
            ));
        }
    }
    for (&theta, &mu) in grid.iter().zip(&mus) {
        let back = model.invert_within(space, mu);
        if (back - theta).abs() > ROUND_TRIP_TOL {
            return fail(format!("inversion round trip at theta = {theta} returned {back}"));
        }
    }
    let report = verify_holder(model, space, cert, VALIDATION_GRID);
    if let Some(v) = report.violation {
        return fail(format!(
            "{:?} Hölder inequality fails for pair ({}, {}): {} > {}",
            v.side, v.x, v.x_prime, v.lhs, v.rhs
        ));
    }
    Ok(())
}

/// Non-invertible instance where every arm takes each of `values` on some
/// interval.
///
/// The space is cut into `K!` equal intervals, one per permutation of the
/// value indices in lexicographic order; on interval `j` arm `k` has mean
/// `values[perm_j[k]]`.
pub fn make_counterexample(values: &[f64], space: ParameterSpace, noise: NoiseSpec) -> Result<BanditInstance> {
    let k = values.len();
    if k < 2 {
        return Err(GmabError::invalid("values", "counter-example needs K >= 2 values"));
    }
    if k > MAX_COUNTEREXAMPLE_ARMS {
        return Err(GmabError::invalid(
            "values",
            format!("counter-example supports at most {MAX_COUNTEREXAMPLE_ARMS} arms"),
        ));
    }
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(GmabError::invalid("values", "values must lie in [0, 1]"));
    }
    for (i, j) in (0..k).tuple_combinations() {
        if values[i] == values[j] {
            return Err(GmabError::invalid(
                "values",
                format!("values must be distinct, {} repeats", values[i]),
            ));
        }
    }
    noise.validate()?;

    let perms: Vec<Vec<usize>> = (0..k).permutations(k).collect();
    let width = space.width() / perms.len() as f64;
    let breakpoints: Vec<f64> = (1..perms.len()).map(|j| space.lo() + width * j as f64).collect();
    let arms: Vec<RewardModel> = (0..k)
        .map(|arm| {
            RewardModel::new(
                Family::PiecewiseConstant {
                    breakpoints: breakpoints.clone(),
                    values: perms.iter().map(|p| values[p[arm]]).collect(),
                },
                noise,
            )
        })
        .collect();
    let images = arms.iter().map(|m| m.image(&space)).collect();
    Ok(BanditInstance {
        space,
        arms,
        cert: None,
        invertible: false,
        images,
    })
}

/// Serializable instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    Standard {
        #[serde(default)]
        space: ParameterSpace,
        arms: Vec<RewardModel>,
        /// Required to build; optional so counter-example instances can be
        /// described in the same shape.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        certificate: Option<HolderCertificate>,
    },
    Counterexample {
        #[serde(default)]
        space: ParameterSpace,
        values: Vec<f64>,
        #[serde(default)]
        noise: NoiseSpec,
    },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<BanditInstance> {
        match self {
            InstanceSpec::Standard {
                space,
                arms,
                certificate,
            } => {
                let cert = certificate.ok_or_else(|| GmabError::config("certificate", "missing Hölder certificate"))?;
                make_instance(arms.clone(), *space, cert)
            }
            InstanceSpec::Counterexample { space, values, noise } => make_counterexample(values, *space, *noise),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GmabError::config("instance", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance spec serializes")
    }
}
