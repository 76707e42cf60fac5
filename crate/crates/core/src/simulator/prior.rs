use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GmabError, Result};
use crate::reward_models::ParameterSpace;

const MASS_TOL: f64 = 1e-9;

/// Shape of the prior density on the global parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorShape {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Constant density `weights[i]` on `[breaks[i], breaks[i + 1])`.
    PiecewiseDensity {
        breaks: Vec<f64>,
        weights: Vec<f64>,
    },
}

/// Prior on the global parameter together with the declared bound `B` on the
/// density of the suboptimality distance it induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    #[serde(flatten)]
    pub shape: PriorShape,
    pub density_bound: f64,
}

impl PriorSpec {
    pub fn uniform(lo: f64, hi: f64, density_bound: f64) -> Self {
        Self {
            shape: PriorShape::Uniform { lo, hi },
            density_bound,
        }
    }

    pub fn piecewise(breaks: Vec<f64>, weights: Vec<f64>, density_bound: f64) -> Self {
        Self {
            shape: PriorShape::PiecewiseDensity { breaks, weights },
            density_bound,
        }
    }

    /// Support inside `space`, density non-negative and integrating to 1.
    pub fn validate(&self, space: &ParameterSpace) -> Result<()> {
        if !(self.density_bound.is_finite() && self.density_bound > 0.0) {
            return Err(GmabError::config(
                "prior.density_bound",
                format!("must be positive, got {}", self.density_bound),
            ));
        }
        let (lo, hi) = match &self.shape {
            PriorShape::Uniform { lo, hi } => {
                if lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less) {
                    return Err(GmabError::config("prior", format!("need lo < hi, got [{lo}, {hi}]")));
                }
                (*lo, *hi)
            }
            PriorShape::PiecewiseDensity { breaks, weights } => {
                if breaks.len() < 2 || weights.len() + 1 != breaks.len() {
                    return Err(GmabError::config(
                        "prior.weights",
                        format!(
                            "need one weight per piece: {} breaks, {} weights",
                            breaks.len(),
                            weights.len()
                        ),
                    ));
                }
                if breaks
                    .windows(2)
                    .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
                {
                    return Err(GmabError::config("prior.breaks", "must be strictly increasing"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(GmabError::config("prior.weights", "densities must be non-negative"));
                }
                let mass: f64 = self.masses().iter().sum();
                if (mass - 1.0).abs() > MASS_TOL {
                    return Err(GmabError::config(
                        "prior.weights",
                        format!("density integrates to {mass}, not 1"),
                    ));
                }
                (breaks[0], breaks[breaks.len() - 1])
            }
        };
        if !(space.contains(lo) && space.contains(hi)) {
            return Err(GmabError::config(
                "prior",
                format!(
                    "support [{lo}, {hi}] lies outside the parameter space [{}, {}]",
                    space.lo(),
                    space.hi()
                ),
            ));
        }
        Ok(())
    }

    fn masses(&self) -> Vec<f64> {
        match &self.shape {
            PriorShape::Uniform { .. } => vec![1.0],
            PriorShape::PiecewiseDensity { breaks, weights } => {
                breaks.windows(2).zip(weights).map(|(b, w)| (b[1] - b[0]) * w).collect()
            }
        }
    }

    /// Draws one parameter value. Assumes the prior has been validated.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.shape {
            PriorShape::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            PriorShape::PiecewiseDensity { breaks, .. } => {
                let masses = self.masses();
                let total: f64 = masses.iter().sum();
                let mut u = rng.gen::<f64>() * total;
                let last = masses.iter().rposition(|&m| m > 0.0).unwrap_or(0);
                let mut piece = last;
                for (i, &m) in masses.iter().enumerate() {
                    if m > 0.0 && u < m {
                        piece = i;
                        break;
                    }
                    u -= m;
                }
                let (a, b) = (breaks[piece], breaks[piece + 1]);
                a + (b - a) * rng.gen::<f64>()
            }
        }
    }
}
