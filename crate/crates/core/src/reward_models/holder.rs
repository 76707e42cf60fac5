use serde::{Deserialize, Serialize};

use super::{uniform_grid, ParameterSpace, RewardModel};
use crate::error::{GmabError, Result};

/// Slack allowed on either Hölder inequality, absorbing inversion round-off.
const HOLDER_TOL: f64 = 1e-9;

/// Shared Hölder constants for an instance:
/// `|mu^{-1}(y) - mu^{-1}(y')| <= d1 |y - y'|^gamma1` and
/// `|mu(theta) - mu(theta')| <= d2 |theta - theta'|^gamma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCert", into = "RawCert")]
pub struct HolderCertificate {
    d1: f64,
    gamma1: f64,
    d2: f64,
    gamma2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCert {
    d1: f64,
    gamma1: f64,
    d2: f64,
    gamma2: f64,
}

impl TryFrom<RawCert> for HolderCertificate {
    type Error = GmabError;

    fn try_from(raw: RawCert) -> Result<Self> {
        HolderCertificate::new(raw.d1, raw.gamma1, raw.d2, raw.gamma2)
    }
}

impl From<HolderCertificate> for RawCert {
    fn from(c: HolderCertificate) -> Self {
        RawCert {
            d1: c.d1,
            gamma1: c.gamma1,
            d2: c.d2,
            gamma2: c.gamma2,
        }
    }
}

impl HolderCertificate {
    pub fn new(d1: f64, gamma1: f64, d2: f64, gamma2: f64) -> Result<Self> {
        for (field, d) in [("certificate.d1", d1), ("certificate.d2", d2)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(GmabError::invalid(
                    field,
                    format!("must be a positive constant, got {d}"),
                ));
            }
        }
        for (field, g) in [("certificate.gamma1", gamma1), ("certificate.gamma2", gamma2)] {
            if !(g > 0.0 && g <= 1.0) {
                return Err(GmabError::invalid(
                    field,
                    format!("Hölder exponent must lie in (0, 1], got {g}"),
                ));
            }
        }
        Ok(Self { d1, gamma1, d2, gamma2 })
    }

    /// `D1 = D2 = gamma1 = gamma2 = 1`.
    pub fn unit() -> Self {
        Self {
            d1: 1.0,
            gamma1: 1.0,
            d2: 1.0,
            gamma2: 1.0,
        }
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    /// `gamma1 * gamma2`, the informativeness exponent in every bound.
    pub fn exponent(&self) -> f64 {
        self.gamma1 * self.gamma2
    }

    /// Same exponents with both multipliers scaled.
    pub fn scaled(&self, d1_factor: f64, d2_factor: f64) -> Result<Self> {
        Self::new(self.d1 * d1_factor, self.gamma1, self.d2 * d2_factor, self.gamma2)
    }
}

/// Which inequality failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderSide {
    /// `mu_k^{-1}` over the image of `mu_k`.
    Inverse,
    /// `mu_k` over the parameter space.
    Forward,
}

/// First grid pair violating a Hölder inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderViolation {
    pub side: HolderSide,
    /// Grid pair (in `y` for the inverse side, `theta` for the forward side).
    pub x: f64,
    pub x_prime: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub grid_points: usize,
    /// `None` when both inequalities hold on every grid pair.
    pub violation: Option<HolderViolation>,
    /// Set when the model has no inverse, so the inverse side was not checkable.
    pub not_invertible: bool,
}

impl HolderReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && !self.not_invertible
    }
}

/// Checks both Hölder inequalities on every pair of a uniform grid.
///
/// The inverse side is checked on a grid over the image of `mu_k`, the forward
/// side on a grid over the parameter space. The inverse side runs first, and
/// pairs are scanned in lexicographic index order, so the reported violation is
/// the first one in that order.
pub fn verify_holder(
    model: &RewardModel,
    space: &ParameterSpace,
    cert: &HolderCertificate,
    grid_points: usize,
) -> HolderReport {
    let n = grid_points.max(2);
    let mut report = HolderReport {
        grid_points: n,
        violation: None,
        not_invertible: !model.is_invertible(),
    };

    if model.is_invertible() {
        let (ylo, yhi) = model.image(space);
        let ys = uniform_grid(ylo, yhi, n);
        let thetas: Vec<f64> = ys.iter().map(|&y| model.invert_within(space, y)).collect();
        report.violation =
            scan_pairs(&ys, &thetas, (yhi - ylo) / (n - 1) as f64, cert.d1, cert.gamma1).map(|v| HolderViolation {
                side: HolderSide::Inverse,
                ..v
            });
        if report.violation.is_some() {
            return report;
        }
    }

    let thetas = space.grid(n);
    let mus: Vec<f64> = thetas.iter().map(|&t| model.family.mean(t)).collect();
    report.violation =
        scan_pairs(&thetas, &mus, space.width() / (n - 1) as f64, cert.d2, cert.gamma2).map(|v| HolderViolation {
            side: HolderSide::Forward,
            ..v
        });
    report
}

/// Scans `|f_i - f_j| <= d * |x_i - x_j|^gamma` over all pairs of a uniform
/// grid with spacing `step`. The right side only depends on the lag `j - i`.
fn scan_pairs(xs: &[f64], fs: &[f64], step: f64, d: f64, gamma: f64) -> Option<HolderViolation> {
    let n = xs.len();
    let rhs: Vec<f64> = (0..n).map(|lag| d * (step * lag as f64).powf(gamma)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let lhs = (fs[i] - fs[j]).abs();
            let bound = rhs[j - i];
            if lhs > bound + HOLDER_TOL {
                return Some(HolderViolation {
                    side: HolderSide::Forward,
                    x: xs[i],
                    x_prime: xs[j],
                    lhs,
                    rhs: bound,
                });
            }
        }
    }
    None
}
