//! Closed-form regret envelopes for the greedy policy.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{GmabError, Result};
use crate::reward_models::HolderCertificate;

/// Thresholds after which the probability of a suboptimal pull drops below
/// `1/t` (`c1`) and `1/t^2` (`c2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstants {
    pub delta: f64,
    pub arms: usize,
    pub cert: HolderCertificate,
    pub c1: u64,
    pub c2: u64,
}

/// Largest `c1` accepted by [`regime_constants`]; keeps `C2` well inside the
/// range of exactly representable integers.
pub const MAX_REGIME_COEFFICIENT: f64 = 1e12;

/// Least integer `tau` with `t >= c ln t` for every integer `t >= tau`.
///
/// For `c <= e` that holds everywhere and the answer is 1. Otherwise it is the
/// ceiling of the upper root of `t = c ln t`, which lies above `c`.
pub fn least_threshold(c: f64) -> u64 {
    if c <= std::f64::consts::E {
        return 1;
    }
    let f = |t: f64| t - c * t.ln();
    let (mut lo, mut hi) = (c, 2.0 * c);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Newton from the right, falling back to bisection outside the bracket.
    let mut t = hi;
    for _ in 0..200 {
        let ft = f(t);
        if ft >= 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
        if hi - lo < 1e-9 * hi {
            break;
        }
        let step = ft / (1.0 - c / t);
        let next = t - step;
        t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    let holds = |tau: u64| tau as f64 >= c * (tau as f64).ln();
    let mut tau = hi.ceil() as u64;
    while !holds(tau) {
        tau += 1;
    }
    // Integers below the upper root can still satisfy the inequality when the
    // failing interval between the two roots contains no integer.
    while tau > 1 && holds(tau - 1) {
        tau -= 1;
    }
    tau
}

/// `C1` and `C2` for suboptimality distance `delta`, with
/// `c1 = D1^(2/gamma1) K / (2 delta^(2/gamma1))` and `c2 = 2 c1`.
pub fn regime_constants(delta: f64, arms: usize, cert: &HolderCertificate) -> Result<RegimeConstants> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(GmabError::invalid("delta", format!("must be positive, got {delta}")));
    }
    if arms == 0 {
        return Err(GmabError::invalid("arms", "need at least one arm"));
    }
    let p = 2.0 / cert.gamma1();
    let c1 = cert.d1().powf(p) * arms as f64 / (2.0 * delta.powf(p));
    if c1.is_nan() || c1 > MAX_REGIME_COEFFICIENT {
        return Err(GmabError::invalid(
            "delta",
            format!("regime coefficient {c1:e} is too large for integer thresholds"),
        ));
    }
    Ok(RegimeConstants {
        delta,
        arms,
        cert: *cert,
        c1: least_threshold(c1),
        c2: least_threshold(2.0 * c1),
    })
}

/// `2 D1^gamma2 D2 (pi/2)^(g/2) K^(g/2)` with `g = gamma1 gamma2`.
pub fn one_step_constant(arms: usize, cert: &HolderCertificate) -> f64 {
    let half = cert.exponent() / 2.0;
    2.0 * cert.d1().powf(cert.gamma2()) * cert.d2() * (PI / 2.0).powf(half) * (arms as f64).powf(half)
}

/// Expected one-step regret envelope at step `t`.
pub fn bound_one_step(t: u64, arms: usize, cert: &HolderCertificate) -> f64 {
    one_step_constant(arms, cert) * (t as f64).powf(-cert.exponent() / 2.0)
}

/// Parameter-free cumulative regret envelope at horizon `horizon`.
pub fn bound_cumulative(horizon: u64, arms: usize, cert: &HolderCertificate) -> f64 {
    let rate = 1.0 - cert.exponent() / 2.0;
    1.0 + one_step_constant(arms, cert) / rate * (1.0 + (horizon as f64).powf(rate))
}

/// `2K exp(-2 (delta/D1)^(2/gamma1) t / K)`, uncapped.
pub fn bound_subopt_prob(t: u64, delta: f64, arms: usize, cert: &HolderCertificate) -> f64 {
    let k = arms as f64;
    2.0 * k * (-2.0 * (delta / cert.d1()).powf(2.0 / cert.gamma1()) * t as f64 / k).exp()
}

/// [`bound_subopt_prob`] capped at 1.
pub fn subopt_prob_capped(t: u64, delta: f64, arms: usize, cert: &HolderCertificate) -> f64 {
    bound_subopt_prob(t, delta, arms, cert).min(1.0)
}

/// Piecewise envelope: sublinear up to `C1`, logarithmic increments up to
/// `C2`, then a constant increment of `K pi^2 / 3`. Later regimes are offset
/// by the envelope value where the previous regime ends.
pub fn bound_three_regime(horizon: u64, constants: &RegimeConstants) -> f64 {
    let k = constants.arms as f64;
    let cert = &constants.cert;
    let (c1, c2) = (constants.c1, constants.c2);
    if horizon <= c1 {
        return bound_cumulative(horizon, constants.arms, cert);
    }
    let at_c1 = bound_cumulative(c1, constants.arms, cert);
    let log_regime = |t: u64| at_c1 + 1.0 + 2.0 * k * (t as f64 / c1 as f64).ln();
    if horizon <= c2 {
        return log_regime(horizon);
    }
    log_regime(c2) + k * PI * PI / 3.0
}

/// `A = 2 D2 (B gamma1^2 D1^2 K^(1+gamma1) / 2^(1+gamma1)) Gamma(gamma1/2)^2`.
pub fn bayes_risk_constant(density_bound: f64, arms: usize, cert: &HolderCertificate) -> f64 {
    let g1 = cert.gamma1();
    let k = arms as f64;
    let gam = gamma(g1 / 2.0);
    2.0 * cert.d2() * (density_bound * g1 * g1 * cert.d1().powi(2) * k.powf(1.0 + g1) / 2f64.powf(1.0 + g1)) * gam * gam
}

/// Bayesian risk envelope at horizon `horizon` for a prior whose
/// suboptimality-distance density is bounded by `density_bound`.
pub fn bayes_risk_bound(horizon: u64, density_bound: f64, arms: usize, cert: &HolderCertificate) -> f64 {
    let a = bayes_risk_constant(density_bound, arms, cert);
    let g = cert.exponent();
    let t = horizon as f64;
    if (g - 1.0).abs() < 1e-12 {
        1.0 + a * (1.0 + 2.0 * t.ln())
    } else {
        1.0 + a * (1.0 + t.powf(1.0 - g) / (1.0 - g))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    OneStep,
    Cumulative,
    SuboptProb,
    ThreeRegime,
    BayesRisk,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::OneStep => "one_step",
            BoundKind::Cumulative => "cumulative",
            BoundKind::SuboptProb => "subopt_prob",
            BoundKind::ThreeRegime => "three_regime",
            BoundKind::BayesRisk => "bayes_risk",
        }
    }
}

/// Everything a bound curve was evaluated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub arms: usize,
    pub cert: HolderCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<(u64, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_bound: Option<f64>,
}

impl BoundConstants {
    /// First 16 hex digits of the SHA-256 of the constants' JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("constants serialize");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub constants: BoundConstants,
    pub points: Vec<(u64, f64)>,
}

impl BoundCurve {
    /// Value at `t`, if `t` was sampled.
    pub fn at(&self, t: u64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == t).map(|p| p.1)
    }

    pub fn one_step(ts: &[u64], arms: usize, cert: &HolderCertificate) -> Self {
        Self::sample(BoundKind::OneStep, Self::base(arms, cert), ts, |t| {
            bound_one_step(t.max(1), arms, cert)
        })
    }

    pub fn cumulative(ts: &[u64], arms: usize, cert: &HolderCertificate) -> Self {
        Self::sample(BoundKind::Cumulative, Self::base(arms, cert), ts, |t| {
            bound_cumulative(t, arms, cert)
        })
    }

    /// Capped at 1, as a probability.
    pub fn subopt_prob(ts: &[u64], delta: f64, arms: usize, cert: &HolderCertificate) -> Self {
        let constants = BoundConstants {
            delta: Some(delta),
            ..Self::base(arms, cert)
        };
        Self::sample(BoundKind::SuboptProb, constants, ts, |t| {
            subopt_prob_capped(t, delta, arms, cert)
        })
    }

    pub fn three_regime(ts: &[u64], constants: &RegimeConstants) -> Self {
        let c = BoundConstants {
            delta: Some(constants.delta),
            regime: Some((constants.c1, constants.c2)),
            ..Self::base(constants.arms, &constants.cert)
        };
        Self::sample(BoundKind::ThreeRegime, c, ts, |t| bound_three_regime(t, constants))
    }

    pub fn bayes_risk(ts: &[u64], density_bound: f64, arms: usize, cert: &HolderCertificate) -> Self {
        let c = BoundConstants {
            density_bound: Some(density_bound),
            ..Self::base(arms, cert)
        };
        Self::sample(BoundKind::BayesRisk, c, ts, |t| {
            bayes_risk_bound(t.max(1), density_bound, arms, cert)
        })
    }

    fn base(arms: usize, cert: &HolderCertificate) -> BoundConstants {
        BoundConstants {
            arms,
            cert: *cert,
            delta: None,
            regime: None,
            density_bound: None,
        }
    }

    fn sample(kind: BoundKind, constants: BoundConstants, ts: &[u64], f: impl Fn(u64) -> f64) -> Self {
        Self {
            kind,
            constants,
            points: ts.iter().map(|&t| (t, f(t))).collect(),
        }
    }
}
