//! Arm reward functions over a scalar global parameter.
//!
//! Every arm's expected reward is a known function `mu_k(theta)` of one
//! unknown parameter `theta` in a closed interval. Standard families are
//! strictly monotone, so an observed sample mean can be mapped back to a
//! parameter estimate through `mu_k^{-1}`. The piecewise-constant family is
//! the exception and only exists to build the non-invertible counter-example.

mod holder;
mod instance;

pub use holder::{verify_holder, HolderCertificate, HolderReport, HolderSide, HolderViolation};
pub use instance::{make_counterexample, make_instance, BanditInstance, InstanceSpec, VALIDATION_GRID};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GmabError, Result};

/// Absolute tolerance on theta for numeric inversion.
pub const BISECTION_TOL: f64 = 1e-10;
/// Iteration cap for numeric inversion.
pub const BISECTION_MAX_ITER: usize = 200;

/// Closed parameter interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct ParameterSpace {
    lo: f64,
    hi: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    lo: f64,
    hi: f64,
}

impl TryFrom<RawSpace> for ParameterSpace {
    type Error = GmabError;

    fn try_from(raw: RawSpace) -> Result<Self> {
        ParameterSpace::new(raw.lo, raw.hi)
    }
}

impl From<ParameterSpace> for RawSpace {
    fn from(space: ParameterSpace) -> Self {
        RawSpace {
            lo: space.lo,
            hi: space.hi,
        }
    }
}

impl Default for ParameterSpace {
    fn default() -> Self {
        Self::unit()
    }
}

impl ParameterSpace {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(GmabError::invalid(
                "space",
                format!("need finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(Self { lo, hi })
    }

    /// The unit interval `[0, 1]`.
    pub const fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lo && theta <= self.hi
    }

    pub fn clamp(&self, theta: f64) -> f64 {
        theta.clamp(self.lo, self.hi)
    }

    pub fn check(&self, theta: f64) -> Result<f64> {
        if self.contains(theta) {
            Ok(theta)
        } else {
            Err(GmabError::Domain {
                theta,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `n >= 2` evenly spaced points including both end points.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        uniform_grid(self.lo, self.hi, n)
    }
}

pub(crate) fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Reward distribution around the mean `mu_k(theta)`.
///
/// All variants have support in `[0, 1]` and mean exactly `mu_k(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    #[default]
    Bernoulli,
    /// `mu + U[-w, w]` with `w = min(halfwidth, mu, 1 - mu)`.
    UniformBand {
        halfwidth: f64,
    },
    Deterministic,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::UniformBand { halfwidth } if !(0.0..=0.5).contains(&halfwidth) => Err(GmabError::invalid(
                "noise.halfwidth",
                format!("must lie in [0, 0.5], got {halfwidth}"),
            )),
            _ => Ok(()),
        }
    }

    /// Draws one reward with mean `mean`.
    pub fn sample<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> f64 {
        match *self {
            NoiseSpec::Bernoulli => {
                if rng.gen::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseSpec::UniformBand { halfwidth } => {
                let w = halfwidth.min(mean).min(1.0 - mean).max(0.0);
                let u: f64 = rng.gen();
                (mean + w * (2.0 * u - 1.0)).clamp(0.0, 1.0)
            }
            NoiseSpec::Deterministic => mean,
        }
    }

    /// Standard deviation of one draw at the given mean.
    pub fn std_dev(&self, mean: f64) -> f64 {
        match *self {
            NoiseSpec::Bernoulli => (mean * (1.0 - mean)).sqrt(),
            NoiseSpec::UniformBand { halfwidth } => halfwidth.min(mean).min(1.0 - mean).max(0.0) / 3f64.sqrt(),
            NoiseSpec::Deterministic => 0.0,
        }
    }
}

/// Parametric form of an arm's expected reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `a * theta + b`
    Linear { a: f64, b: f64 },
    /// Linear interpolation through `(theta, mean)` knots, theta increasing.
    PiecewiseLinear { knots: Vec<[f64; 2]> },
    /// `a * theta^gamma`
    Power { a: f64, gamma: f64 },
    /// `a * exp(b * theta)`
    Exponential { a: f64, b: f64 },
    /// `1 / (1 + exp(-a * (theta - b)))`
    Logistic { a: f64, b: f64 },
    /// `1 - sqrt(theta)`
    OneMinusSqrt,
    /// `values[j]` on `[breakpoints[j-1], breakpoints[j])`; breakpoints are interior
    /// cut points so `values.len() == breakpoints.len() + 1`.
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Linear { .. } => "linear",
            Family::PiecewiseLinear { .. } => "piecewise_linear",
            Family::Power { .. } => "power",
            Family::Exponential { .. } => "exponential",
            Family::Logistic { .. } => "logistic",
            Family::OneMinusSqrt => "one_minus_sqrt",
            Family::PiecewiseConstant { .. } => "piecewise_constant",
        }
    }

    pub fn is_invertible(&self) -> bool {
        !matches!(self, Family::PiecewiseConstant { .. })
    }

    /// Unchecked evaluation; callers guarantee `theta` lies in the space.
    #[inline]
    pub fn mean(&self, theta: f64) -> f64 {
        match self {
            Family::Linear { a, b } => a * theta + b,
            Family::PiecewiseLinear { knots } => interpolate(knots, theta),
            Family::Power { a, gamma } => {
                if *gamma == 2.0 {
                    a * theta * theta
                } else {
                    a * theta.max(0.0).powf(*gamma)
                }
            }
            Family::Exponential { a, b } => a * (b * theta).exp(),
            Family::Logistic { a, b } => 1.0 / (1.0 + (-a * (theta - b)).exp()),
            Family::OneMinusSqrt => 1.0 - theta.max(0.0).sqrt(),
            Family::PiecewiseConstant { breakpoints, values } => values[breakpoints.partition_point(|&b| b <= theta)],
        }
    }

    /// Closed-form inverse where one exists. `y` must lie in the image.
    fn analytic_inverse(&self, y: f64) -> Option<f64> {
        match *self {
            Family::Linear { a, b } => Some((y - b) / a),
            Family::Power { a, gamma } => Some((y / a).max(0.0).powf(1.0 / gamma)),
            Family::Exponential { a, b } => Some((y / a).ln() / b),
            Family::Logistic { a, b } => Some(b + (y / (1.0 - y)).ln() / a),
            Family::OneMinusSqrt => Some((1.0 - y) * (1.0 - y)),
            _ => None,
        }
    }

    fn validate(&self, space: &ParameterSpace) -> Result<()> {
        let bad = |field: &str, reason: String| Err(GmabError::invalid(field, reason));
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Family::Linear { a, b } => {
                if !finite(&[*a, *b]) || *a == 0.0 {
                    return bad("linear", format!("need finite a != 0, got a={a}, b={b}"));
                }
            }
            Family::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return bad("piecewise_linear.knots", "need at least two knots".into());
                }
                if !knots.iter().all(|k| finite(k)) {
                    return bad("piecewise_linear.knots", "knots must be finite".into());
                }
                if knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return bad(
                        "piecewise_linear.knots",
                        "knot positions must be strictly increasing".into(),
                    );
                }
                let first = knots[0][0];
                let last = knots[knots.len() - 1][0];
                if first > space.lo() || last < space.hi() {
                    return bad(
                        "piecewise_linear.knots",
                        format!(
                            "knots span [{first}, {last}] but must cover [{}, {}]",
                            space.lo(),
                            space.hi()
                        ),
                    );
                }
            }
            Family::Power { a, gamma } => {
                if !finite(&[*a, *gamma]) || *a <= 0.0 || *gamma <= 0.0 {
                    return bad("power", format!("need a > 0 and gamma > 0, got a={a}, gamma={gamma}"));
                }
                if space.lo() < 0.0 {
                    return bad("power", "parameter space must be non-negative".into());
                }
            }
            Family::Exponential { a, b } => {
                if !finite(&[*a, *b]) || *a <= 0.0 || *b == 0.0 {
                    return bad("exponential", format!("need a > 0 and b != 0, got a={a}, b={b}"));
                }
            }
            Family::Logistic { a, b } => {
                if !finite(&[*a, *b]) || *a == 0.0 {
                    return bad("logistic", format!("need finite a != 0, got a={a}, b={b}"));
                }
            }
            Family::OneMinusSqrt => {
                if space.lo() < 0.0 {
                    return bad("one_minus_sqrt", "parameter space must be non-negative".into());
                }
            }
            Family::PiecewiseConstant { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return bad(
                        "piecewise_constant",
                        "need exactly one more value than breakpoints".into(),
                    );
                }
                if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                    return bad(
                        "piecewise_constant.breakpoints",
                        "breakpoints must be strictly increasing".into(),
                    );
                }
                if !finite(values) || values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return bad("piecewise_constant.values", "values must lie in [0, 1]".into());
                }
            }
        }
        Ok(())
    }
}

fn interpolate(knots: &[[f64; 2]], theta: f64) -> f64 {
    let idx = knots.partition_point(|k| k[0] <= theta).clamp(1, knots.len() - 1);
    let [x0, y0] = knots[idx - 1];
    let [x1, y1] = knots[idx];
    y0 + (y1 - y0) * (theta - x0) / (x1 - x0)
}

/// Solves `f(theta) = target` for a strictly monotone `f` on `[lo, hi]`.
///
/// The target must lie between `f(lo)` and `f(hi)`. Stops once the bracket is
/// narrower than [`BISECTION_TOL`] or after [`BISECTION_MAX_ITER`] halvings.
pub fn bisect_monotone(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    let increasing = f(hi) >= f(lo);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..BISECTION_MAX_ITER {
        if b - a <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (a + b);
        let v = f(mid);
        if v == target {
            return mid;
        }
        if (v < target) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// One arm: mean function plus noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardModel {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub noise: NoiseSpec,
}

impl RewardModel {
    pub fn new(family: Family, noise: NoiseSpec) -> Self {
        Self { family, noise }
    }

    pub fn linear(a: f64, b: f64) -> Self {
        Self::new(Family::Linear { a, b }, NoiseSpec::Bernoulli)
    }

    pub fn power(a: f64, gamma: f64) -> Self {
        Self::new(Family::Power { a, gamma }, NoiseSpec::Bernoulli)
    }

    pub fn exponential(a: f64, b: f64) -> Self {
        Self::new(Family::Exponential { a, b }, NoiseSpec::Bernoulli)
    }

    pub fn logistic(a: f64, b: f64) -> Self {
        Self::new(Family::Logistic { a, b }, NoiseSpec::Bernoulli)
    }

    pub fn one_minus_sqrt() -> Self {
        Self::new(Family::OneMinusSqrt, NoiseSpec::Bernoulli)
    }

    pub fn piecewise_linear(knots: Vec<[f64; 2]>) -> Self {
        Self::new(Family::PiecewiseLinear { knots }, NoiseSpec::Bernoulli)
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = noise;
        self
    }

    pub fn is_invertible(&self) -> bool {
        self.family.is_invertible()
    }

    /// Checks family parameters and noise against the parameter space.
    pub fn validate(&self, space: &ParameterSpace) -> Result<()> {
        self.family.validate(space)?;
        self.noise.validate()
    }

    /// `mu_k(theta)`, rejecting `theta` outside the space.
    pub fn eval_mean(&self, space: &ParameterSpace, theta: f64) -> Result<f64> {
        space.check(theta).map(|t| self.family.mean(t))
    }

    /// `[min, max]` of `mu_k` over the space. Exact for monotone families;
    /// the range of attained values for piecewise-constant ones.
    pub fn image(&self, space: &ParameterSpace) -> (f64, f64) {
        match &self.family {
            Family::PiecewiseConstant { breakpoints, values } => {
                let attained = attained_values(breakpoints, values, space);
                let lo = attained.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
                let hi = attained.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            family => {
                let a = family.mean(space.lo());
                let b = family.mean(space.hi());
                (a.min(b), a.max(b))
            }
        }
    }

    /// `mu_k^{-1}(y)` after clamping `y` into the image. Closed form where
    /// available, bisection otherwise. Errors for non-invertible families.
    pub fn invert_mean(&self, space: &ParameterSpace, y: f64) -> Result<f64> {
        if !self.is_invertible() {
            return Err(GmabError::NotInvertible {
                family: self.family.name(),
            });
        }
        let (lo, hi) = self.image(space);
        Ok(self.invert_within(space, y.clamp(lo, hi)))
    }

    /// Inversion for a `y` already clamped into `image`. Piecewise-constant
    /// arms use the generalized inverse: the infimum of the preimage of the
    /// attained value nearest to `y`.
    pub(crate) fn invert_within(&self, space: &ParameterSpace, y: f64) -> f64 {
        if let Family::PiecewiseConstant { breakpoints, values } = &self.family {
            return generalized_inverse(breakpoints, values, space, y);
        }
        let theta = match self.family.analytic_inverse(y) {
            Some(theta) if theta.is_finite() => theta,
            _ => bisect_monotone(|t| self.family.mean(t), y, space.lo(), space.hi()),
        };
        space.clamp(theta)
    }

    pub fn sample_reward<R: Rng + ?Sized>(&self, space: &ParameterSpace, theta: f64, rng: &mut R) -> Result<f64> {
        let mean = self.eval_mean(space, theta)?;
        Ok(self.noise.sample(mean, rng))
    }
}

/// `(value, infimum of its preimage)` for every distinct value attained on the
/// space, ordered by first appearance.
fn attained_values(breakpoints: &[f64], values: &[f64], space: &ParameterSpace) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (j, &v) in values.iter().enumerate() {
        let start = if j == 0 { f64::NEG_INFINITY } else { breakpoints[j - 1] };
        let end = breakpoints.get(j).copied().unwrap_or(f64::INFINITY);
        if end <= space.lo() || start > space.hi() {
            continue;
        }
        if !out.iter().any(|(seen, _)| *seen == v) {
            out.push((v, start.max(space.lo())));
        }
    }
    out
}

fn generalized_inverse(breakpoints: &[f64], values: &[f64], space: &ParameterSpace, y: f64) -> f64 {
    let mut best: Option<(f64, f64, f64)> = None;
    for (v, inf) in attained_values(breakpoints, values, space) {
        let dist = (v - y).abs();
        let better = match best {
            None => true,
            Some((bd, bv, _)) => dist < bd || (dist == bd && v < bv),
        };
        if better {
            best = Some((dist, v, inf));
        }
    }
    best.map_or(space.lo(), |(_, _, inf)| inf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> ParameterSpace {
        ParameterSpace::unit()
    }

    #[test]
    fn eval_mean_examples() {
        let s = unit();
        assert_eq!(RewardModel::one_minus_sqrt().eval_mean(&s, 0.25).unwrap(), 0.5);
        assert!((RewardModel::power(1.0, 2.0).eval_mean(&s, 0.9).unwrap() - 0.81).abs() < 1e-15);
        assert_eq!(RewardModel::logistic(7.0, 0.4).eval_mean(&s, 0.4).unwrap(), 0.5);
    }

    #[test]
    fn eval_mean_rejects_outside_space() {
        let err = RewardModel::linear(1.0, 0.0).eval_mean(&unit(), 1.5).unwrap_err();
        assert!(matches!(err, GmabError::Domain { .. }));
    }

    #[test]
    fn invert_mean_examples() {
        let s = unit();
        assert!((RewardModel::linear(0.8, 0.0).invert_mean(&s, 0.4).unwrap() - 0.5).abs() < 1e-15);
        assert!((RewardModel::power(1.0, 2.0).invert_mean(&s, 0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_minus_sqrt_inverse_matches_bisection_oracle() {
        // Independent bisection on 1 - sqrt(theta) = 0.5.
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if 1.0 - m.sqrt() > 0.5 {
                a = m;
            } else {
                b = m;
            }
        }
        let oracle = 0.5 * (a + b);
        assert!((oracle - 0.25).abs() < 1e-12);
        let got = RewardModel::one_minus_sqrt().invert_mean(&unit(), 0.5).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - (1.0f64 - 0.5).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn invert_mean_clamps_outside_image() {
        let s = unit();
        let m = RewardModel::linear(0.8, 0.0);
        assert_eq!(m.invert_mean(&s, 0.95).unwrap(), 1.0);
        assert_eq!(m.invert_mean(&s, -0.2).unwrap(), 0.0);
        // Decreasing family: the clamp follows the ordering of the image.
        let d = RewardModel::one_minus_sqrt();
        assert_eq!(d.invert_mean(&s, 1.3).unwrap(), 0.0);
    }

    #[test]
    fn piecewise_linear_uses_bisection_within_tolerance() {
        let s = unit();
        let m = RewardModel::piecewise_linear(vec![[0.0, 0.1], [0.4, 0.3], [1.0, 0.9]]);
        for &y in &[0.1, 0.2, 0.3, 0.55, 0.9] {
            let theta = m.invert_mean(&s, y).unwrap();
            assert!((m.family.mean(theta) - y).abs() <= 1e-9, "y={y}");
        }
    }

    #[test]
    fn piecewise_constant_is_not_invertible() {
        let m = RewardModel::new(
            Family::PiecewiseConstant {
                breakpoints: vec![0.5],
                values: vec![0.3, 0.7],
            },
            NoiseSpec::Bernoulli,
        );
        assert!(matches!(
            m.invert_mean(&unit(), 0.3),
            Err(GmabError::NotInvertible { .. })
        ));
    }

    #[test]
    fn generalized_inverse_returns_preimage_infimum() {
        let s = unit();
        let m = RewardModel::new(
            Family::PiecewiseConstant {
                breakpoints: vec![0.25, 0.5, 0.75],
                values: vec![0.2, 0.8, 0.2, 0.5],
            },
            NoiseSpec::Bernoulli,
        );
        assert_eq!(m.invert_within(&s, 0.2), 0.0);
        assert_eq!(m.invert_within(&s, 0.75), 0.25);
        assert_eq!(m.invert_within(&s, 0.45), 0.75);
        // Halfway between two attained values resolves to the lower one.
        assert_eq!(m.invert_within(&s, 0.35), 0.0);
    }

    #[test]
    fn deterministic_noise_returns_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = RewardModel::power(1.0, 2.0).with_noise(NoiseSpec::Deterministic);
        for &t in &[0.0, 0.3, 0.77, 1.0] {
            assert_eq!(m.sample_reward(&unit(), t, &mut rng).unwrap(), t * t);
        }
    }

    #[test]
    fn uniform_band_width_shrinks_near_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let noise = NoiseSpec::UniformBand { halfwidth: 0.1 };
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..20_000 {
            let x = noise.sample(0.05, &mut rng);
            lo = lo.min(x);
            hi = hi.max(x);
        }
        assert!(lo >= 0.0 && hi <= 0.1);
        assert!(lo < 0.001 && hi > 0.099);
    }

    #[test]
    fn bernoulli_large_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let mut ones = 0u64;
        for _ in 0..n {
            if NoiseSpec::Bernoulli.sample(0.3, &mut rng) == 1.0 {
                ones += 1;
            }
        }
        let mean = ones as f64 / n as f64;
        assert!((mean - 0.3).abs() <= 0.002, "mean = {mean}");
    }

    #[test]
    fn noise_halfwidth_is_validated() {
        assert!(NoiseSpec::UniformBand { halfwidth: 0.6 }.validate().is_err());
        assert!(NoiseSpec::UniformBand { halfwidth: 0.5 }.validate().is_ok());
    }

    #[test]
    fn space_rejects_empty_interval() {
        assert!(ParameterSpace::new(1.0, 1.0).is_err());
        assert!(ParameterSpace::new(0.0, f64::NAN).is_err());
        let grid = ParameterSpace::new(0.2, 0.8).unwrap().grid(4);
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[3], 0.8);
    }
}
