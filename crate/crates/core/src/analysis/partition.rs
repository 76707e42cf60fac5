use serde::{Deserialize, Serialize};

use crate::error::{GmabError, Result};
use crate::reward_models::{BanditInstance, HolderCertificate};

const REFINE_MAX_ITER: usize = 200;
const REFINE_WIDTH: f64 = 1e-13;
/// Tie segments shorter than this are boundary points, not tied stretches.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Maximal stretch of the parameter space with a constant set of optimal arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub arms: Vec<usize>,
}

/// Optimality regions `Theta_k = {theta : k in k*(theta)}` for every arm.
///
/// Regions are closed, so a boundary point belongs to both neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityPartition {
    resolution: f64,
    segments: Vec<Segment>,
    regions: Vec<Vec<(f64, f64)>>,
}

impl OptimalityPartition {
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Closed, disjoint intervals on which `arm` is optimal; empty when the
    /// arm is never optimal.
    pub fn regions(&self, arm: usize) -> &[(f64, f64)] {
        &self.regions[arm]
    }

    /// Segments longer than [`BOUNDARY_TOL`] on which several arms tie.
    pub fn ties(&self) -> impl Iterator<Item = &Segment> {
        self.segments
            .iter()
            .filter(|s| s.arms.len() > 1 && s.hi - s.lo > BOUNDARY_TOL)
    }

    /// Every arm whose region contains `theta`.
    pub fn arms_at(&self, theta: f64) -> Vec<usize> {
        (0..self.regions.len())
            .filter(|&k| self.regions[k].iter().any(|&(a, b)| a <= theta && theta <= b))
            .collect()
    }

    /// Interior boundary points, in increasing order.
    pub fn boundaries(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.lo).collect()
    }
}

/// Scans the space on a grid of step `resolution` and refines every change of
/// the optimal set by bisection on the difference of the two arms involved.
///
/// Changes that begin and end inside a single grid cell are not detected.
pub fn optimality_partition(instance: &BanditInstance, resolution: f64) -> Result<OptimalityPartition> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(GmabError::invalid(
            "resolution",
            format!("must be positive, got {resolution}"),
        ));
    }
    let space = instance.space();
    let cells = (space.width() / resolution).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=cells)
        .map(|i| {
            if i == cells {
                space.hi()
            } else {
                space.lo() + resolution * i as f64
            }
        })
        .collect();

    let mut segments = Vec::new();
    let mut start = space.lo();
    let mut current = instance.optimal_arms(grid[0]);
    for w in grid.windows(2) {
        let next = instance.optimal_arms(w[1]);
        if next != current {
            let boundary = refine(instance, w[0], w[1], &current, &next);
            segments.push(Segment {
                lo: start,
                hi: boundary,
                arms: current,
            });
            start = boundary;
            current = next;
        }
    }
    segments.push(Segment {
        lo: start,
        hi: space.hi(),
        arms: current,
    });

    let mut regions: Vec<Vec<(f64, f64)>> = vec![Vec::new(); instance.num_arms()];
    for seg in &segments {
        for &k in &seg.arms {
            match regions[k].last_mut() {
                Some(last) if last.1 == seg.lo => last.1 = seg.hi,
                _ => regions[k].push((seg.lo, seg.hi)),
            }
        }
    }
    Ok(OptimalityPartition {
        resolution,
        segments,
        regions,
    })
}

/// Root of `mu_a - mu_b` on `[left, right]`, where `a` leaves the optimal set
/// and `b` enters it.
fn refine(instance: &BanditInstance, left: f64, right: f64, before: &[usize], after: &[usize]) -> f64 {
    let pick = |from: &[usize], other: &[usize]| from.iter().copied().find(|k| !other.contains(k)).unwrap_or(from[0]);
    let a = pick(before, after);
    let b = pick(after, before);
    let g = |t: f64| instance.mean(a, t) - instance.mean(b, t);
    let (mut lo, mut hi) = (left, right);
    for _ in 0..REFINE_MAX_ITER {
        if hi - lo <= REFINE_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gap structure at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub theta: f64,
    /// `k*(theta)`.
    pub optimal_arms: Vec<usize>,
    /// `mu*(theta)`.
    pub optimal_mean: f64,
    /// `delta_k(theta)`; `None` for optimal arms.
    pub gaps: Vec<Option<f64>>,
    /// Minimum gap over suboptimal arms; `None` when every arm is optimal.
    pub delta_min: Option<f64>,
    /// Suboptimality distance, once computed against a partition.
    pub distance: Option<f64>,
    /// Lower bound on the distance from the minimum gap and `D2, gamma2`.
    pub epsilon: Option<f64>,
}

/// Optimal set, optimal mean and per-arm gaps at `theta`.
pub fn subopt_gap(instance: &BanditInstance, theta: f64) -> Result<GapReport> {
    instance.space().check(theta)?;
    let means = instance.means_at(theta);
    let optimal_mean = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let optimal_arms = instance.optimal_arms(theta);
    let gaps: Vec<Option<f64>> = means
        .iter()
        .enumerate()
        .map(|(k, m)| (!optimal_arms.contains(&k)).then_some(optimal_mean - m))
        .collect();
    let delta_min = gaps.iter().flatten().copied().reduce(f64::min);
    Ok(GapReport {
        theta,
        optimal_arms,
        optimal_mean,
        gaps,
        delta_min,
        distance: None,
        epsilon: None,
    })
}

/// Distance from `theta` to the nearest point where some arm outside
/// `k*(theta)` is optimal; `1` when no such point exists.
pub fn subopt_distance(instance: &BanditInstance, theta: f64, partition: &OptimalityPartition) -> Result<f64> {
    instance.space().check(theta)?;
    let optimal = instance.optimal_arms(theta);
    let mut best: Option<f64> = None;
    for k in (0..instance.num_arms()).filter(|k| !optimal.contains(k)) {
        for &(a, b) in partition.regions(k) {
            let d = if a <= theta && theta <= b {
                0.0
            } else {
                (theta - a).abs().min((theta - b).abs())
            };
            best = Some(best.map_or(d, |x: f64| x.min(d)));
        }
    }
    Ok(best.unwrap_or(1.0))
}

/// `(delta_min / (2 D2))^(1 / gamma2)`.
pub fn epsilon_lower_bound(gap: &GapReport, cert: &HolderCertificate) -> Result<f64> {
    let delta = gap.delta_min.ok_or(GmabError::MissingGap { theta: gap.theta })?;
    Ok((delta / (2.0 * cert.d2())).powf(1.0 / cert.gamma2()))
}

/// [`subopt_gap`] with the distance and its lower bound filled in.
pub fn gap_report(
    instance: &BanditInstance,
    theta: f64,
    partition: &OptimalityPartition,
    cert: &HolderCertificate,
) -> Result<GapReport> {
    let mut report = subopt_gap(instance, theta)?;
    report.distance = Some(subopt_distance(instance, theta, partition)?);
    report.epsilon = epsilon_lower_bound(&report, cert).ok();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reward_models::{make_instance, ParameterSpace, RewardModel};
    use proptest::prelude::*;

    fn demo() -> BanditInstance {
        make_instance(
            vec![
                RewardModel::one_minus_sqrt(),
                RewardModel::linear(0.8, 0.0),
                RewardModel::power(1.0, 2.0),
            ],
            ParameterSpace::unit(),
            HolderCertificate::new(1.25, 0.5, 1.25, 0.5).unwrap(),
        )
        .unwrap()
    }

    /// Closed-form boundaries of the demo: sqrt(theta) solves 0.8 s^2 + s - 1 = 0,
    /// and 0.8 theta = theta^2 gives 0.8.
    fn demo_boundaries() -> (f64, f64) {
        let s = (-1.0 + (1.0f64 + 3.2).sqrt()) / 1.6;
        (s * s, 0.8)
    }

    /// Dense grid scan of the strict argmax, independent of the bisection
    /// refinement.
    fn grid_boundaries(inst: &BanditInstance, step: f64) -> Vec<f64> {
        let argmax = |t: f64| {
            let m = inst.means_at(t);
            (0..m.len()).fold(0, |b, k| if m[k] > m[b] { k } else { b })
        };
        let n = (1.0 / step).round() as usize;
        let mut out = Vec::new();
        let mut prev = argmax(0.0);
        for i in 1..=n {
            let t = i as f64 * step;
            let cur = argmax(t);
            if cur != prev {
                out.push(t);
                prev = cur;
            }
        }
        out
    }

    #[test]
    fn demo_partition_matches_oracles() {
        let inst = demo();
        let p = optimality_partition(&inst, 1e-3).unwrap();
        let (b1, b2) = demo_boundaries();
        assert!((b1 - 0.430_16).abs() < 1e-5);
        let grid = grid_boundaries(&inst, 1e-5);
        assert_eq!(grid.len(), 2);
        assert!((grid[0] - b1).abs() <= 2e-5 && (grid[1] - b2).abs() <= 2e-5);

        assert_eq!(p.regions(0), &[(0.0, p.regions(0)[0].1)]);
        assert!((p.regions(0)[0].1 - b1).abs() < 1e-9);
        assert_eq!(p.regions(1).len(), 1);
        assert!((p.regions(1)[0].0 - b1).abs() < 1e-9);
        assert!((p.regions(1)[0].1 - b2).abs() < 1e-9);
        assert!((p.regions(2)[0].0 - b2).abs() < 1e-9);
        assert_eq!(p.regions(2)[0].1, 1.0);
        assert_eq!(p.ties().count(), 0);
    }

    #[test]
    fn boundary_on_grid_point_is_refined() {
        // Step 0.1 puts a grid point exactly on the 0.8 boundary.
        let inst = demo();
        let p = optimality_partition(&inst, 0.1).unwrap();
        let (_, b2) = demo_boundaries();
        assert!((p.regions(1)[0].1 - b2).abs() < 1e-9);
        assert!((p.regions(2)[0].0 - b2).abs() < 1e-9);
    }

    #[test]
    fn single_arm_covers_space() {
        let inst = make_instance(
            vec![RewardModel::linear(1.0, 0.0)],
            ParameterSpace::unit(),
            HolderCertificate::unit(),
        )
        .unwrap();
        let p = optimality_partition(&inst, 0.01).unwrap();
        assert_eq!(p.regions(0), &[(0.0, 1.0)]);
        assert_eq!(subopt_distance(&inst, 0.3, &p).unwrap(), 1.0);
        let gap = subopt_gap(&inst, 0.3).unwrap();
        assert_eq!(gap.delta_min, None);
        assert!(epsilon_lower_bound(&gap, &HolderCertificate::unit()).is_err());
    }

    #[test]
    fn identical_arms_tie_everywhere() {
        let inst = make_instance(
            vec![RewardModel::linear(1.0, 0.0), RewardModel::linear(1.0, 0.0)],
            ParameterSpace::unit(),
            HolderCertificate::unit(),
        )
        .unwrap();
        let p = optimality_partition(&inst, 0.01).unwrap();
        assert_eq!(p.regions(0), &[(0.0, 1.0)]);
        assert_eq!(p.regions(1), &[(0.0, 1.0)]);
        let ties: Vec<_> = p.ties().collect();
        assert_eq!(ties.len(), 1);
        assert_eq!(ties[0].arms, vec![0, 1]);
    }

    #[test]
    fn gap_at_point_two() {
        let inst = demo();
        let g = subopt_gap(&inst, 0.2).unwrap();
        let mu1 = 1.0 - 0.2f64.sqrt();
        assert_eq!(g.optimal_arms, vec![0]);
        assert!((g.optimal_mean - 0.552_79).abs() < 1e-5);
        assert!((g.gaps[1].unwrap() - (mu1 - 0.16)).abs() < 1e-12);
        assert!((g.gaps[2].unwrap() - (mu1 - 0.04)).abs() < 1e-12);
        assert!((g.delta_min.unwrap() - 0.392_79).abs() < 1e-5);
        assert_eq!(g.gaps[0], None);
    }

    #[test]
    fn gap_at_boundary_uses_non_optimal_arms() {
        let inst = demo();
        let g = subopt_gap(&inst, 0.8).unwrap();
        assert_eq!(g.optimal_arms, vec![1, 2]);
        let expected = 0.64 - (1.0 - 0.8f64.sqrt());
        assert!((g.delta_min.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let inst = demo();
        let p = optimality_partition(&inst, 1e-3).unwrap();
        let (b1, b2) = demo_boundaries();
        let d = subopt_distance(&inst, 0.2, &p).unwrap();
        assert!((d - (b1 - 0.2)).abs() < 1e-9);
        assert!((d - 0.230_16).abs() < 1e-5);
        let d = subopt_distance(&inst, 0.6, &p).unwrap();
        assert!((d - (0.6 - b1).min(b2 - 0.6)).abs() < 1e-9);
        assert!((d - 0.169_84).abs() < 1e-5);
        assert!(subopt_distance(&inst, -0.1, &p).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let gap = GapReport {
            theta: 0.0,
            optimal_arms: vec![0],
            optimal_mean: 1.0,
            gaps: vec![None, Some(0.2)],
            delta_min: Some(0.2),
            distance: None,
            epsilon: None,
        };
        let e = epsilon_lower_bound(&gap, &HolderCertificate::new(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((e - 0.1).abs() < 1e-15);
        let e = epsilon_lower_bound(&gap, &HolderCertificate::new(1.0, 1.0, 1.0, 0.5).unwrap()).unwrap();
        assert!((e - 0.01).abs() < 1e-15);

        let inst = demo();
        let p = optimality_partition(&inst, 1e-3).unwrap();
        let cert = HolderCertificate::new(1.0, 1.0, 2.0, 1.0).unwrap();
        let r = gap_report(&inst, 0.2, &p, &cert).unwrap();
        assert!((r.epsilon.unwrap() - 0.098_20).abs() < 1e-5);
        assert!(r.epsilon.unwrap() <= r.distance.unwrap());
    }

    proptest! {
        #[test]
        fn partition_agrees_with_argmax(theta in 0.0f64..=1.0) {
            let inst = demo();
            let p = optimality_partition(&inst, 1e-3).unwrap();
            let near_boundary = p.boundaries().iter().any(|b| (b - theta).abs() < 1e-8);
            prop_assume!(!near_boundary);
            prop_assert_eq!(p.arms_at(theta), inst.optimal_arms(theta));
        }

        #[test]
        fn distance_dominates_epsilon(theta in 0.0f64..=1.0, slope in 0.1f64..1.0) {
            // Two crossing lines with a unit inverse constant and forward
            // constant `slope`.
            let inst = make_instance(
                vec![RewardModel::linear(slope, 0.0), RewardModel::linear(-slope, slope)],
                ParameterSpace::unit(),
                HolderCertificate::new(1.0 / slope, 1.0, slope, 1.0).unwrap(),
            )
            .unwrap();
            let p = optimality_partition(&inst, 1e-3).unwrap();
            for (inst, cert) in [
                (&inst, *inst.certificate().unwrap()),
                (&demo(), *demo().certificate().unwrap()),
            ] {
                let p = if inst.num_arms() == 2 { p.clone() } else { optimality_partition(inst, 1e-3).unwrap() };
                let r = gap_report(inst, theta, &p, &cert).unwrap();
                if let Some(eps) = r.epsilon {
                    prop_assert!(eps <= r.distance.unwrap() + 1e-9, "eps={} dist={:?}", eps, r.distance);
                }
            }
        }
    }
}
