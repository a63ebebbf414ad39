//! Doubling constants, Ahlfors regularity fits, uniform perfectness and a
//! hierarchical doubling-measure construction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::greedy_farthest;
use crate::space::FiniteMetricMeasureSpace;

/// Which radii and centers are probed by the grid-based estimators.
///
/// The default is 16 log-spaced radii from the resolution (smallest positive
/// distance) to the diameter, over every center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiPolicy {
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Overrides the log-spaced grid when present.
    pub explicit: Option<Vec<f64>>,
    /// Drop radii below the resolution, where balls are single atoms.
    pub exclude_below_resolution: bool,
    pub centers: Option<Vec<usize>>,
}

impl Default for RadiiPolicy {
    fn default() -> Self {
        RadiiPolicy {
            count: 16,
            min: None,
            max: None,
            explicit: None,
            exclude_below_resolution: true,
            centers: None,
        }
    }
}

impl RadiiPolicy {
    pub fn log_spaced(count: usize, min: f64, max: f64) -> Self {
        RadiiPolicy {
            count,
            min: Some(min),
            max: Some(max),
            ..Default::default()
        }
    }

    pub fn explicit(radii: Vec<f64>) -> Self {
        RadiiPolicy {
            explicit: Some(radii),
            ..Default::default()
        }
    }

    pub fn with_centers(mut self, centers: Vec<usize>) -> Self {
        self.centers = Some(centers);
        self
    }

    pub fn keep_sub_resolution(mut self) -> Self {
        self.exclude_below_resolution = false;
        self
    }

    /// The probed radii, increasing and positive.
    pub fn radii(&self, space: &FiniteMetricMeasureSpace) -> Vec<f64> {
        let Some(resolution) = space.resolution() else {
            return Vec::new();
        };
        let mut radii = match &self.explicit {
            Some(r) => r.clone(),
            None => {
                let lo = self.min.unwrap_or(resolution);
                let hi = self.max.unwrap_or(space.diameter());
                log_grid(lo, hi, self.count)
            }
        };
        radii.retain(|r| *r > 0.0 && r.is_finite());
        if self.exclude_below_resolution {
            radii.retain(|r| *r >= resolution);
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        radii
    }

    pub fn centers(&self, space: &FiniteMetricMeasureSpace) -> Result<Vec<usize>> {
        match &self.centers {
            Some(c) => {
                for &i in c {
                    space.check_index(i)?;
                }
                Ok(c.clone())
            }
            None => Ok((0..space.len()).collect()),
        }
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 0 || !(lo > 0.0) || !(hi >= lo) {
        return Vec::new();
    }
    if count == 1 || hi == lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Largest `μB[x,2r] / μB[x,r]` over probed centers and radii; 1 if nothing is probed.
pub fn measure_doubling_constant(space: &FiniteMetricMeasureSpace, policy: &RadiiPolicy) -> Result<f64> {
    let radii = policy.radii(space);
    let centers = policy.centers(space)?;
    Ok(centers
        .par_iter()
        .map(|&x| {
            let prof = space.ball_profile(x);
            radii
                .iter()
                .map(|&r| prof.closed(2.0 * r) / prof.closed(r))
                .fold(1.0, f64::max)
        })
        .reduce(|| 1.0, f64::max))
}

/// Largest greedy `r/2`-net (seeded at the center) of a probed ball `B[x,r]`.
/// The greedy net certifies an upper bound on the covering number.
pub fn metric_doubling_constant(space: &FiniteMetricMeasureSpace, policy: &RadiiPolicy) -> Result<usize> {
    let radii = policy.radii(space);
    let centers = policy.centers(space)?;
    Ok(centers
        .par_iter()
        .map(|&x| {
            let row = space.dist().row(x);
            radii
                .iter()
                .map(|&r| {
                    let ball: Vec<usize> = (0..space.len()).filter(|&y| row[y] <= r).collect();
                    greedy_farthest(&ball, x, r / 2.0, |a, b| space.distance(a, b)).centers.len()
                })
                .max()
                .unwrap_or(1)
        })
        .max()
        .unwrap_or(1)
        .max(1))
}

/// Power-law fit `μ(B[x,R]) ≈ C R^α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhlforsFit {
    /// Least-squares slope of `log μ(B[x,R])` against `log R`.
    pub alpha: f64,
    /// `exp(max |log μ − α log R|)`: certifies `R^α / C₀ ≤ μ(B[x,R]) ≤ C₀ R^α` on the probes.
    pub c0: f64,
    /// Largest absolute log-residual from the fitted line (with intercept).
    pub residual: f64,
    pub intercept: f64,
    pub samples: usize,
}

pub fn ahlfors_fit(space: &FiniteMetricMeasureSpace, policy: &RadiiPolicy) -> Result<AhlforsFit> {
    let radii = policy.radii(space);
    if radii.len() < 2 {
        return Err(Error::Degenerate(format!(
            "Ahlfors fit needs at least two distinct radii, got {}",
            radii.len()
        )));
    }
    let centers = policy.centers(space)?;
    let samples: Vec<(f64, f64)> = centers
        .par_iter()
        .flat_map_iter(|&x| {
            let prof = space.ball_profile(x);
            radii
                .iter()
                .map(move |&r| (r.ln(), prof.closed(r).ln()))
                .collect::<Vec<_>>()
        })
        .collect();
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let alpha = sxy / sxx;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Degenerate(format!("ball masses do not grow with the radius (slope {alpha})")));
    }
    let intercept = my - alpha * mx;
    let residual = samples
        .iter()
        .map(|s| (s.1 - intercept - alpha * s.0).abs())
        .fold(0.0, f64::max);
    let log_c0 = samples.iter().map(|s| (s.1 - alpha * s.0).abs()).fold(0.0, f64::max);
    Ok(AhlforsFit {
        alpha,
        c0: log_c0.exp(),
        residual,
        intercept,
        samples: samples.len(),
    })
}

/// Smallest `C` such that every probed annulus `{r/C ≤ d(x,·) ≤ r}` around `x`
/// is nonempty, for `r` between the nearest-neighbour distance of `x` and the
/// diameter. Computed exactly from the sorted distances of `x`.
pub fn uniform_perfectness_at(space: &FiniteMetricMeasureSpace, x: usize) -> Result<f64> {
    space.check_index(x)?;
    if space.len() < 2 {
        return Err(Error::Degenerate("uniform perfectness needs at least two points".into()));
    }
    let radii = space.ball_profile(x).distinct_radii();
    let positive = &radii[1..];
    let mut c = 1.0f64;
    for w in positive.windows(2) {
        c = c.max(w[1] / w[0]);
    }
    let last = *positive.last().expect("at least one positive distance");
    Ok(c.max(space.diameter() / last))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformPerfectness {
    /// Largest per-point constant; `None` stands for an unfillable annulus.
    pub constant: Option<f64>,
    pub per_point: Vec<f64>,
}

pub fn uniform_perfectness(space: &FiniteMetricMeasureSpace) -> Result<UniformPerfectness> {
    let per_point = (0..space.len())
        .map(|x| uniform_perfectness_at(space, x))
        .collect::<Result<Vec<_>>>()?;
    let c = per_point.iter().copied().fold(1.0, f64::max);
    Ok(UniformPerfectness {
        constant: c.is_finite().then_some(c),
        per_point,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiDoublingViolation {
    pub center: usize,
    pub r: f64,
    pub k: u32,
    /// `μB[x, a^k r]`
    pub inner_mass: f64,
    /// `(1-a)^k μB[x, r]`
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiDoublingReport {
    pub a: f64,
    pub k_max: u32,
    pub violations: Vec<AntiDoublingViolation>,
}

/// Scans `μB[x, a^k r] ≤ (1-a)^k μB[x, r]` over probed `(x, r)` and
/// `k = 0..=k_max`, skipping inner radii below the resolution.
pub fn anti_doubling_check(
    space: &FiniteMetricMeasureSpace,
    a: f64,
    k_max: u32,
    policy: &RadiiPolicy,
) -> Result<AntiDoublingReport> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::param("a", format!("must lie in (0, 1), got {a}")));
    }
    let resolution = space.resolution().unwrap_or(0.0);
    let radii: Vec<f64> = policy.radii(space).into_iter().filter(|&r| r <= space.diameter()).collect();
    let centers = policy.centers(space)?;
    let violations = centers
        .par_iter()
        .flat_map_iter(|&x| {
            let prof = space.ball_profile(x);
            let mut out = Vec::new();
            for &r in &radii {
                let outer = prof.closed(r);
                for k in 0..=k_max {
                    let inner_r = a.powi(k as i32) * r;
                    if inner_r < resolution {
                        break;
                    }
                    let inner_mass = prof.closed(inner_r);
                    let bound = (1.0 - a).powi(k as i32) * outer;
                    if inner_mass > bound * (1.0 + 1e-12) {
                        out.push(AntiDoublingViolation {
                            center: x,
                            r,
                            k,
                            inner_mass,
                            bound,
                        });
                    }
                }
            }
            out
        })
        .collect();
    Ok(AntiDoublingReport { a, k_max, violations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingMeasure {
    pub masses: Vec<f64>,
    /// Number of net levels in the hierarchy (root included).
    pub levels: usize,
    /// Measured doubling constant of the result on the default probe grid.
    pub doubling_constant: f64,
}

/// Equal-split mass on a hierarchy of nested greedy nets at scales
/// `diameter · 2^{-k}`, down to half the resolution.
///
/// Each center at level `k+1` is attached to its nearest level-`k` center
/// (lowest index on ties); a parent's mass is split equally among its children.
pub fn construct_doubling_measure(space: &FiniteMetricMeasureSpace) -> Result<DoublingMeasure> {
    let n = space.len();
    if n == 1 {
        return Ok(DoublingMeasure {
            masses: vec![1.0],
            levels: 1,
            doubling_constant: 1.0,
        });
    }
    let points: Vec<usize> = (0..n).collect();
    // nets from one farthest-point run are prefixes of its insertion order
    let order = greedy_farthest(&points, 0, 0.0, |a, b| space.distance(a, b));
    let resolution = space.resolution().expect("n >= 2");
    let mut scale = space.diameter();
    let mut prefixes = Vec::new();
    loop {
        let len = order.insertion_radii.iter().take_while(|&&r| r > scale).count();
        prefixes.push(len);
        if scale <= resolution / 2.0 {
            break;
        }
        scale /= 2.0;
    }
    prefixes.dedup();
    debug_assert_eq!(*prefixes.last().unwrap(), n);

    let mut mass = vec![0.0; n];
    mass[order.centers[0]] = 1.0;
    for w in prefixes.windows(2) {
        let (parents, level) = (&order.centers[..w[0]], &order.centers[..w[1]]);
        let parent_of: Vec<usize> = level
            .iter()
            .map(|&c| {
                *parents
                    .iter()
                    .min_by(|&&p, &&q| space.distance(c, p).total_cmp(&space.distance(c, q)).then(p.cmp(&q)))
                    .expect("nonempty parent level")
            })
            .collect();
        let mut children = vec![0usize; n];
        for &p in &parent_of {
            children[p] += 1;
        }
        let mut next = vec![0.0; n];
        for (&c, &p) in level.iter().zip(&parent_of) {
            next[c] = mass[p] / children[p] as f64;
        }
        mass = next;
    }
    let measured = space.with_masses(mass.clone())?;
    let doubling_constant = measure_doubling_constant(&measured, &RadiiPolicy::default())?;
    Ok(DoublingMeasure {
        masses: mass,
        levels: prefixes.len(),
        doubling_constant,
    })
}

/// Consolidated regularity estimates on one probe grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    #[serde(rename = "measure_doubling_D")]
    pub measure_doubling_d: f64,
    #[serde(rename = "metric_doubling_D1")]
    pub metric_doubling_d1: usize,
    pub ahlfors_alpha: f64,
    #[serde(rename = "ahlfors_C0")]
    pub ahlfors_c0: f64,
    pub ahlfors_residual: f64,
    /// `None` encodes an unfillable annulus (infinite constant).
    #[serde(rename = "uniform_perfectness_C5")]
    pub uniform_perfectness_c5: Option<f64>,
    pub radii_grid: Vec<f64>,
    /// Perfectness is probed only at realized scales of each point.
    pub perfectness_scope: String,
}

pub fn regularity_report(space: &FiniteMetricMeasureSpace, policy: &RadiiPolicy) -> Result<RegularityReport> {
    let fit = ahlfors_fit(space, policy)?;
    Ok(RegularityReport {
        measure_doubling_d: measure_doubling_constant(space, policy)?,
        metric_doubling_d1: metric_doubling_constant(space, policy)?,
        ahlfors_alpha: fit.alpha,
        ahlfors_c0: fit.c0,
        ahlfors_residual: fit.residual,
        uniform_perfectness_c5: uniform_perfectness(space)?.constant,
        radii_grid: policy.radii(space),
        perfectness_scope: "r from nearest-neighbour distance to diameter, per point".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pts(xs: &[f64]) -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::from_points(xs.iter().map(|&x| vec![x]).collect(), None, 2.0).unwrap()
    }

    fn line(n: usize) -> FiniteMetricMeasureSpace {
        pts(&(0..n).map(|i| i as f64).collect::<Vec<_>>())
    }

    fn geometric() -> FiniteMetricMeasureSpace {
        let mut xs = vec![0.0];
        xs.extend((0..=6).map(|k| 2f64.powi(-k)));
        pts(&xs)
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.1, 10.0, 3);
        assert_relative_eq!(g[0], 0.1);
        assert_relative_eq!(g[1], 1.0, epsilon = 1e-12);
        assert_eq!(g[2], 10.0);
    }

    #[test]
    fn doubling_on_small_line() {
        let s = line(3);
        // explicit grid {0.5, 1}: center 1 gives μB[1,1]/μB[1,0.5] = 3
        let raw = RadiiPolicy::explicit(vec![0.5, 1.0]).keep_sub_resolution();
        assert_eq!(measure_doubling_constant(&s, &raw).unwrap(), 3.0);
        let at_zero = RadiiPolicy::explicit(vec![0.5, 1.0]).keep_sub_resolution().with_centers(vec![0]);
        assert_eq!(measure_doubling_constant(&s, &at_zero).unwrap(), 2.0);
        // default policy drops r = 0.5 (below resolution); only r = 1 remains
        let snapped = RadiiPolicy::explicit(vec![0.5, 1.0]);
        assert_eq!(measure_doubling_constant(&s, &snapped).unwrap(), 1.5);
    }

    #[test]
    fn single_point_constants() {
        let s = pts(&[0.0]);
        assert_eq!(measure_doubling_constant(&s, &RadiiPolicy::default()).unwrap(), 1.0);
        assert_eq!(metric_doubling_constant(&s, &RadiiPolicy::default()).unwrap(), 1);
        assert!(ahlfors_fit(&s, &RadiiPolicy::default()).is_err());
        assert!(uniform_perfectness(&s).is_err());
        assert_eq!(construct_doubling_measure(&s).unwrap().masses, vec![1.0]);
    }

    #[test]
    fn metric_doubling_on_line() {
        let s = line(4);
        let p = RadiiPolicy::explicit(vec![3.0]).with_centers(vec![0]);
        assert_eq!(metric_doubling_constant(&s, &p).unwrap(), 2);
    }

    #[test]
    fn exact_power_law_fit() {
        // center 0 with masses making μB[0,R] = R² at R = 1..5
        let s = FiniteMetricMeasureSpace::from_points(
            (0..=5).map(|i| vec![i as f64]).collect(),
            Some(vec![1.0, 0.0, 3.0, 5.0, 7.0, 9.0]),
            2.0,
        )
        .unwrap();
        // μB[0,1] = 1, μB[0,2] = 4, μB[0,3] = 9, ...
        let p = RadiiPolicy::explicit(vec![1.0, 2.0, 3.0, 4.0, 5.0]).with_centers(vec![0]);
        let f = ahlfors_fit(&s, &p).unwrap();
        assert_relative_eq!(f.alpha, 2.0, epsilon = 1e-12);
        assert!(f.residual < 1e-12);
        assert_relative_eq!(f.c0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ahlfors_degenerate_grid() {
        let s = line(4);
        let one = RadiiPolicy::explicit(vec![2.0]);
        assert!(matches!(ahlfors_fit(&s, &one), Err(Error::Degenerate(_))));
        // all balls equal: whole space at both radii
        let flat = RadiiPolicy::explicit(vec![3.0, 4.0]);
        assert!(matches!(ahlfors_fit(&s, &flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn perfectness_examples() {
        assert_eq!(uniform_perfectness(&pts(&[0.0, 1.0])).unwrap().constant, Some(1.0));
        assert_eq!(uniform_perfectness_at(&geometric(), 0).unwrap(), 2.0);
        let l = uniform_perfectness(&line(10)).unwrap();
        assert!(l.constant.unwrap() <= 2.0);
    }

    #[test]
    fn anti_doubling_examples() {
        // cluster of 10 points near 0 plus an isolated point at 100
        let mut xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        xs.push(100.0);
        let s = pts(&xs);
        let r = anti_doubling_check(&s, 0.5, 3, &RadiiPolicy::log_spaced(32, 0.1, 100.0)).unwrap();
        assert!(!r.violations.is_empty());
        assert!(r.violations.iter().all(|v| v.k > 0));
        // k = 0 never violates
        let k0 = anti_doubling_check(&s, 0.5, 0, &RadiiPolicy::default()).unwrap();
        assert!(k0.violations.is_empty());
        assert!(anti_doubling_check(&s, 1.0, 1, &RadiiPolicy::default()).is_err());
    }

    #[test]
    fn doubling_measure_on_line() {
        let m = construct_doubling_measure(&line(4)).unwrap();
        assert_eq!(m.masses, vec![0.25; 4]);
    }

    #[test]
    fn doubling_measure_on_geometric_set() {
        let m = construct_doubling_measure(&geometric()).unwrap();
        assert_relative_eq!(m.masses.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(m.masses.iter().all(|&x| x > 0.0));
        assert!(m.doubling_constant.is_finite());
        assert!(m.doubling_constant <= 8.0, "measured {}", m.doubling_constant);
    }
}
