//! Distances between subsets and measures of one space (Hausdorff,
//! Prokhorov, Wasserstein-2, common-space GHP) and the exact
//! Gromov-Hausdorff distance between two tiny spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::space::FiniteMetricMeasureSpace;
use crate::transport;

/// Largest `|X| + |Y|` accepted by [`gromov_hausdorff_bruteforce`].
pub const GH_SIZE_LIMIT: usize = 14;

/// Tolerance for treating a weight vector as a probability vector.
const NORMALIZATION_TOL: f64 = 1e-9;

/// Weights on the points of one space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub space_fingerprint: u64,
    pub weights: Vec<f64>,
    pub normalized: bool,
}

impl DiscreteMeasure {
    pub fn new(space: &FiniteMetricMeasureSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::MassCount {
                expected: space.len(),
                found: weights.len(),
            });
        }
        for (index, &mass) in weights.iter().enumerate() {
            if !(mass >= 0.0) || !mass.is_finite() {
                return Err(Error::NegativeMass { index, mass });
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::NonPositiveTotalMass(total));
        }
        Ok(DiscreteMeasure {
            space_fingerprint: space.fingerprint(),
            normalized: (total - 1.0).abs() <= NORMALIZATION_TOL,
            weights,
        })
    }

    /// The space's own measure, rescaled to a probability measure.
    pub fn from_space(space: &FiniteMetricMeasureSpace) -> Self {
        DiscreteMeasure {
            space_fingerprint: space.fingerprint(),
            weights: space.normalized_masses(),
            normalized: true,
        }
    }

    pub fn dirac(space: &FiniteMetricMeasureSpace, point: usize) -> Result<Self> {
        space.check_index(point)?;
        let mut weights = vec![0.0; space.len()];
        weights[point] = 1.0;
        Self::new(space, weights)
    }

    /// Uniform probability on the given points.
    pub fn uniform_on(space: &FiniteMetricMeasureSpace, points: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("support"));
        }
        let mut weights = vec![0.0; space.len()];
        for &p in points {
            space.check_index(p)?;
            weights[p] = 1.0;
        }
        let count = weights.iter().filter(|&&w| w > 0.0).count() as f64;
        weights.iter_mut().for_each(|w| *w /= count);
        Self::new(space, weights)
    }

    pub fn normalize(&self) -> Self {
        let total: f64 = self.weights.iter().sum();
        DiscreteMeasure {
            space_fingerprint: self.space_fingerprint,
            weights: self.weights.iter().map(|w| w / total).collect(),
            normalized: true,
        }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices carrying positive weight, in increasing order.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    Exact,
    BinarySearch,
    BruteForce,
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// Sparse coupling `(x, y, mass)`.
    Coupling(Vec<(usize, usize, f64)>),
    /// Pairs `(x in X, y in Y)` of a correspondence.
    Correspondence(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    pub method: DistanceMethod,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Certificate>,
}

impl DistanceResult {
    pub fn coupling(&self) -> Option<&[(usize, usize, f64)]> {
        match &self.certificate {
            Some(Certificate::Coupling(c)) => Some(c),
            _ => None,
        }
    }

    pub fn correspondence(&self) -> Option<&[(usize, usize)]> {
        match &self.certificate {
            Some(Certificate::Correspondence(c)) => Some(c),
            _ => None,
        }
    }
}

fn check_set(space: &FiniteMetricMeasureSpace, set: &[usize], what: &'static str) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Empty(what));
    }
    set.iter().try_for_each(|&i| space.check_index(i))
}

fn directed_hausdorff(space: &FiniteMetricMeasureSpace, a: &[usize], b: &[usize]) -> f64 {
    a.iter()
        .map(|&x| b.iter().map(|&y| space.distance(x, y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two nonempty point sets.
pub fn hausdorff(space: &FiniteMetricMeasureSpace, a: &[usize], b: &[usize]) -> Result<DistanceResult> {
    check_set(space, a, "first set")?;
    check_set(space, b, "second set")?;
    let value = directed_hausdorff(space, a, b).max(directed_hausdorff(space, b, a));
    Ok(DistanceResult {
        value,
        method: DistanceMethod::Exact,
        tolerance: 0.0,
        certificate: None,
    })
}

fn check_pair(space: &FiniteMetricMeasureSpace, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    for m in [mu, nu] {
        if m.space_fingerprint != space.fingerprint() || m.weights.len() != space.len() {
            return Err(Error::Mismatch("measure is defined on a different space".into()));
        }
        let total = m.total();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
    }
    Ok(())
}

/// Largest mass a coupling of `mu` and `nu` can put on pairs at distance `<= r`,
/// together with that partial coupling.
fn close_mass(
    space: &FiniteMetricMeasureSpace,
    xs: &[usize],
    mu: &[f64],
    ys: &[usize],
    nu: &[f64],
    r: f64,
) -> (f64, Vec<(usize, usize, f64)>) {
    let source = xs.len() + ys.len();
    let sink = source + 1;
    let mut net = FlowNetwork::new(sink + 1);
    for (a, &x) in xs.iter().enumerate() {
        net.add_edge(source, a, mu[x]);
    }
    for (b, &y) in ys.iter().enumerate() {
        net.add_edge(xs.len() + b, sink, nu[y]);
    }
    let mut middle = Vec::new();
    for (a, &x) in xs.iter().enumerate() {
        for (b, &y) in ys.iter().enumerate() {
            if space.distance(x, y) <= r {
                middle.push((x, y, net.add_edge(a, xs.len() + b, f64::INFINITY)));
            }
        }
    }
    let value = net.max_flow(source, sink);
    let plan = middle
        .into_iter()
        .map(|(x, y, e)| (x, y, net.flow(e)))
        .filter(|&(_, _, f)| f > 0.0)
        .collect();
    (value, plan)
}

/// Completes a partial coupling to one with the exact marginals, pairing the
/// leftover masses greedily in index order.
fn complete_coupling(
    mut plan: Vec<(usize, usize, f64)>,
    mu: &[f64],
    nu: &[f64],
) -> Vec<(usize, usize, f64)> {
    let mut left = mu.to_vec();
    let mut need = nu.to_vec();
    for &(x, y, f) in &plan {
        left[x] -= f;
        need[y] -= f;
    }
    let mut j = 0;
    for i in 0..left.len() {
        while left[i] > 1e-15 && j < need.len() {
            if need[j] <= 1e-15 {
                j += 1;
                continue;
            }
            let amount = left[i].min(need[j]);
            plan.push((i, j, amount));
            left[i] -= amount;
            need[j] -= amount;
        }
    }
    merge_entries(plan)
}

fn merge_entries(mut plan: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    plan.sort_by_key(|e| (e.0, e.1));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(plan.len());
    for (x, y, f) in plan {
        match out.last_mut() {
            Some(last) if last.0 == x && last.1 == y => last.2 += f,
            _ => out.push((x, y, f)),
        }
    }
    out
}

/// Default search tolerance for [`prokhorov`].
pub fn default_tolerance(space: &FiniteMetricMeasureSpace) -> f64 {
    1e-6 * space.diameter().max(1.0)
}

/// Prokhorov distance between two probability measures on one space.
///
/// Strassen: `d_P <= r` iff some coupling puts mass `<= r` on pairs farther
/// apart than `r`. The best such mass `g(r) = 1 - F(r)` only changes at
/// realized distances `d_k`, so `d_P = min_k max(d_k, g(d_k))`. The minimum
/// is located by bisection over the sorted candidates, each probe a max-flow.
/// The result is exact up to floating-point flow error; `tol` is reported.
pub fn prokhorov(
    space: &FiniteMetricMeasureSpace,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: f64,
) -> Result<DistanceResult> {
    check_pair(space, mu, nu)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let xs = mu.support();
    let ys = nu.support();
    let mut candidates: Vec<f64> = std::iter::once(0.0)
        .chain(xs.iter().flat_map(|&x| ys.iter().map(move |&y| space.distance(x, y))))
        .filter(|&d| d < 1.0)
        .collect();
    candidates.push(1.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let slack = |r: f64| {
        let (moved, _) = close_mass(space, &xs, &mu.weights, &ys, &nu.weights, r);
        let missing = 1.0 - moved;
        if missing <= 1e-12 {
            0.0
        } else {
            missing
        }
    };
    // first candidate with g(d_k) <= d_k; the answer is the smaller of
    // d_k there and g at the previous candidate
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut g_cache = vec![f64::NAN; candidates.len()];
    g_cache[hi] = slack(candidates[hi]);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let g = slack(candidates[mid]);
        g_cache[mid] = g;
        if g <= candidates[mid] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k = lo;
    let mut value = candidates[k];
    let mut at = candidates[k];
    if k > 0 {
        let g_prev = if g_cache[k - 1].is_nan() {
            slack(candidates[k - 1])
        } else {
            g_cache[k - 1]
        };
        if g_prev < value {
            value = g_prev;
            at = candidates[k - 1];
        }
    }
    let value = value.min(1.0);
    let (_, partial) = close_mass(space, &xs, &mu.weights, &ys, &nu.weights, at);
    Ok(DistanceResult {
        value,
        method: DistanceMethod::BinarySearch,
        tolerance: tol,
        certificate: Some(Certificate::Coupling(complete_coupling(partial, &mu.weights, &nu.weights))),
    })
}

/// Exact Wasserstein-2 distance by solving the transportation problem.
pub fn wasserstein2(space: &FiniteMetricMeasureSpace, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<DistanceResult> {
    check_pair(space, mu, nu)?;
    let xs = mu.support();
    let ys = nu.support();
    let supply: Vec<f64> = xs.iter().map(|&x| mu.weights[x]).collect();
    let demand: Vec<f64> = ys.iter().map(|&y| nu.weights[y]).collect();
    let plan = transport::solve(&supply, &demand, |a, b| {
        let d = space.distance(xs[a], ys[b]);
        d * d
    });
    let coupling = plan.entries.iter().map(|&(a, b, f)| (xs[a], ys[b], f)).collect();
    Ok(DistanceResult {
        value: plan.cost.max(0.0).sqrt(),
        method: DistanceMethod::Exact,
        tolerance: 1e-12,
        certificate: Some(Certificate::Coupling(coupling)),
    })
}

/// `d_H(supports) + d_P(measures)` for two measures sharing one ambient space:
/// an upper bound on their Gromov-Hausdorff-Prokhorov distance.
pub fn ghp_common(space: &FiniteMetricMeasureSpace, a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<DistanceResult> {
    check_pair(space, a, b)?;
    let h = hausdorff(space, &a.support(), &b.support())?;
    let p = prokhorov(space, a, b, default_tolerance(space))?;
    Ok(DistanceResult {
        value: h.value + p.value,
        method: DistanceMethod::UpperBound,
        tolerance: p.tolerance,
        certificate: p.certificate,
    })
}

/// Exact Gromov-Hausdorff distance: half the least distortion of a correspondence.
///
/// The candidate distortions are the finitely many values `|d_X(a,a') - d_Y(b,b')|`.
/// Feasibility of a threshold is decided by backtracking: every point of `X`
/// and of `Y` picks a partner so that all chosen pairs are pairwise compatible.
pub fn gromov_hausdorff_bruteforce(x: &FiniteMetricMeasureSpace, y: &FiniteMetricMeasureSpace) -> Result<DistanceResult> {
    let (n, m) = (x.len(), y.len());
    if n + m > GH_SIZE_LIMIT {
        return Err(Error::SizeGuard {
            found: n + m,
            limit: GH_SIZE_LIMIT,
        });
    }
    if n == 0 || m == 0 {
        return Err(Error::Empty("space"));
    }
    let gap = |p: usize, q: usize| (x.distance(p / m, q / m) - y.distance(p % m, q % m)).abs();
    let pairs = n * m;
    let mut candidates: Vec<f64> = (0..pairs).flat_map(|p| (p..pairs).map(move |q| (p, q))).map(|(p, q)| gap(p, q)).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = correspondence_within(n, m, &gap, candidates[hi]).expect("the full product is always feasible");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match correspondence_within(n, m, &gap, candidates[mid]) {
            Some(found) => {
                best = found;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Ok(DistanceResult {
        value: candidates[lo] / 2.0,
        method: DistanceMethod::BruteForce,
        tolerance: 0.0,
        certificate: Some(Certificate::Correspondence(best)),
    })
}

/// Pair compatibility bitsets (`pairs <= 49` fits a `u64`).
fn correspondence_within(n: usize, m: usize, gap: &dyn Fn(usize, usize) -> f64, delta: f64) -> Option<Vec<(usize, usize)>> {
    let pairs = n * m;
    let compat: Vec<u64> = (0..pairs)
        .map(|p| (0..pairs).filter(|&q| gap(p, q) <= delta).fold(0u64, |acc, q| acc | 1 << q))
        .collect();
    // slots 0..n choose a partner for each x, slots n..n+m for each y
    let domains: Vec<u64> = (0..n)
        .map(|a| (0..m).fold(0u64, |acc, b| acc | 1 << (a * m + b)))
        .chain((0..m).map(|b| (0..n).fold(0u64, |acc, a| acc | 1 << (a * m + b))))
        .collect();
    let mut chosen = Vec::with_capacity(n + m);
    if search(&domains, &compat, u64::MAX, 0, &mut chosen) {
        let mut out: Vec<(usize, usize)> = chosen.iter().map(|&p| (p / m, p % m)).collect();
        out.sort_unstable();
        out.dedup();
        Some(out)
    } else {
        None
    }
}

fn search(domains: &[u64], compat: &[u64], allowed: u64, slot: usize, chosen: &mut Vec<usize>) -> bool {
    if slot == domains.len() {
        return true;
    }
    // forward check: every remaining slot keeps a candidate
    if domains[slot..].iter().any(|&d| d & allowed == 0) {
        return false;
    }
    let mut options = domains[slot] & allowed;
    while options != 0 {
        let p = options.trailing_zeros() as usize;
        options &= options - 1;
        chosen.push(p);
        if search(domains, compat, allowed & compat[p], slot + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}
