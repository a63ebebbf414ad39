//! Minimal ε-nets by greedy farthest-point selection, their intersection
//! patterns and covering order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snowflake::{quasimetric_q, QuasimetricVariant};
use crate::space::FiniteMetricMeasureSpace;

/// A minimal ε-net: closed ε-balls around the centers cover the space and
/// centers are pairwise more than ε apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    space_fingerprint: u64,
    space_len: usize,
    pub epsilon: f64,
    /// Point indices in insertion order.
    pub centers: Vec<usize>,
    /// Largest distance from a point to its nearest center.
    pub covering_radius: f64,
    /// Smallest distance between two centers; infinite for a single center.
    pub separation: f64,
}

/// Serialized form of a [`Net`]. A single-center net has `separation: null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetRecord {
    pub epsilon: f64,
    pub centers: Vec<String>,
    pub covering_radius: f64,
    pub separation: Option<f64>,
}

impl Net {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn belongs_to(&self, space: &FiniteMetricMeasureSpace) -> bool {
        self.space_len == space.len() && self.space_fingerprint == space.fingerprint()
    }

    pub(crate) fn check_space(&self, space: &FiniteMetricMeasureSpace) -> Result<()> {
        if self.belongs_to(space) {
            Ok(())
        } else {
            Err(Error::Mismatch(format!(
                "net built over a space of {} points, got {}",
                self.space_len,
                space.len()
            )))
        }
    }

    /// Wraps an explicit center list, recomputing covering radius and separation.
    pub fn from_centers(space: &FiniteMetricMeasureSpace, epsilon: f64, centers: Vec<usize>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Empty("net centers"));
        }
        for &c in &centers {
            space.check_index(c)?;
        }
        let covering_radius = (0..space.len())
            .map(|x| {
                centers
                    .iter()
                    .map(|&c| space.distance(x, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        Ok(Net {
            space_fingerprint: space.fingerprint(),
            space_len: space.len(),
            epsilon,
            separation: min_pairwise(&centers, |a, b| space.distance(a, b)),
            centers,
            covering_radius,
        })
    }

    pub fn to_record(&self, space: &FiniteMetricMeasureSpace) -> NetRecord {
        NetRecord {
            epsilon: self.epsilon,
            centers: self.centers.iter().map(|&c| space.ids()[c].clone()).collect(),
            covering_radius: self.covering_radius,
            separation: self.separation.is_finite().then_some(self.separation),
        }
    }

    /// Rebuilds a net from its record, resolving center ids against `space`.
    pub fn from_record(space: &FiniteMetricMeasureSpace, record: &NetRecord) -> Result<Self> {
        let centers = record
            .centers
            .iter()
            .map(|id| {
                space
                    .ids()
                    .iter()
                    .position(|x| x == id)
                    .ok_or_else(|| Error::UnknownVertex(id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_centers(space, record.epsilon, centers)
    }
}

fn min_pairwise(items: &[usize], dist: impl Fn(usize, usize) -> f64) -> f64 {
    let mut m = f64::INFINITY;
    for (a, &i) in items.iter().enumerate() {
        for &j in &items[a + 1..] {
            m = m.min(dist(i, j));
        }
    }
    m
}

/// Outcome of a greedy farthest-point run over a subset of points.
#[derive(Debug, Clone)]
pub(crate) struct Greedy {
    pub centers: Vec<usize>,
    /// Distance of each center to the previously chosen ones when it was added.
    pub insertion_radii: Vec<f64>,
    pub covering_radius: f64,
}

/// Greedy farthest-point selection over `points`, starting at `seed`, adding
/// the farthest point (lowest index on ties) while its distance exceeds `epsilon`.
pub(crate) fn greedy_farthest(
    points: &[usize],
    seed: usize,
    epsilon: f64,
    dist: impl Fn(usize, usize) -> f64,
) -> Greedy {
    let mut nearest: Vec<f64> = points.iter().map(|&p| dist(seed, p)).collect();
    let mut centers = vec![seed];
    let mut insertion_radii = vec![f64::INFINITY];
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (slot, &d) in nearest.iter().enumerate() {
            let better = match best {
                None => true,
                Some((b, bd)) => d > bd || (d == bd && points[slot] < points[b]),
            };
            if better {
                best = Some((slot, d));
            }
        }
        let Some((slot, far)) = best else {
            return Greedy {
                centers,
                insertion_radii,
                covering_radius: 0.0,
            };
        };
        if far <= epsilon {
            return Greedy {
                centers,
                insertion_radii,
                covering_radius: far,
            };
        }
        let c = points[slot];
        centers.push(c);
        insertion_radii.push(far);
        for (slot, &p) in points.iter().enumerate() {
            let d = dist(c, p);
            if d < nearest[slot] {
                nearest[slot] = d;
            }
        }
    }
}

/// Builds a minimal ε-net by greedy farthest-point selection from `seed`.
pub fn minimal_epsilon_net(space: &FiniteMetricMeasureSpace, epsilon: f64, seed: usize) -> Result<Net> {
    space.check_index(seed)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::param("epsilon", format!("must be positive and finite, got {epsilon}")));
    }
    let points: Vec<usize> = (0..space.len()).collect();
    let g = greedy_farthest(&points, seed, epsilon, |a, b| space.distance(a, b));
    let separation = min_pairwise(&g.centers, |a, b| space.distance(a, b));
    Ok(Net {
        space_fingerprint: space.fingerprint(),
        space_len: space.len(),
        epsilon,
        centers: g.centers,
        covering_radius: g.covering_radius,
        separation,
    })
}

/// For each point, the net positions `k` whose closed ε-ball contains it.
pub(crate) fn memberships(space: &FiniteMetricMeasureSpace, net: &Net) -> Vec<Vec<usize>> {
    (0..space.len())
        .map(|x| {
            net.centers
                .iter()
                .enumerate()
                .filter(|(_, &c)| space.distance(x, c) <= net.epsilon)
                .map(|(k, _)| k)
                .collect()
        })
        .collect()
}

/// Pairs of net positions `(k, l)`, `k < l`, whose closed ε-balls share a point.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionPattern {
    pub edges: BTreeSet<(usize, usize)>,
}

impl IntersectionPattern {
    pub fn contains(&self, k: usize, l: usize) -> bool {
        self.edges.contains(&(k.min(l), k.max(l)))
    }
}

/// Intersection pattern decided by witness points of the space.
pub fn intersection_pattern(space: &FiniteMetricMeasureSpace, net: &Net) -> Result<IntersectionPattern> {
    net.check_space(space)?;
    let mut edges = BTreeSet::new();
    for m in memberships(space, net) {
        for (a, &k) in m.iter().enumerate() {
            for &l in &m[a + 1..] {
                edges.insert((k, l));
            }
        }
    }
    Ok(IntersectionPattern { edges })
}

/// Largest number of closed ε-balls of the net containing a single point.
pub fn covering_order(space: &FiniteMetricMeasureSpace, net: &Net) -> Result<usize> {
    net.check_space(space)?;
    Ok(memberships(space, net)
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0)
        .max(1))
}

/// Both directions of the d-net / q_{μ,s}-net comparison under given Ahlfors parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetEquivalenceReport {
    /// `max_x min_c q(x, c) / ε^{sα}` over the centers of the d-ε-net.
    pub forward_constant: f64,
    /// `2^α C₀^α`.
    pub forward_budget: f64,
    /// d-covering radius of the q-net at level `C⋆ ε^{sα}`, divided by ε.
    pub backward_constant: f64,
    /// `C₀^{1/α} (C⋆)^{1/(sα)}`.
    pub backward_budget: f64,
    pub d_net_size: usize,
    pub q_epsilon: f64,
    pub q_net_size: usize,
    pub holds: bool,
}

/// Checks that a d-ε-net is a q_{μ,s}-net at level `C⋆ ε^{sα}` with
/// `C⋆ = 2^α C₀^α`, and that a q-net at that level is a d-net at scale
/// comparable to ε.
///
/// The backward budget follows from the lower Ahlfors bound
/// `q(x,y) ≥ μ(B[x,d(x,y)])^s ≥ (d(x,y)^α / C₀)^s`.
pub fn net_equivalence_check(
    space: &FiniteMetricMeasureSpace,
    s: f64,
    epsilon: f64,
    ahlfors_alpha: f64,
    ahlfors_c0: f64,
) -> Result<NetEquivalenceReport> {
    if !(s > 0.0) {
        return Err(Error::param("s", format!("must be positive, got {s}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    if !(ahlfors_alpha > 0.0) {
        return Err(Error::param("ahlfors_alpha", format!("must be positive, got {ahlfors_alpha}")));
    }
    if !(ahlfors_c0 >= 1.0) {
        return Err(Error::param("ahlfors_C0", format!("must be >= 1, got {ahlfors_c0}")));
    }
    if !(space.total_mass() > 0.0) {
        return Err(Error::Degenerate("zero total mass".into()));
    }
    let alpha = ahlfors_alpha;
    let forward_budget = 2f64.powf(alpha) * ahlfors_c0.powf(alpha);
    let backward_budget = ahlfors_c0.powf(1.0 / alpha) * forward_budget.powf(1.0 / (s * alpha));
    let q_epsilon = forward_budget * epsilon.powf(s * alpha);
    if space.len() == 1 {
        return Ok(NetEquivalenceReport {
            forward_constant: 0.0,
            forward_budget,
            backward_constant: 0.0,
            backward_budget,
            d_net_size: 1,
            q_epsilon,
            q_net_size: 1,
            holds: true,
        });
    }
    let q = quasimetric_q(space, s, QuasimetricVariant::General)?;
    let qv = &q.values;

    let d_net = minimal_epsilon_net(space, epsilon, 0)?;
    let q_cover = (0..space.len())
        .map(|x| d_net.centers.iter().map(|&c| qv.get(x, c)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let forward_constant = q_cover / epsilon.powf(s * alpha);

    let points: Vec<usize> = (0..space.len()).collect();
    let q_net = greedy_farthest(&points, 0, q_epsilon, |a, b| qv.get(a, b));
    let d_cover = (0..space.len())
        .map(|x| q_net.centers.iter().map(|&c| space.distance(x, c)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let backward_constant = d_cover / epsilon;

    Ok(NetEquivalenceReport {
        forward_constant,
        forward_budget,
        backward_constant,
        backward_budget,
        d_net_size: d_net.len(),
        q_epsilon,
        q_net_size: q_net.centers.len(),
        holds: forward_constant <= forward_budget && backward_constant <= backward_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::from_points((0..n).map(|i| vec![i as f64]).collect(), None, 2.0).unwrap()
    }

    #[test]
    fn greedy_trace_on_line() {
        let s = line(4);
        let net = minimal_epsilon_net(&s, 1.0, 0).unwrap();
        assert_eq!(net.centers, vec![0, 3]);
        assert_eq!(net.covering_radius, 1.0);
        assert_eq!(net.separation, 3.0);
    }

    #[test]
    fn large_epsilon_gives_seed() {
        let s = line(5);
        for seed in 0..5 {
            let net = minimal_epsilon_net(&s, 4.0, seed).unwrap();
            assert_eq!(net.centers, vec![seed]);
            assert!(net.separation.is_infinite());
            assert!(net.to_record(&s).separation.is_none());
        }
    }

    #[test]
    fn net_errors() {
        let s = line(3);
        assert!(minimal_epsilon_net(&s, 0.0, 0).is_err());
        assert!(minimal_epsilon_net(&s, -1.0, 0).is_err());
        assert!(matches!(minimal_epsilon_net(&s, 1.0, 9), Err(Error::IndexOutOfRange { .. })));
        let other = line(4);
        let net = minimal_epsilon_net(&other, 1.0, 0).unwrap();
        assert!(matches!(covering_order(&s, &net), Err(Error::Mismatch(_))));
        assert!(matches!(intersection_pattern(&s, &net), Err(Error::Mismatch(_))));
    }

    #[test]
    fn patterns_on_line() {
        let s = line(4);
        let n1 = Net::from_centers(&s, 1.0, vec![0, 3]).unwrap();
        assert!(intersection_pattern(&s, &n1).unwrap().edges.is_empty());
        assert_eq!(covering_order(&s, &n1).unwrap(), 1);

        let n2 = Net::from_centers(&s, 2.0, vec![0, 3]).unwrap();
        let p = intersection_pattern(&s, &n2).unwrap();
        assert_eq!(p.edges.into_iter().collect::<Vec<_>>(), vec![(0, 1)]);

        let n3 = Net::from_centers(&s, 3.0, vec![0, 3]).unwrap();
        assert_eq!(covering_order(&s, &n3).unwrap(), 2);

        let single = Net::from_centers(&s, 5.0, vec![2]).unwrap();
        assert!(intersection_pattern(&s, &single).unwrap().edges.is_empty());
        assert_eq!(covering_order(&s, &single).unwrap(), 1);
    }

    #[test]
    fn record_round_trip() {
        let s = line(6);
        let net = minimal_epsilon_net(&s, 1.5, 2).unwrap();
        let json = serde_json::to_string(&net.to_record(&s)).unwrap();
        let back: NetRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(Net::from_record(&s, &back).unwrap(), net);
    }

    #[test]
    fn equivalence_single_point() {
        let s = FiniteMetricMeasureSpace::from_points(vec![vec![0.0]], None, 2.0).unwrap();
        let r = net_equivalence_check(&s, 0.5, 0.2, 2.0, 1.0).unwrap();
        assert!(r.holds);
        assert_eq!(r.forward_constant, 0.0);
        assert_eq!(r.backward_constant, 0.0);
    }

    #[test]
    fn equivalence_parameter_errors() {
        let s = line(3);
        assert!(net_equivalence_check(&s, 0.0, 0.2, 2.0, 1.0).is_err());
        assert!(net_equivalence_check(&s, 0.5, 0.2, 2.0, 0.5).is_err());
        assert!(net_equivalence_check(&s, 0.5, 0.2, -1.0, 1.0).is_err());
    }
}
