//! Finite metric measure spaces: construction, validation and ball masses.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Relative triangle-inequality tolerance applied to raw matrices, scaled by the diameter.
pub const DEFAULT_TRIANGLE_TOLERANCE: f64 = 1e-9;

/// Coordinates a space was built from, together with the ℓ_p exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub points: Vec<Vec<f64>>,
    pub p: f64,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// ℓ_p distance between two coordinate tuples.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        lp_distance(a, b, self.p)
    }
}

pub(crate) fn lp_distance(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    } else if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else if p == 2.0 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// A finite metric space with a measure given by point masses.
///
/// Immutable after construction; all accessors are cheap.
#[derive(Debug, Clone)]
pub struct FiniteMetricMeasureSpace {
    ids: Vec<String>,
    dist: SquareMatrix,
    mass: Vec<f64>,
    diameter: f64,
    total_mass: f64,
    embedding: Option<Embedding>,
    fingerprint: u64,
}

impl FiniteMetricMeasureSpace {
    /// Builds the ℓ_p distance space of a point cloud. Masses default to 1.
    pub fn from_points(
        coords: Vec<Vec<f64>>,
        masses: Option<Vec<f64>>,
        p: f64,
    ) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("point list"));
        }
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let dim = coords[0].len();
        for (index, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::param("coords", format!("point {index} is not finite")));
            }
        }
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            // +0.0 and -0.0 are the same point
            let key: Vec<u64> = c.iter().map(|v| (v + 0.0).to_bits()).collect();
            if let Some(&j) = seen.get(&key) {
                return Err(Error::DuplicatePoint {
                    first: j.to_string(),
                    second: i.to_string(),
                });
            }
            seen.insert(key, i);
        }
        let n = coords.len();
        let mass = check_masses(masses, n)?;
        let mut dist = SquareMatrix::zeros(n);
        dist.as_mut_slice()
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, row)| {
                for (j, d) in row.iter_mut().enumerate() {
                    if i != j {
                        *d = lp_distance(&coords[i], &coords[j], p);
                    }
                }
            });
        let ids = (0..n).map(|i| i.to_string()).collect();
        let mut space = Self::assemble(ids, dist, mass)?;
        space.embedding = Some(Embedding { points: coords, p });
        Ok(space)
    }

    /// Builds the shortest-path metric of a connected weighted graph.
    pub fn from_graph(vertices: Vec<(String, f64)>, edges: Vec<(String, String, f64)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Empty("vertex list"));
        }
        let mut graph: UnGraph<(), f64> = UnGraph::with_capacity(vertices.len(), edges.len());
        let mut index: HashMap<&str, NodeIndex> = HashMap::new();
        for (id, _) in &vertices {
            let node = graph.add_node(());
            if index.insert(id.as_str(), node).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        for (u, v, w) in &edges {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight {
                    u: u.clone(),
                    v: v.clone(),
                    w: *w,
                });
            }
            let a = *index.get(u.as_str()).ok_or_else(|| Error::UnknownVertex(u.clone()))?;
            let b = *index.get(v.as_str()).ok_or_else(|| Error::UnknownVertex(v.clone()))?;
            if a != b {
                graph.add_edge(a, b, *w);
            }
        }
        let n = vertices.len();
        let rows: Vec<Vec<Option<f64>>> = (0..n)
            .into_par_iter()
            .map(|s| {
                let reached = petgraph::algo::dijkstra(&graph, NodeIndex::new(s), None, |e| *e.weight());
                let mut row = vec![None; n];
                for (node, d) in reached {
                    row[node.index()] = Some(d);
                }
                row
            })
            .collect();
        let mut dist = SquareMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                match d {
                    Some(d) => dist.set(i, j, *d),
                    None => return Err(Error::Disconnected(vertices[j].0.clone())),
                }
            }
        }
        // shortest paths are symmetric up to summation order
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist.get(i, j).min(dist.get(j, i));
                dist.set(i, j, d);
                dist.set(j, i, d);
            }
        }
        let (ids, masses): (Vec<String>, Vec<f64>) = vertices.into_iter().unzip();
        let mass = check_masses(Some(masses), n)?;
        Self::assemble(ids, dist, mass)
    }

    /// Accepts a raw distance matrix only if [`validate`] reports no violations
    /// at `tol_tri` (absolute). `None` uses `1e-9 * diameter`.
    pub fn from_matrix(
        ids: Option<Vec<String>>,
        dist: SquareMatrix,
        masses: Option<Vec<f64>>,
        tol_tri: Option<f64>,
    ) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::Empty("distance matrix"));
        }
        let tol = tol_tri.unwrap_or_else(|| DEFAULT_TRIANGLE_TOLERANCE * dist.max_off_diagonal());
        let mass = masses.clone().unwrap_or_else(|| vec![1.0; n]);
        let report = validate(&dist.to_rows(), &mass, tol)?;
        if !report.is_valid() {
            return Err(Error::InvalidMetric(report.summary()));
        }
        let mass = check_masses(masses, n)?;
        let ids = match ids {
            Some(ids) if ids.len() == n => ids,
            Some(ids) => {
                return Err(Error::param(
                    "ids",
                    format!("{} ids for {} points", ids.len(), n),
                ))
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Self::assemble(ids, dist, mass)
    }

    fn assemble(ids: Vec<String>, dist: SquareMatrix, mass: Vec<f64>) -> Result<Self> {
        let total_mass: f64 = mass.iter().sum();
        if !(total_mass > 0.0) {
            return Err(Error::NonPositiveTotalMass(total_mass));
        }
        let diameter = dist.as_slice().iter().copied().fold(0.0, f64::max);
        let mut h = DefaultHasher::new();
        dist.len().hash(&mut h);
        for v in dist.as_slice().iter().chain(mass.iter()) {
            v.to_bits().hash(&mut h);
        }
        Ok(FiniteMetricMeasureSpace {
            ids,
            dist,
            mass,
            diameter,
            total_mass,
            embedding: None,
            fingerprint: h.finish(),
        })
    }

    /// Same points and metric, different masses.
    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        let mass = check_masses(Some(masses), self.len())?;
        let mut out = Self::assemble(self.ids.clone(), self.dist.clone(), mass)?;
        out.embedding = self.embedding.clone();
        Ok(out)
    }

    /// Same points and masses under a replacement metric (which must be valid).
    pub fn with_metric(&self, dist: SquareMatrix) -> Result<Self> {
        if dist.len() != self.len() {
            return Err(Error::Mismatch("metric size differs from point count".into()));
        }
        Self::from_matrix(Some(self.ids.clone()), dist, Some(self.mass.clone()), None)
    }

    /// Restriction to a subset of points (in the given order).
    pub fn subspace(&self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            self.check_index(i)?;
        }
        let n = indices.len();
        let dist = SquareMatrix::from_fn(n, |a, b| self.distance(indices[a], indices[b]));
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        let mass = indices.iter().map(|&i| self.mass[i]).collect();
        let mut out = Self::assemble(ids, dist, mass)?;
        out.embedding = self.embedding.as_ref().map(|e| Embedding {
            points: indices.iter().map(|&i| e.points[i].clone()).collect(),
            p: e.p,
        });
        Ok(out)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dist(&self) -> &SquareMatrix {
        &self.dist
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Smallest positive distance, if the space has at least two points.
    pub fn resolution(&self) -> Option<f64> {
        self.dist.min_positive_off_diagonal()
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    /// Opaque identity of the (metric, measure) pair.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Masses divided by the total mass.
    pub fn normalized_masses(&self) -> Vec<f64> {
        self.mass.iter().map(|m| m / self.total_mass).collect()
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    /// Mass of the closed (`closed = true`) or open ball `B(center, r)`.
    pub fn ball_mass(&self, center: usize, r: f64, closed: bool) -> Result<f64> {
        self.check_index(center)?;
        if r.is_nan() || r < 0.0 {
            return Err(Error::param("r", format!("radius must be >= 0, got {r}")));
        }
        Ok(self.ball_mass_unchecked(center, r, closed))
    }

    #[inline]
    pub(crate) fn ball_mass_unchecked(&self, center: usize, r: f64, closed: bool) -> f64 {
        let row = self.dist.row(center);
        let mut acc = 0.0;
        if closed {
            for (d, m) in row.iter().zip(&self.mass) {
                if *d <= r {
                    acc += m;
                }
            }
        } else {
            for (d, m) in row.iter().zip(&self.mass) {
                if *d < r {
                    acc += m;
                }
            }
        }
        acc
    }

    /// Sorted distance profile around `center`, for repeated ball queries.
    pub fn ball_profile(&self, center: usize) -> BallProfile {
        let row = self.dist.row(center);
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        let mut radii = Vec::with_capacity(order.len());
        let mut cumulative = Vec::with_capacity(order.len());
        let mut acc = 0.0;
        for &j in &order {
            acc += self.mass[j];
            radii.push(row[j]);
            cumulative.push(acc);
        }
        BallProfile { radii, cumulative }
    }
}

/// Distances from a center in increasing order with cumulative masses.
#[derive(Debug, Clone)]
pub struct BallProfile {
    radii: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BallProfile {
    /// Mass of the closed ball of radius `r`.
    pub fn closed(&self, r: f64) -> f64 {
        let k = self.radii.partition_point(|&d| d <= r);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Mass of the open ball of radius `r`.
    pub fn open(&self, r: f64) -> f64 {
        let k = self.radii.partition_point(|&d| d < r);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Distinct distances from the center, increasing, including 0.
    pub fn distinct_radii(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &r in &self.radii {
            if out.last() != Some(&r) {
                out.push(r);
            }
        }
        out
    }
}

fn check_masses(masses: Option<Vec<f64>>, n: usize) -> Result<Vec<f64>> {
    let mass = masses.unwrap_or_else(|| vec![1.0; n]);
    if mass.len() != n {
        return Err(Error::MassCount {
            expected: n,
            found: mass.len(),
        });
    }
    for (index, &m) in mass.iter().enumerate() {
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::NegativeMass { index, mass: m });
        }
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NonPositiveTotalMass(total));
    }
    Ok(mass)
}

/// Outcome of checking a raw matrix against the metric measure space axioms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub symmetric: bool,
    /// `(i, j, k, defect)` with `defect = d(i,j) - d(i,k) - d(k,j) > tol`,
    /// ignoring defects within 4 ulps of the detour length.
    pub triangle_violations: Vec<(usize, usize, usize, f64)>,
    pub zero_distance_pairs: Vec<(usize, usize)>,
    pub negative_masses: Vec<usize>,
    /// Pairs `(i, j)` with `d(i,j) != d(j,i)`, `i < j`.
    pub asymmetric_pairs: Vec<(usize, usize)>,
    /// Diagonal entries that are not zero.
    pub nonzero_diagonal: Vec<usize>,
    /// Entries that are negative or not finite.
    pub invalid_entries: Vec<(usize, usize)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.symmetric
            && self.triangle_violations.is_empty()
            && self.zero_distance_pairs.is_empty()
            && self.negative_masses.is_empty()
            && self.nonzero_diagonal.is_empty()
            && self.invalid_entries.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if let Some((i, j)) = self.asymmetric_pairs.first() {
            parts.push(format!("asymmetric pair ({i}, {j})"));
        }
        if let Some(i) = self.nonzero_diagonal.first() {
            parts.push(format!("nonzero diagonal at {i}"));
        }
        if let Some((i, j)) = self.invalid_entries.first() {
            parts.push(format!("negative or non-finite entry ({i}, {j})"));
        }
        if let Some((i, j)) = self.zero_distance_pairs.first() {
            parts.push(format!("zero distance between distinct points ({i}, {j})"));
        }
        if let Some((i, j, k, defect)) = self.triangle_violations.first() {
            parts.push(format!(
                "triangle inequality fails for ({i}, {j}) via {k} by {defect}"
            ));
        }
        if let Some(i) = self.negative_masses.first() {
            parts.push(format!("negative mass at {i}"));
        }
        if parts.is_empty() {
            "valid".into()
        } else {
            parts.join("; ")
        }
    }
}

/// Checks a raw matrix and masses against the space invariants.
///
/// Triangle violations are reported once per unordered pair `(i, j)`, `i < j`,
/// with the intermediate point giving the largest defect.
pub fn validate(dist: &[Vec<f64>], masses: &[f64], tol_tri: f64) -> Result<ValidationReport> {
    let n = dist.len();
    for (row, r) in dist.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare {
                row,
                expected: n,
                found: r.len(),
            });
        }
    }
    let mut report = ValidationReport {
        symmetric: true,
        ..Default::default()
    };
    for i in 0..n {
        if dist[i][i] != 0.0 {
            report.nonzero_diagonal.push(i);
        }
        for j in 0..n {
            if !(dist[i][j] >= 0.0) || !dist[i][j].is_finite() {
                report.invalid_entries.push((i, j));
            }
        }
        for j in (i + 1)..n {
            if dist[i][j] != dist[j][i] {
                report.symmetric = false;
                report.asymmetric_pairs.push((i, j));
            }
            if dist[i][j] == 0.0 || dist[j][i] == 0.0 {
                report.zero_distance_pairs.push((i, j));
            }
        }
    }
    let violations: Vec<Vec<(usize, usize, usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in (i + 1)..n {
                let mut worst: Option<(usize, f64)> = None;
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let detour = dist[i][k] + dist[k][j];
                    let defect = dist[i][j] - detour;
                    // rounding in the builders' arithmetic is not a violation
                    let slack = 4.0 * f64::EPSILON * detour;
                    if defect > tol_tri + slack && worst.is_none_or(|(_, w)| defect > w) {
                        worst = Some((k, defect));
                    }
                }
                if let Some((k, defect)) = worst {
                    out.push((i, j, k, defect));
                }
            }
            out
        })
        .collect();
    report.triangle_violations = violations.into_iter().flatten().collect();
    report.negative_masses = masses
        .iter()
        .enumerate()
        .filter(|(_, m)| !(**m >= 0.0))
        .map(|(i, _)| i)
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::from_points((0..n).map(|i| vec![i as f64]).collect(), None, 2.0)
            .unwrap()
    }

    #[test]
    fn collinear_points() {
        let s = line(3);
        assert_eq!(s.dist().to_rows(), vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]);
        assert_eq!(s.total_mass(), 3.0);
        assert_eq!(s.diameter(), 2.0);
    }

    #[test]
    fn three_four_five() {
        let s = FiniteMetricMeasureSpace::from_points(vec![vec![0.0, 0.0], vec![3.0, 4.0]], None, 2.0)
            .unwrap();
        assert_eq!(s.distance(0, 1), 5.0);
    }

    #[test]
    fn l1_metric() {
        let s = FiniteMetricMeasureSpace::from_points(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            None,
            1.0,
        )
        .unwrap();
        assert_eq!(s.distance(1, 2), 2.0);
    }

    #[test]
    fn point_errors() {
        let dup = FiniteMetricMeasureSpace::from_points(vec![vec![1.0], vec![1.0]], None, 2.0);
        assert!(matches!(dup, Err(Error::DuplicatePoint { .. })));
        let signed_zero = FiniteMetricMeasureSpace::from_points(vec![vec![0.0], vec![-0.0]], None, 2.0);
        assert!(matches!(signed_zero, Err(Error::DuplicatePoint { .. })));
        let dims = FiniteMetricMeasureSpace::from_points(vec![vec![1.0], vec![1.0, 2.0]], None, 2.0);
        assert!(matches!(dims, Err(Error::DimensionMismatch { index: 1, .. })));
        let zero = FiniteMetricMeasureSpace::from_points(vec![vec![0.0], vec![1.0]], Some(vec![0.0, 0.0]), 2.0);
        assert!(matches!(zero, Err(Error::NonPositiveTotalMass(_))));
        let neg = FiniteMetricMeasureSpace::from_points(vec![vec![0.0], vec![1.0]], Some(vec![2.0, -1.0]), 2.0);
        assert!(matches!(neg, Err(Error::NegativeMass { index: 1, .. })));
        let p = FiniteMetricMeasureSpace::from_points(vec![vec![0.0], vec![1.0]], None, 0.5);
        assert!(matches!(p, Err(Error::InvalidExponent(_))));
    }

    fn v(id: &str) -> (String, f64) {
        (id.to_string(), 1.0)
    }

    fn e(u: &str, w: &str, weight: f64) -> (String, String, f64) {
        (u.to_string(), w.to_string(), weight)
    }

    #[test]
    fn graph_paths() {
        let s = FiniteMetricMeasureSpace::from_graph(
            vec![v("a"), v("b"), v("c")],
            vec![e("a", "b", 1.0), e("b", "c", 1.0)],
        )
        .unwrap();
        assert_eq!(s.distance(0, 2), 2.0);

        let tri = FiniteMetricMeasureSpace::from_graph(
            vec![v("a"), v("b"), v("c")],
            vec![e("a", "b", 1.0), e("b", "c", 1.0), e("a", "c", 5.0)],
        )
        .unwrap();
        assert_eq!(tri.distance(0, 2), 2.0);

        let single =
            FiniteMetricMeasureSpace::from_graph(vec![v("a"), v("b")], vec![e("a", "b", 3.0)]).unwrap();
        assert_eq!(single.distance(0, 1), 3.0);
        assert_eq!(single.ids(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn graph_errors() {
        let disc = FiniteMetricMeasureSpace::from_graph(vec![v("a"), v("b"), v("c")], vec![e("a", "b", 1.0)]);
        assert!(matches!(disc, Err(Error::Disconnected(_))));
        let w = FiniteMetricMeasureSpace::from_graph(vec![v("a"), v("b")], vec![e("a", "b", 0.0)]);
        assert!(matches!(w, Err(Error::NonPositiveWeight { .. })));
        let dup = FiniteMetricMeasureSpace::from_graph(vec![v("a"), v("a")], vec![e("a", "a", 1.0)]);
        assert!(matches!(dup, Err(Error::DuplicateVertex(_))));
    }

    #[test]
    fn validation_reports() {
        let ok = validate(&line(4).dist().to_rows(), &[1.0; 4], 0.0).unwrap();
        assert!(ok.is_valid());

        let bad = vec![vec![0.0, 1.0, 10.0], vec![1.0, 0.0, 1.0], vec![10.0, 1.0, 0.0]];
        let r = validate(&bad, &[1.0; 3], 1e-9).unwrap();
        assert_eq!(r.triangle_violations, vec![(0, 2, 1, 8.0)]);

        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        let r = validate(&asym, &[1.0; 2], 1e-9).unwrap();
        assert!(!r.symmetric);
        assert_eq!(r.asymmetric_pairs, vec![(0, 1)]);

        let ragged = vec![vec![0.0, 1.0], vec![1.0]];
        assert!(matches!(validate(&ragged, &[1.0; 2], 0.0), Err(Error::NotSquare { row: 1, .. })));

        let zero = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let r = validate(&zero, &[1.0, -1.0], 0.0).unwrap();
        assert_eq!(r.zero_distance_pairs, vec![(0, 1)]);
        assert_eq!(r.negative_masses, vec![1]);
    }

    #[test]
    fn raw_matrix_rejects_invalid() {
        let bad = SquareMatrix::from_rows(&[vec![0.0, 1.0, 10.0], vec![1.0, 0.0, 1.0], vec![10.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            FiniteMetricMeasureSpace::from_matrix(None, bad, None, None),
            Err(Error::InvalidMetric(_))
        ));
        // representation noise below 1e-9 * diameter is absorbed
        let noisy = SquareMatrix::from_rows(&[
            vec![0.0, 1.0, 2.0 + 1e-12],
            vec![1.0, 0.0, 1.0],
            vec![2.0 + 1e-12, 1.0, 0.0],
        ])
        .unwrap();
        assert!(FiniteMetricMeasureSpace::from_matrix(None, noisy, None, None).is_ok());
    }

    #[test]
    fn ball_masses() {
        let s = line(3);
        assert_eq!(s.ball_mass(1, 1.0, true).unwrap(), 3.0);
        assert_eq!(s.ball_mass(1, 1.0, false).unwrap(), 1.0);
        assert_eq!(s.ball_mass(0, 1.5, true).unwrap(), 2.0);
        assert_eq!(s.ball_mass(0, 0.0, true).unwrap(), 1.0);
        assert_eq!(s.ball_mass(0, 0.0, false).unwrap(), 0.0);
        assert!(s.ball_mass(0, -1.0, true).is_err());
        assert!(s.ball_mass(5, 1.0, true).is_err());
        let prof = s.ball_profile(1);
        assert_eq!(prof.closed(1.0), 3.0);
        assert_eq!(prof.open(1.0), 1.0);
        assert_eq!(prof.distinct_radii(), vec![0.0, 1.0]);
    }
}
