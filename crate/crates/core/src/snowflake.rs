//! Measure-driven quasimetrics q_{μ,s}, snowflaked metrics d^s, and the
//! chain metric that is bilipschitz to a snowflaked quasimetric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::space::{lp_distance, FiniteMetricMeasureSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasimetricVariant {
    /// `(μB[x,d] + μB[y,d])^s` with `d = d(x,y)`.
    General,
    /// `μ(B[m, d/2])^s` around the coordinate midpoint `m` of `x` and `y`.
    EuclideanMidpoint,
    /// `d^s`.
    PlainSnowflake,
}

impl std::str::FromStr for QuasimetricVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Self::General),
            "euclidean_midpoint" | "midpoint" => Ok(Self::EuclideanMidpoint),
            "plain_snowflake" | "plain" => Ok(Self::PlainSnowflake),
            other => Err(Error::param("variant", format!("unknown variant {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasimetricMatrix {
    pub values: SquareMatrix,
    pub s: f64,
    /// Smallest `K ≥ 1` with `q(x,y) ≤ K (q(x,z) + q(z,y))` for all triples.
    pub quasi_constant_k: f64,
    pub variant: QuasimetricVariant,
}

/// JSON sidecar written next to the CSV values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasimetricSidecar {
    pub s: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub variant: QuasimetricVariant,
}

impl QuasimetricMatrix {
    pub fn sidecar(&self) -> QuasimetricSidecar {
        QuasimetricSidecar {
            s: self.s,
            k: self.quasi_constant_k,
            variant: self.variant,
        }
    }

    /// `values^t` as a new quasimetric (exponent multiplied by `t`).
    pub fn power(&self, t: f64) -> Result<QuasimetricMatrix> {
        if !(t > 0.0) {
            return Err(Error::param("t", format!("must be positive, got {t}")));
        }
        let values = self.values.map(|v| v.powf(t));
        let quasi_constant_k = quasimetric_constant(&values)?;
        Ok(QuasimetricMatrix {
            values,
            s: self.s * t,
            quasi_constant_k,
            variant: self.variant,
        })
    }
}

/// For every ordered pair, the closed-ball mass `μB[x, d(x,y)]`.
fn ball_mass_at_pair_distance(space: &FiniteMetricMeasureSpace) -> SquareMatrix {
    let n = space.len();
    let mut out = SquareMatrix::zeros(n);
    out.as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(x, row_out)| {
            let row = space.dist().row(x);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
            let mut i = 0;
            let mut acc = 0.0;
            while i < n {
                let d = row[order[i]];
                let mut j = i;
                while j < n && row[order[j]] == d {
                    acc += space.mass(order[j]);
                    j += 1;
                }
                for &y in &order[i..j] {
                    row_out[y] = acc;
                }
                i = j;
            }
        });
    out
}

/// Value of a single entry of the quasimetric without materializing the matrix.
pub fn quasimetric_value(
    space: &FiniteMetricMeasureSpace,
    x: usize,
    y: usize,
    s: f64,
    variant: QuasimetricVariant,
) -> Result<f64> {
    space.check_index(x)?;
    space.check_index(y)?;
    if !(s > 0.0) {
        return Err(Error::param("s", format!("must be positive, got {s}")));
    }
    if x == y {
        return Ok(0.0);
    }
    let d = space.distance(x, y);
    Ok(match variant {
        QuasimetricVariant::PlainSnowflake => d.powf(s),
        QuasimetricVariant::General => {
            (space.ball_mass_unchecked(x, d, true) + space.ball_mass_unchecked(y, d, true)).powf(s)
        }
        QuasimetricVariant::EuclideanMidpoint => {
            let emb = space
                .embedding()
                .ok_or_else(|| Error::param("variant", "midpoint variant needs a space built from coordinates"))?;
            midpoint_ball_mass(space, &emb.points, emb.p, x, y).powf(s)
        }
    })
}

fn midpoint_ball_mass(space: &FiniteMetricMeasureSpace, points: &[Vec<f64>], p: f64, x: usize, y: usize) -> f64 {
    let mid: Vec<f64> = points[x].iter().zip(&points[y]).map(|(a, b)| 0.5 * (a + b)).collect();
    let r = 0.5 * space.distance(x, y);
    points
        .iter()
        .zip(space.masses())
        .filter(|(pt, _)| lp_distance(pt, &mid, p) <= r)
        .map(|(_, m)| m)
        .sum()
}

/// Builds the full quasimetric matrix. The diagonal is zero for every variant.
pub fn quasimetric_q(space: &FiniteMetricMeasureSpace, s: f64, variant: QuasimetricVariant) -> Result<QuasimetricMatrix> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::param("s", format!("must be positive, got {s}")));
    }
    let n = space.len();
    let values = match variant {
        QuasimetricVariant::PlainSnowflake => space.dist().map(|d| d.powf(s)),
        QuasimetricVariant::General => {
            let b = ball_mass_at_pair_distance(space);
            SquareMatrix::from_fn(n, |x, y| if x == y { 0.0 } else { (b.get(x, y) + b.get(y, x)).powf(s) })
        }
        QuasimetricVariant::EuclideanMidpoint => {
            let emb = space
                .embedding()
                .ok_or_else(|| Error::param("variant", "midpoint variant needs a space built from coordinates"))?;
            let mut values = SquareMatrix::zeros(n);
            values
                .as_mut_slice()
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(x, row)| {
                    for (y, v) in row.iter_mut().enumerate() {
                        if x != y {
                            *v = midpoint_ball_mass(space, &emb.points, emb.p, x, y).powf(s);
                        }
                    }
                });
            values
        }
    };
    let quasi_constant_k = quasimetric_constant(&values)?;
    Ok(QuasimetricMatrix {
        values,
        s,
        quasi_constant_k,
        variant,
    })
}

/// Exact quasimetric constant by triple enumeration, clamped below at 1.
pub fn quasimetric_constant(values: &SquareMatrix) -> Result<f64> {
    let n = values.len();
    for x in 0..n {
        for y in 0..n {
            if x != y && !(values.get(x, y) > 0.0) {
                return Err(Error::Degenerate(format!("zero off-diagonal entry at ({x}, {y})")));
            }
        }
    }
    let k = (0..n)
        .into_par_iter()
        .map(|x| {
            let rx = values.row(x);
            let mut best = 1.0f64;
            for z in 0..n {
                if z == x {
                    continue;
                }
                let rz = values.row(z);
                let xz = rx[z];
                for y in 0..n {
                    if y == x || y == z {
                        continue;
                    }
                    let ratio = rx[y] / (xz + rz[y]);
                    if ratio > best {
                        best = ratio;
                    }
                }
            }
            best
        })
        .reduce(|| 1.0, f64::max);
    Ok(k)
}

/// Shortest-path closure of a complete graph with the given symmetric weights.
pub fn shortest_path_closure(weights: &SquareMatrix) -> SquareMatrix {
    let n = weights.len();
    let mut d = weights.clone();
    let mut pivot = vec![0.0; n];
    for k in 0..n {
        pivot.copy_from_slice(d.row(k));
        d.as_mut_slice().par_chunks_mut(n).for_each(|row| {
            let ik = row[k];
            for (j, v) in row.iter_mut().enumerate() {
                let via = ik + pivot[j];
                if via < *v {
                    *v = via;
                }
            }
        });
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMetricResult {
    pub metric: SquareMatrix,
    /// max over pairs of `q / metric` (≥ 1).
    pub max_ratio: f64,
    /// min over pairs of `metric / q` (≤ 1).
    pub min_ratio: f64,
    pub bilipschitz_c: f64,
}

/// Chain (shortest-path) metric of a quasimetric and the sandwich ratios.
pub fn chain_metric(q: &QuasimetricMatrix) -> Result<ChainMetricResult> {
    let n = q.values.len();
    let metric = shortest_path_closure(&q.values);
    let mut max_ratio = 1.0f64;
    let mut min_ratio = 1.0f64;
    for x in 0..n {
        for y in (x + 1)..n {
            let m = metric.get(x, y);
            if !(m > 0.0) {
                return Err(Error::ChainCollapse(x, y));
            }
            let v = q.values.get(x, y);
            max_ratio = max_ratio.max(v / m);
            min_ratio = min_ratio.min(m / v);
        }
    }
    Ok(ChainMetricResult {
        metric,
        max_ratio,
        min_ratio,
        bilipschitz_c: max_ratio,
    })
}

/// Upper bound on the chain-metric distortion, `(2K)^{2s}`.
pub fn chain_bound(k: f64, s: f64) -> f64 {
    (2.0 * k).powf(2.0 * s)
}

/// Largest exponent `s` with `(2K)^{2s} ≤ 2`, i.e. `1 / (2 (1 + log₂ K))`.
pub fn max_chain_exponent(k: f64) -> f64 {
    1.0 / (2.0 * (1.0 + k.log2()))
}

/// One populated bucket of the empirical quasisymmetry modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusSample {
    /// Largest source ratio observed in the bucket.
    pub t: f64,
    /// Largest image ratio observed in the bucket.
    pub eta: f64,
}

/// Tightest empirical modulus η̂ of a bijection between two finite spaces,
/// bucketing source ratios `q(x,a)/q(x,b)` on a log-spaced grid.
pub fn empirical_quasisymmetry(
    source: &SquareMatrix,
    target: &SquareMatrix,
    bijection: &[usize],
    buckets: usize,
) -> Result<Vec<ModulusSample>> {
    let n = source.len();
    if target.len() != n || bijection.len() != n {
        return Err(Error::Mismatch(format!(
            "source has {n} points, target {}, bijection {}",
            target.len(),
            bijection.len()
        )));
    }
    let mut seen = vec![false; n];
    for &f in bijection {
        if f >= n || std::mem::replace(&mut seen[f], true) {
            return Err(Error::param("bijection", "not a permutation"));
        }
    }
    let buckets = buckets.max(1);
    let mut samples = Vec::new();
    for x in 0..n {
        for a in 0..n {
            for b in 0..n {
                if a == x || b == x || a == b {
                    continue;
                }
                let t = source.get(x, a) / source.get(x, b);
                let img = target.get(bijection[x], bijection[a]) / target.get(bijection[x], bijection[b]);
                samples.push((t, img));
            }
        }
    }
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min).ln();
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max).ln();
    let width = (hi - lo) / buckets as f64;
    let mut table: Vec<Option<ModulusSample>> = vec![None; buckets];
    for (t, img) in samples {
        let slot = if width > 0.0 {
            (((t.ln() - lo) / width) as usize).min(buckets - 1)
        } else {
            0
        };
        let e = table[slot].get_or_insert(ModulusSample { t, eta: img });
        e.t = e.t.max(t);
        e.eta = e.eta.max(img);
    }
    Ok(table.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(n: usize) -> FiniteMetricMeasureSpace {
        FiniteMetricMeasureSpace::from_points((0..n).map(|i| vec![i as f64]).collect(), None, 2.0).unwrap()
    }

    #[test]
    fn general_value_on_line() {
        let s = line(3);
        let q = quasimetric_q(&s, 1.0, QuasimetricVariant::General).unwrap();
        assert_eq!(q.values.get(0, 1), 5.0);
        assert_eq!(q.values.get(0, 0), 0.0);
        assert_eq!(quasimetric_value(&s, 0, 1, 1.0, QuasimetricVariant::General).unwrap(), 5.0);
    }

    #[test]
    fn plain_identity_exponent() {
        let s = line(5);
        let q = quasimetric_q(&s, 1.0, QuasimetricVariant::PlainSnowflake).unwrap();
        assert_eq!(&q.values, s.dist());
        assert_eq!(q.quasi_constant_k, 1.0);
    }

    #[test]
    fn constant_of_squared_line() {
        let s = line(3);
        let q = quasimetric_q(&s, 2.0, QuasimetricVariant::PlainSnowflake).unwrap();
        assert_eq!(q.quasi_constant_k, 2.0);
        let two = line(2);
        assert_eq!(quasimetric_q(&two, 3.0, QuasimetricVariant::PlainSnowflake).unwrap().quasi_constant_k, 1.0);
        let bad = SquareMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(quasimetric_constant(&bad).is_err());
    }

    #[test]
    fn midpoint_requires_coordinates() {
        let g = FiniteMetricMeasureSpace::from_graph(
            vec![("a".into(), 1.0), ("b".into(), 1.0)],
            vec![("a".into(), "b".into(), 1.0)],
        )
        .unwrap();
        assert!(quasimetric_q(&g, 0.5, QuasimetricVariant::EuclideanMidpoint).is_err());
        assert!(quasimetric_q(&g, 0.0, QuasimetricVariant::General).is_err());
    }

    #[test]
    fn chain_of_metric_is_identity() {
        let s = line(4);
        let q = quasimetric_q(&s, 1.0, QuasimetricVariant::PlainSnowflake).unwrap();
        let c = chain_metric(&q).unwrap();
        assert_eq!(&c.metric, s.dist());
        assert_eq!(c.max_ratio, 1.0);
        assert_eq!(c.min_ratio, 1.0);
    }

    #[test]
    fn chain_of_squared_line() {
        let s = line(3);
        let q = quasimetric_q(&s, 2.0, QuasimetricVariant::PlainSnowflake).unwrap();
        let c = chain_metric(&q).unwrap();
        assert_eq!(c.metric.get(0, 2), 2.0);
        assert_eq!(c.max_ratio, 2.0);
        assert_eq!(c.min_ratio, 0.5);
    }

    #[test]
    fn exponent_bound_reading() {
        for k in [1.0, 1.5, 2.0, 3.7, 10.0] {
            let s = max_chain_exponent(k);
            assert_relative_eq!(chain_bound(k, s), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn modulus_of_identity_and_similarity() {
        let s = FiniteMetricMeasureSpace::from_points(
            [0.0, 1.0, 3.0, 7.0, 8.5].iter().map(|&x| vec![x]).collect(),
            None,
            2.0,
        )
        .unwrap();
        let id: Vec<usize> = (0..5).collect();
        for m in empirical_quasisymmetry(s.dist(), s.dist(), &id, 16).unwrap() {
            assert_eq!(m.eta, m.t);
        }
        let doubled = s.dist().map(|d| 2.0 * d);
        for m in empirical_quasisymmetry(s.dist(), &doubled, &id, 16).unwrap() {
            assert_relative_eq!(m.eta, m.t, max_relative = 1e-12);
        }
        let root = s.dist().map(f64::sqrt);
        for m in empirical_quasisymmetry(s.dist(), &root, &id, 16).unwrap() {
            assert_relative_eq!(m.eta, m.t.sqrt(), max_relative = 1e-12);
        }
        assert!(empirical_quasisymmetry(s.dist(), &line(3).dist().clone(), &id, 4).is_err());
    }
}
