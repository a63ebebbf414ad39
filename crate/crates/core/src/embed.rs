//! Numerical search for low-distortion embeddings of (snowflaked) finite
//! metrics into Euclidean space, and the Naor-Naiman budget calculator.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::space::FiniteMetricMeasureSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedOptions {
    pub dim: usize,
    pub seed: u64,
    /// Gradient steps per restart and per intermediate dimension.
    pub max_iters: usize,
    pub restarts: usize,
    pub gradient_tol: f64,
}

impl EmbedOptions {
    pub fn new(dim: usize, seed: u64) -> Self {
        EmbedOptions {
            dim,
            seed,
            max_iters: 2000,
            restarts: 5,
            gradient_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub coords: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "distortion_L")]
    pub distortion_l: f64,
    pub scale: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Bilipschitz distortion after the best uniform scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    #[serde(rename = "L")]
    pub l: f64,
    pub scale: f64,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Pairwise `d^ε` for a space.
pub fn snowflake_targets(space: &FiniteMetricMeasureSpace, snowflake_eps: f64) -> Result<SquareMatrix> {
    if !(snowflake_eps > 0.0 && snowflake_eps <= 1.0) {
        return Err(Error::param("snowflake_eps", format!("must lie in (0, 1], got {snowflake_eps}")));
    }
    Ok(space.dist().map(|d| d.powf(snowflake_eps)))
}

/// `(max r, min r)` over pairs with `r = |f(x) - f(y)| / target(x, y)`;
/// the pair is returned when two distinct points share an image.
fn ratio_extremes(targets: &SquareMatrix, coords: &[Vec<f64>]) -> std::result::Result<(f64, f64), (usize, usize)> {
    let n = targets.len();
    let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = euclid(&coords[i], &coords[j]) / targets.get(i, j);
            if r == 0.0 {
                return Err((i, j));
            }
            hi = hi.max(r);
            lo = lo.min(r);
        }
    }
    Ok((hi, lo))
}

/// `L = max r / min r` and `scale = 1 / sqrt(max r · min r)`.
pub fn distortion(targets: &SquareMatrix, coords: &[Vec<f64>]) -> Result<Distortion> {
    let n = targets.len();
    if coords.len() != n {
        return Err(Error::MassCount {
            expected: n,
            found: coords.len(),
        });
    }
    if n < 2 {
        return Err(Error::Degenerate("distortion needs at least two points".into()));
    }
    let (hi, lo) = ratio_extremes(targets, coords).map_err(|(i, j)| Error::CoincidentImages(i, j))?;
    Ok(Distortion {
        l: (hi / lo).max(1.0),
        scale: 1.0 / (hi * lo).sqrt(),
    })
}

fn exact_l(targets: &SquareMatrix, coords: &[Vec<f64>]) -> f64 {
    ratio_extremes(targets, coords).map_or(f64::INFINITY, |(hi, lo)| (hi / lo).max(1.0))
}

/// `Σ_{i<j} log²(|x_i - x_j| / target_ij)`.
pub fn surrogate(targets: &SquareMatrix, coords: &[Vec<f64>]) -> f64 {
    let n = targets.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let l = (euclid(&coords[i], &coords[j]) / targets.get(i, j)).ln();
            total += l * l;
        }
    }
    total
}

pub fn surrogate_gradient(targets: &SquareMatrix, coords: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = targets.len();
    let dim = coords.first().map_or(0, Vec::len);
    let mut grad = vec![vec![0.0; dim]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let sq: f64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let l = (sq.sqrt() / targets.get(i, j)).ln();
            let w = 2.0 * l / sq;
            for k in 0..dim {
                let g = w * (coords[i][k] - coords[j][k]);
                grad[i][k] += g;
                grad[j][k] -= g;
            }
        }
    }
    grad
}

/// Classical multidimensional scaling of the targets into `dim` coordinates.
fn classical_mds(targets: &SquareMatrix, dim: usize) -> Vec<Vec<f64>> {
    let n = targets.len();
    let sq = DMatrix::from_fn(n, n, |i, j| targets.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|k| match order.get(k) {
                    Some(&col) => eig.eigenvectors[(i, col)] * eig.eigenvalues[col].max(0.0).sqrt(),
                    None => 0.0,
                })
                .collect()
        })
        .collect()
}

struct Run {
    coords: Vec<Vec<f64>>,
    l: f64,
    iterations: usize,
    converged: bool,
}

/// Gradient descent with backtracking line search; keeps the iterate of
/// smallest exact distortion.
fn descend(targets: &SquareMatrix, mut x: Vec<Vec<f64>>, max_iters: usize, gradient_tol: f64) -> Run {
    let mut value = surrogate(targets, &x);
    let mut best = Run {
        l: exact_l(targets, &x),
        coords: x.clone(),
        iterations: 0,
        converged: false,
    };
    let mut step = 1e-2;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        let g = surrogate_gradient(targets, &x);
        let norm2: f64 = g.iter().flatten().map(|v| v * v).sum();
        if !value.is_finite() || norm2.sqrt() < gradient_tol {
            converged = value.is_finite();
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<Vec<f64>> = x
                .iter()
                .zip(&g)
                .map(|(p, d)| p.iter().zip(d).map(|(a, b)| a - step * b).collect())
                .collect();
            let v = surrogate(targets, &trial);
            if v.is_finite() && v <= value - 1e-4 * step * norm2 {
                x = trial;
                value = v;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
        step *= 2.0;
        let l = exact_l(targets, &x);
        if l < best.l {
            best.l = l;
            best.coords = x.clone();
        }
    }
    best.iterations = iterations;
    best.converged = converged || iterations == max_iters;
    best
}

fn random_start(targets: &SquareMatrix, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = targets.max_off_diagonal().max(f64::MIN_POSITIVE);
    (0..targets.len())
        .map(|_| (0..dim).map(|_| rng.gen_range(-0.5..0.5) * spread).collect())
        .collect()
}

/// Separates coincident starting points by a tiny seeded jitter.
fn jitter(mut coords: Vec<Vec<f64>>, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in coords.iter_mut() {
        for v in p.iter_mut() {
            *v += rng.gen_range(-1.0..1.0) * scale * 1e-6;
        }
    }
    coords
}

/// Minimizes the log-ratio surrogate against arbitrary positive targets.
///
/// Dimensions `1..=dim` are solved in turn. In each, restart 0 starts from
/// classical scaling, restart 1 from the previous dimension's best padded
/// with a zero coordinate, and the rest from seeded random configurations.
/// The returned distortion is therefore nonincreasing in `dim`.
pub fn embed_targets(targets: &SquareMatrix, options: &EmbedOptions) -> Result<EmbeddingResult> {
    let n = targets.len();
    if n < 2 {
        return Err(Error::Degenerate("embedding needs at least two points".into()));
    }
    if options.dim < 1 {
        return Err(Error::param("dim", "must be >= 1"));
    }
    if options.restarts < 1 {
        return Err(Error::param("restarts", "must be >= 1"));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !(targets.get(i, j) > 0.0) {
                return Err(Error::Degenerate(format!("target distance between {i} and {j} is not positive")));
            }
        }
    }
    let spread = targets.max_off_diagonal();
    let mut previous: Option<Run> = None;
    let mut total_iterations = 0;
    for dim in 1..=options.dim {
        let starts: Vec<Vec<Vec<f64>>> = (0..options.restarts)
            .map(|r| {
                let seed = options.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((dim as u64) << 32 | r as u64);
                match (r, &previous) {
                    (0, _) => jitter(classical_mds(targets, dim), spread, seed),
                    (1, Some(prev)) => prev.coords.iter().map(|p| p.iter().copied().chain([0.0]).collect()).collect(),
                    _ => random_start(targets, dim, seed),
                }
            })
            .collect();
        let runs: Vec<Run> = starts
            .into_par_iter()
            .map(|start| descend(targets, start, options.max_iters, options.gradient_tol))
            .collect();
        total_iterations += runs.iter().map(|r| r.iterations).sum::<usize>();
        let mut best = runs
            .into_iter()
            .reduce(|a, b| if b.l < a.l { b } else { a })
            .expect("at least one restart");
        if let Some(prev) = previous.take() {
            if prev.l < best.l {
                best = Run {
                    coords: prev.coords.iter().map(|p| p.iter().copied().chain([0.0]).collect()).collect(),
                    ..prev
                };
            }
        }
        previous = Some(best);
    }
    let best = previous.expect("dim >= 1");
    let d = distortion(targets, &best.coords)?;
    Ok(EmbeddingResult {
        n: options.dim,
        distortion_l: d.l,
        scale: d.scale,
        coords: best.coords,
        iterations: total_iterations,
        converged: best.converged,
    })
}

/// Embeds the ε-snowflake `d^ε` of a space; `snowflake_eps = 1` embeds `d` itself.
pub fn embed_snowflake(space: &FiniteMetricMeasureSpace, snowflake_eps: f64, options: &EmbedOptions) -> Result<EmbeddingResult> {
    if space.len() < 2 {
        return Err(Error::Degenerate("embedding a single point".into()));
    }
    embed_targets(&snowflake_targets(space, snowflake_eps)?, options)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingBudget {
    #[serde(rename = "N_bound")]
    pub n_bound: f64,
    #[serde(rename = "L_bound")]
    pub l_bound: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "doubling_D")]
    pub doubling_d: f64,
    pub epsilon: f64,
}

/// `N <= a ln D` and `L <= b (ln D / ε)²` (natural logarithm).
pub fn naor_naiman_budget(doubling_d: f64, epsilon: f64, a: f64, b: f64) -> Result<EmbeddingBudget> {
    if !(doubling_d > 1.0) {
        return Err(Error::Domain(format!("doubling constant must exceed 1, got {doubling_d}")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let log_d = doubling_d.ln();
    Ok(EmbeddingBudget {
        n_bound: a * log_d,
        l_bound: b * (log_d / epsilon).powi(2),
        a,
        b,
        doubling_d,
        epsilon,
    })
}
