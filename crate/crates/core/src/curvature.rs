//! Bishop-Gromov comparison profiles, the net-size bounds they imply,
//! reference distortion coefficients and weighted Euclidean Ricci bounds.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularity::{log_grid, RadiiPolicy};
use crate::space::FiniteMetricMeasureSpace;

/// Curvature lower bound `k`, effective dimension `n` and diameter bound `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureParams {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl CurvatureParams {
    pub fn new(k: f64, n: f64, d: f64) -> Result<Self> {
        if !(n >= 1.0) {
            return Err(Error::Domain(format!("N must be >= 1, got {n}")));
        }
        if !(d > 0.0) {
            return Err(Error::Domain(format!("D must be positive, got {d}")));
        }
        if k != 0.0 && !(n > 1.0) {
            return Err(Error::Domain(format!("K = {k} != 0 requires N > 1")));
        }
        Ok(CurvatureParams { k, n, d })
    }
}

/// `sqrt(|K| / (N-1))`, the frequency of the model profile.
fn frequency(k: f64, n: f64) -> f64 {
    (k.abs() / (n - 1.0)).sqrt()
}

fn check_profile(k: f64, n: f64, t: f64) -> Result<()> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::Domain(format!("N must be finite and >= 1, got {n}")));
    }
    if k != 0.0 && !(n > 1.0) {
        return Err(Error::Domain(format!("K = {k} != 0 requires N > 1, got N = {n}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("argument must be >= 0, got {t}")));
    }
    if k > 0.0 {
        let conjugate = PI / frequency(k, n);
        if t > conjugate * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "argument {t} exceeds the conjugate radius {conjugate} for K = {k}, N = {n}"
            )));
        }
    }
    Ok(())
}

/// Conjugate radius `π sqrt((N-1)/K)` for `K > 0`, infinite otherwise.
pub fn conjugate_radius(k: f64, n: f64) -> f64 {
    if k > 0.0 {
        PI / frequency(k, n)
    } else {
        f64::INFINITY
    }
}

fn s_profile_unchecked(k: f64, n: f64, t: f64) -> f64 {
    if k == 0.0 {
        t.powf(n - 1.0)
    } else if k > 0.0 {
        (frequency(k, n) * t).sin().max(0.0).powf(n - 1.0)
    } else {
        (frequency(k, n) * t).sinh().powf(n - 1.0)
    }
}

/// Bishop-Gromov density `S_K^N(t)`: `sin^{N-1}`, `t^{N-1}` or `sinh^{N-1}`
/// of `sqrt(|K|/(N-1)) t` by the sign of `K`.
pub fn s_profile(k: f64, n: f64, t: f64) -> Result<f64> {
    check_profile(k, n, t)?;
    Ok(s_profile_unchecked(k, n, t))
}

/// `∫₀^z sin^m` (`hyperbolic = false`) or `∫₀^z sinh^m` by the reduction formula.
fn power_integral(m: u32, z: f64, hyperbolic: bool) -> f64 {
    if m >= 2 && z < 1e-2 {
        // series: (1 ± u²/6 + u⁴/120)^m u^m
        let mf = m as f64;
        let sign = if hyperbolic { 1.0 } else { -1.0 };
        let c2 = sign * mf / 6.0;
        let c4 = mf / 120.0 + mf * (mf - 1.0) / 72.0;
        return z.powi(m as i32 + 1) / (mf + 1.0)
            + c2 * z.powi(m as i32 + 3) / (mf + 3.0)
            + c4 * z.powi(m as i32 + 5) / (mf + 5.0);
    }
    let (f, g) = if hyperbolic {
        (z.sinh(), z.cosh())
    } else {
        (z.sin(), z.cos())
    };
    let half = if hyperbolic { (z / 2.0).sinh() } else { (z / 2.0).sin() };
    let mut even = z;
    let mut odd = 2.0 * half * half;
    if m == 0 {
        return even;
    }
    if m == 1 {
        return odd;
    }
    let sign = if hyperbolic { -1.0 } else { 1.0 };
    for j in 2..=m {
        let jf = j as f64;
        let prev = if j % 2 == 0 { even } else { odd };
        let boundary = f.powi(j as i32 - 1) * g / jf;
        let value = if hyperbolic {
            boundary + sign * (jf - 1.0) / jf * prev
        } else {
            -boundary + sign * (jf - 1.0) / jf * prev
        };
        if j % 2 == 0 {
            even = value;
        } else {
            odd = value;
        }
    }
    if m.is_multiple_of(2) {
        even
    } else {
        odd
    }
}

/// `∫₀^r S_K^N(t) dt`: closed form for integer `N`, adaptive quadrature otherwise.
pub fn volume_profile(k: f64, n: f64, r: f64) -> Result<f64> {
    check_profile(k, n, r)?;
    if n.fract() == 0.0 && n <= 64.0 {
        Ok(volume_profile_closed(k, n as u32, r))
    } else {
        Ok(volume_profile_quadrature(k, n, r))
    }
}

pub(crate) fn volume_profile_closed(k: f64, n: u32, r: f64) -> f64 {
    let m = n - 1;
    if k == 0.0 {
        r.powi(n as i32) / n as f64
    } else {
        let a = frequency(k, n as f64);
        let z = if k > 0.0 { (a * r).min(PI) } else { a * r };
        power_integral(m, z, k < 0.0) / a
    }
}

/// Adaptive Gauss-Kronrod integral of `S_K^N` on `[0, r]`, absolute tolerance 1e-10.
pub fn volume_profile_quadrature(k: f64, n: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let f = |t: f64| s_profile_unchecked(k, n, t);
    let (whole, err) = gauss_kronrod(&f, 0.0, r);
    let tol = (1e-10f64).min(1e-12 * whole.abs()).max(1e-300);
    if err <= tol {
        return whole;
    }
    adaptive(&f, 0.0, r, whole, tol, 0)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (left, el) = gauss_kronrod(f, a, m);
    let (right, er) = gauss_kronrod(f, m, b);
    if el + er <= tol || depth >= 60 {
        return left + right;
    }
    let _ = whole;
    adaptive(f, a, m, left, tol / 2.0, depth + 1) + adaptive(f, m, b, right, tol / 2.0, depth + 1)
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const G_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// G7-K15 rule on `[a, b]`: (Kronrod estimate, |Kronrod - Gauss|).
fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let pair = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// One increase of the Bishop-Gromov ratio between consecutive probe radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgViolation {
    pub center: usize,
    pub r_small: f64,
    pub r_large: f64,
    pub ratio_small: f64,
    pub ratio_large: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgReport {
    pub violations: Vec<BgViolation>,
    /// Relative tolerance: a violation needs `ratio_large > (1 + tolerance) ratio_small`.
    pub tolerance: f64,
    pub radii: Vec<f64>,
}

/// Checks that `μ(B[x,r]) / ∫₀^r S_K^N` does not increase along the probe radii.
/// An empty report is a necessary condition for weak CD(K, N), not a sufficient one.
pub fn bishop_gromov_test(
    space: &FiniteMetricMeasureSpace,
    k: f64,
    n: f64,
    tolerance: f64,
    policy: &RadiiPolicy,
) -> Result<BgReport> {
    if !(tolerance >= 0.0) {
        return Err(Error::param("tolerance", format!("must be >= 0, got {tolerance}")));
    }
    let radii = policy.radii(space);
    if let Some(&r_max) = radii.last() {
        check_profile(k, n, r_max)?;
    } else {
        check_profile(k, n, 0.0)?;
    }
    let volumes = radii
        .iter()
        .map(|&r| volume_profile(k, n, r))
        .collect::<Result<Vec<_>>>()?;
    let centers = policy.centers(space)?;
    let violations = centers
        .par_iter()
        .flat_map_iter(|&x| {
            let prof = space.ball_profile(x);
            let ratios: Vec<f64> = radii.iter().zip(&volumes).map(|(&r, v)| prof.closed(r) / v).collect();
            let mut out = Vec::new();
            for i in 1..radii.len() {
                if ratios[i] > ratios[i - 1] * (1.0 + tolerance) {
                    out.push(BgViolation {
                        center: x,
                        r_small: radii[i - 1],
                        r_large: radii[i],
                        ratio_small: ratios[i - 1],
                        ratio_large: ratios[i],
                    });
                }
            }
            out
        })
        .collect();
    Ok(BgReport {
        violations,
        tolerance,
        radii,
    })
}

/// `floor` and `ceil` that forgive relative rounding noise of 1e-12.
fn floor_tol(x: f64) -> u64 {
    (x * (1.0 + 1e-12)).floor().max(0.0) as u64
}

fn ceil_tol(x: f64) -> u64 {
    (x * (1.0 - 1e-12)).ceil().max(0.0) as u64
}

/// Upper bound on the size of a minimal ε-net: `⌊V(D) / V(ε/2)⌋`.
pub fn net_cardinality_bound(k: f64, n: f64, d: f64, epsilon: f64) -> Result<u64> {
    CurvatureParams::new(k, n, d)?;
    if !(epsilon > 0.0 && epsilon <= 2.0 * d) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 2D], got {epsilon}")));
    }
    let ratio = volume_profile(k, n, d)? / volume_profile(k, n, epsilon / 2.0)?;
    Ok(floor_tol(ratio).max(1))
}

/// `h(ε) = V(9ε/2) / V(ε/2)` and its ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeBound {
    pub h: f64,
    pub n2: u64,
}

/// Bound on how many ε-balls of a minimal net meet one ε-ball, at a given ε.
pub fn intersection_degree_bound(k: f64, n: f64, epsilon: f64) -> Result<DegreeBound> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let h = volume_profile(k, n, 4.5 * epsilon)? / volume_profile(k, n, 0.5 * epsilon)?;
    Ok(DegreeBound { h, n2: ceil_tol(h) })
}

/// ε-uniform version: the ceiling of the largest `h(ε)` over 64 log-spaced
/// ε in `[2D/9 · 1e-6, 2D/9]`, further capped by the profile domain for `K > 0`.
pub fn uniform_intersection_degree_bound(k: f64, n: f64, d: f64) -> Result<u64> {
    CurvatureParams::new(k, n, d)?;
    let hi = (2.0 * d / 9.0).min(conjugate_radius(k, n) / 4.5);
    let mut best = 0u64;
    for eps in log_grid(hi * 1e-6, hi, 64) {
        best = best.max(intersection_degree_bound(k, n, eps)?.n2);
    }
    Ok(best)
}

/// `n'(C)` and `n₃(C) = 2 (n' - 1)`, with the free index fixed to `k = ⌈C⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternBound {
    pub n_prime: u64,
    pub n3: u64,
}

pub fn same_pattern_bound(k: f64, n: f64, c: f64, epsilon: f64, d: f64) -> Result<PatternBound> {
    CurvatureParams::new(k, n, d)?;
    if !(c >= 1.0) {
        return Err(Error::Domain(format!("C must be >= 1, got {c}")));
    }
    if !(epsilon > 0.0 && epsilon <= 2.0 * d) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 2D], got {epsilon}")));
    }
    let steps = c.ceil();
    let ratio = volume_profile(k, n, (4.0 * steps + 1.0) * epsilon / 2.0)? / volume_profile(k, n, epsilon / 2.0)?;
    let n_prime = ceil_tol(ratio).max(1);
    Ok(PatternBound {
        n_prime,
        n3: 2 * (n_prime - 1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub epsilon: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

/// All three net bounds at one scale; `n2` is the ε-uniform value.
pub fn bounds_report(params: CurvatureParams, epsilon: f64, c: f64) -> Result<BoundsReport> {
    let CurvatureParams { k, n, d } = params;
    Ok(BoundsReport {
        n1: net_cardinality_bound(k, n, d, epsilon)?,
        n2: uniform_intersection_degree_bound(k, n, d)?,
        n3: same_pattern_bound(k, n, c, epsilon, d)?.n3,
        epsilon,
        c,
    })
}

/// Exponent used for `β^{(K,∞)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfiniteDimensionForm {
    /// `exp(K/6 (1 - t²) d)`
    #[default]
    Linear,
    /// `exp(K/6 (1 - t²) d²)`
    Squared,
}

/// Reference distortion coefficient `β_t^{(K,N)}` at distance `d`.
pub fn distortion_coefficient(k: f64, n: f64, t: f64, d: f64, form: InfiniteDimensionForm) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param("t", format!("must lie in [0, 1], got {t}")));
    }
    if !(d >= 0.0) {
        return Err(Error::param("d", format!("must be >= 0, got {d}")));
    }
    if !(n >= 1.0) {
        return Err(Error::param("N", format!("must be >= 1, got {n}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if n.is_infinite() {
        let dist = match form {
            InfiniteDimensionForm::Linear => d,
            InfiniteDimensionForm::Squared => d * d,
        };
        return Ok((k / 6.0 * (1.0 - t * t) * dist).exp());
    }
    if n == 1.0 {
        return Ok(if k > 0.0 { f64::INFINITY } else { 1.0 });
    }
    if k == 0.0 {
        return Ok(1.0);
    }
    let alpha = frequency(k, n) * d;
    if alpha == 0.0 {
        return Ok(1.0);
    }
    if k > 0.0 {
        if alpha > PI {
            return Ok(f64::INFINITY);
        }
        let denom = t * alpha.sin();
        if denom <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(((t * alpha).sin() / denom).powf(n - 1.0))
    } else {
        Ok(((t * alpha).sinh() / (t * alpha.sinh())).powf(n - 1.0))
    }
}

/// Scalar potential `V` sampled on a regular grid (row-major, last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn sample(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>, f: impl Fn(&[f64]) -> f64) -> Self {
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..total {
            let x: Vec<f64> = idx.iter().zip(&spacing).zip(&origin).map(|((&i, h), o)| o + i as f64 * h).collect();
            values.push(f(&x));
            for axis in (0..shape.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < shape[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        GridField {
            shape,
            spacing,
            origin,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    fn at(&self, base: &[usize], shifts: &[(usize, isize)]) -> f64 {
        let mut idx = base.to_vec();
        for &(axis, s) in shifts {
            idx[axis] = (idx[axis] as isize + s) as usize;
        }
        self.values[self.offset(&idx)]
    }
}

/// Smallest eigenvalue of `∇²V − ∇V⊗∇V / (N − n)` on flat ℝⁿ at a grid point,
/// by central differences. For `N = ∞` the rank-one term is dropped.
pub fn weighted_euclidean_ricci(field: &GridField, n_eff: f64, query: &[usize]) -> Result<f64> {
    let dim = field.dim();
    if dim == 0 || field.spacing.len() != dim || field.values.len() != field.shape.iter().product::<usize>() {
        return Err(Error::param("field", "inconsistent grid description"));
    }
    if query.len() != dim {
        return Err(Error::param("query", format!("expected {dim} indices, got {}", query.len())));
    }
    if !(n_eff > dim as f64) {
        return Err(Error::Domain(format!(
            "effective dimension {n_eff} must exceed the base dimension {dim}"
        )));
    }
    for (axis, (&i, &s)) in query.iter().zip(&field.shape).enumerate() {
        if i == 0 || i + 1 >= s {
            return Err(Error::Domain(format!("query index {i} on axis {axis} is on the boundary")));
        }
    }
    let h = &field.spacing;
    let v0 = field.at(query, &[]);
    let mut grad = vec![0.0; dim];
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let plus = field.at(query, &[(i, 1)]);
        let minus = field.at(query, &[(i, -1)]);
        grad[i] = (plus - minus) / (2.0 * h[i]);
        hess[(i, i)] = (plus - 2.0 * v0 + minus) / (h[i] * h[i]);
        for j in (i + 1)..dim {
            let pp = field.at(query, &[(i, 1), (j, 1)]);
            let pm = field.at(query, &[(i, 1), (j, -1)]);
            let mp = field.at(query, &[(i, -1), (j, 1)]);
            let mm = field.at(query, &[(i, -1), (j, -1)]);
            let mixed = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = mixed;
            hess[(j, i)] = mixed;
        }
    }
    if n_eff.is_finite() {
        let scale = 1.0 / (n_eff - dim as f64);
        for i in 0..dim {
            for j in 0..dim {
                hess[(i, j)] -= grad[i] * grad[j] * scale;
            }
        }
    }
    let eig = SymmetricEigen::new(hess);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdAhlforsBound {
    /// Smallest `C₂` with `V(r) ≤ C₂ r^N` on `(0, D]`.
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C1_note")]
    pub c1_note: String,
    /// `max r^N / μ(B[x,r])` over the probes, when a space is supplied.
    #[serde(rename = "C1_empirical")]
    pub c1_empirical: Option<f64>,
}

pub fn cd_ahlfors_bound(
    k: f64,
    n: f64,
    d: f64,
    space: Option<(&FiniteMetricMeasureSpace, &RadiiPolicy)>,
) -> Result<CdAhlforsBound> {
    if k < 0.0 {
        return Err(Error::Domain(format!("requires K >= 0, got {k}")));
    }
    CurvatureParams::new(k, n, d)?;
    if d > conjugate_radius(k, n) {
        return Err(Error::Domain(format!("D = {d} exceeds the conjugate radius")));
    }
    let limit_at_zero = if k == 0.0 {
        1.0 / n
    } else {
        frequency(k, n).powf(n - 1.0) / n
    };
    let mut c2 = limit_at_zero;
    for r in log_grid(d * 1e-6, d, 256) {
        c2 = c2.max(volume_profile(k, n, r)? / r.powf(n));
    }
    let c1_empirical = match space {
        Some((space, policy)) => {
            let radii = policy.radii(space);
            let centers = policy.centers(space)?;
            let mut best = 0.0f64;
            for &x in &centers {
                let prof = space.ball_profile(x);
                for &r in &radii {
                    best = best.max(r.powf(n) / prof.closed(r));
                }
            }
            Some(best)
        }
        None => None,
    };
    Ok(CdAhlforsBound {
        c2,
        c1_note: "lower constant scales with the total mass (C1 = C * mu(X)); reported empirically when a space is given"
            .into(),
        c1_empirical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn profile_values() {
        assert_eq!(s_profile(0.0, 3.0, 2.0).unwrap(), 4.0);
        assert_relative_eq!(s_profile(1.0, 2.0, PI / 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(s_profile(-1.0, 2.0, 1.0).unwrap(), 1.0f64.sinh(), epsilon = 1e-15);
        assert_relative_eq!(s_profile(-1.0, 2.0, 1.0).unwrap(), 1.1752, epsilon = 1e-4);
    }

    #[test]
    fn profile_domain_errors() {
        assert!(s_profile(1.0, 2.0, 4.0).is_err());
        assert!(s_profile(1.0, 1.0, 0.5).is_err());
        assert!(s_profile(0.0, 0.5, 1.0).is_err());
        assert!(volume_profile(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn profile_flat_limit() {
        for n in [2.0, 3.0, 4.5] {
            for t in [0.3, 1.0, 2.5] {
                let flat = s_profile(0.0, n, t).unwrap();
                for k in [1e-8, -1e-8] {
                    let curved = s_profile(k, n, t).unwrap() / frequency(k, n).powf(n - 1.0);
                    assert!((curved - flat).abs() / flat < 1e-4);
                }
            }
        }
    }

    #[test]
    fn volume_values() {
        assert_relative_eq!(volume_profile(0.0, 3.0, 2.0).unwrap(), 8.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(volume_profile(0.0, 2.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(volume_profile(-1.0, 2.0, 1.0).unwrap(), 1.0f64.cosh() - 1.0, epsilon = 1e-14);
        assert_relative_eq!(volume_profile(1.0, 2.0, PI).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for n in 1..=4u32 {
            for k in [-2.0, -0.5, 0.0, 0.5, 2.0] {
                if k != 0.0 && n == 1 {
                    continue;
                }
                let rmax = conjugate_radius(k, n as f64).min(3.0);
                for frac in [0.001, 0.01, 0.2, 0.5, 0.9, 1.0] {
                    let r = rmax * frac;
                    let closed = volume_profile_closed(k, n, r);
                    let quad = volume_profile_quadrature(k, n as f64, r);
                    assert!((closed - quad).abs() < 1e-9, "k={k} n={n} r={r}: {closed} vs {quad}");
                }
            }
        }
    }

    #[test]
    fn net_bounds() {
        assert_eq!(net_cardinality_bound(0.0, 2.0, 1.0, 0.5).unwrap(), 16);
        for n in [1.0, 2.0, 3.0, 5.5] {
            assert_eq!(net_cardinality_bound(0.0, n, 1.3, 2.6).unwrap(), 1);
        }
        assert_eq!(net_cardinality_bound(0.0, 2.0, 2f64.sqrt(), 0.25).unwrap(), 128);
        assert!(net_cardinality_bound(0.0, 2.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn degree_bounds() {
        for eps in [1e-4, 0.01, 0.1, 1.0, 10.0] {
            assert_eq!(intersection_degree_bound(0.0, 2.0, eps).unwrap().n2, 81);
            assert_eq!(intersection_degree_bound(0.0, 1.0, eps).unwrap().n2, 9);
        }
        let hyp = intersection_degree_bound(-1.0, 2.0, 0.1).unwrap();
        let oracle = (0.45f64.cosh() - 1.0) / (0.05f64.cosh() - 1.0);
        assert_relative_eq!(hyp.h, oracle, max_relative = 1e-12);
        assert_eq!(hyp.n2, 83);
        assert_eq!(uniform_intersection_degree_bound(0.0, 2.0, 1.0).unwrap(), 81);
    }

    #[test]
    fn pattern_bounds() {
        let b = same_pattern_bound(0.0, 2.0, 1.0, 0.1, 1.0).unwrap();
        assert_eq!((b.n_prime, b.n3), (25, 48));
        let b = same_pattern_bound(0.0, 1.0, 1.0, 0.1, 1.0).unwrap();
        assert_eq!((b.n_prime, b.n3), (5, 8));
        let b = same_pattern_bound(0.0, 2.0, 2.0, 0.1, 1.0).unwrap();
        assert_eq!((b.n_prime, b.n3), (81, 160));
        assert!(same_pattern_bound(0.0, 2.0, 0.5, 0.1, 1.0).is_err());
    }

    #[test]
    fn distortion_coefficients() {
        let f = InfiniteDimensionForm::Linear;
        for (k, n) in [(1.0, 2.0), (-3.0, 4.0), (0.0, 1.0), (2.0, f64::INFINITY)] {
            assert_eq!(distortion_coefficient(k, n, 0.0, 1.3, f).unwrap(), 1.0);
        }
        for t in [0.1, 0.5, 1.0] {
            assert_eq!(distortion_coefficient(0.0, 3.0, t, 2.0, f).unwrap(), 1.0);
        }
        assert_relative_eq!(
            distortion_coefficient(1.0, 2.0, 0.5, PI / 2.0, f).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-14
        );
        assert!(distortion_coefficient(1.0, 2.0, 0.5, 4.0, f).unwrap().is_infinite());
        assert!(distortion_coefficient(1.0, 1.0, 0.5, 0.1, f).unwrap().is_infinite());
        assert_eq!(distortion_coefficient(-1.0, 1.0, 0.5, 0.1, f).unwrap(), 1.0);
        assert_relative_eq!(
            distortion_coefficient(6.0, f64::INFINITY, 0.0 + 0.5, 2.0, f).unwrap(),
            (0.75f64 * 2.0).exp()
        );
        assert_relative_eq!(
            distortion_coefficient(6.0, f64::INFINITY, 0.5, 2.0, InfiniteDimensionForm::Squared).unwrap(),
            (0.75f64 * 4.0).exp()
        );
        assert!(distortion_coefficient(1.0, 2.0, 1.5, 1.0, f).is_err());
    }

    #[test]
    fn distortion_near_zero_distance() {
        let f = InfiniteDimensionForm::Linear;
        for (k, n) in [(1.0, 2.0), (-1.0, 3.0), (0.5, 5.5), (-2.0, 2.0)] {
            for t in [0.2, 0.7] {
                let b = distortion_coefficient(k, n, t, 1e-6, f).unwrap();
                assert!((b - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ricci_examples() {
        let h = 0.01;
        let field = GridField::sample(vec![301], vec![h], vec![-1.5], |x| x[0] * x[0]);
        // grid point x = 0 is index 150, x = 1 is index 250
        let inf = weighted_euclidean_ricci(&field, f64::INFINITY, &[150]).unwrap();
        assert_relative_eq!(inf, 2.0, epsilon = 1e-9);
        let finite = weighted_euclidean_ricci(&field, 2.0, &[250]).unwrap();
        assert_relative_eq!(finite, -2.0, epsilon = 1e-8);
        let flat = GridField::sample(vec![5, 5], vec![0.1, 0.1], vec![0.0, 0.0], |_| 0.0);
        assert_eq!(weighted_euclidean_ricci(&flat, 3.0, &[2, 2]).unwrap(), 0.0);
        assert!(weighted_euclidean_ricci(&flat, 2.0, &[2, 2]).is_err());
        assert!(weighted_euclidean_ricci(&flat, 3.0, &[0, 2]).is_err());
    }

    #[test]
    fn ricci_second_order_convergence() {
        // V = cos(x) + x y² has Hessian [[-cos x, 2y], [2y, 2x]]
        let exact = |x: f64, y: f64| {
            let m = nalgebra::Matrix2::new(-x.cos(), 2.0 * y, 2.0 * y, 2.0 * x);
            SymmetricEigen::new(m).eigenvalues.min()
        };
        let mut errors = Vec::new();
        for h in [0.1f64, 0.05, 0.025] {
            let steps = (1.0 / h).round() as usize;
            let field = GridField::sample(vec![2 * steps + 1, 2 * steps + 1], vec![h, h], vec![0.0, 0.0], |p| {
                p[0].cos() + p[0] * p[1] * p[1]
            });
            let got = weighted_euclidean_ricci(&field, f64::INFINITY, &[steps, steps / 2]).unwrap();
            errors.push((got - exact(1.0, 0.5)).abs());
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8, "observed order {order}, errors {errors:?}");
        }
    }

    #[test]
    fn cd_ahlfors_constants() {
        assert_relative_eq!(cd_ahlfors_bound(0.0, 2.0, 1.0, None).unwrap().c2, 0.5, epsilon = 1e-12);
        assert_relative_eq!(cd_ahlfors_bound(0.0, 3.0, 5.0, None).unwrap().c2, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(cd_ahlfors_bound(1.0, 2.0, PI / 2.0, None).unwrap().c2, 0.5, epsilon = 1e-12);
        assert!(cd_ahlfors_bound(-1.0, 2.0, 1.0, None).is_err());
    }
}
