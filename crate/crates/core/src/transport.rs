//! Exact discrete optimal transport by successive shortest paths with
//! Johnson potentials on the dense bipartite residual graph.

/// Residual supplies, demands and flows at or below this are treated as zero.
const MASS_EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
pub(crate) struct TransportPlan {
    /// `(source index, target index, mass)` with positive mass.
    pub(crate) entries: Vec<(usize, usize, f64)>,
    pub(crate) cost: f64,
}

/// Minimizes `Σ π_ij cost(i, j)` over couplings of `supply` and `demand`
/// (equal totals, nonnegative costs).
pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> TransportPlan {
    let n = supply.len();
    let m = demand.len();
    let c: Vec<f64> = (0..n * m).map(|k| cost(k / m, k % m)).collect();
    let mut flow = vec![0.0f64; n * m];
    let mut left = supply.to_vec();
    let mut need = demand.to_vec();
    // potentials: sources 0..n, targets n..n+m
    let mut pot = vec![0.0f64; n + m];
    let total_need: f64 = need.iter().sum();
    let mut moved = 0.0;
    let mut dist = vec![0.0f64; n + m];
    let mut parent = vec![usize::MAX; n + m];
    let mut done = vec![false; n + m];

    while moved < total_need * (1.0 - 1e-14) {
        if !left.iter().any(|&s| s > MASS_EPS) || !need.iter().any(|&d| d > MASS_EPS) {
            break;
        }
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        parent.iter_mut().for_each(|p| *p = usize::MAX);
        done.iter_mut().for_each(|d| *d = false);
        for i in 0..n {
            if left[i] > MASS_EPS {
                dist[i] = 0.0;
            }
        }
        let mut sink = usize::MAX;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..n + m {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u >= n && need[u - n] > MASS_EPS {
                sink = u;
                break;
            }
            if u < n {
                let row = &c[u * m..(u + 1) * m];
                for j in 0..m {
                    let v = n + j;
                    if done[v] {
                        continue;
                    }
                    let reduced = (row[j] + pot[u] - pot[v]).max(0.0);
                    if best + reduced < dist[v] {
                        dist[v] = best + reduced;
                        parent[v] = u;
                    }
                }
            } else {
                let j = u - n;
                for i in 0..n {
                    if done[i] || flow[i * m + j] <= MASS_EPS {
                        continue;
                    }
                    let reduced = (-c[i * m + j] + pot[u] - pot[i]).max(0.0);
                    if best + reduced < dist[i] {
                        dist[i] = best + reduced;
                        parent[i] = u;
                    }
                }
            }
        }
        if sink == usize::MAX {
            break;
        }
        let reach = dist[sink];
        for v in 0..n + m {
            pot[v] += dist[v].min(reach);
        }
        // bottleneck along the path
        let mut amount = need[sink - n];
        let mut v = sink;
        while parent[v] != usize::MAX {
            let u = parent[v];
            if u >= n {
                // backward arc target u -> source v undoes flow[v][u]
                amount = amount.min(flow[v * m + (u - n)]);
            }
            v = u;
        }
        amount = amount.min(left[v]);
        let origin = v;
        let mut v = sink;
        while parent[v] != usize::MAX {
            let u = parent[v];
            if u < n {
                flow[u * m + (v - n)] += amount;
            } else {
                let slot = &mut flow[v * m + (u - n)];
                *slot -= amount;
                if *slot < MASS_EPS {
                    *slot = 0.0;
                }
            }
            v = u;
        }
        left[origin] -= amount;
        need[sink - n] -= amount;
        moved += amount;
    }

    let mut entries = Vec::new();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..m {
            let f = flow[i * m + j];
            if f > 0.0 {
                entries.push((i, j, f));
                total += f * c[i * m + j];
            }
        }
    }
    TransportPlan { entries, cost: total }
}
