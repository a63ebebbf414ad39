//! Dinic maximum flow on real capacities.

use std::collections::VecDeque;

/// Residual amounts at or below this are treated as exhausted.
const FLOW_EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    adjacency: Vec<Vec<usize>>,
    original: Vec<f64>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            adjacency: vec![Vec::new(); nodes],
            original: Vec::new(),
        }
    }

    /// Adds `u -> v` with capacity `cap` and returns its handle.
    pub(crate) fn add_edge(&mut self, u: usize, v: usize, cap: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap });
        self.arcs.push(Arc { to: u, cap: 0.0 });
        self.original.push(cap);
        self.original.push(0.0);
        self.adjacency[u].push(id);
        self.adjacency[v].push(id + 1);
        id
    }

    /// Flow currently carried by the edge returned from `add_edge`.
    pub(crate) fn flow(&self, edge: usize) -> f64 {
        self.arcs[edge ^ 1].cap
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.adjacency.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &id in &self.adjacency[u] {
                let arc = &self.arcs[id];
                if arc.cap > FLOW_EPS && level[arc.to] == usize::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn augment(&mut self, u: usize, t: usize, limit: f64, level: &[usize], next: &mut [usize]) -> f64 {
        if u == t {
            return limit;
        }
        while next[u] < self.adjacency[u].len() {
            let id = self.adjacency[u][next[u]];
            let (to, cap) = (self.arcs[id].to, self.arcs[id].cap);
            if cap > FLOW_EPS && level[to] == level[u] + 1 {
                let pushed = self.augment(to, t, limit.min(cap), level, next);
                if pushed > 0.0 {
                    self.arcs[id].cap -= pushed;
                    self.arcs[id ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0usize; self.adjacency.len()];
            loop {
                let pushed = self.augment(s, t, f64::INFINITY, &level, &mut next);
                if pushed <= 0.0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    #[allow(dead_code)]
    pub(crate) fn reset(&mut self) {
        for (arc, &cap) in self.arcs.iter_mut().zip(&self.original) {
            arc.cap = cap;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        // CLRS example, max flow 23
        let mut g = FlowNetwork::new(6);
        for (u, v, c) in [
            (0, 1, 16.0),
            (0, 2, 13.0),
            (1, 3, 12.0),
            (2, 1, 4.0),
            (2, 4, 14.0),
            (3, 2, 9.0),
            (3, 5, 20.0),
            (4, 3, 7.0),
            (4, 5, 4.0),
        ] {
            g.add_edge(u, v, c);
        }
        assert!((g.max_flow(0, 5) - 23.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_bipartite() {
        let mut g = FlowNetwork::new(6);
        let a = g.add_edge(0, 1, 0.3);
        g.add_edge(0, 2, 0.7);
        g.add_edge(1, 3, f64::INFINITY);
        g.add_edge(2, 3, f64::INFINITY);
        g.add_edge(2, 4, f64::INFINITY);
        g.add_edge(3, 5, 0.5);
        g.add_edge(4, 5, 0.25);
        assert!((g.max_flow(0, 5) - 0.75).abs() < 1e-15);
        assert!(g.flow(a) <= 0.3 + 1e-15);
    }
}
