//! Voronoi discretization of a space relative to a net, discretization
//! sequences with their Wasserstein-2 error, and the nerve of a net's ball cover.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::{wasserstein2, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::nets::{covering_order, memberships, minimal_epsilon_net, Net, NetRecord};
use crate::space::FiniteMetricMeasureSpace;

/// Partition of a space into Voronoi cells of a net, with aggregated masses.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub net: Net,
    /// `cells[k]` lists the points assigned to `net.centers[k]`.
    pub cells: Vec<Vec<usize>>,
    pub atomic_masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationRecord {
    pub net: NetRecord,
    pub cells: Vec<Vec<String>>,
    pub atomic_masses: Vec<f64>,
}

impl Discretization {
    pub fn to_record(&self, space: &FiniteMetricMeasureSpace) -> DiscretizationRecord {
        let ids = space.ids();
        DiscretizationRecord {
            net: self.net.to_record(space),
            cells: self.cells.iter().map(|c| c.iter().map(|&i| ids[i].clone()).collect()).collect(),
            atomic_masses: self.atomic_masses.clone(),
        }
    }

    pub fn from_record(space: &FiniteMetricMeasureSpace, record: &DiscretizationRecord) -> Result<Self> {
        let net = Net::from_record(space, &record.net)?;
        let d = voronoi_discretize(space, &net)?;
        let cells: Vec<Vec<String>> = d.to_record(space).cells;
        if cells != record.cells {
            return Err(Error::Mismatch("recorded cells differ from the Voronoi partition".into()));
        }
        Ok(d)
    }

    /// The atomic measure on the centers, normalized, as a measure on the whole space.
    pub fn atomic_measure(&self, space: &FiniteMetricMeasureSpace) -> Result<DiscreteMeasure> {
        let mut weights = vec![0.0; space.len()];
        for (&c, &m) in self.net.centers.iter().zip(&self.atomic_masses) {
            weights[c] = m;
        }
        Ok(DiscreteMeasure::new(space, weights)?.normalize())
    }
}

/// Assigns each point to its nearest center; ties go to the center with the
/// lowest point index.
pub fn voronoi_discretize(space: &FiniteMetricMeasureSpace, net: &Net) -> Result<Discretization> {
    net.check_space(space)?;
    if net.is_empty() {
        return Err(Error::Empty("net"));
    }
    let owner: Vec<usize> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            (0..net.len())
                .min_by(|&a, &b| {
                    let (ca, cb) = (net.centers[a], net.centers[b]);
                    space
                        .distance(x, ca)
                        .total_cmp(&space.distance(x, cb))
                        .then(ca.cmp(&cb))
                })
                .expect("net is nonempty")
        })
        .collect();
    let mut cells = vec![Vec::new(); net.len()];
    let mut atomic_masses = vec![0.0; net.len()];
    for (x, &k) in owner.iter().enumerate() {
        cells[k].push(x);
        atomic_masses[k] += space.mass(x);
    }
    Ok(Discretization {
        net: net.clone(),
        cells,
        atomic_masses,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceStep {
    pub discretization: Discretization,
    /// W₂ between the normalized atomic measure and the normalized original.
    pub w2_to_original: f64,
}

/// Nets and discretizations at each scale (greedy nets seeded at `seed`),
/// with their transport distance to the original measure.
pub fn discretization_sequence(space: &FiniteMetricMeasureSpace, epsilons: &[f64], seed: usize) -> Result<Vec<SequenceStep>> {
    if epsilons.is_empty() {
        return Err(Error::Empty("epsilons"));
    }
    for w in epsilons.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::param("epsilons", "must be strictly decreasing"));
        }
    }
    let original = DiscreteMeasure::from_space(space);
    epsilons
        .iter()
        .map(|&eps| {
            let net = minimal_epsilon_net(space, eps, seed)?;
            let discretization = voronoi_discretize(space, &net)?;
            let w2 = if net.len() == space.len() {
                0.0
            } else {
                wasserstein2(space, &discretization.atomic_measure(space)?, &original)?.value
            };
            Ok(SequenceStep {
                discretization,
                w2_to_original: w2,
            })
        })
        .collect()
}

/// Čech-style nerve of the closed ε-balls of a net. Vertices are net positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerveComplex {
    /// Point indices of the centers, in net order.
    pub vertices: Vec<usize>,
    /// `simplices_by_dim[k]` holds the k-simplices as increasing position tuples,
    /// in lexicographic order.
    pub simplices_by_dim: Vec<Vec<Vec<usize>>>,
}

impl NerveComplex {
    pub fn simplex_count(&self) -> usize {
        self.simplices_by_dim.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        simplex
            .len()
            .checked_sub(1)
            .and_then(|k| self.simplices_by_dim.get(k))
            .is_some_and(|list| list.binary_search_by(|s| s.as_slice().cmp(simplex)).is_ok())
    }

    /// Plain-text listing: a `NOFF` header, `vertices simplices`, one line per
    /// vertex (`position point_id`), then one line per simplex (`size v0 v1 ...`).
    pub fn to_off(&self, space: &FiniteMetricMeasureSpace) -> String {
        let mut out = String::from("NOFF\n");
        let _ = writeln!(out, "{} {}", self.vertices.len(), self.simplex_count());
        for (k, &c) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "{k} {}", space.ids()[c]);
        }
        for simplex in self.simplices_by_dim.iter().flatten() {
            let _ = write!(out, "{}", simplex.len());
            for v in simplex {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

fn push_subsets(items: &[usize], size: usize, start: usize, current: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
    if current.len() == size {
        out.insert(current.clone());
        return;
    }
    for i in start..items.len() {
        if items.len() - i < size - current.len() {
            break;
        }
        current.push(items[i]);
        push_subsets(items, size, i + 1, current, out);
        current.pop();
    }
}

/// Nerve up to dimension `max_dim`: a set of centers spans a simplex iff a
/// point of the space lies in all of their closed ε-balls.
pub fn nerve_complex(space: &FiniteMetricMeasureSpace, net: &Net, max_dim: usize) -> Result<NerveComplex> {
    net.check_space(space)?;
    if max_dim < 1 {
        return Err(Error::param("max_dim", "must be >= 1"));
    }
    let members = memberships(space, net);
    let simplices_by_dim = (0..=max_dim)
        .into_par_iter()
        .map(|dim| {
            let mut found = BTreeSet::new();
            let mut current = Vec::with_capacity(dim + 1);
            for m in &members {
                push_subsets(m, dim + 1, 0, &mut current, &mut found);
            }
            found.into_iter().collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let mut simplices_by_dim = simplices_by_dim;
    while simplices_by_dim.len() > 1 && simplices_by_dim.last().is_some_and(Vec::is_empty) {
        simplices_by_dim.pop();
    }
    Ok(NerveComplex {
        vertices: net.centers.clone(),
        simplices_by_dim,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringMesh {
    pub mesh: f64,
    pub order: usize,
}

/// Largest realized ball diameter (twice the farthest member of a center's
/// closed ε-ball, at most 2ε) and the covering order.
pub fn covering_mesh_report(space: &FiniteMetricMeasureSpace, net: &Net) -> Result<CoveringMesh> {
    net.check_space(space)?;
    let mesh = net
        .centers
        .iter()
        .map(|&c| {
            (0..space.len())
                .map(|x| space.distance(c, x))
                .filter(|&d| d <= net.epsilon)
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
        * 2.0;
    Ok(CoveringMesh {
        mesh: mesh.min(2.0 * net.epsilon),
        order: covering_order(space, net)?,
    })
}
