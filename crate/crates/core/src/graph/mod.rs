//! Weighted graphs, their vertex masses and the reversible Markov kernel.

mod generators;
mod io;
mod metric;

pub use generators::{dumbbell_bridge, gen_cycle, gen_dumbbell, gen_grid, gen_grid_capped, gen_tree};
pub use io::{graph_from_json, graph_to_json, read_graph, write_graph, GraphFile};
pub use metric::{
    boundary, delta_alpha, distance, doubling_report, edge_ball_measure, edge_metric, volume, Ball, DeltaAlpha,
    DistanceMatrix,
};

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Vertex count above which dense spectral work is refused.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// A finite connected graph with symmetric nonnegative weights.
///
/// Adjacency is stored in compressed rows sorted by target, self-loops included.
/// The position of `(x, y)` in this layout is its canonical directed-edge index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    masses: Vec<f64>,
    fingerprint: u64,
}

impl WeightedGraph {
    /// Builds a graph from `(x, y, w)` triples, each undirected pair listed once or twice.
    ///
    /// Zero weights are dropped. A pair given in both orientations must carry the same weight.
    pub fn build(vertex_count: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidParameter("vertex_count must be positive".into()));
        }
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(x, y, w) in entries {
            for v in [x, y] {
                if v >= vertex_count {
                    return Err(Error::IndexOutOfRange { index: v, vertex_count });
                }
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight { x, y, weight: w });
            }
            let key = (x.min(y), x.max(y));
            if let Some(&prev) = pairs.get(&key) {
                if prev != w {
                    return Err(Error::AsymmetricInput { x, y, forward: prev, backward: w });
                }
            } else {
                pairs.insert(key, w);
            }
        }

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vertex_count];
        for (&(x, y), &w) in &pairs {
            if w == 0.0 {
                continue;
            }
            rows[x].push((y, w));
            if x != y {
                rows[y].push((x, w));
            }
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(y, _)| y);
            for &(y, w) in row.iter() {
                targets.push(y);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        let masses: Vec<f64> = (0..vertex_count).map(|x| weights[offsets[x]..offsets[x + 1]].iter().sum()).collect();
        if let Some(x) = masses.iter().position(|&m| m <= 0.0) {
            return Err(Error::ZeroMassVertex(x));
        }

        let fingerprint = fingerprint(&offsets, &targets, &weights);
        let g = WeightedGraph { offsets, targets, weights, masses, fingerprint };
        let dist = g.bfs(0);
        if let Some(x) = dist.iter().position(|&d| d == usize::MAX) {
            return Err(Error::DisconnectedGraph(x));
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.masses.len()
    }

    /// m(x) = Σ_y μ_xy.
    pub fn mass(&self, x: usize) -> f64 {
        self.masses[x]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Structural hash used to tie functions to the graph they were built on.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Neighbours `(y, μ_xy)` of `x` in increasing order of `y`.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[x]..self.offsets[x + 1];
        self.targets[span.clone()].iter().copied().zip(self.weights[span].iter().copied())
    }

    /// Range of canonical edge indices leaving `x`.
    pub fn edge_range(&self, x: usize) -> std::ops::Range<usize> {
        self.offsets[x]..self.offsets[x + 1]
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Target and weight of the canonical directed edge `e`.
    pub fn edge_target(&self, e: usize) -> usize {
        self.targets[e]
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    /// Canonical directed-edge list `(x, y, μ_xy)`, sorted by `(x, y)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        (0..self.vertex_count()).flat_map(|x| self.neighbors(x).map(move |(y, w)| (x, y, w))).collect()
    }

    /// Canonical index of the directed edge `(x, y)`, if present.
    pub fn edge_index(&self, x: usize, y: usize) -> Option<usize> {
        if x >= self.vertex_count() {
            return None;
        }
        let span = self.edge_range(x);
        self.targets[span.clone()].binary_search(&y).ok().map(|i| span.start + i)
    }

    /// Index of the reverse edge for every canonical edge.
    pub fn reverse_edges(&self) -> Vec<usize> {
        let mut rev = vec![0; self.edge_count()];
        for x in 0..self.vertex_count() {
            for e in self.edge_range(x) {
                let y = self.targets[e];
                rev[e] = self.edge_index(y, x).expect("adjacency is symmetric");
            }
        }
        rev
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.edge_index(x, y).map_or(0.0, |e| self.weights[e])
    }

    /// p(x, y) = μ_xy / m(x).
    pub fn transition(&self, x: usize, y: usize) -> f64 {
        self.weight(x, y) / self.masses[x]
    }

    /// N = max_x ♯B(x, 1).
    pub fn degree_bound(&self) -> usize {
        (0..self.vertex_count())
            .map(|x| {
                let loops = usize::from(self.edge_index(x, x).is_some());
                self.edge_range(x).len() - loops + 1
            })
            .max()
            .unwrap_or(1)
    }

    /// Hop distances from `x`; unreachable vertices hold `usize::MAX`.
    pub fn bfs(&self, x: usize) -> Vec<usize> {
        let n = self.vertex_count();
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::with_capacity(n);
        dist[x] = 0;
        queue.push_back(x);
        while let Some(u) = queue.pop_front() {
            for e in self.edge_range(u) {
                let v = self.targets[e];
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub(crate) fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: x, vertex_count: self.vertex_count() })
        }
    }

    /// Dense row-stochastic matrix of P.
    pub fn transition_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.vertex_count();
        let mut p = nalgebra::DMatrix::zeros(n, n);
        for x in 0..n {
            for (y, w) in self.neighbors(x) {
                p[(x, y)] = w / self.masses[x];
            }
        }
        p
    }
}

fn fingerprint(offsets: &[usize], targets: &[usize], weights: &[f64]) -> u64 {
    // FNV-1a over the adjacency layout.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for &o in offsets {
        eat(o as u64);
    }
    for &t in targets {
        eat(t as u64);
    }
    for &w in weights {
        eat(w.to_bits());
    }
    h
}
