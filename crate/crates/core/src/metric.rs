//! Finite metric spaces, terminal sets and greedy nets.
//!
//! Distances live in a dense row-major table. Points are the indices
//! `0..n`; a terminal set caches, for every point, its nearest terminal
//! and the terminals close enough to ever capture it under rates in `[1, 2]`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GraphInput;

/// Absolute slack allowed when checking the triangle inequality.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

const CANDIDATE_SLACK: f64 = 1e-9;

/// A finite metric space over the points `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<f64>,
}

impl MetricSpace {
    /// Builds a metric from a square table of distances.
    ///
    /// Shape and finiteness are always checked. With `validate` set the full
    /// set of metric axioms is checked as well, which costs `O(n^3)`.
    pub fn from_distance_matrix(table: &[Vec<f64>], validate: bool) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::EmptyMetric);
        }
        let mut dist = Vec::with_capacity(n * n);
        for (row, entries) in table.iter().enumerate() {
            if entries.len() != n {
                return Err(Error::NotSquare { row, len: entries.len(), n });
            }
            dist.extend_from_slice(entries);
        }
        Self::from_flat(n, dist, validate)
    }

    /// Same as [`MetricSpace::from_distance_matrix`] over a row-major buffer.
    pub fn from_flat(n: usize, dist: Vec<f64>, validate: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMetric);
        }
        if dist.len() != n * n {
            return Err(Error::NotSquare { row: 0, len: dist.len(), n: n * n });
        }
        if let Some(pos) = dist.iter().position(|d| !d.is_finite()) {
            return Err(Error::NonFinite { i: pos / n, j: pos % n });
        }
        let m = MetricSpace { n, dist };
        if validate {
            m.validate()?;
        }
        Ok(m)
    }

    /// Shortest-path closure of a positively weighted undirected graph.
    pub fn from_weighted_graph(g: &GraphInput) -> Result<Self> {
        g.validate()?;
        let n = g.n;
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in &g.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&adj, s)).collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = rows[i][j];
                if d.is_infinite() {
                    return Err(Error::DisconnectedGraph { u: i.min(j), v: i.max(j) });
                }
                // Sums along a path and its reverse can round differently.
                let d = d.min(rows[j][i]);
                dist[i * n + j] = d;
            }
        }
        Ok(MetricSpace { n, dist })
    }

    /// Checks every metric axiom, reporting the first offence found.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            let d = self.dist(i, i);
            if d != 0.0 {
                return Err(Error::NonZeroDiagonal { i, value: d });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dij = self.dist(i, j);
                if dij < 0.0 {
                    return Err(Error::NegativeDistance { i, j, value: dij });
                }
                if dij == 0.0 {
                    return Err(Error::ZeroOffDiagonal { i: i.min(j), j: i.max(j) });
                }
                let dji = self.dist(j, i);
                if dij != dji {
                    return Err(Error::Asymmetry { i, j, dij, dji });
                }
            }
        }
        let found = (0..n).into_par_iter().find_map_first(|i| {
            for k in (i + 1)..n {
                let direct = self.dist(i, k);
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let via = self.dist(i, j) + self.dist(j, k);
                    if direct > via + TRIANGLE_TOLERANCE {
                        return Some(Error::TriangleViolation { i, j, k, direct, via });
                    }
                }
            }
            None
        });
        match found {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Distances from `i` to every point.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n })
        }
    }

    /// Closed ball `{ y : d(u, y) <= r }`, in increasing index order.
    pub fn ball(&self, u: usize, r: f64) -> Result<Vec<usize>> {
        self.check_index(u)?;
        Ok(self.row(u).iter().enumerate().filter(|&(_, &d)| d <= r).map(|(y, _)| y).collect())
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest distance between two distinct points, `+inf` for a singleton.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                best = best.min(self.dist(i, j));
            }
        }
        best
    }

    /// The same point set with every distance multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor {factor}")));
        }
        Ok(MetricSpace { n: self.n, dist: self.dist.iter().map(|d| d * factor).collect() })
    }

    /// Row-major copy of the distance table.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), source)));
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((OrderedFloat(nd), v)));
            }
        }
    }
    dist
}

/// Nearest terminal of a point together with the distance `A_u = d(u, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nearest {
    pub terminal: usize,
    pub distance: f64,
}

/// A nonempty set of terminals with per-point nearest-terminal data.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSet {
    terminals: Vec<usize>,
    position: Vec<Option<usize>>,
    nearest: Vec<Nearest>,
    /// Per point, positions of the terminals inside `B(x, 2 A_x)`.
    candidates: Vec<Vec<usize>>,
    k_param: usize,
}

impl TerminalSet {
    /// Builds the terminal set, sorting the indices and filling the
    /// nearest-terminal table (ties go to the lowest terminal index).
    pub fn new(m: &MetricSpace, terminals: &[usize]) -> Result<Self> {
        if terminals.is_empty() {
            return Err(Error::EmptyTerminalSet);
        }
        let n = m.len();
        let mut position = vec![None; n];
        for &t in terminals {
            m.check_index(t)?;
            if position[t].is_some() {
                return Err(Error::DuplicateTerminal(t));
            }
            position[t] = Some(0);
        }
        let mut sorted = terminals.to_vec();
        sorted.sort_unstable();
        for (p, &t) in sorted.iter().enumerate() {
            position[t] = Some(p);
        }

        let mut nearest = Vec::with_capacity(n);
        let mut candidates = Vec::with_capacity(n);
        let mut k_param = 3;
        for x in 0..n {
            let row = m.row(x);
            let mut best = Nearest { terminal: sorted[0], distance: row[sorted[0]] };
            for &t in &sorted[1..] {
                if row[t] < best.distance {
                    best = Nearest { terminal: t, distance: row[t] };
                }
            }
            let reach = 2.0 * best.distance;
            let in_ball = sorted.iter().filter(|&&t| row[t] <= reach).count();
            k_param = k_param.max(in_ball);
            // Slightly wider than the ball so that rounding in d/rho can never
            // let a pruned terminal tie with the true winner.
            let slack = reach * (1.0 + CANDIDATE_SLACK);
            let close: Vec<usize> =
                sorted.iter().enumerate().filter(|&(_, &t)| row[t] <= slack).map(|(p, _)| p).collect();
            nearest.push(best);
            candidates.push(close);
        }
        Ok(TerminalSet { terminals: sorted, position, nearest, candidates, k_param })
    }

    /// Terminal indices in increasing order.
    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.nearest.len()
    }

    pub fn is_terminal(&self, x: usize) -> bool {
        self.position.get(x).is_some_and(|p| p.is_some())
    }

    /// Position of terminal `t` within [`TerminalSet::terminals`].
    pub fn position(&self, t: usize) -> Option<usize> {
        self.position.get(t).copied().flatten()
    }

    pub fn nearest(&self, x: usize) -> Nearest {
        self.nearest[x]
    }

    /// `A_x`, the distance from `x` to the closest terminal.
    #[inline]
    pub fn distance_to_set(&self, x: usize) -> f64 {
        self.nearest[x].distance
    }

    /// Positions of terminals within `2 A_x` of `x` (plus a relative `1e-9`).
    #[inline]
    pub fn candidates(&self, x: usize) -> &[usize] {
        &self.candidates[x]
    }

    /// `max(3, max_x |T ∩ B(x, 2 A_x)|)`.
    pub fn k_param(&self) -> usize {
        self.k_param
    }
}

/// Tight ball-count parameter `K` for the terminal set.
pub fn compute_k(_m: &MetricSpace, terminals: &TerminalSet) -> usize {
    terminals.k_param()
}

/// Greedy `eps`-net: scan points by increasing index and keep each point
/// whose distance to every kept point is at least `eps`.
pub fn greedy_net(m: &MetricSpace, eps: f64) -> Result<TerminalSet> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("net radius must be positive, got {eps}")));
    }
    let mut net: Vec<usize> = Vec::new();
    for x in 0..m.len() {
        let row = m.row(x);
        if net.iter().all(|&y| row[y] >= eps) {
            net.push(x);
        }
    }
    TerminalSet::new(m, &net)
}
