//! Weighted graph inputs and the deterministic test-corpus generators.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Restart budget for random regular graph sampling.
pub const REGULAR_RESTARTS: usize = 100;

/// An undirected graph with positive edge weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphInput {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphInput {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyMetric);
        }
        for (index, &(u, v, w)) in self.edges.iter().enumerate() {
            let reason = if u >= self.n || v >= self.n {
                "endpoint out of range"
            } else if u == v {
                "self loop"
            } else if !(w.is_finite() && w > 0.0) {
                "weight must be finite and positive"
            } else {
                continue;
            };
            return Err(Error::InvalidEdge { index, u, v, w, reason });
        }
        Ok(())
    }
}

/// Generator families for the verification corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Path { n: usize },
    Cycle { n: usize },
    Grid { rows: usize, cols: usize },
    RandomGeometric { n: usize, seed: u64 },
    RandomRegular { n: usize, degree: usize, seed: u64 },
}

impl GraphKind {
    /// Short stable name, e.g. `grid_8x8` or `regular_128_d3_s1`.
    pub fn name(&self) -> String {
        match *self {
            GraphKind::Path { n } => format!("path_{n}"),
            GraphKind::Cycle { n } => format!("cycle_{n}"),
            GraphKind::Grid { rows, cols } => format!("grid_{rows}x{cols}"),
            GraphKind::RandomGeometric { n, seed } => format!("geometric_{n}_s{seed}"),
            GraphKind::RandomRegular { n, degree, seed } => {
                format!("regular_{n}_d{degree}_s{seed}")
            }
        }
    }
}

pub fn generate(kind: &GraphKind) -> Result<GraphInput> {
    match *kind {
        GraphKind::Path { n } => {
            positive(n, "path length")?;
            let edges = (1..n).map(|i| (i - 1, i, 1.0)).collect();
            Ok(GraphInput { n, edges })
        }
        GraphKind::Cycle { n } => {
            positive(n, "cycle length")?;
            let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
            if n >= 3 {
                edges.push((n - 1, 0, 1.0));
            }
            Ok(GraphInput { n, edges })
        }
        GraphKind::Grid { rows, cols } => {
            positive(rows, "grid rows")?;
            positive(cols, "grid cols")?;
            let id = |r: usize, c: usize| r * cols + c;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1), 1.0));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c), 1.0));
                    }
                }
            }
            Ok(GraphInput { n: rows * cols, edges })
        }
        GraphKind::RandomGeometric { n, seed } => random_geometric(n, seed),
        GraphKind::RandomRegular { n, degree, seed } => random_regular(n, degree, seed),
    }
}

fn positive(v: usize, what: &str) -> Result<()> {
    if v == 0 {
        Err(Error::InvalidParameter(format!("{what} must be at least 1")))
    } else {
        Ok(())
    }
}

/// Connectivity threshold `sqrt(ln n / (pi n))` for `n` uniform points in the unit square.
pub fn geometric_connectivity_radius(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let n = n as f64;
    (n.ln() / (PI * n)).sqrt()
}

fn random_geometric(n: usize, seed: u64) -> Result<GraphInput> {
    positive(n, "point count")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    let radius = 2.0 * geometric_connectivity_radius(n);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
            if w <= radius && w > 0.0 {
                edges.push((i, j, w));
            }
        }
    }
    Ok(GraphInput { n, edges })
}

fn random_regular(n: usize, degree: usize, seed: u64) -> Result<GraphInput> {
    positive(n, "vertex count")?;
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("n * d must be even, got n = {n}, d = {degree}")));
    }
    if degree >= n {
        return Err(Error::InvalidParameter(format!("degree {degree} needs at least {} vertices", degree + 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REGULAR_RESTARTS {
        if let Some(edges) = try_pairing(n, degree, &mut rng) {
            let edges = edges.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
            return Ok(GraphInput { n, edges });
        }
    }
    Err(Error::GenerationFailure(format!(
        "no simple {degree}-regular graph on {n} vertices after {REGULAR_RESTARTS} restarts"
    )))
}

/// One attempt of the incremental pairing model: repeatedly match two
/// random free stubs that form a new simple edge; give up when stuck.
fn try_pairing(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    stubs.shuffle(rng);
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::with_capacity(n * degree / 2);
    while !stubs.is_empty() {
        let mut placed = false;
        for _ in 0..(4 * stubs.len()) {
            let a = rng.gen_range(0..stubs.len());
            let b = rng.gen_range(0..stubs.len());
            if a == b {
                continue;
            }
            let (u, v) = (stubs[a].min(stubs[b]), stubs[a].max(stubs[b]));
            if u == v || seen.contains(&(u, v)) {
                continue;
            }
            seen.insert((u, v));
            edges.push((u, v));
            let (hi, lo) = (a.max(b), a.min(b));
            stubs.swap_remove(hi);
            stubs.swap_remove(lo);
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }
    edges.sort_unstable();
    Some(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;

    #[test]
    fn small_shapes() {
        let p = generate(&GraphKind::Path { n: 3 }).unwrap();
        assert_eq!(p.edges, vec![(0, 1, 1.0), (1, 2, 1.0)]);
        let g = generate(&GraphKind::Grid { rows: 2, cols: 2 }).unwrap();
        assert_eq!(g.n, 4);
        assert_eq!(g.edges.len(), 4);
        let c = MetricSpace::from_weighted_graph(&generate(&GraphKind::Cycle { n: 4 }).unwrap()).unwrap();
        assert_eq!(c.dist(0, 2), 2.0);
        assert_eq!(generate(&GraphKind::Cycle { n: 2 }).unwrap().edges.len(), 1);
        assert!(generate(&GraphKind::Path { n: 0 }).is_err());
    }

    #[test]
    fn regular_graph_is_simple_and_regular() {
        let kind = GraphKind::RandomRegular { n: 128, degree: 3, seed: 1 };
        let g = generate(&kind).unwrap();
        assert_eq!(g.edges.len(), 192);
        let mut deg = vec![0; 128];
        let mut seen = HashSet::new();
        for &(u, v, _) in &g.edges {
            assert_ne!(u, v);
            assert!(seen.insert((u, v)));
            deg[u] += 1;
            deg[v] += 1;
        }
        assert!(deg.iter().all(|&d| d == 3));
        assert_eq!(g, generate(&kind).unwrap());
        assert!(generate(&GraphKind::RandomRegular { n: 5, degree: 3, seed: 0 }).is_err());
    }

    #[test]
    fn geometric_graph_is_deterministic_and_connected() {
        let kind = GraphKind::RandomGeometric { n: 128, seed: 1 };
        let g = generate(&kind).unwrap();
        assert_eq!(g, generate(&kind).unwrap());
        let radius = 2.0 * geometric_connectivity_radius(128);
        assert!(g.edges.iter().all(|&(_, _, w)| w > 0.0 && w <= radius));
        assert!(MetricSpace::from_weighted_graph(&g).is_ok());
    }

    #[test]
    fn invalid_edges() {
        let g = GraphInput { n: 2, edges: vec![(0, 0, 1.0)] };
        assert!(matches!(g.validate(), Err(Error::InvalidEdge { reason: "self loop", .. })));
        let g = GraphInput { n: 2, edges: vec![(0, 1, 0.0)] };
        assert!(g.validate().is_err());
        let g = GraphInput { n: 2, edges: vec![(0, 2, 1.0)] };
        assert!(g.validate().is_err());
    }
}
