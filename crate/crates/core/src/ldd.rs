//! Low-diameter decompositions.
//!
//! [`RatesLdd`] takes a `delta/10`-net as the terminal set and clusters the
//! points by their random-rates terminal. [`mpx_decompose`] is the additive
//! shift baseline: each point draws `X_u ~ Exp(ln n / delta)` and every `v`
//! joins the center minimising `d(u, v) - X_u`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{greedy_net, MetricSpace, TerminalSet};
use crate::partition::{random_partition, Provenance};
use crate::rng::RngStream;
use crate::texp::exponential_sample;

/// The net radius is `delta / NET_DIVISOR`.
pub const NET_DIVISOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LddAlgo {
    Rates,
    Mpx,
}

impl LddAlgo {
    pub fn as_str(&self) -> &'static str {
        match self {
            LddAlgo::Rates => "rates",
            LddAlgo::Mpx => "mpx",
        }
    }
}

/// A partition of the points into nonempty clusters, each labelled by a center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    pub delta: f64,
    /// Cluster id per point.
    pub cluster_of: Vec<usize>,
    /// Center point per cluster id, increasing.
    pub centers: Vec<usize>,
    pub provenance: Option<Provenance>,
}

impl Clustering {
    /// Groups points by `center_of[x]`. Cluster ids follow increasing center index.
    pub fn from_centers(delta: f64, center_of: &[usize], provenance: Option<Provenance>) -> Self {
        let mut centers = center_of.to_vec();
        centers.sort_unstable();
        centers.dedup();
        let n = center_of.iter().copied().max().map_or(0, |c| c + 1);
        let mut id = vec![usize::MAX; n];
        for (i, &c) in centers.iter().enumerate() {
            id[c] = i;
        }
        let cluster_of = center_of.iter().map(|&c| id[c]).collect();
        Clustering { delta, cluster_of, centers, provenance }
    }

    pub fn cluster_count(&self) -> usize {
        self.centers.len()
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centers.len()];
        for (x, &c) in self.cluster_of.iter().enumerate() {
            out[c].push(x);
        }
        out
    }

    #[inline]
    pub fn center_of(&self, x: usize) -> usize {
        self.centers[self.cluster_of[x]]
    }

    #[inline]
    pub fn same_cluster(&self, x: usize, y: usize) -> bool {
        self.cluster_of[x] == self.cluster_of[y]
    }
}

/// Random-rates LDD with the net prepared once for repeated sampling.
#[derive(Debug, Clone)]
pub struct RatesLdd {
    delta: f64,
    net: TerminalSet,
}

impl RatesLdd {
    pub fn new(m: &MetricSpace, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        let net = greedy_net(m, delta / NET_DIVISOR)?;
        Ok(RatesLdd { delta, net })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn net(&self) -> &TerminalSet {
        &self.net
    }

    pub fn sample(&self, m: &MetricSpace, rng: &mut RngStream) -> Result<Clustering> {
        let pm = random_partition(m, &self.net, rng)?;
        Ok(Clustering::from_centers(self.delta, &pm.assign, pm.provenance))
    }
}

pub fn random_rates_ldd(m: &MetricSpace, delta: f64, rng: &mut RngStream) -> Result<Clustering> {
    RatesLdd::new(m, delta)?.sample(m, rng)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta must be finite and positive, got {delta}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiameterReport {
    pub max_diameter: f64,
    /// Same-cluster pairs `(x, y)`, `x < y`, farther apart than `delta`.
    pub violations: Vec<(usize, usize)>,
}

pub fn check_diameter(m: &MetricSpace, c: &Clustering) -> DiameterReport {
    let mut max_diameter = 0.0f64;
    let mut violations = Vec::new();
    for members in c.clusters() {
        for (i, &x) in members.iter().enumerate() {
            let row = m.row(x);
            for &y in &members[i + 1..] {
                let d = row[y];
                max_diameter = max_diameter.max(d);
                if d > c.delta {
                    violations.push((x, y));
                }
            }
        }
    }
    DiameterReport { max_diameter, violations }
}

/// Shifted-Voronoi assignment for given shifts: `v` joins
/// `argmin_u d(u, v) - shift_u`, ties to the lowest index.
pub fn mpx_assign(m: &MetricSpace, delta: f64, shifts: &[f64], provenance: Option<Provenance>) -> Result<Clustering> {
    check_delta(delta)?;
    if shifts.len() != m.len() {
        return Err(Error::InvalidParameter(format!("{} shifts for {} points", shifts.len(), m.len())));
    }
    let n = m.len();
    let center_of: Vec<usize> = (0..n)
        .map(|v| {
            let row = m.row(v);
            let mut best = 0;
            let mut best_q = row[0] - shifts[0];
            for u in 1..n {
                let q = row[u] - shifts[u];
                if q < best_q {
                    best = u;
                    best_q = q;
                }
            }
            best
        })
        .collect();
    Ok(Clustering::from_centers(delta, &center_of, provenance))
}

/// Additive-shift baseline with `X_u ~ Exp(ln n / delta)`.
pub fn mpx_decompose(m: &MetricSpace, delta: f64, rng: &mut RngStream) -> Result<Clustering> {
    check_delta(delta)?;
    let provenance = Some(Provenance::from(&*rng));
    let n = m.len();
    if n == 1 {
        return mpx_assign(m, delta, &[0.0], provenance);
    }
    let rate = (n as f64).ln() / delta;
    let shifts: Vec<f64> = (0..n).map(|_| exponential_sample(rate, rng)).collect();
    mpx_assign(m, delta, &shifts, provenance)
}

/// Either decomposer, prepared for repeated sampling.
#[derive(Debug, Clone)]
pub enum Decomposer {
    Rates(RatesLdd),
    Mpx { delta: f64 },
}

impl Decomposer {
    pub fn new(m: &MetricSpace, delta: f64, algo: LddAlgo) -> Result<Self> {
        match algo {
            LddAlgo::Rates => Ok(Decomposer::Rates(RatesLdd::new(m, delta)?)),
            LddAlgo::Mpx => {
                check_delta(delta)?;
                Ok(Decomposer::Mpx { delta })
            }
        }
    }

    pub fn algo(&self) -> LddAlgo {
        match self {
            Decomposer::Rates(_) => LddAlgo::Rates,
            Decomposer::Mpx { .. } => LddAlgo::Mpx,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            Decomposer::Rates(r) => r.delta(),
            Decomposer::Mpx { delta } => *delta,
        }
    }

    pub fn sample(&self, m: &MetricSpace, rng: &mut RngStream) -> Result<Clustering> {
        match self {
            Decomposer::Rates(r) => r.sample(m, rng),
            Decomposer::Mpx { delta } => mpx_decompose(m, *delta, rng),
        }
    }
}
