//! Random-rate terminal partitioning.
//!
//! Every terminal draws a rate `rho_t = 1 + nu_t` with `nu_t ~ TExp(ln K, 1)`
//! and each point goes to the terminal minimising `d(x, t) / rho_t`: a
//! multiplicatively weighted Voronoi assignment. Ties go to the lowest
//! terminal index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, TerminalSet};
use crate::rng::RngStream;
use crate::texp::TExp;

/// Constant in the Lipschitz bound on critical thresholds: a move of `r`
/// shifts any threshold by at most `12 r / A_u`.
pub const LIPSCHITZ_FACTOR: f64 = 12.0;

/// Per-terminal rates, indexed by terminal position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateAssignment {
    rho: Vec<f64>,
    #[serde(skip)]
    bounded: bool,
}

impl RateAssignment {
    /// Wraps arbitrary finite positive rates.
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidParameter(format!("rate {bad} is not finite and positive")));
        }
        let (lo, hi) = rho.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        Ok(RateAssignment { bounded: hi <= 2.0 * lo, rho })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Whether every rate lies in `[1, 2]`.
    pub fn in_unit_band(&self) -> bool {
        self.rho.iter().all(|r| (1.0..=2.0).contains(r))
    }

    /// Copy with the rate at terminal position `pos` replaced.
    pub fn with_rate(&self, pos: usize, value: f64) -> Result<Self> {
        let mut rho = self.rho.clone();
        *rho.get_mut(pos).ok_or(Error::IndexOutOfRange { index: pos, n: self.rho.len() })? = value;
        RateAssignment::new(rho)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        RateAssignment::new(self.rho.iter().map(|r| r * factor).collect())
    }

    fn check_len(&self, terminals: &TerminalSet) -> Result<()> {
        if self.rho.len() != terminals.len() {
            return Err(Error::RateLengthMismatch { expected: terminals.len(), got: self.rho.len() });
        }
        Ok(())
    }
}

/// Where a randomized output came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream: u64,
}

impl From<&RngStream> for Provenance {
    fn from(rng: &RngStream) -> Self {
        Provenance { seed: rng.seed(), stream: rng.stream() }
    }
}

/// A total map from points to terminals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionMap {
    /// `assign[x]` is the terminal (point index) that captures `x`.
    pub assign: Vec<usize>,
    pub rates: Option<RateAssignment>,
    pub k_param: Option<usize>,
    pub provenance: Option<Provenance>,
}

impl PartitionMap {
    /// A map given directly, e.g. to exercise the checkers.
    pub fn from_assignment(assign: Vec<usize>) -> Self {
        PartitionMap { assign, rates: None, k_param: None, provenance: None }
    }

    #[inline]
    pub fn get(&self, x: usize) -> usize {
        self.assign[x]
    }
}

/// The rate distribution `TExp(ln K, 1)`.
pub fn rate_distribution(k_param: usize) -> Result<TExp> {
    if k_param < 3 {
        return Err(Error::InvalidK(k_param));
    }
    TExp::new((k_param as f64).ln(), 1.0)
}

pub fn draw_rates(terminals: &TerminalSet, k_param: usize, rng: &mut RngStream) -> Result<RateAssignment> {
    let dist = rate_distribution(k_param)?;
    let rho = (0..terminals.len()).map(|_| 1.0 + dist.sample(rng)).collect();
    RateAssignment::new(rho)
}

/// Fills `out` with the argmin assignment for the given rates.
///
/// When `max rho <= 2 min rho` only terminals within `2 A_x` can win, so
/// the scan is restricted to those; the result is identical to a full scan.
pub fn assign_into(m: &MetricSpace, terminals: &TerminalSet, rates: &RateAssignment, out: &mut [usize]) -> Result<()> {
    rates.check_len(terminals)?;
    let ts = terminals.terminals();
    let rho = rates.rho();
    for (x, slot) in out.iter_mut().enumerate().take(m.len()) {
        let row = m.row(x);
        let best = if rates.bounded {
            argmin_over(row, ts, rho, terminals.candidates(x).iter().copied())
        } else {
            argmin_over(row, ts, rho, 0..ts.len())
        };
        *slot = ts[best];
    }
    Ok(())
}

#[inline]
fn argmin_over(row: &[f64], ts: &[usize], rho: &[f64], positions: impl Iterator<Item = usize>) -> usize {
    let mut best = usize::MAX;
    let mut best_q = f64::INFINITY;
    for p in positions {
        let q = row[ts[p]] / rho[p];
        // Positions ascend, so a strict comparison keeps the lowest index on ties.
        if q < best_q || best == usize::MAX {
            best = p;
            best_q = q;
        }
    }
    best
}

pub fn assign(m: &MetricSpace, terminals: &TerminalSet, rates: &RateAssignment) -> Result<PartitionMap> {
    let mut out = vec![0; m.len()];
    assign_into(m, terminals, rates, &mut out)?;
    Ok(PartitionMap { assign: out, rates: Some(rates.clone()), k_param: None, provenance: None })
}

/// One draw of the random-rates map: `K`, rates, then assignment.
pub fn random_partition(m: &MetricSpace, terminals: &TerminalSet, rng: &mut RngStream) -> Result<PartitionMap> {
    let provenance = Provenance::from(&*rng);
    let k_param = terminals.k_param();
    let rates = draw_rates(terminals, k_param, rng)?;
    let mut pm = assign(m, terminals, &rates)?;
    pm.k_param = Some(k_param);
    pm.provenance = Some(provenance);
    Ok(pm)
}

/// Points `u` with `d(u, f(u)) > c * A_u`.
pub fn check_proximity(m: &MetricSpace, terminals: &TerminalSet, pm: &PartitionMap, c: f64) -> Vec<usize> {
    (0..m.len()).filter(|&u| m.dist(u, pm.get(u)) > c * terminals.distance_to_set(u)).collect()
}

/// Terminals `t` with `f(t) != t`.
pub fn check_retraction(terminals: &TerminalSet, pm: &PartitionMap) -> Vec<usize> {
    terminals.terminals().iter().copied().filter(|&t| pm.get(t) != t).collect()
}

/// Critical threshold of `t_star` at `u`: `d(u, t*) * max_{t != t*} rho_t / d(u, t)`.
///
/// `t_star` captures `u` whenever its rate exceeds this value. If `u` sits
/// on a competing terminal the threshold is `+inf`.
pub fn critical_threshold(
    m: &MetricSpace,
    terminals: &TerminalSet,
    rates: &RateAssignment,
    u: usize,
    t_star: usize,
) -> Result<f64> {
    m.check_index(u)?;
    rates.check_len(terminals)?;
    if terminals.len() < 2 {
        return Err(Error::SingleTerminal);
    }
    let star = terminals.position(t_star).ok_or(Error::NotATerminal(t_star))?;
    let row = m.row(u);
    let mut best = 0.0f64;
    for (p, &t) in terminals.terminals().iter().enumerate() {
        if p == star {
            continue;
        }
        if row[t] == 0.0 {
            return Ok(f64::INFINITY);
        }
        best = best.max(rates.rho()[p] / row[t]);
    }
    Ok(row[t_star] * best)
}

/// Threshold gap `theta_t(v) - theta_t(u)`, defined when `A_u > 0`,
/// `d(u, v) <= A_u / 4`, `d(u, t) <= 2 A_u` and every competing rate lies in
/// `[1, 2]`. Under those conditions it is at most `12 d(u, v) / A_u`.
pub fn threshold_gap(
    m: &MetricSpace,
    terminals: &TerminalSet,
    rates: &RateAssignment,
    u: usize,
    v: usize,
    t: usize,
) -> Result<f64> {
    m.check_index(u)?;
    m.check_index(v)?;
    rates.check_len(terminals)?;
    let pos = terminals.position(t).ok_or(Error::NotATerminal(t))?;
    let a_u = terminals.distance_to_set(u);
    let unmet = |msg: String| Err(Error::PreconditionUnmet(msg));
    if a_u <= 0.0 {
        return unmet(format!("A_{u} = 0"));
    }
    if m.dist(u, v) > a_u / 4.0 {
        return unmet(format!("d({u},{v}) = {} > A_u/4 = {}", m.dist(u, v), a_u / 4.0));
    }
    if m.dist(u, t) > 2.0 * a_u {
        return unmet(format!("d({u},{t}) = {} > 2 A_u = {}", m.dist(u, t), 2.0 * a_u));
    }
    if let Some((_, r)) = rates.rho().iter().enumerate().find(|&(p, r)| p != pos && !(1.0..=2.0).contains(r)) {
        return unmet(format!("competing rate {r} outside [1, 2]"));
    }
    let tv = critical_threshold(m, terminals, rates, v, t)?;
    let tu = critical_threshold(m, terminals, rates, u, t)?;
    Ok(tv - tu)
}
