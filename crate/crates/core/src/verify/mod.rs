//! Monte Carlo estimators for separation, padding and LDD quality.
//!
//! Trial `i` always draws from stream `i` under the master seed and the
//! per-trial results are combined by counting (and taking maxima), so
//! every report is identical for any thread count.

pub mod oracle;
pub mod pairs;

use std::f64::consts::E;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ldd::{check_diameter, Decomposer, LddAlgo};
use crate::metric::{MetricSpace, TerminalSet};
use crate::partition::{assign_into, draw_rates};
use crate::rng::RngStream;

pub use oracle::{exact_separation_small, OracleEstimate};
pub use pairs::{all_pairs, select_pairs, PairSelection};

/// `24 (1 + e)`: the padding proof gives `Pr[cut] <= 2 (1 + e) delta lambda`
/// with `delta = 12 r / A_u` and `lambda = ln K`.
pub const PROOF_CONSTANT: f64 = 24.0 * (1.0 + E);
/// Gate used on measured stretch and padding ratios (rounded up from [`PROOF_CONSTANT`]).
pub const STRETCH_GATE: f64 = 89.4;
/// Monte Carlo estimates are compared with this many Hoeffding radii of slack.
pub const HOEFFDING_MARGIN: f64 = 3.0;

/// Hoeffding radius `sqrt(ln(2/delta) / (2N))`.
pub fn hoeffding_radius(trials: u64, conf_delta: f64) -> f64 {
    ((2.0 / conf_delta).ln() / (2.0 * trials as f64)).sqrt()
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

fn check_trials(trials: u64, conf_delta: f64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(conf_delta > 0.0 && conf_delta < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence delta {conf_delta} not in (0, 1)")));
    }
    Ok(())
}

/// Commutative per-trial tally: counters plus a running maximum.
#[derive(Debug, Clone)]
struct Tally {
    counts: Vec<u64>,
    max: f64,
}

impl Tally {
    fn new(width: usize) -> Self {
        Tally { counts: vec![0; width], max: 0.0 }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.max = self.max.max(other.max);
        self
    }
}

fn run_trials<S, I, F>(trials: u64, width: usize, scratch: I, step: F) -> Result<Tally>
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(u64, &mut S, &mut Tally) -> Result<()> + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .try_fold(
            || (scratch(), Tally::new(width)),
            |(mut s, mut tally), i| {
                step(i, &mut s, &mut tally)?;
                Ok::<_, Error>((s, tally))
            },
        )
        .map(|r| r.map(|(_, t)| t))
        .try_reduce(|| Tally::new(width), |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStat {
    pub u: usize,
    pub v: usize,
    pub distance: f64,
    pub a_u: f64,
    pub a_v: f64,
    pub separations: u64,
    pub p_hat: f64,
    /// `p_hat * min(A_u, A_v) / d(u, v)`; absent when the bound is vacuous.
    pub alpha_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub seed: u64,
    pub trials: u64,
    pub conf_delta: f64,
    pub eps_n: f64,
    pub k_terminals: usize,
    pub k_param: usize,
    pub ln_k: f64,
    pub pairs: Vec<PairStat>,
    pub ratio_pairs: usize,
    pub alpha_max: f64,
    pub alpha_median: f64,
    pub alpha_p90: f64,
    pub alpha_p99: f64,
    /// Trials in which some terminal was not mapped to itself.
    pub retraction_violations: u64,
    /// Trials in which some point landed farther than `2 A_u` away.
    pub proximity_violations: u64,
}

impl SeparationReport {
    /// Indices of pairs with `p_hat - 3 eps_N > min(1, constant ln K d / min(A_u, A_v))`.
    pub fn bound_failures(&self, constant: f64) -> Vec<usize> {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let min_a = p.a_u.min(p.a_v);
                let bound = if min_a > 0.0 { (constant * self.ln_k * p.distance / min_a).min(1.0) } else { 1.0 };
                p.p_hat - HOEFFDING_MARGIN * self.eps_n > bound
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Ratio statistics divided by `ln K`.
    pub fn normalized_alphas(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pairs.iter().filter_map(|p| p.alpha_hat).map(|a| a / self.ln_k).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Separation frequencies of `pairs` over `trials` random-rates partitions.
pub fn estimate_separation(
    m: &MetricSpace,
    terminals: &TerminalSet,
    pairs: &[(usize, usize)],
    trials: u64,
    conf_delta: f64,
    seed: u64,
) -> Result<SeparationReport> {
    check_trials(trials, conf_delta)?;
    for &(u, v) in pairs {
        m.check_index(u)?;
        m.check_index(v)?;
    }
    let ratio_pairs = pairs
        .iter()
        .filter(|&&(u, v)| m.dist(u, v) > 0.0 && terminals.distance_to_set(u).min(terminals.distance_to_set(v)) > 0.0)
        .count();
    if ratio_pairs == 0 {
        return Err(Error::NoValidPairs);
    }
    let k_param = terminals.k_param();
    let width = pairs.len();
    let tally = run_trials(
        trials,
        width + 2,
        || vec![0usize; m.len()],
        |i, f, tally| {
            let mut rng = RngStream::new(seed, i);
            let rates = draw_rates(terminals, k_param, &mut rng)?;
            assign_into(m, terminals, &rates, f)?;
            for (slot, &(u, v)) in tally.counts.iter_mut().zip(pairs) {
                *slot += u64::from(f[u] != f[v]);
            }
            let retraction = terminals.terminals().iter().any(|&t| f[t] != t);
            let proximity = (0..m.len()).any(|x| m.dist(x, f[x]) > 2.0 * terminals.distance_to_set(x));
            tally.counts[width] += u64::from(retraction);
            tally.counts[width + 1] += u64::from(proximity);
            Ok(())
        },
    )?;

    let stats: Vec<PairStat> = pairs
        .iter()
        .zip(&tally.counts)
        .map(|(&(u, v), &separations)| {
            let distance = m.dist(u, v);
            let (a_u, a_v) = (terminals.distance_to_set(u), terminals.distance_to_set(v));
            let p_hat = separations as f64 / trials as f64;
            let min_a = a_u.min(a_v);
            let alpha_hat = (distance > 0.0 && min_a > 0.0).then(|| p_hat * min_a / distance);
            PairStat { u, v, distance, a_u, a_v, separations, p_hat, alpha_hat }
        })
        .collect();
    let mut alphas: Vec<f64> = stats.iter().filter_map(|p| p.alpha_hat).collect();
    alphas.sort_by(f64::total_cmp);
    let q = |x| quantile(&alphas, x).unwrap_or(0.0);
    Ok(SeparationReport {
        seed,
        trials,
        conf_delta,
        eps_n: hoeffding_radius(trials, conf_delta),
        k_terminals: terminals.len(),
        k_param,
        ln_k: (k_param as f64).ln(),
        ratio_pairs,
        alpha_max: alphas.last().copied().unwrap_or(0.0),
        alpha_median: q(0.5),
        alpha_p90: q(0.9),
        alpha_p99: q(0.99),
        pairs: stats,
        retraction_violations: tally.counts[width],
        proximity_violations: tally.counts[width + 1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaddingReport {
    pub center: usize,
    pub radius: f64,
    pub a_u: f64,
    pub trials: u64,
    pub cuts: u64,
    pub p_hat: f64,
    pub eps_n: f64,
    /// `p_hat * A_u / r`; absent for `r = 0`.
    pub normalized: Option<f64>,
    pub k_param: usize,
    pub ln_k: f64,
}

impl PaddingReport {
    /// `p_hat - 3 eps_N <= constant ln K r / A_u`.
    pub fn within_bound(&self, constant: f64) -> bool {
        self.p_hat - HOEFFDING_MARGIN * self.eps_n <= constant * self.ln_k * self.radius / self.a_u
    }
}

/// One padding query: a center and the radii to test around it.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddingQuery {
    pub center: usize,
    pub radii: Vec<f64>,
}

/// Cut frequencies of `B(u, r)` for each radius, from one shared set of draws.
pub fn estimate_padding(
    m: &MetricSpace,
    terminals: &TerminalSet,
    u: usize,
    radii: &[f64],
    trials: u64,
    conf_delta: f64,
    seed: u64,
) -> Result<Vec<PaddingReport>> {
    estimate_padding_many(m, terminals, &[PaddingQuery { center: u, radii: radii.to_vec() }], trials, conf_delta, seed)
}

/// [`estimate_padding`] for several centers on the same partitions.
pub fn estimate_padding_many(
    m: &MetricSpace,
    terminals: &TerminalSet,
    queries: &[PaddingQuery],
    trials: u64,
    conf_delta: f64,
    seed: u64,
) -> Result<Vec<PaddingReport>> {
    check_trials(trials, conf_delta)?;
    for q in queries {
        m.check_index(q.center)?;
        let a_u = terminals.distance_to_set(q.center);
        for &r in &q.radii {
            if r.is_nan() || r < 0.0 || r > a_u / 4.0 || a_u <= 0.0 {
                return Err(Error::RadiusTooLarge { u: q.center, r, limit: a_u / 4.0 });
            }
        }
    }
    let k_param = terminals.k_param();
    let width: usize = queries.iter().map(|q| q.radii.len()).sum();
    let tally = run_trials(
        trials,
        width,
        || vec![0usize; m.len()],
        |i, f, tally| {
            let mut rng = RngStream::new(seed, i);
            let rates = draw_rates(terminals, k_param, &mut rng)?;
            assign_into(m, terminals, &rates, f)?;
            let mut slot = 0;
            for q in queries {
                let own = f[q.center];
                // Nearest point captured by a different terminal.
                let cut_at = m
                    .row(q.center)
                    .iter()
                    .zip(f.iter())
                    .filter(|&(_, &g)| g != own)
                    .map(|(&d, _)| d)
                    .fold(f64::INFINITY, f64::min);
                for &r in &q.radii {
                    tally.counts[slot] += u64::from(cut_at <= r);
                    slot += 1;
                }
            }
            Ok(())
        },
    )?;

    let eps_n = hoeffding_radius(trials, conf_delta);
    let ln_k = (k_param as f64).ln();
    let mut out = Vec::with_capacity(width);
    let mut counts = tally.counts.into_iter();
    for q in queries {
        let a_u = terminals.distance_to_set(q.center);
        for &radius in &q.radii {
            let cuts = counts.next().unwrap_or(0);
            let p_hat = cuts as f64 / trials as f64;
            out.push(PaddingReport {
                center: q.center,
                radius,
                a_u,
                trials,
                cuts,
                p_hat,
                eps_n,
                normalized: (radius > 0.0).then(|| p_hat * a_u / radius),
                k_param,
                ln_k,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LddPairStat {
    pub u: usize,
    pub v: usize,
    pub distance: f64,
    pub separations: u64,
    pub p_hat: f64,
    /// `p_hat * delta / d(u, v)`.
    pub beta_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LddReport {
    pub seed: u64,
    pub algo: LddAlgo,
    pub delta: f64,
    pub n: usize,
    pub ln_n: f64,
    pub trials: u64,
    pub conf_delta: f64,
    pub eps_n: f64,
    /// Net size and `K` for the rates decomposer.
    pub net_size: Option<usize>,
    pub k_param: Option<usize>,
    pub pairs: Vec<LddPairStat>,
    pub beta_max: f64,
    pub beta_median: f64,
    pub beta_max_over_ln_n: Option<f64>,
    pub beta_median_over_ln_n: Option<f64>,
    pub max_diameter: f64,
    /// Trials producing a cluster wider than `delta`.
    pub diameter_violations: u64,
}

/// Cross-cluster frequencies and `beta_hat = p_hat delta / d` per pair.
pub fn estimate_ldd_beta(
    m: &MetricSpace,
    delta: f64,
    pairs: &[(usize, usize)],
    trials: u64,
    conf_delta: f64,
    seed: u64,
    algo: LddAlgo,
) -> Result<LddReport> {
    check_trials(trials, conf_delta)?;
    for &(u, v) in pairs {
        m.check_index(u)?;
        m.check_index(v)?;
    }
    let pairs: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(u, v)| u != v).collect();
    if pairs.is_empty() {
        return Err(Error::NoValidPairs);
    }
    let decomposer = Decomposer::new(m, delta, algo)?;
    let width = pairs.len();
    let tally = run_trials(
        trials,
        width + 1,
        || (),
        |i, _, tally| {
            let c = decomposer.sample(m, &mut RngStream::new(seed, i))?;
            for (slot, &(u, v)) in tally.counts.iter_mut().zip(&pairs) {
                *slot += u64::from(!c.same_cluster(u, v));
            }
            let report = check_diameter(m, &c);
            tally.counts[width] += u64::from(!report.violations.is_empty());
            tally.max = tally.max.max(report.max_diameter);
            Ok(())
        },
    )?;

    let stats: Vec<LddPairStat> = pairs
        .iter()
        .zip(&tally.counts)
        .map(|(&(u, v), &separations)| {
            let distance = m.dist(u, v);
            let p_hat = separations as f64 / trials as f64;
            LddPairStat { u, v, distance, separations, p_hat, beta_hat: p_hat * delta / distance }
        })
        .collect();
    let mut betas: Vec<f64> = stats.iter().map(|p| p.beta_hat).collect();
    betas.sort_by(f64::total_cmp);
    let n = m.len();
    let ln_n = (n as f64).ln();
    let beta_max = betas.last().copied().unwrap_or(0.0);
    let beta_median = quantile(&betas, 0.5).unwrap_or(0.0);
    let (net_size, k_param) = match &decomposer {
        Decomposer::Rates(r) => (Some(r.net().len()), Some(r.net().k_param())),
        Decomposer::Mpx { .. } => (None, None),
    };
    Ok(LddReport {
        seed,
        algo,
        delta,
        n,
        ln_n,
        trials,
        conf_delta,
        eps_n: hoeffding_radius(trials, conf_delta),
        net_size,
        k_param,
        pairs: stats,
        beta_max,
        beta_median,
        beta_max_over_ln_n: (ln_n > 0.0).then(|| beta_max / ln_n),
        beta_median_over_ln_n: (ln_n > 0.0).then(|| beta_median / ln_n),
        max_diameter: tally.max,
        diameter_violations: tally.counts[width],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StretchSummary {
    /// `max alpha_hat / ln K` over all measured pairs.
    pub separation_constant: f64,
    pub separation_median: f64,
    /// `max (p_hat A_u / r) / ln K` over all padding reports.
    pub padding_constant: f64,
}

/// Empirical constants in front of `ln K` for the separation and padding bounds.
pub fn fit_stretch_constant(separation: &[SeparationReport], padding: &[PaddingReport]) -> Result<StretchSummary> {
    if separation.is_empty() && padding.is_empty() {
        return Err(Error::InvalidParameter("no reports to summarise".into()));
    }
    let mut seps: Vec<f64> = separation.iter().flat_map(|r| r.normalized_alphas()).collect();
    seps.sort_by(f64::total_cmp);
    let padding_constant = padding.iter().filter_map(|r| r.normalized.map(|x| x / r.ln_k)).fold(0.0, f64::max);
    Ok(StretchSummary {
        separation_constant: seps.last().copied().unwrap_or(0.0),
        separation_median: quantile(&seps, 0.5).unwrap_or(0.0),
        padding_constant,
    })
}
