//! Which pairs a report measures.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::metric::MetricSpace;
use crate::rng::RngStream;

/// Metrics up to this size are measured on all pairs by default.
pub const AUTO_ALL_PAIRS_MAX_N: usize = 64;
/// Default stratified sample size above [`AUTO_ALL_PAIRS_MAX_N`].
pub const AUTO_SAMPLE_SIZE: usize = 2000;
/// Largest population sorted for stratification; bigger metrics are subsampled first.
const STRATA_POPULATION: usize = 2_000_000;
const STRATA: usize = 10;
/// Stream id reserved for pair sampling, disjoint from trial ids.
const PAIR_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairSelection {
    /// All pairs when `n <= 64`, else a 2000-pair stratified sample.
    Auto,
    All,
    /// Stratified by distance decile (rank deciles).
    Sample(usize),
}

impl std::fmt::Display for PairSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairSelection::Auto => f.write_str("auto"),
            PairSelection::All => f.write_str("all"),
            PairSelection::Sample(n) => write!(f, "sample:{n}"),
        }
    }
}

impl std::str::FromStr for PairSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(PairSelection::Auto),
            "all" => Ok(PairSelection::All),
            _ => s
                .strip_prefix("sample:")
                .and_then(|c| c.parse().ok())
                .map(PairSelection::Sample)
                .ok_or_else(|| format!("expected all | auto | sample:N, got `{s}`")),
        }
    }
}

/// Unordered pairs `(u, v)` with `u < v`, sorted.
pub fn select_pairs(m: &MetricSpace, selection: PairSelection, seed: u64) -> Vec<(usize, usize)> {
    let n = m.len();
    let selection = match selection {
        PairSelection::Auto if n <= AUTO_ALL_PAIRS_MAX_N => PairSelection::All,
        PairSelection::Auto => PairSelection::Sample(AUTO_SAMPLE_SIZE),
        s => s,
    };
    let total = n * n.saturating_sub(1) / 2;
    match selection {
        PairSelection::Sample(count) if count < total => stratified(m, count, seed),
        _ => all_pairs(n),
    }
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect()
}

fn stratified(m: &MetricSpace, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let n = m.len();
    let total = n * (n - 1) / 2;
    let mut rng = RngStream::new(seed, PAIR_STREAM);
    let mut population = if total <= STRATA_POPULATION {
        all_pairs(n)
    } else {
        let mut seen = HashSet::with_capacity(STRATA_POPULATION);
        while seen.len() < STRATA_POPULATION {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                seen.insert((u.min(v), u.max(v)));
            }
        }
        let mut p: Vec<_> = seen.into_iter().collect();
        p.sort_unstable();
        p
    };
    population.sort_by(|a, b| m.dist(a.0, a.1).total_cmp(&m.dist(b.0, b.1)).then(a.cmp(b)));

    let len = population.len();
    let mut picked = Vec::with_capacity(count);
    for s in 0..STRATA {
        let (lo, hi) = (s * len / STRATA, (s + 1) * len / STRATA);
        let quota = count / STRATA + usize::from(s < count % STRATA);
        let size = hi - lo;
        if quota >= size {
            picked.extend_from_slice(&population[lo..hi]);
        } else {
            picked.extend(index::sample(&mut rng, size, quota).into_iter().map(|i| population[lo + i]));
        }
    }
    picked.sort_unstable();
    picked
}
