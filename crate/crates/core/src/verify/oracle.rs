//! Exact separation probability for instances with at most three terminals.
//!
//! The separation indicator is integrated over the rate cube `[1, 2]^k`
//! against the product `TExp(ln K, 1)` law on a `G^k` grid. For each point
//! the set of rates under which it picks a given terminal is an
//! intersection of half-spaces through the origin, hence convex. A box whose
//! corners all agree on both assignments is therefore constant and its
//! exact probability mass is added in one step. Boxes that disagree are
//! bisected down to single grid cells; those cells contribute their
//! midpoint indicator times their mass, and their total mass is the error bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, TerminalSet};
use crate::partition::rate_distribution;

pub const MAX_ORACLE_TERMINALS: usize = 3;
pub const MIN_GRID_RESOLUTION: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub value: f64,
    /// Total mass of grid cells on which the indicator is not resolved.
    pub error_bound: f64,
}

pub fn exact_separation_small(
    m: &MetricSpace,
    terminals: &TerminalSet,
    pair: (usize, usize),
    grid: usize,
) -> Result<OracleEstimate> {
    let (u, v) = pair;
    m.check_index(u)?;
    m.check_index(v)?;
    let k = terminals.len();
    if k > MAX_ORACLE_TERMINALS {
        return Err(Error::TooManyTerminals(k));
    }
    if grid < MIN_GRID_RESOLUTION {
        return Err(Error::InvalidParameter(format!("grid resolution {grid} below {MIN_GRID_RESOLUTION}")));
    }
    if k == 1 || u == v {
        return Ok(OracleEstimate { value: 0.0, error_bound: 0.0 });
    }

    let law = rate_distribution(terminals.k_param())?;
    let cum: Vec<f64> = (0..=grid).map(|i| if i == grid { 1.0 } else { law.cdf(i as f64 / grid as f64) }).collect();
    let ts = terminals.terminals();
    let du: Vec<f64> = ts.iter().map(|&t| m.dist(u, t)).collect();
    let dv: Vec<f64> = ts.iter().map(|&t| m.dist(v, t)).collect();

    let mut walk = Walk { k, grid: grid as f64, cum: &cum, du: &du, dv: &dv, value: 0.0, error: 0.0 };
    let lo = [0usize; MAX_ORACLE_TERMINALS];
    let mut hi = [1usize; MAX_ORACLE_TERMINALS];
    hi[..k].fill(grid);
    walk.visit(lo, hi);
    Ok(OracleEstimate { value: walk.value.clamp(0.0, 1.0), error_bound: walk.error })
}

struct Walk<'a> {
    k: usize,
    grid: f64,
    cum: &'a [f64],
    du: &'a [f64],
    dv: &'a [f64],
    value: f64,
    error: f64,
}

type Box3 = [usize; MAX_ORACLE_TERMINALS];

impl Walk<'_> {
    fn labels(&self, rho: &[f64; MAX_ORACLE_TERMINALS]) -> (usize, usize) {
        (argmin(self.du, rho, self.k), argmin(self.dv, rho, self.k))
    }

    fn mass(&self, lo: &Box3, hi: &Box3) -> f64 {
        (0..self.k).map(|j| self.cum[hi[j]] - self.cum[lo[j]]).product()
    }

    fn visit(&mut self, lo: Box3, hi: Box3) {
        let corners = 1usize << self.k;
        let mut first = None;
        let mut constant = true;
        for mask in 0..corners {
            let mut rho = [1.0; MAX_ORACLE_TERMINALS];
            for j in 0..self.k {
                let idx = if mask >> j & 1 == 1 { hi[j] } else { lo[j] };
                rho[j] = 1.0 + idx as f64 / self.grid;
            }
            let lab = self.labels(&rho);
            match first {
                None => first = Some(lab),
                Some(f) if f != lab => {
                    constant = false;
                    break;
                }
                _ => {}
            }
        }
        if constant {
            let (a, b) = first.expect("at least one corner");
            if a != b {
                self.value += self.mass(&lo, &hi);
            }
            return;
        }

        let split = (0..self.k).filter(|&j| hi[j] - lo[j] > 1).max_by_key(|&j| (hi[j] - lo[j], usize::MAX - j));
        match split {
            None => {
                let mut rho = [1.0; MAX_ORACLE_TERMINALS];
                for j in 0..self.k {
                    rho[j] = 1.0 + (lo[j] as f64 + 0.5) / self.grid;
                }
                let (a, b) = self.labels(&rho);
                let mass = self.mass(&lo, &hi);
                if a != b {
                    self.value += mass;
                }
                self.error += mass;
            }
            Some(j) => {
                let mid = (lo[j] + hi[j]) / 2;
                let mut left_hi = hi;
                left_hi[j] = mid;
                let mut right_lo = lo;
                right_lo[j] = mid;
                self.visit(lo, left_hi);
                self.visit(right_lo, hi);
            }
        }
    }
}

#[inline]
fn argmin(d: &[f64], rho: &[f64; MAX_ORACLE_TERMINALS], k: usize) -> usize {
    let mut best = 0;
    let mut best_q = d[0] / rho[0];
    for p in 1..k {
        let q = d[p] / rho[p];
        if q < best_q {
            best = p;
            best_q = q;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{assign, RateAssignment};

    fn table(rows: &[&[f64]]) -> MetricSpace {
        let t: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        MetricSpace::from_distance_matrix(&t, true).unwrap()
    }

    /// Brute-force midpoint rule over every grid cell, weighting by exact cell mass.
    fn brute(m: &MetricSpace, t: &TerminalSet, pair: (usize, usize), grid: usize) -> f64 {
        let law = rate_distribution(t.k_param()).unwrap();
        let cell: Vec<f64> =
            (0..grid).map(|i| law.cdf((i + 1) as f64 / grid as f64) - law.cdf(i as f64 / grid as f64)).collect();
        let k = t.len();
        let mut total = 0.0;
        let cells = grid.pow(k as u32);
        for c in 0..cells {
            let mut idx = c;
            let mut rho = Vec::with_capacity(k);
            let mut mass = 1.0;
            for _ in 0..k {
                let i = idx % grid;
                idx /= grid;
                rho.push(1.0 + (i as f64 + 0.5) / grid as f64);
                mass *= cell[i];
            }
            let pm = assign(m, t, &RateAssignment::new(rho).unwrap()).unwrap();
            if pm.get(pair.0) != pm.get(pair.1) {
                total += mass;
            }
        }
        total
    }

    #[test]
    fn trivial_cases() {
        let m = table(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]]);
        let one = TerminalSet::new(&m, &[0]).unwrap();
        let e = exact_separation_small(&m, &one, (1, 2), 200).unwrap();
        assert_eq!((e.value, e.error_bound), (0.0, 0.0));
        let two = TerminalSet::new(&m, &[0, 2]).unwrap();
        let e = exact_separation_small(&m, &two, (1, 1), 200).unwrap();
        assert_eq!(e.value, 0.0);
        let four = TerminalSet::new(
            &table(&[&[0.0, 1.0, 1.0, 1.0], &[1.0, 0.0, 1.0, 1.0], &[1.0, 1.0, 0.0, 1.0], &[1.0, 1.0, 1.0, 0.0]]),
            &[0, 1, 2, 3],
        )
        .unwrap();
        assert_eq!(exact_separation_small(&m, &four, (0, 1), 200), Err(Error::TooManyTerminals(4)));
        assert!(exact_separation_small(&m, &two, (0, 1), 50).is_err());
    }

    #[test]
    fn scaled_path_pair_always_separated() {
        // Path 0-1-2-3 with edges of length 4, terminals {0, 3}: point 1 always
        // prefers 0 (4/rho_0 <= 8/rho_3) and point 2 always prefers 3.
        let m = table(&[&[0.0, 4.0, 8.0, 12.0], &[4.0, 0.0, 4.0, 8.0], &[8.0, 4.0, 0.0, 4.0], &[12.0, 8.0, 4.0, 0.0]]);
        let t = TerminalSet::new(&m, &[0, 3]).unwrap();
        let e = exact_separation_small(&m, &t, (1, 2), 400).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_terminal_closed_form() {
        // Point x at distance 1 from terminal a and 1.5 from terminal b, and
        // point y = a. Separated iff x goes to b iff rho_b > 1.5 rho_a.
        // Pr = int Pr[rho_b > 1.5 rho_a] over rho_a, by quadrature below.
        let m = table(&[&[0.0, 2.5, 1.0], &[2.5, 0.0, 1.5], &[1.0, 1.5, 0.0]]);
        let t = TerminalSet::new(&m, &[0, 1]).unwrap();
        let law = rate_distribution(t.k_param()).unwrap();
        let steps = 200_000;
        let mut quad = 0.0;
        for i in 0..steps {
            let a = (i as f64 + 0.5) / steps as f64;
            let threshold = 1.5 * (1.0 + a) - 1.0;
            let tail = 1.0 - law.cdf(threshold);
            quad += law.density(a) * tail / steps as f64;
        }
        let e = exact_separation_small(&m, &t, (2, 0), 2000).unwrap();
        assert!((e.value - quad).abs() <= e.error_bound + 1e-6, "{} vs {quad}", e.value);
        assert!(e.error_bound < 0.01);
    }

    #[test]
    fn matches_brute_force_grid() {
        let m = table(&[
            &[0.0, 3.0, 2.0, 2.5, 1.5],
            &[3.0, 0.0, 2.0, 1.0, 2.0],
            &[2.0, 2.0, 0.0, 1.5, 1.0],
            &[2.5, 1.0, 1.5, 0.0, 1.5],
            &[1.5, 2.0, 1.0, 1.5, 0.0],
        ]);
        let t = TerminalSet::new(&m, &[0, 1, 2]).unwrap();
        for pair in [(3, 4), (0, 3), (2, 4)] {
            let e = exact_separation_small(&m, &t, pair, 100).unwrap();
            let b = brute(&m, &t, pair, 100);
            assert!((e.value - b).abs() < 1e-9, "{pair:?}: {} vs {b}", e.value);
        }
    }
}
