//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use random_rates::graph::{generate, GraphInput, GraphKind};
use random_rates::partition::{
    assign, check_proximity, check_retraction, critical_threshold, threshold_gap, LIPSCHITZ_FACTOR,
};
use random_rates::texp::{ks_critical_001, ks_distance};
use random_rates::verify::{
    estimate_ldd_beta, estimate_padding_many, estimate_separation, exact_separation_small, hoeffding_radius,
    select_pairs, PaddingQuery, PairSelection, STRETCH_GATE,
};
use random_rates::{
    check_diameter, draw_rates, greedy_net, random_partition, Error, LddAlgo, MetricSpace, RatesLdd, RngStream, TExp,
    TerminalSet,
};

const TRIALS: u64 = 10_000;
const CONF: f64 = 1e-3;
const SEED: u64 = 20_240_601;
/// Net radii as fractions of the diameter.
const NET_FRACTIONS: [f64; 3] = [0.125, 0.25, 0.375];
/// Median of `alpha_hat / ln K` over every pair measured in A4, from the pilot
/// run with this seed (max was 2.438).
const PILOT_ALPHA_MEDIAN: f64 = 0.101138;
const REGRESSION_FACTOR: f64 = 1.5;
/// Relative slack for floating-point ties in the threshold checks.
const TIE: f64 = 1e-12;

struct Metric {
    name: String,
    m: MetricSpace,
}

fn corpus() -> Vec<Metric> {
    [
        GraphKind::Path { n: 100 },
        GraphKind::Cycle { n: 64 },
        GraphKind::Grid { rows: 8, cols: 8 },
        GraphKind::RandomGeometric { n: 128, seed: 1 },
        GraphKind::RandomRegular { n: 128, degree: 3, seed: 1 },
    ]
    .into_iter()
    .map(|kind| Metric { name: kind.name(), m: MetricSpace::from_weighted_graph(&generate(&kind).unwrap()).unwrap() })
    .collect()
}

fn nets(m: &MetricSpace) -> Vec<(f64, TerminalSet)> {
    NET_FRACTIONS
        .iter()
        .map(|f| {
            let eps = f * m.diameter();
            (eps, greedy_net(m, eps).unwrap())
        })
        .collect()
}

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn a1_retraction_proximity(corpus: &[Metric]) -> Outcome {
    let mut worst = (0usize, 0usize);
    for c in corpus {
        for (_, t) in nets(&c.m) {
            let (retract, prox) = (0..TRIALS)
                .into_par_iter()
                .map(|i| {
                    let pm = random_partition(&c.m, &t, &mut RngStream::new(SEED, i)).unwrap();
                    (check_retraction(&t, &pm).len(), check_proximity(&c.m, &t, &pm, 2.0).len())
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            worst.0 += retract;
            worst.1 += prox;
        }
    }
    Outcome {
        id: "A1",
        pass: worst == (0, 0),
        detail: format!(
            "retraction/2-proximity: {} + {} violations over {} partitions",
            worst.0,
            worst.1,
            corpus.len() as u64 * NET_FRACTIONS.len() as u64 * TRIALS
        ),
    }
}

fn a2_ldd_diameter(corpus: &[Metric]) -> Outcome {
    let mut bad = 0usize;
    let mut runs = 0u64;
    for c in corpus {
        for delta in [c.m.diameter() / 2.0, c.m.diameter() / 4.0] {
            let ldd = RatesLdd::new(&c.m, delta).unwrap();
            bad += (0..TRIALS)
                .into_par_iter()
                .map(|i| {
                    let cl = ldd.sample(&c.m, &mut RngStream::new(SEED, i)).unwrap();
                    usize::from(!check_diameter(&c.m, &cl).violations.is_empty())
                })
                .sum::<usize>();
            runs += TRIALS;
        }
    }
    Outcome {
        id: "A2",
        pass: bad == 0,
        detail: format!("LDD diameter: {bad} decompositions with an oversized cluster out of {runs}"),
    }
}

fn a3_texp() -> Outcome {
    let n = 100_000;
    let crit = ks_critical_001(n);
    let mut ks_worst = 0.0f64;
    for (lambda, gamma) in [(3f64.ln(), 1.0), (20f64.ln(), 1.0), (2.0, 1.0)] {
        let law = TExp::new(lambda, gamma).unwrap();
        let mut rng = RngStream::new(SEED, 0);
        let mut xs: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        ks_worst = ks_worst.max(ks_distance(&mut xs, |x| law.cdf(x)));
    }

    let mut checked = 0usize;
    let mut broken = 0usize;
    for li in 1..=10 {
        for gi in 1..=10 {
            let (lambda, gamma) = (0.5 * li as f64, 0.3 * gi as f64);
            if lambda * gamma <= 1.0 {
                continue;
            }
            let law = TExp::new(lambda, gamma).unwrap();
            broken += usize::from(law.z_norm() > 2.0);
            for ai in 0..10 {
                let a = gamma * ai as f64 / 10.0;
                for bi in 0..=4 {
                    let b = (gamma - a) * bi as f64 / 4.0;
                    let p = law.interval_prob(a, b).unwrap();
                    let (loose, linear) = law.interval_prob_bounds(a, b);
                    let q = law.cond_prob(a, b).unwrap();
                    broken += usize::from(!(p <= loose && loose <= linear));
                    broken += usize::from(q > law.cond_prob_bound(a, b));
                    checked += 1;
                }
            }
        }
    }
    Outcome {
        id: "A3",
        pass: ks_worst < crit && broken == 0,
        detail: format!(
            "TExp: worst KS {ks_worst:.5} (< {crit:.5}); {broken} bound violations over {checked} (lambda, gamma, a, b) points"
        ),
    }
}

fn a4_separation(corpus: &[Metric]) -> (Outcome, f64) {
    let mut failures = 0usize;
    let mut measured = 0usize;
    let mut worst = 0.0f64;
    let mut normalized = Vec::new();
    let mut vacuous = Vec::new();
    for c in corpus.iter().filter(|c| c.m.len() <= 200) {
        let pairs = select_pairs(&c.m, PairSelection::Auto, SEED);
        for (eps, t) in nets(&c.m) {
            // A net that keeps every point leaves no pair with a finite ratio.
            let r = match estimate_separation(&c.m, &t, &pairs, TRIALS, CONF, SEED) {
                Err(Error::NoValidPairs) => {
                    vacuous.push(format!("{}@{eps:.2}", c.name));
                    continue;
                }
                r => r.unwrap(),
            };
            failures += r.bound_failures(STRETCH_GATE).len();
            measured += r.pairs.len();
            let alphas = r.normalized_alphas();
            worst = worst.max(alphas.last().copied().unwrap_or(0.0));
            normalized.extend(alphas);
        }
    }
    normalized.sort_by(f64::total_cmp);
    let median = random_rates::verify::quantile(&normalized, 0.5).unwrap();
    let gate = REGRESSION_FACTOR * PILOT_ALPHA_MEDIAN;
    let regression_ok = median <= gate;
    (
        Outcome {
            id: "A4",
            pass: failures == 0 && regression_ok,
            detail: format!(
                "separation: {failures}/{measured} pairs above {STRETCH_GATE} ln K d/min A; \
                 alpha/lnK max {worst:.3}, median {median:.6} (regression gate {gate:.6}); \
                 all-terminal nets skipped: [{}]",
                vacuous.join(", ")
            ),
        },
        median,
    )
}

fn a5_padding(corpus: &[Metric]) -> Outcome {
    let mut failures = 0usize;
    let mut measured = 0usize;
    let mut worst = 0.0f64;
    for c in corpus {
        let t = greedy_net(&c.m, 0.1 * c.m.diameter()).unwrap();
        let mut candidates: Vec<usize> = (0..c.m.len()).filter(|&u| t.distance_to_set(u) > 0.0).collect();
        let mut rng = RngStream::new(SEED, 1);
        let keep = candidates.len().min(20);
        let centers: Vec<usize> =
            rand::seq::index::sample(&mut rng, candidates.len(), keep).into_iter().map(|i| candidates[i]).collect();
        candidates.clear();
        let queries: Vec<PaddingQuery> = centers
            .iter()
            .map(|&u| {
                let a = t.distance_to_set(u);
                PaddingQuery { center: u, radii: vec![a / 16.0, a / 8.0, a / 4.0] }
            })
            .collect();
        for r in estimate_padding_many(&c.m, &t, &queries, TRIALS, CONF, SEED).unwrap() {
            failures += usize::from(!r.within_bound(STRETCH_GATE));
            measured += 1;
            worst = worst.max(r.normalized.unwrap_or(0.0) / r.ln_k);
        }
    }
    Outcome {
        id: "A5",
        pass: failures == 0,
        detail: format!(
            "padding: {failures}/{measured} (center, radius) cases above {STRETCH_GATE} ln K r/A_u; max p A_u/(r ln K) {worst:.3}"
        ),
    }
}

/// Random connected instance with `4..=6` points and `2..=3` terminals.
fn small_instance(rng: &mut RngStream) -> (MetricSpace, TerminalSet, (usize, usize)) {
    let n = rng.gen_range(4..=6);
    let mut edges: Vec<(usize, usize, f64)> =
        (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(0.5..4.0))).collect();
    for _ in 0..rng.gen_range(0..n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v, rng.gen_range(0.5..4.0)));
        }
    }
    let m = MetricSpace::from_weighted_graph(&GraphInput { n, edges }).unwrap();
    let k = rng.gen_range(2..=3);
    let ts: Vec<usize> = rand::seq::index::sample(rng, n, k).into_vec();
    let t = TerminalSet::new(&m, &ts).unwrap();
    let free: Vec<usize> = (0..n).filter(|&x| !t.is_terminal(x)).collect();
    let u = free[rng.gen_range(0..free.len())];
    let mut v = rng.gen_range(0..n - 1);
    if v >= u {
        v += 1;
    }
    (m, t, (u, v))
}

fn a6_oracle() -> Outcome {
    let eps = hoeffding_radius(TRIALS, CONF);
    let mut rng = RngStream::new(SEED, 2);
    let instances: Vec<_> = (0..50).map(|_| small_instance(&mut rng)).collect();
    let results: Vec<(f64, f64, f64)> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, (m, t, (u, v)))| {
            let seed = SEED + idx as u64;
            let hits = (0..TRIALS)
                .filter(|&i| {
                    let pm = random_partition(m, t, &mut RngStream::new(seed, i)).unwrap();
                    pm.get(*u) != pm.get(*v)
                })
                .count();
            let exact = exact_separation_small(m, t, (*u, *v), 2000).unwrap();
            (hits as f64 / TRIALS as f64, exact.value, exact.error_bound)
        })
        .collect();
    let agree = results.iter().filter(|(p, e, err)| (p - e).abs() <= 3.0 * eps + err).count();
    let worst = results.iter().map(|(p, e, _)| (p - e).abs()).fold(0.0, f64::max);
    let max_err = results.iter().map(|r| r.2).fold(0.0, f64::max);
    Outcome {
        id: "A6",
        pass: agree >= 49,
        detail: format!(
            "oracle: {agree}/50 instances within 3 eps_N + oracle error; max |MC - exact| {worst:.4}, max oracle error {max_err:.2e}"
        ),
    }
}

/// Pilot: median beta 5.333 on both grids, ratio 1.00.
const A7_DELTA: f64 = 16.0;
const A7_RATIO_GATE: f64 = 2.0;

fn a7_doubling() -> (Outcome, f64, f64) {
    let medians: Vec<f64> = [8, 32]
        .into_iter()
        .map(|side| {
            let m = MetricSpace::from_weighted_graph(&generate(&GraphKind::Grid { rows: side, cols: side }).unwrap())
                .unwrap();
            let pairs: Vec<(usize, usize)> = random_rates::verify::all_pairs(m.len())
                .into_iter()
                .filter(|&(u, v)| m.dist(u, v) <= A7_DELTA / 4.0)
                .collect();
            estimate_ldd_beta(&m, A7_DELTA, &pairs, TRIALS, CONF, SEED, LddAlgo::Rates).unwrap().beta_median
        })
        .collect();
    let ratio = medians[1] / medians[0];
    (
        Outcome {
            id: "A7",
            pass: ratio <= A7_RATIO_GATE,
            detail: format!(
                "doubling trend: median beta 8x8 {:.3}, 32x32 {:.3}, ratio {ratio:.3} (<= {A7_RATIO_GATE})",
                medians[0], medians[1]
            ),
        },
        medians[0],
        medians[1],
    )
}

fn a8_white_box(corpus: &[Metric]) -> Outcome {
    const CONFIGS: u64 = 10_000;
    let (gap, capture, threshold) = (0..CONFIGS)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(SEED, 1_000_000 + i);
            let c = &corpus[i as usize % corpus.len()];
            let m = &c.m;
            let n = m.len();
            // Terminal set: a net at a random scale, or a random subset.
            let t = if rng.gen_bool(0.5) {
                greedy_net(m, rng.gen_range(0.03..0.3) * m.diameter()).unwrap()
            } else {
                let k = rng.gen_range(2..=12.min(n));
                TerminalSet::new(m, &rand::seq::index::sample(&mut rng, n, k).into_vec()).unwrap()
            };
            if t.len() < 2 {
                return (0, 0, 0);
            }
            let rates = draw_rates(&t, t.k_param(), &mut rng).unwrap();
            let f = assign(m, &t, &rates).unwrap();

            // Threshold characterization at a random point and terminal.
            let x = rng.gen_range(0..n);
            let pos = rng.gen_range(0..t.len());
            let star = t.terminals()[pos];
            let theta = critical_threshold(m, &t, &rates, x, star).unwrap();
            let rho = rates.rho()[pos];
            let threshold_bad = usize::from(
                (rho > theta * (1.0 + TIE) && f.get(x) != star) || (rho < theta * (1.0 - TIE) && f.get(x) == star),
            );

            // Lipschitz gap and capture-all around a point off the terminal set.
            let free: Vec<usize> = (0..n).filter(|&u| t.distance_to_set(u) > 0.0).collect();
            if free.is_empty() {
                return (0, 0, threshold_bad);
            }
            let u = free[rng.gen_range(0..free.len())];
            let a_u = t.distance_to_set(u);
            let close: Vec<usize> = (0..t.len()).filter(|&p| m.dist(u, t.terminals()[p]) <= 2.0 * a_u).collect();
            let pos = close[rng.gen_range(0..close.len())];
            let star = t.terminals()[pos];
            let r = a_u / 4.0 * rng.gen_range(0.0..=1.0);
            let ball = m.ball(u, r).unwrap();
            let gap_bad = ball
                .iter()
                .filter(|&&v| {
                    let g = threshold_gap(m, &t, &rates, u, v, star).unwrap();
                    g > LIPSCHITZ_FACTOR * m.dist(u, v) / a_u * (1.0 + TIE) + TIE
                })
                .count();

            let theta_u = critical_threshold(m, &t, &rates, u, star).unwrap();
            let boosted = rates.with_rate(pos, theta_u + LIPSCHITZ_FACTOR * r / a_u).unwrap();
            let g = assign(m, &t, &boosted).unwrap();
            let capture_bad = ball
                .iter()
                .filter(|&&v| {
                    g.get(v) != star && {
                        // A lower-index terminal may win an exact tie.
                        let theta_v = critical_threshold(m, &t, &boosted, v, star).unwrap();
                        boosted.rho()[pos] > theta_v * (1.0 + TIE)
                    }
                })
                .count();
            (gap_bad, capture_bad, threshold_bad)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Outcome {
        id: "A8",
        pass: (gap, capture, threshold) == (0, 0, 0),
        detail: format!(
            "white-box: {gap} Lipschitz-gap, {capture} capture-all, {threshold} threshold violations over {CONFIGS} configurations"
        ),
    }
}

fn main() {
    let start = Instant::now();
    let corpus = corpus();
    let mut outcomes = Vec::new();
    outcomes.push(a1_retraction_proximity(&corpus));
    outcomes.push(a2_ldd_diameter(&corpus));
    outcomes.push(a3_texp());
    let (a4, _) = a4_separation(&corpus);
    outcomes.push(a4);
    outcomes.push(a5_padding(&corpus));
    outcomes.push(a6_oracle());
    let (a7, _, _) = a7_doubling();
    outcomes.push(a7);
    outcomes.push(a8_white_box(&corpus));

    println!();
    for o in &outcomes {
        println!("{} {} {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        outcomes.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
