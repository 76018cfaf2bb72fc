use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use random_rates::graph::{generate, GraphKind};
use random_rates::io::{metric_from_text, parse_terminals, write_edge_list};
use random_rates::partition::{check_proximity, check_retraction};
use random_rates::texp::{ks_critical_001, ks_distance};
use random_rates::verify::{
    estimate_ldd_beta, estimate_padding_many, estimate_separation, select_pairs, PaddingQuery, STRETCH_GATE,
};
use random_rates::{
    check_diameter, greedy_net, random_partition, Decomposer, LddAlgo, MetricSpace, RngStream, TExp, TerminalSet,
};

use crate::output::{compact, csv_table, emit, pretty, Input, Meta};
use crate::{
    Format, GenArgs, Kind, LddArgs, NetArgs, PaddingArgs, PartitionArgs, SampleArgs, SeparationArgs, Status,
    TerminalSource, Trials, VerifyLddArgs,
};

/// Centers picked by default for `verify-padding`.
const DEFAULT_CENTERS: usize = 20;

pub fn is_csv(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn load_metric(path: &Path) -> Result<(MetricSpace, Input)> {
    let input = Input::read(path)?;
    let m = metric_from_text(&input.text, is_csv(path)).with_context(|| format!("loading {}", path.display()))?;
    Ok((m, input))
}

fn load_terminals(m: &MetricSpace, source: &TerminalSource) -> Result<(TerminalSet, Value)> {
    match source {
        TerminalSource::Net(eps) => Ok((greedy_net(m, *eps)?, json!({ "net": eps }))),
        TerminalSource::File(path) => {
            let input = Input::read(path)?;
            let ts = parse_terminals(&input.text).with_context(|| format!("parsing {}", path.display()))?;
            Ok((TerminalSet::new(m, &ts)?, input.describe()))
        }
    }
}

fn trials_config(t: &Trials) -> Value {
    json!({
        "trials": t.trials,
        "conf_delta": t.conf_delta,
        "pairs": t.pairs.to_string(),
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn gen(a: &GenArgs) -> Result<Status> {
    let need_n = || a.n.context("--n is required for this kind");
    let kind = match a.kind {
        Kind::Path => GraphKind::Path { n: need_n()? },
        Kind::Cycle => GraphKind::Cycle { n: need_n()? },
        Kind::Grid => GraphKind::Grid {
            rows: a.rows.context("--rows is required for grids")?,
            cols: a.cols.or(a.rows).context("--cols is required for grids")?,
        },
        Kind::Geometric => GraphKind::RandomGeometric { n: need_n()?, seed: a.seed },
        Kind::Regular => GraphKind::RandomRegular { n: need_n()?, degree: a.degree, seed: a.seed },
    };
    let g = generate(&kind)?;
    emit(a.out.as_deref(), &write_edge_list(&g))?;
    Ok(Status::Ok)
}

pub fn net(a: &NetArgs) -> Result<Status> {
    let (m, _) = load_metric(&a.metric)?;
    let net = greedy_net(&m, a.eps)?;
    emit(a.out.as_deref(), &compact(&json!({ "net": net.terminals() })))?;
    Ok(Status::Ok)
}

pub fn partition(a: &PartitionArgs) -> Result<Status> {
    let (m, input) = load_metric(&a.metric)?;
    let (t, tdesc) = load_terminals(&m, &a.terminals)?;
    let meta = Meta::new(a.seed, json!({ "command": "partition", "metric": input.describe(), "terminals": tdesc }));
    let pm = random_partition(&m, &t, &mut RngStream::new(a.seed, 0))?;
    let rho = pm.rates.as_ref().map(|r| r.rho().to_vec()).unwrap_or_default();
    let violated = !check_retraction(&t, &pm).is_empty() || !check_proximity(&m, &t, &pm, 2.0).is_empty();

    if let Some(path) = &a.rates_out {
        let rates = meta.wrap(json!({ "terminals": t.terminals(), "rho": rho }))?;
        emit(Some(path), &compact(&rates))?;
    }
    let text = match a.output.format {
        Format::Json => compact(&meta.wrap(json!({
            "k": t.len(),
            "K": t.k_param(),
            "terminals": t.terminals(),
            "rho": rho,
            "f": pm.assign,
        }))?),
        Format::Csv => {
            let rows: Vec<Vec<String>> =
                pm.assign.iter().enumerate().map(|(x, f)| vec![x.to_string(), f.to_string()]).collect();
            meta.csv_preamble() + &csv_table(&["point", "terminal"], &rows)
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(if violated { Status::GateViolated } else { Status::Ok })
}

pub fn ldd(a: &LddArgs) -> Result<Status> {
    let (m, input) = load_metric(&a.metric)?;
    let algo = LddAlgo::from(a.algo);
    let meta = Meta::new(
        a.seed,
        json!({ "command": "ldd", "metric": input.describe(), "delta": a.delta, "algo": algo.as_str() }),
    );
    let d = Decomposer::new(&m, a.delta, algo)?;
    let c = d.sample(&m, &mut RngStream::new(a.seed, 0))?;
    let report = check_diameter(&m, &c);
    let text = match a.output.format {
        Format::Json => compact(&meta.wrap(json!({
            "delta": a.delta,
            "algo": algo.as_str(),
            "clusters": c.clusters(),
            "centers": c.centers,
            "max_diameter": report.max_diameter,
            "diameter_violations": report.violations.len(),
        }))?),
        Format::Csv => {
            let rows: Vec<Vec<String>> = (0..m.len())
                .map(|x| vec![x.to_string(), c.cluster_of[x].to_string(), c.center_of(x).to_string()])
                .collect();
            meta.csv_preamble() + &csv_table(&["point", "cluster", "center"], &rows)
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    // Only the rates decomposition carries a diameter guarantee.
    let violated = algo == LddAlgo::Rates && !report.violations.is_empty();
    Ok(if violated { Status::GateViolated } else { Status::Ok })
}

pub fn verify_separation(a: &SeparationArgs) -> Result<Status> {
    let (m, input) = load_metric(&a.metric)?;
    let (t, tdesc) = load_terminals(&m, &a.terminals)?;
    let meta = Meta::new(
        a.trials.seed,
        merge(
            json!({ "command": "verify-separation", "metric": input.describe(), "terminals": tdesc }),
            trials_config(&a.trials),
        ),
    );
    let pairs = select_pairs(&m, a.trials.pairs, a.trials.seed);
    let r = estimate_separation(&m, &t, &pairs, a.trials.trials, a.trials.conf_delta, a.trials.seed)?;
    let violated = r.retraction_violations > 0 || r.proximity_violations > 0;
    let text = match a.output.format {
        Format::Json => pretty(&meta.wrap(json!({
            "report": r,
            "stretch_gate": STRETCH_GATE,
            "bound_failures": r.bound_failures(STRETCH_GATE).len(),
        }))?)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = r
                .pairs
                .iter()
                .map(|p| {
                    vec![
                        p.u.to_string(),
                        p.v.to_string(),
                        p.distance.to_string(),
                        p.a_u.to_string(),
                        p.a_v.to_string(),
                        p.separations.to_string(),
                        p.p_hat.to_string(),
                        fmt_opt(p.alpha_hat),
                    ]
                })
                .collect();
            meta.csv_preamble()
                + &csv_table(&["u", "v", "distance", "a_u", "a_v", "separations", "p_hat", "alpha_hat"], &rows)
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(if violated { Status::GateViolated } else { Status::Ok })
}

pub fn verify_padding(a: &PaddingArgs) -> Result<Status> {
    let (m, input) = load_metric(&a.metric)?;
    let (t, tdesc) = load_terminals(&m, &a.terminals)?;
    let centers = if a.centers.is_empty() {
        let free: Vec<usize> = (0..m.len()).filter(|&u| t.distance_to_set(u) > 0.0).collect();
        if free.is_empty() {
            bail!("every point is a terminal; no ball to test");
        }
        let k = free.len().min(DEFAULT_CENTERS);
        (0..k).map(|i| free[i * free.len() / k]).collect()
    } else {
        a.centers.clone()
    };
    let queries: Vec<PaddingQuery> = centers
        .iter()
        .map(|&u| {
            m.check_index(u)?;
            let radii = if a.radii.is_empty() {
                a.fractions.iter().map(|f| f * t.distance_to_set(u)).collect()
            } else {
                a.radii.clone()
            };
            Ok(PaddingQuery { center: u, radii })
        })
        .collect::<Result<_>>()?;
    let meta = Meta::new(
        a.trials.seed,
        merge(
            json!({
                "command": "verify-padding",
                "metric": input.describe(),
                "terminals": tdesc,
                "centers": centers,
                "radii": a.radii,
                "fractions": a.fractions,
            }),
            trials_config(&a.trials),
        ),
    );
    let reports = estimate_padding_many(&m, &t, &queries, a.trials.trials, a.trials.conf_delta, a.trials.seed)?;
    let text = match a.output.format {
        Format::Json => pretty(&meta.wrap(json!({
            "reports": reports,
            "stretch_gate": STRETCH_GATE,
            "bound_failures": reports.iter().filter(|r| !r.within_bound(STRETCH_GATE)).count(),
        }))?)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.center.to_string(),
                        r.radius.to_string(),
                        r.a_u.to_string(),
                        r.cuts.to_string(),
                        r.p_hat.to_string(),
                        fmt_opt(r.normalized),
                    ]
                })
                .collect();
            meta.csv_preamble() + &csv_table(&["center", "radius", "a_u", "cuts", "p_hat", "normalized"], &rows)
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(Status::Ok)
}

pub fn verify_ldd(a: &VerifyLddArgs) -> Result<Status> {
    let (m, input) = load_metric(&a.metric)?;
    let algo = LddAlgo::from(a.algo);
    let meta = Meta::new(
        a.trials.seed,
        merge(
            json!({ "command": "verify-ldd", "metric": input.describe(), "delta": a.delta, "algo": algo.as_str() }),
            trials_config(&a.trials),
        ),
    );
    let pairs = select_pairs(&m, a.trials.pairs, a.trials.seed);
    let r = estimate_ldd_beta(&m, a.delta, &pairs, a.trials.trials, a.trials.conf_delta, a.trials.seed, algo)?;
    let violated = algo == LddAlgo::Rates && r.diameter_violations > 0;
    let text = match a.output.format {
        Format::Json => pretty(&meta.wrap(json!({ "report": r }))?)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = r
                .pairs
                .iter()
                .map(|p| {
                    vec![
                        p.u.to_string(),
                        p.v.to_string(),
                        p.distance.to_string(),
                        p.separations.to_string(),
                        p.p_hat.to_string(),
                        p.beta_hat.to_string(),
                    ]
                })
                .collect();
            meta.csv_preamble() + &csv_table(&["u", "v", "distance", "separations", "p_hat", "beta_hat"], &rows)
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(if violated { Status::GateViolated } else { Status::Ok })
}

pub fn sample_texp(a: &SampleArgs) -> Result<Status> {
    let law = TExp::new(a.lambda, a.gamma)?;
    if a.n == 0 {
        bail!("--n must be at least 1");
    }
    let mut rng = RngStream::new(a.seed, 0);
    let samples: Vec<f64> = (0..a.n).map(|_| law.sample(&mut rng)).collect();
    let mean = samples.iter().sum::<f64>() / a.n as f64;
    let mut text = String::with_capacity(a.n * 20);
    for x in &samples {
        text.push_str(&x.to_string());
        text.push('\n');
    }
    let mut sorted = samples;
    let ks = ks_distance(&mut sorted, |x| law.cdf(x));
    let meta = Meta::new(a.seed, json!({ "command": "sample-texp", "lambda": a.lambda, "gamma": a.gamma, "n": a.n }));
    text.push_str(&compact(&meta.wrap(json!({
        "mean": mean,
        "analytic_mean": law.mean(),
        "ks": ks,
        "ks_critical_001": ks_critical_001(a.n),
    }))?));
    emit(a.out.as_deref(), &text)?;
    Ok(Status::Ok)
}
