//! Benchmark table over a directory of metric files.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use random_rates::verify::{estimate_ldd_beta, estimate_separation, select_pairs};
use random_rates::{greedy_net, LddAlgo};

use crate::commands::load_metric;
use crate::output::{csv_table, emit, pretty, Meta};
use crate::{BenchArgs, BenchMode, Format, Status};

const CONF_DELTA: f64 = 1e-3;

#[derive(Debug, Serialize)]
struct Row {
    metric: String,
    n: usize,
    #[serde(rename = "K")]
    k_param: Option<usize>,
    ln_k: Option<f64>,
    algo: &'static str,
    mode: &'static str,
    trials: u64,
    /// LDD diameter bound, or the net radius in separation mode.
    scale: f64,
    median_ratio: f64,
    max_ratio: f64,
    median_over_ln_n: Option<f64>,
    wall_ms: Option<f64>,
}

impl Row {
    fn csv(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.metric.clone(),
            self.n.to_string(),
            self.k_param.map(|k| k.to_string()).unwrap_or_default(),
            opt(self.ln_k),
            self.algo.to_string(),
            self.mode.to_string(),
            self.trials.to_string(),
            self.scale.to_string(),
            self.median_ratio.to_string(),
            self.max_ratio.to_string(),
            opt(self.median_over_ln_n),
            opt(self.wall_ms),
        ]
    }
}

const HEADER: [&str; 12] = [
    "metric",
    "n",
    "K",
    "ln_K",
    "algo",
    "mode",
    "trials",
    "scale",
    "median_ratio",
    "max_ratio",
    "median_over_ln_n",
    "wall_ms",
];

/// Regular, non-hidden files of the corpus directory, sorted by name.
fn corpus_files(a: &BenchArgs) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(&a.corpus).with_context(|| format!("reading {}", a.corpus.display()))? {
        let path = entry?.path();
        let hidden = path.file_name().and_then(|s| s.to_str()).is_some_and(|s| s.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn run(a: &BenchArgs) -> Result<Status> {
    let algo = LddAlgo::from(a.algo);
    let files = corpus_files(a)?;
    let mut rows = Vec::with_capacity(files.len());
    let mut inputs = Vec::with_capacity(files.len());
    let mut violated = false;

    for path in &files {
        let (m, input) = load_metric(path)?;
        inputs.push(input.describe());
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("?").to_string();
        let pairs = select_pairs(&m, a.pairs, a.seed);
        let start = Instant::now();
        let row = match a.mode {
            BenchMode::Ldd => {
                let delta = a.delta.unwrap_or(m.diameter() / 4.0);
                let r = estimate_ldd_beta(&m, delta, &pairs, a.trials, CONF_DELTA, a.seed, algo)
                    .with_context(|| format!("benchmarking {}", path.display()))?;
                violated |= algo == LddAlgo::Rates && r.diameter_violations > 0;
                Row {
                    metric: name,
                    n: m.len(),
                    k_param: r.k_param,
                    ln_k: r.k_param.map(|k| (k as f64).ln()),
                    algo: algo.as_str(),
                    mode: "ldd",
                    trials: a.trials,
                    scale: delta,
                    median_ratio: r.beta_median,
                    max_ratio: r.beta_max,
                    median_over_ln_n: r.beta_median_over_ln_n,
                    wall_ms: None,
                }
            }
            BenchMode::Separation => {
                let eps = a.net_frac * m.diameter();
                let t = greedy_net(&m, eps)?;
                let r = estimate_separation(&m, &t, &pairs, a.trials, CONF_DELTA, a.seed)
                    .with_context(|| format!("benchmarking {}", path.display()))?;
                violated |= r.retraction_violations > 0 || r.proximity_violations > 0;
                let ln_n = (m.len() as f64).ln();
                Row {
                    metric: name,
                    n: m.len(),
                    k_param: Some(r.k_param),
                    ln_k: Some(r.ln_k),
                    algo: LddAlgo::Rates.as_str(),
                    mode: "separation",
                    trials: a.trials,
                    scale: eps,
                    median_ratio: r.alpha_median,
                    max_ratio: r.alpha_max,
                    median_over_ln_n: (ln_n > 0.0).then(|| r.alpha_median / ln_n),
                    wall_ms: None,
                }
            }
        };
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        rows.push(Row { wall_ms: (!a.no_timing).then_some(elapsed), ..row });
    }

    let meta = Meta::new(
        a.seed,
        json!({
            "command": "bench",
            "corpus": inputs,
            "mode": format!("{:?}", a.mode).to_lowercase(),
            "algo": algo.as_str(),
            "delta": a.delta,
            "net_frac": a.net_frac,
            "trials": a.trials,
            "pairs": a.pairs.to_string(),
        }),
    );
    let text = match a.format {
        Format::Csv => meta.csv_preamble() + &csv_table(&HEADER, &rows.iter().map(Row::csv).collect::<Vec<_>>()),
        Format::Json => pretty(&meta.wrap(json!({ "rows": rows }))?)?,
    };
    emit(a.out.as_deref(), &text)?;
    Ok(if violated { Status::GateViolated } else { Status::Ok })
}
