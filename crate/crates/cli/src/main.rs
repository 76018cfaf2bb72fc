//! `rrates`: random-rates partitions and decompositions from the command line.
//!
//! Exit status is 0 on success, 1 when a deterministic guarantee
//! (retraction, 2-proximity, LDD diameter) is violated, and 2 on bad input.

mod bench;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use random_rates::verify::PairSelection;
use random_rates::LddAlgo;

#[derive(Parser, Debug)]
#[command(name = "rrates", version, about = "Random-rates terminal partitions and low-diameter decompositions")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph and write it as an edge list.
    Gen(GenArgs),
    /// Greedy epsilon-net of a metric.
    Net(NetArgs),
    /// One random-rates partition.
    Partition(PartitionArgs),
    /// One low-diameter decomposition.
    Ldd(LddArgs),
    /// Monte Carlo separation probabilities.
    VerifySeparation(SeparationArgs),
    /// Monte Carlo ball-cut probabilities.
    VerifyPadding(PaddingArgs),
    /// Monte Carlo LDD cut probabilities and diameters.
    VerifyLdd(VerifyLddArgs),
    /// Samples from the truncated exponential law.
    SampleTexp(SampleArgs),
    /// Benchmark table over a directory of metrics.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Rates,
    Mpx,
}

impl From<Algo> for LddAlgo {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Rates => LddAlgo::Rates,
            Algo::Mpx => LddAlgo::Mpx,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Path,
    Cycle,
    Grid,
    Geometric,
    Regular,
}

/// Terminal source: a file of indices or `net:EPS`.
#[derive(Clone, Debug, PartialEq)]
pub enum TerminalSource {
    File(PathBuf),
    Net(f64),
}

impl FromStr for TerminalSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.strip_prefix("net:") {
            Some(eps) => eps.parse().map(TerminalSource::Net).map_err(|e| format!("bad net radius `{eps}`: {e}")),
            None => Ok(TerminalSource::File(PathBuf::from(s))),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct Trials {
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Failure probability for the Hoeffding radius.
    #[arg(long, default_value_t = 1e-3)]
    pub conf_delta: f64,
    /// all | auto | sample:N
    #[arg(long, default_value = "auto")]
    pub pairs: PairSelection,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Vertex count (path, cycle, geometric, regular).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NetArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    #[arg(long)]
    pub metric: PathBuf,
    /// File of terminal indices, or `net:EPS`.
    #[arg(long)]
    pub terminals: TerminalSource,
    #[arg(long)]
    pub seed: u64,
    /// Also write the drawn rates here.
    #[arg(long)]
    pub rates_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct LddArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Algo::Rates)]
    pub algo: Algo,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SeparationArgs {
    #[arg(long)]
    pub metric: PathBuf,
    /// File of terminal indices, or `net:EPS`.
    #[arg(long)]
    pub terminals: TerminalSource,
    #[command(flatten)]
    pub trials: Trials,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct PaddingArgs {
    #[arg(long)]
    pub metric: PathBuf,
    /// File of terminal indices, or `net:EPS`.
    #[arg(long)]
    pub terminals: TerminalSource,
    /// Ball centers; by default up to 20 evenly spaced points off the terminal set.
    #[arg(long = "center")]
    pub centers: Vec<usize>,
    /// Radii in metric units, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    /// Radii as fractions of each center's terminal distance, used when `--radii` is absent.
    #[arg(long, value_delimiter = ',', default_value = "0.0625,0.125,0.25")]
    pub fractions: Vec<f64>,
    #[command(flatten)]
    pub trials: Trials,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct VerifyLddArgs {
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = Algo::Rates)]
    pub algo: Algo,
    #[command(flatten)]
    pub trials: Trials,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchMode {
    /// LDD cut ratios `p delta / d`.
    Ldd,
    /// Terminal-partition stretch ratios `p min(A) / d` on a net.
    Separation,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of `.edges` / `.csv` metrics.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = BenchMode::Ldd)]
    pub mode: BenchMode,
    #[arg(long, value_enum, default_value_t = Algo::Rates)]
    pub algo: Algo,
    /// LDD diameter bound (default: a quarter of each metric's diameter).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Net radius for separation mode, as a fraction of the diameter.
    #[arg(long, default_value_t = 0.25)]
    pub net_frac: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "auto")]
    pub pairs: PairSelection,
    /// Leave the wall-time column empty so the table is reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// How a command finished when it did not hit an input error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    GateViolated,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Net(a) => commands::net(a),
        Command::Partition(a) => commands::partition(a),
        Command::Ldd(a) => commands::ldd(a),
        Command::VerifySeparation(a) => commands::verify_separation(a),
        Command::VerifyPadding(a) => commands::verify_padding(a),
        Command::VerifyLdd(a) => commands::verify_ldd(a),
        Command::SampleTexp(a) => commands::sample_texp(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::GateViolated) => {
            eprintln!("error: a deterministic guarantee was violated");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
