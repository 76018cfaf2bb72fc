//! Random-rates terminal partitions and low-diameter decompositions on
//! finite metric spaces, with Monte Carlo and exact verification tools.
//!
//! Every terminal `t` draws a rate `rho_t = 1 + nu_t` with `nu_t` from an
//! exponential law truncated to `[0, 1]`, and each point joins the terminal
//! minimising `d(x, t) / rho_t`.
//!
//! ```
//! use random_rates::{MetricSpace, TerminalSet, RngStream, random_partition};
//! use random_rates::graph::{generate, GraphKind};
//!
//! let m = MetricSpace::from_weighted_graph(&generate(&GraphKind::Path { n: 5 }).unwrap()).unwrap();
//! let t = TerminalSet::new(&m, &[0, 4]).unwrap();
//! let p = random_partition(&m, &t, &mut RngStream::new(7, 0)).unwrap();
//! assert_eq!((p.get(0), p.get(4)), (0, 4));
//! ```

pub mod error;
pub mod graph;
pub mod io;
pub mod ldd;
pub mod metric;
pub mod partition;
pub mod rng;
pub mod texp;
pub mod verify;

pub use error::{Error, Result};
pub use ldd::{check_diameter, mpx_decompose, random_rates_ldd, Clustering, Decomposer, LddAlgo, RatesLdd};
pub use metric::{compute_k, greedy_net, MetricSpace, TerminalSet};
pub use partition::{assign, draw_rates, random_partition, PartitionMap, RateAssignment};
pub use rng::RngStream;
pub use texp::TExp;
