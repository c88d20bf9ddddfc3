//! Harness for the diversity-maximization solvers: file loading, instance
//! generators, benchmark sweeps with CSV/JSON/markdown reports, and node
//! profiling.

pub mod bench;
pub mod config;
pub mod error;
pub mod generate;
pub mod io;
pub mod profile;

pub use bench::{run_benchmark, solve_one, verify, write_report, BenchRow};
pub use config::{CostMode, DatasetSpec, KSpec, OutputFormat, RunConfig, SolveOptions};
pub use error::{HarnessError, Result};
pub use generate::{gen_random_exposure, gen_subsetsum, gen_two_community, karate};
pub use io::{load_instance, parse_instance, LoadedInstance};
pub use profile::{node_profile, pagerank, selection_order, NodeProfile};
