//! Concrete problems: closed-tour TSP and the continuous benchmark suite.

pub mod benchmarks;
pub mod tsp;

pub use benchmarks::{benchmark_by_name, make_benchmark, Benchmark, BenchmarkProblem, BenchmarkSpec};
pub use tsp::{make_tsp_family, tsp_cost, TspFamily, TspInstance, TspProblem};
