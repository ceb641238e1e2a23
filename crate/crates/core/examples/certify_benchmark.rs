//! Certify the gap of a percentile solution on a benchmark function and
//! compare the bound with the gap measured by the refine-min oracle.
//!
//!     cargo run --release --example certify_benchmark -- himmelblau

use gapcert::certify::{certify_gap, subsample_info};
use gapcert::oracle::{GroundTruth, OracleConfig};
use gapcert::percentile::percentile_solve;
use gapcert::problems::benchmark_by_name;

fn main() -> gapcert::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "rastrigin2".into());
    let problem = benchmark_by_name(&name)?;
    let seed = 3;

    let solution = percentile_solve(&problem, 300, seed)?;
    let model = subsample_info(&problem, &solution.info, 0.1, seed)?;
    let cert = certify_gap(&model, 300, 0.01, seed)?;
    let truth = problem.ground_truth(&OracleConfig::refine_min(), seed, Some(&solution.best().decision))?;

    let (lo, hi) = cert.interval();
    println!("{name}: best sampled cost {:.5}", cert.solution_cost);
    println!("certified gap <= {:.5} with confidence {:.4}", cert.v_star, cert.confidence);
    println!("optimum in [{lo:.5}, {hi:.5}]");
    println!(
        "oracle optimum {:.3e} at {:?}, true gap {:.5}, covered: {}",
        truth.value,
        truth.minimizer,
        cert.solution_cost - truth.value,
        cert.covers(cert.solution_cost - truth.value)
    );
    Ok(())
}
