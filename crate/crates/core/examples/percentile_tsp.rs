//! Best-of-N tour search on ten random waypoints, checked against the full
//! 10! enumeration.
//!
//!     cargo run --release --example percentile_tsp

use gapcert::oracle::exhaustive_min;
use gapcert::percentile::{confidence_of, estimate_better_fraction, percentile_solve, Sampling};
use gapcert::problems::{TspInstance, TspProblem};

fn main() -> gapcert::Result<()> {
    let problem = TspProblem::new(TspInstance::random(10, [0.0, 0.0], [1.0, 1.0], 42)?)?;
    let n_p = 5000;
    let solution = percentile_solve(&problem, n_p, 7)?;
    println!("best of {n_p} tours: {:.4}  {:?}", solution.best_cost(), solution.best().decision);
    println!("P[in the 99.9th percentile] >= {:.4}", confidence_of(0.001, n_p as u64)?);

    let better = estimate_better_fraction(&problem, &solution.best().decision, Sampling::exact())?;
    let optimum = exhaustive_min(&problem, 3_628_800)?;
    println!("tours strictly shorter: {:.5}% of 3628800", 100.0 * better);
    println!(
        "optimum {:.4}, ratio {:.3}",
        optimum.value,
        solution.best_cost() / optimum.value
    );
    Ok(())
}
