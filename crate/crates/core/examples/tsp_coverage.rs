//! Exact gap certification on an 8-waypoint tour: enumerate all 40320
//! tours for the optimum and for p, pick n_v for a target confidence, and
//! count how often the bound covers the true gap.
//!
//!     cargo run --release --example tsp_coverage

use gapcert::certify::{certify_gap, exceedance_probability, subsample_info};
use gapcert::oracle::exhaustive_min;
use gapcert::percentile::{min_samples, percentile_solve, Sampling};
use gapcert::problems::{TspInstance, TspProblem};

fn main() -> gapcert::Result<()> {
    let problem = TspProblem::new(TspInstance::random(8, [0.0, 0.0], [1.0, 1.0], 2)?)?;
    let optimum = exhaustive_min(&problem, 40_320)?.value;
    let solution = percentile_solve(&problem, 1000, 5)?;
    let model = subsample_info(&problem, &solution.info, 0.1, 5)?;
    let gap = solution.best_cost() - optimum;
    let p = exceedance_probability(&model, gap, Sampling::exact())?;
    println!("optimum {optimum:.4}, solution {:.4}, gap {gap:.4}, p = {p:.4}", solution.best_cost());
    if p == 0.0 {
        println!("no decision beats the gap; nothing to certify");
        return Ok(());
    }

    for confidence in [0.7, 0.999] {
        let n_v = min_samples(p, confidence)?;
        let trials = 100;
        let covered = (0..trials)
            .filter(|&t| certify_gap(&model, n_v, p, 1000 + t).map(|c| c.covers(gap)).unwrap_or(false))
            .count();
        println!("confidence {confidence}: n_v = {n_v}, covered {covered}/{trials}");
    }
    Ok(())
}
