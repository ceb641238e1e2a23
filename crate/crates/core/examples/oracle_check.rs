//! Ground-truth oracles: exhaustive search on small tours and sampled
//! descent on the continuous benchmarks.

use gapcert::oracle::{exhaustive_min, GroundTruth, OracleConfig};
use gapcert::percentile::percentile_solve;
use gapcert::problems::{Benchmark, TspInstance, TspProblem};

fn main() -> gapcert::Result<()> {
    let tsp = TspProblem::new(TspInstance::random(6, [0.0, 0.0], [1.0, 1.0], 77)?)?;
    let exact = exhaustive_min(&tsp, 720)?;
    let sampled = percentile_solve(&tsp, 720, 1)?;
    let two_opt = tsp.ground_truth(&OracleConfig::TwoOpt, 0, Some(&sampled.best().decision))?;
    println!(
        "6 waypoints: exhaustive {:.6} {:?}, best of 720 draws {:.6}, 2-opt {:.6}",
        exact.value,
        exact.minimizer,
        sampled.best_cost(),
        two_opt.value
    );

    for b in Benchmark::ALL {
        let problem = gapcert::problems::benchmark_by_name(b.name())?;
        let values: Vec<f64> = (0..10)
            .map(|seed| problem.ground_truth(&OracleConfig::refine_min(), seed, None).map(|r| r.value))
            .collect::<gapcert::Result<_>>()?;
        let hits = values.iter().filter(|v| v.abs() < 1e-3).count();
        let worst = values.iter().copied().fold(0.0, f64::max);
        println!("{:<12} refine-min near 0 on {hits}/10 seeds, worst {worst:.3e}", b.name());
    }
    Ok(())
}
