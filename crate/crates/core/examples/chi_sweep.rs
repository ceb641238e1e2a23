//! How the retained fraction chi changes the chance of drawing a decision
//! whose variance beats the true gap, on 2-D Rastrigin with 100 samples.
//! Writes the level-set sweep for each chi as CSV to stdout.
//!
//!     cargo run --release --example chi_sweep > sweep.csv

use gapcert::certify::{exceedance_probability, level_set_sweep, subsample_info, write_sweep_csv};
use gapcert::percentile::{percentile_solve, Sampling};
use gapcert::problems::benchmark_by_name;

fn main() -> gapcert::Result<()> {
    let problem = benchmark_by_name("rastrigin2")?;
    let solution = percentile_solve(&problem, 100, 1)?;
    // known minimum of Rastrigin
    let gap = solution.best_cost();
    let mode = Sampling::monte_carlo(40_000, 9);

    let radii: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
    for chi in [1.0, 0.5, 0.2, 0.1, 0.05] {
        let model = subsample_info(&problem, &solution.info, chi, 1)?;
        let p = exceedance_probability(&model, gap, mode)?;
        eprintln!("chi {chi:<5} |D| = {:>3}  p = {p:.4}", model.d_set().len());
        println!("# chi = {chi}");
        write_sweep_csv(&level_set_sweep(&model, &radii, mode)?, std::io::stdout())?;
    }
    Ok(())
}
