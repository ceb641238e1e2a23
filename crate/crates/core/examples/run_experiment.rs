//! Drive the experiment runner from a JSON config, as the CLI does.
//!
//!     cargo run --release --example run_experiment -- table1 configs/table1.json out/

use std::path::PathBuf;

use gapcert::experiment::{run, ExperimentConfig, ExperimentKind};

fn main() -> gapcert::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ExperimentKind = args.next().as_deref().unwrap_or("solve").parse()?;
    let path = args.next().unwrap_or_else(|| "configs/solve_rastrigin.json".into());
    let text = std::fs::read_to_string(&path)?;
    let mut config = ExperimentConfig::from_json(&text, Some(kind), None)?;
    config.out = args.next().map(PathBuf::from);

    let report = run(&config)?;
    for (k, v) in &report.summary {
        println!("{k:<32} {v}");
    }
    println!("records: {}, passed: {:?}", report.records.len(), report.passed);
    println!("{:.1} ms", report.timings.total_ms);
    Ok(())
}
