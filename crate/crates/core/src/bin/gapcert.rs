use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gapcert::experiment::{run, ExperimentConfig, ExperimentKind};
use gapcert::Error;

/// Run a gap-certification experiment from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "gapcert", version)]
struct Cli {
    /// solve | certify | chi-sweep | table1 | tsp-fig2 | mpc-fig4 | validate
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: runs/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if the run misses its acceptance threshold.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e @ Error::Config { .. }) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    for (k, v) in &report.summary {
        println!("{k} = {v}");
    }
    if let Some(dir) = &config.out {
        println!("artifacts in {}", dir.display());
    }
    match (cli.check, report.passed) {
        (true, Some(false)) => {
            eprintln!("below threshold {:?}", report.threshold);
            ExitCode::from(3)
        }
        _ => ExitCode::SUCCESS,
    }
}

fn load(cli: &Cli) -> gapcert::Result<ExperimentConfig> {
    let kind: ExperimentKind = cli.experiment.parse()?;
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config {
            field: "--config".into(),
            message: format!("{}: {e}", cli.config.display()),
        })?;
    let mut config = ExperimentConfig::from_json(&text, Some(kind), cli.seed)?;
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if config.out.is_none() {
        config.out = Some(PathBuf::from("runs").join(kind.name()));
    }
    Ok(config)
}
