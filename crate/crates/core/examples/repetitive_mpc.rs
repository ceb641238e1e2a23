//! Repetitive gap bound for the waypoint planner: R = 459 environments give
//! a bound that holds for 99% of fresh environments at 99% confidence.
//! Also dumps one predicted rollout.
//!
//!     cargo run --release --example repetitive_mpc

use gapcert::mpc::{mpc_family, rollout, write_rollout_csv, WaypointParams};
use gapcert::oracle::OracleConfig;
use gapcert::percentile::{min_samples, percentile_solve};
use gapcert::repetitive::{build_certificate_from, validate_coverage_from, FamilyGaps, ProblemFamily};

fn main() -> gapcert::Result<()> {
    let params = WaypointParams::default();
    let family = mpc_family(params.clone(), 5);
    let r = min_samples(0.01, 0.99)?;

    for n_p in [200, 300, 500] {
        let source = FamilyGaps::new(&family, n_p, OracleConfig::refine_min());
        let (cert, _) = build_certificate_from(&source, r, n_p, 0.01, 5)?;
        let (coverage, _) = validate_coverage_from(&source, &cert, 1000, 5)?;
        println!(
            "n_p {n_p}: gamma* = {:.3} from R = {r} (confidence {:.4}), coverage on 1000 fresh: {coverage:.4}",
            cert.gamma_star, cert.confidence
        );
    }

    let problem = family.instance(0)?;
    let best = percentile_solve(&problem, 300, 0)?;
    let w = [best.best().decision[0], best.best().decision[1]];
    println!("\nrollout toward {w:?} (cost {:.3}):", best.best_cost());
    write_rollout_csv(&rollout(&problem.env.x_a, w, &problem.env, &params), std::io::stdout())?;
    Ok(())
}
