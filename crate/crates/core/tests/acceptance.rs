//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each, and
//! exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;

use gapcert::certify::{level_set_sweep, VarianceModel};
use gapcert::experiment::{run, ExperimentConfig, ExperimentKind, ProblemConfig};
use gapcert::mpc::{
    augmented_cost, dynamics_step, sample_environment, ControlInput, UnicycleState, WaypointParams, WORKSPACE_HI,
    WORKSPACE_LO,
};
use gapcert::oracle::{exhaustive_min, GroundTruth, OracleConfig};
use gapcert::percentile::{confidence_of, min_samples, percentile_solve, Sampling};
use gapcert::problems::{benchmark_by_name, tsp_cost, Benchmark, TspInstance, TspProblem};
use gapcert::repetitive::{build_certificate_from, UniformGaps};
use gapcert::rng::{derive_seed, indexed_rng, tag};

type Criterion = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Sample-size calculus, exact.
fn criterion_1() -> Outcome {
    let t = Instant::now();
    let a = min_samples(0.1083, 0.7).unwrap();
    let b = min_samples(0.1083, 0.999).unwrap();
    let c = min_samples(0.01, 0.99).unwrap();
    let conf = confidence_of(0.001, 5000).unwrap();
    let elapsed = t.elapsed();
    let ok = a == 11 && b == 61 && c == 459 && conf >= 0.99 && elapsed < Duration::from_secs(1);
    outcome(
        ok,
        format!("min_samples = {a}, {b}, {c} (want 11, 61, 459); confidence_of(0.001, 5000) = {conf:.6}; {}", secs(elapsed)),
    )
}

/// Coverage against exhaustively known ground truth on an 8-waypoint tour.
fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut cfg = ExperimentConfig::new(ExperimentKind::TspFig2, 11);
    cfg.problem = Some(ProblemConfig::Tsp {
        waypoints: Some(8),
        points: None,
        lo: [0.0, 0.0],
        hi: [1.0, 1.0],
    });
    cfg.n_p = Some(1000);
    cfg.chi = Some(0.1);
    cfg.confidence = Some(0.999);
    cfg.trials = Some(300);
    let report = run(&cfg).unwrap();
    let elapsed = t.elapsed();
    let trials: Vec<_> = report.trial_records().collect();
    assert_eq!(trials.len(), 300);

    // independent check of the optimum
    let instance = TspInstance::random(8, [0.0, 0.0], [1.0, 1.0], derive_seed(11, tag::INSTANCE)).unwrap();
    let brute = brute_force_tour_min(&instance);
    let optimum = report.summary["optimum"];
    let optimum_ok = (brute - optimum).abs() <= 1e-12;

    let fraction = report.summary["success_fraction"];
    let ok = fraction >= 0.98 && optimum_ok && elapsed <= Duration::from_secs(600);
    outcome(
        ok,
        format!(
            "success {fraction:.4} over 300 trials (need >= 0.98); mean p {:.4}, mean n_v {:.1}, p = 0 in {} trials; optimum {optimum:.6} vs brute force {brute:.6}; {}",
            report.summary["mean_p"],
            report.summary["mean_n_v"],
            report.summary["zero_p_trials"],
            secs(elapsed)
        ),
    )
}

/// Closed tour length over every permutation, by Heap's algorithm.
fn brute_force_tour_min(instance: &TspInstance) -> f64 {
    let pts = &instance.waypoints;
    let n = pts.len();
    let len = |p: &[usize]| {
        (0..n)
            .map(|i| {
                let (a, b) = (pts[p[i]], pts[p[(i + 1) % n]]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .sum::<f64>()
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut best = len(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(len(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Table I at desk scale.
fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Table1, 2024);
    cfg.n_p = Some(300);
    cfg.n_v = Some(300);
    cfg.chi = Some(0.1);
    cfg.epsilon = Some(0.01);
    cfg.trials = Some(200);
    cfg.oracle = Some(OracleConfig::refine_min());
    let report = run(&cfg).unwrap();
    let elapsed = t.elapsed();
    let mut parts = Vec::new();
    let mut ok = elapsed <= Duration::from_secs(600);
    for b in Benchmark::ALL {
        let name = b.name();
        let s = report.summary[&format!("success_{name}")];
        let a = report.summary[&format!("analytic_success_{name}")];
        let ms = report.timings.phases[&format!("mean_trial_ms_{name}")];
        ok &= s >= 0.95;
        parts.push(format!("{name} {s:.3} (vs analytic min {a:.3}, {ms:.2} ms/trial)"));
    }
    outcome(ok, format!("success per benchmark, need >= 0.95: {}; {}", parts.join(", "), secs(elapsed)))
}

/// Structural properties, zero tolerance.
fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // (a) monotone in D
    let problem = benchmark_by_name("rastrigin2").unwrap();
    let sol = percentile_solve(&problem, 100, 4).unwrap();
    let mut violations = 0;
    for k in 0..10_000u64 {
        let mut rng = indexed_rng(44, k);
        let big = rng.random_range(2..=100);
        let d2: Vec<usize> = sample(&mut rng, 100, big).into_vec();
        let small = rng.random_range(1..big);
        let d1: Vec<usize> = d2[..small].to_vec();
        let m1 = VarianceModel::with_indices(&problem, &sol.info, &d1).unwrap();
        let m2 = VarianceModel::with_indices(&problem, &sol.info, &d2).unwrap();
        let s = vec![rng.random_range(-5.12..=5.12), rng.random_range(-5.12..=5.12)];
        if m1.variance_at(&s).unwrap() < m2.variance_at(&s).unwrap() {
            violations += 1;
        }
    }
    ok &= violations == 0;
    notes.push(format!("(a) {violations} monotonicity violations in 10000 draws"));

    // (b) level-set implication on shared samples
    let model = VarianceModel::with_indices(&problem, &sol.info, &(0..10).collect::<Vec<_>>()).unwrap();
    let mode = Sampling::monte_carlo(20_000, 5);
    let values = model.variances(mode).unwrap();
    let mut broken = 0;
    let radii = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0];
    for (i, &s) in radii.iter().enumerate() {
        for &r in &radii[i..] {
            broken += values.iter().filter(|&&v| v <= s && v > r).count();
        }
    }
    let sweep = level_set_sweep(&model, &radii, mode).unwrap();
    let ordered = sweep.windows(2).all(|w| w[0].fraction <= w[1].fraction);
    ok &= broken == 0 && ordered;
    notes.push(format!("(b) {broken} implication failures, fractions ordered: {ordered}"));

    // (c) tour symmetry
    let mut asym = 0;
    for k in 0..500u64 {
        let inst = TspInstance::random(7, [0.0, 0.0], [1.0, 1.0], k).unwrap();
        let mut rng = indexed_rng(k, 1);
        let order: Vec<usize> = sample(&mut rng, 7, 7).into_vec();
        let base = tsp_cost(&inst, &order).unwrap();
        for shift in 0..7 {
            let mut rot = order.clone();
            rot.rotate_left(shift);
            let mut rev = rot.clone();
            rev.reverse();
            if tsp_cost(&inst, &rot).unwrap() != base || tsp_cost(&inst, &rev).unwrap() != base {
                asym += 1;
            }
        }
    }
    ok &= asym == 0;
    notes.push(format!("(c) {asym} rotation/reversal mismatches"));

    // (d) zero input fixed point
    let mut moved = 0;
    for k in 0..10_000u64 {
        let mut rng = indexed_rng(9, k);
        let s = UnicycleState::new(
            rng.random_range(WORKSPACE_LO[0]..=WORKSPACE_HI[0]),
            rng.random_range(WORKSPACE_LO[1]..=WORKSPACE_HI[1]),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        if dynamics_step(&s, &ControlInput::ZERO, 0.033) != s {
            moved += 1;
        }
    }
    ok &= moved == 0;
    notes.push(format!("(d) {moved} states moved under zero input"));

    // (e) cost range
    let params = WaypointParams::default();
    let mut outside = 0;
    for e in 0..200u64 {
        let env = sample_environment(e).unwrap();
        let mut rng = indexed_rng(e, 2);
        for _ in 0..100 {
            let w = [
                rng.random_range(WORKSPACE_LO[0]..=WORKSPACE_HI[0]),
                rng.random_range(WORKSPACE_LO[1]..=WORKSPACE_HI[1]),
            ];
            let c = augmented_cost(w, &env, &env.x_a, &params);
            if !(0.0..=100.0).contains(&c) {
                outside += 1;
            }
        }
    }
    ok &= outside == 0;
    notes.push(format!("(e) {outside} costs outside [0, 100]"));

    outcome(ok, notes.join("; "))
}

/// Repetitive bound on uniform gaps.
fn criterion_5() -> Outcome {
    let t = Instant::now();
    let source = UniformGaps { lo: 0.0, hi: 1.0 };
    let q = source.quantile(0.99);
    let hits = (0..200u64)
        .filter(|&s| {
            let (cert, _) = build_certificate_from(&source, 459, 1, 0.01, s).unwrap();
            cert.gamma_star >= q
        })
        .count();
    let fraction = hits as f64 / 200.0;
    let elapsed = t.elapsed();
    outcome(
        fraction >= 0.97 && elapsed < Duration::from_secs(60),
        format!("{hits}/200 certificates reach the 0.99 quantile ({fraction:.3}, need >= 0.97); {}", secs(elapsed)),
    )
}

/// Waypoint-planner family at desk scale.
fn criterion_6() -> Outcome {
    let t = Instant::now();
    let mut cfg = ExperimentConfig::new(ExperimentKind::MpcFig4, 5);
    cfg.n_p_values = Some(vec![200, 300, 500]);
    cfg.r = Some(459);
    cfg.epsilon = Some(0.01);
    cfg.validation = Some(2000);
    cfg.oracle = Some(OracleConfig::refine_min());
    let report = run(&cfg).unwrap();
    let elapsed = t.elapsed();
    let mut ok = elapsed <= Duration::from_secs(1800);
    let mut parts = Vec::new();
    let mut stars = Vec::new();
    for n_p in [200, 300, 500] {
        let g = report.summary[&format!("gamma_star_np{n_p}")];
        let c = report.summary[&format!("coverage_np{n_p}")];
        ok &= c >= 0.985;
        stars.push(g);
        parts.push(format!("n_p {n_p}: gamma* {g:.4}, coverage {c:.4}"));
    }
    let trend = if stars.windows(2).all(|w| w[1] <= w[0]) {
        "non-increasing"
    } else {
        "not monotone"
    };
    outcome(ok, format!("{} (need >= 0.985); gamma* trend {trend}; {}", parts.join("; "), secs(elapsed)))
}

/// Oracle sanity. Refinement is checked on a panel of seeds, since a single
/// lucky start says nothing about the oracle.
fn criterion_7() -> Outcome {
    let t = Instant::now();
    let inst = TspInstance::random(6, [0.0, 0.0], [1.0, 1.0], 77).unwrap();
    let brute = brute_force_tour_min(&inst);
    let exhaustive = exhaustive_min(&TspProblem::new(inst).unwrap(), 720).unwrap().value;
    let mut ok = exhaustive == brute;
    let mut parts = vec![format!("exhaustive {exhaustive:.12} vs enumeration {brute:.12}")];

    const SEEDS: u64 = 10;
    for b in Benchmark::ALL {
        let tol = if b == Benchmark::Rastrigin10 { 1e-2 } else { 1e-3 };
        let problem = benchmark_by_name(b.name()).unwrap();
        let values: Vec<f64> = (0..SEEDS)
            .map(|s| problem.ground_truth(&OracleConfig::refine_min(), s, None).unwrap().value)
            .collect();
        let hits = values.iter().filter(|&&v| v.abs() <= tol).count();
        let worst = values.iter().copied().fold(0.0, f64::max);
        ok &= hits as u64 == SEEDS;
        parts.push(format!("{} {hits}/{SEEDS} within {tol:e} (worst {worst:.3e})", b.name()));
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    outcome(ok, format!("{}; {}", parts.join(", "), secs(elapsed)))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 7] = [
        ("1 sample-size calculus", criterion_1),
        ("2 exact coverage on 8-waypoint tours", criterion_2),
        ("3 benchmark table", criterion_3),
        ("4 structural properties", criterion_4),
        ("5 repetitive bound on uniform gaps", criterion_5),
        ("6 waypoint-planner family", criterion_6),
        ("7 oracle sanity", criterion_7),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.passed { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag}: {}", result.detail);
        failed += !result.passed as usize;
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
