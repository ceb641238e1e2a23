use std::fs;
use std::path::Path;

use gapcert::experiment::{emit_plot_data, run, ExperimentConfig, ExperimentKind, PlotKind, ProblemConfig};
use gapcert::problems::Benchmark;

fn tsp_certify(trials: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Certify, 21);
    cfg.problem = Some(ProblemConfig::Tsp {
        waypoints: Some(7),
        points: None,
        lo: [0.0, 0.0],
        hi: [1.0, 1.0],
    });
    cfg.n_p = Some(80);
    cfg.n_v = Some(150);
    cfg.trials = Some(trials);
    cfg
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = tsp_certify(12);
    cfg.out = Some(a.path().to_path_buf());
    run(&cfg).unwrap();
    cfg.out = Some(b.path().to_path_buf());
    run(&cfg).unwrap();
    for name in ["records.jsonl", "fig2.csv", "config.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    // report.json embeds the output directory, so compare it without that field
    let strip = |dir: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&read(dir, "report.json")).unwrap();
        v["config"].as_object_mut().unwrap().remove("out");
        v
    };
    assert_eq!(strip(a.path()), strip(b.path()));
    assert!(a.path().join("timings.json").exists());
}

#[test]
fn interrupted_run_resumes_to_the_same_result() {
    let full_dir = tempfile::tempdir().unwrap();
    let mut cfg = tsp_certify(10);
    cfg.out = Some(full_dir.path().to_path_buf());
    let full = run(&cfg).unwrap();

    let dir = tempfile::tempdir().unwrap();
    cfg.out = Some(dir.path().to_path_buf());
    run(&cfg).unwrap();
    // keep four records and a torn fifth
    let text = read(dir.path(), "records.jsonl");
    let lines: Vec<&str> = text.lines().collect();
    let torn = format!("{}\n{}", lines[..4].join("\n"), &lines[4][..lines[4].len() / 2]);
    fs::write(dir.path().join("records.jsonl"), torn).unwrap();

    let resumed = run(&cfg).unwrap();
    assert_eq!(resumed.records, full.records);
    assert_eq!(resumed.summary, full.summary);
    assert_eq!(read(dir.path(), "records.jsonl"), read(full_dir.path(), "records.jsonl"));
}

#[test]
fn changed_config_starts_over() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tsp_certify(4);
    cfg.out = Some(dir.path().to_path_buf());
    run(&cfg).unwrap();
    cfg.n_v = Some(20);
    let rep = run(&cfg).unwrap();
    assert!(rep.trial_records().all(|t| t.n_v == 20));
    assert_eq!(read(dir.path(), "records.jsonl").lines().count(), 4);
}

#[test]
fn fig2_is_bound_against_gap() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::TspFig2, 3);
    cfg.problem = Some(ProblemConfig::Tsp {
        waypoints: Some(6),
        points: None,
        lo: [0.0, 0.0],
        hi: [1.0, 1.0],
    });
    cfg.n_p = Some(30);
    cfg.confidence = Some(0.99);
    cfg.trials = Some(8);
    let report = run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_plot_data(&report, PlotKind::Fig2, dir.path()).unwrap();
    let text = fs::read_to_string(&paths[0]).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,v_star,true_gap"));
    assert_eq!(lines.count(), 8);
    assert!(report.passed.is_some());
}

#[test]
fn table1_writes_one_row_per_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Table1, 4);
    cfg.benchmarks = Some(vec![Benchmark::Beale, Benchmark::Himmelblau]);
    cfg.n_p = Some(50);
    cfg.n_v = Some(50);
    cfg.trials = Some(3);
    cfg.out = Some(dir.path().to_path_buf());
    run(&cfg).unwrap();
    let table = read(dir.path(), "table1.csv");
    let rows: Vec<&str> = table.lines().collect();
    assert!(rows[0].starts_with("benchmark,n_p,n_v,expected_success,success_fraction"));
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("beale,50,50,"));
    assert!(dir.path().join("fig2_beale.csv").exists());
}

#[test]
fn mismatched_and_empty_plots() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Solve, 1);
    cfg.problem = Some(ProblemConfig::Benchmark {
        name: Benchmark::Ackley,
    });
    cfg.n_p = Some(3);
    let report = run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_plot_data(&report, PlotKind::Fig2, dir.path()).is_err());
    assert!(emit_plot_data(&report, PlotKind::Fig4, dir.path()).is_err());

    let mut empty = report.clone();
    empty.records.clear();
    empty.config.experiment = ExperimentKind::TspFig2;
    let p = emit_plot_data(&empty, PlotKind::Fig2, dir.path()).unwrap();
    assert_eq!(fs::read_to_string(&p[0]).unwrap(), "trial,v_star,true_gap\n");
    empty.config.experiment = ExperimentKind::MpcFig4;
    let p = emit_plot_data(&empty, PlotKind::Fig4, dir.path()).unwrap();
    assert_eq!(fs::read_to_string(&p[0]).unwrap(), "n_p,bin_lo,bin_hi,count\n");
    assert_eq!(fs::read_to_string(&p[1]).unwrap(), "n_p,gamma_star,cutoff\n");
}

#[test]
fn solve_writes_info_set_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Solve, 5);
    cfg.problem = Some(ProblemConfig::Tsp {
        waypoints: None,
        points: Some(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
        lo: [0.0, 0.0],
        hi: [1.0, 1.0],
    });
    cfg.n_p = Some(12);
    cfg.out = Some(dir.path().to_path_buf());
    let rep = run(&cfg).unwrap();
    assert_eq!(rep.records.len(), 12);
    let info = read(dir.path(), "info.csv");
    assert!(info.starts_with("index,cost,decision\n"));
    assert_eq!(info.lines().count(), 13);
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["n_p"], 12);
    assert_eq!(manifest["seed"], 5);
    // the unit square's perimeter is the best closed tour
    assert!(rep.summary["best_cost"] >= 4.0 - 1e-12);
}
