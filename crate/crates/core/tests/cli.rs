use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gapcert(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapcert"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn solve_succeeds_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "solve.json",
        r#"{"problem": {"type": "benchmark", "name": "beale"}, "n_p": 25, "seed": 3}"#,
    );
    let out = dir.path().join("out");
    let o = gapcert(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("best_cost = "));
    for f in ["info.csv", "manifest.json", "report.json", "records.jsonl", "timings.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"problem": {"type": "benchmark", "name": "levi13"}, "n_p": 2}"#,
    );
    let o = gapcert(&["solve", "--config", &cfg, "--seed", "8"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("runs/solve/report.json")).unwrap();
    assert!(report.contains("\"seed\": 8"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let no_seed = write(dir.path(), "a.json", r#"{"problem": {"type": "benchmark", "name": "beale"}, "n_p": 5}"#);
    let o = gapcert(&["solve", "--config", &no_seed], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    let unknown = write(dir.path(), "b.json", r#"{"seed": 1, "bogus": 3}"#);
    assert_eq!(gapcert(&["solve", "--config", &unknown], dir.path()).status.code(), Some(2));

    let ok = write(dir.path(), "c.json", r#"{"problem": {"type": "benchmark", "name": "beale"}, "n_p": 5, "seed": 1}"#);
    assert_eq!(gapcert(&["fig9", "--config", &ok], dir.path()).status.code(), Some(2));
    assert_eq!(gapcert(&["solve", "--config", "missing.json"], dir.path()).status.code(), Some(2));
    let bad_chi = write(dir.path(), "d.json", r#"{"seed": 1, "n_p": 5, "n_v": 5, "trials": 1, "chi": 0}"#);
    assert_eq!(gapcert(&["table1", "--config", &bad_chi], dir.path()).status.code(), Some(2));
}

#[test]
fn check_flag_maps_threshold_misses_to_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let strict = write(
        dir.path(),
        "v.json",
        r#"{"family": {"type": "uniform"}, "n_p": 1, "r": 20, "validation": 500, "threshold": 1.0, "seed": 2}"#,
    );
    let out = dir.path().join("v");
    let args = ["validate", "--config", &strict, "--out", out.to_str().unwrap()];
    assert_eq!(gapcert(&args, dir.path()).status.code(), Some(0));
    let mut checked = args.to_vec();
    checked.push("--check");
    assert_eq!(gapcert(&checked, dir.path()).status.code(), Some(3));

    let lenient = write(
        dir.path(),
        "w.json",
        r#"{"family": {"type": "uniform"}, "n_p": 1, "r": 459, "validation": 500, "threshold": 0.9, "seed": 2}"#,
    );
    let o = gapcert(&["validate", "--config", &lenient, "--out", out.to_str().unwrap(), "--check"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}
