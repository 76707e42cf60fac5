use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use gmab_cli::export::{sha256_hex, RunManifest};
use gmab_cli::presets::ScenarioPreset;

fn gmab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmab"))
        .args(args)
        .env_remove("GMAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn report_value(dir: &Path, quantity: &str) -> Vec<f64> {
    let text = fs::read_to_string(dir.join("report.csv")).unwrap();
    text.lines()
        .filter(|l| l.split(',').next() == Some(quantity))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn run_preset_writes_files_listed_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = gmab(&[
        "run",
        "--preset",
        "three-arm-demo",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let m = manifest(&out);
    let names: Vec<_> = m.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, ["results.csv", "bounds.csv", "partition.csv"]);
    for f in &m.files {
        let bytes = fs::read(out.join(&f.path)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256, "{}", f.path);
        assert!(!bytes.contains(&b'\r'));
    }
    assert_eq!(m.seed, Some(7));
    assert_eq!(m.preset.as_deref(), Some("three-arm-demo"));
    assert!(m.elapsed_secs <= m.budget_secs.unwrap() as f64);

    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.starts_with("t,mean,stderr,bound_overlay,kind\n"));
    let partition = fs::read_to_string(out.join("partition.csv")).unwrap();
    assert_eq!(partition.lines().count(), 4);
    assert!(partition.starts_with("arm,theta_lo,theta_hi,tie\n0,0,0.4301"));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = gmab(&[
            "run",
            "--preset",
            "pricing",
            "--seed",
            "3",
            "--horizon",
            "3000",
            "--reps",
            "12",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["results.csv", "bounds.csv", "partition.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(manifest(&a).files, manifest(&b).files);

    let c = dir.path().join("c");
    let o = gmab(&[
        "run",
        "--preset",
        "pricing",
        "--seed",
        "4",
        "--horizon",
        "3000",
        "--reps",
        "12",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_ne!(
        fs::read(a.join("results.csv")).unwrap(),
        fs::read(c.join("results.csv")).unwrap()
    );
}

#[test]
fn bad_exponent_in_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ScenarioPreset::LinearWorstcase.config();
    config.horizon = 100;
    config.checkpoints.clear();
    let text = config.to_json().replace("\"gamma1\": 1.0", "\"gamma1\": 1.5");
    assert!(text.contains("1.5"));
    let path = dir.path().join("bad.json");
    fs::write(&path, text).unwrap();
    let o = gmab(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gamma1") && err.contains("(0, 1]"), "{err}");
}

#[test]
fn config_round_trip_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ScenarioPreset::Groups.config();
    config.horizon = 500;
    config.replications = 4;
    config.checkpoints = vec![100, 500];
    let path = dir.path().join("groups.json");
    fs::write(&path, config.to_json()).unwrap();
    let out = dir.path().join("o");
    let o = gmab(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--check-lemmas",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m.config.as_ref().unwrap().horizon, 500);
    // Lemma checks apply to the greedy policy only.
    assert_eq!(m.lemmas.unwrap().skipped, 4);
}

#[test]
fn invalid_override_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = gmab(&[
        "run",
        "--preset",
        "three-arm-demo",
        "--horizon",
        "100",
        "--checkpoints",
        "10,500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("checkpoints"));
    let o = gmab(&["run", "--preset", "no-such-preset"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmab(&["run", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = gmab(&[
        "run",
        "--preset",
        "groups",
        "--horizon",
        "50",
        "--reps",
        "2",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn out_dir_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_gmab"))
        .args(["run", "--preset", "counterexample", "--horizon", "200", "--reps", "3"])
        .env("GMAB_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").exists());
    // No certificate, so no bound curves.
    let bounds = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert_eq!(bounds, "t,value,kind,constants_hash\n");
}

#[test]
fn analyze_demo_reports_distance() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmab(&[
        "analyze",
        "--preset",
        "three-arm-demo",
        "--theta",
        "0.2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = report_value(dir.path(), "delta_min");
    assert_eq!(d.len(), 1);
    assert!((d[0] - 0.230_16).abs() < 1e-5);
    assert!((report_value(dir.path(), "gap_min")[0] - 0.392_79).abs() < 1e-5);
    let bounds = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    for kind in ["one_step", "cumulative", "subopt_prob", "three_regime"] {
        assert!(bounds.contains(kind), "{kind}");
    }
}

#[test]
fn analyze_regime_constants_from_delta() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmab(&[
        "analyze",
        "--delta",
        "0.1",
        "--arms",
        "3",
        "--certificate",
        "1,1,1,1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report_value(dir.path(), "c1"), vec![1043.0]);
    assert_eq!(report_value(dir.path(), "c2"), vec![2326.0]);
}

#[test]
fn analyze_single_arm_distance_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.json");
    fs::write(
        &path,
        r#"{"kind": "standard", "arms": [{"family": "linear", "a": 1.0, "b": 0.0}],
            "certificate": {"d1": 1.0, "gamma1": 1.0, "d2": 1.0, "gamma2": 1.0}}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = gmab(&[
        "analyze",
        "--instance",
        path.to_str().unwrap(),
        "--theta",
        "0.4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report_value(&out, "delta_min"), vec![1.0]);
}

#[test]
fn analyze_rejects_invalid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let o = gmab(&[
        "analyze",
        "--preset",
        "three-arm-demo",
        "--theta",
        "0.2",
        "--certificate",
        "1,1,1,1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("arm 0"));
    let o = gmab(&["analyze", "--delta", "0.1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_preset_completes_within_budget() {
    let dir = tempfile::tempdir().unwrap();
    for p in ScenarioPreset::ALL {
        let out = dir.path().join(p.name());
        let started = Instant::now();
        let o = gmab(&["run", "--preset", p.name(), "--out", out.to_str().unwrap()]);
        let secs = started.elapsed().as_secs_f64();
        assert!(o.status.success(), "{p}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(secs <= p.budget_secs() as f64, "{p} took {secs:.1}s");
    }
}
