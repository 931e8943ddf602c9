use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use holo_isac::files::{format_coupling, ScenarioFile, StateFile};
use holo_isac_core::rhs::{CouplingModel, CouplingSource};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/small.json")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holo-isac"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn optimize_writes_outputs_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = fixture();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        ok(&[
            "optimize",
            scenario.to_str().unwrap(),
            "--out-dir",
            dir.to_str().unwrap(),
            "--seed",
            "3",
        ]);
    }
    let names = files(&a);
    assert_eq!(
        names,
        [
            "beampattern.csv",
            "report.json",
            "run.jsonl",
            "scenario.json",
            "state.json",
            "timings.json",
            "trace.csv"
        ]
    );
    for name in names.iter().filter(|n| *n != "timings.json") {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs between identical runs");
    }
    assert!(read(&a.join("beampattern.csv")).starts_with("theta_deg,phi_deg,power_linear\n"));
    let trace = read(&a.join("trace.csv"));
    assert!(trace.starts_with("iter,min_rate_bps_hz,slack,max_violation\n"));
    let rates: Vec<f64> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(!rates.is_empty());
    assert!(rates.windows(2).all(|w| w[1] >= w[0] - 1e-6), "{rates:?}");
    let report: serde_json::Value = serde_json::from_str(&read(&a.join("report.json"))).unwrap();
    assert_eq!(report["satisfied"], true);
    assert_eq!(report["scheme"], "aware");
}

#[test]
fn huge_epsilon_runs_one_outer_iteration() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&[
        "optimize",
        fixture().to_str().unwrap(),
        "--out-dir",
        tmp.path().to_str().unwrap(),
        "--epsilon",
        "1e9",
    ]);
    assert_eq!(read(&tmp.path().join("trace.csv")).lines().count(), 2);
}

#[test]
fn experiment_snapshot_reflects_override() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    ok(&[
        "experiment",
        "fig-iteration-gains",
        "--scenario",
        fixture().to_str().unwrap(),
        "--set",
        "thresholds.rate_bps_hz.0=2.5",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    let snap: ScenarioFile = serde_json::from_str(&read(&out.join("scenario.json"))).unwrap();
    assert_eq!(snap.thresholds.rate_bps_hz, vec![2.5]);
    let run_snap: ScenarioFile = serde_json::from_str(&read(&out.join("aware/scenario.json"))).unwrap();
    assert_eq!(run_snap, snap);
    let gains = read(&out.join("gains.csv"));
    assert_eq!(gains.lines().next().unwrap(), "iter,sensing_0_db,clutter_0_db");
    assert!(gains.lines().count() >= 2);
    for name in ["report.json", "beampattern.csv", "trace.csv"] {
        assert!(out.join("aware").join(name).exists(), "{name}");
    }
}

#[test]
fn beampattern_experiment_emits_sll_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    ok(&[
        "experiment",
        "fig-beampattern",
        "--scenario",
        fixture().to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    let sll = read(&out.join("sll.csv"));
    let lines: Vec<&str> = sll.lines().collect();
    assert_eq!(lines[0], "scheme,sll_db,min_rate_bps_hz,satisfied");
    assert!(lines[1].starts_with("aware,") && lines[2].starts_with("unaware,"));
    assert!(out.join("unaware/beampattern.csv").exists());
}

#[test]
fn neumann_experiment_series_converges() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    ok(&[
        "experiment",
        "fig-neumann-convergence",
        "--scenario",
        fixture().to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    let text = read(&out.join("neumann.csv"));
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1], f[2])
        })
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|(err, bound)| err <= &(bound * (1.0 + 1e-9))));
    assert!(rows.last().unwrap().0 < 1e-6 * rows[0].0);
    assert!(out.join("holo_trace.csv").exists());
}

#[test]
fn unknown_recipe_and_baseline_are_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(&["experiment", "fig-nothing", "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown recipe"));
    let out = cli(&[
        "baseline",
        "nothing",
        fixture().to_str().unwrap(),
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scheme"));
}

#[test]
fn infeasible_scenario_names_the_family() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(&[
        "optimize",
        fixture().to_str().unwrap(),
        "--set",
        "thresholds.sensing_gain_db.0=40",
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sensing_gain"));
}

#[test]
fn baselines_run_and_beampattern_rebuilds_state() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = fixture();
    for name in ["unaware", "random", "midpoint", "phased-array"] {
        let dir = tmp.path().join(name);
        ok(&[
            "baseline",
            name,
            scenario.to_str().unwrap(),
            "--out-dir",
            dir.to_str().unwrap(),
            "--pa-rows",
            "2",
            "--pa-cols",
            "2",
        ]);
        let report: serde_json::Value = serde_json::from_str(&read(&dir.join("report.json"))).unwrap();
        assert!(report["min_rate"].as_f64().unwrap() > 0.0, "{name}");

        let bp = tmp.path().join(format!("{name}-bp"));
        ok(&[
            "beampattern",
            dir.join("state.json").to_str().unwrap(),
            "--out-dir",
            bp.to_str().unwrap(),
        ]);
        // Same grid step as the run, so the rebuilt pattern matches exactly.
        assert_eq!(read(&bp.join("beampattern.csv")), read(&dir.join("beampattern.csv")), "{name}");
        assert!(read(&bp.join("sll.csv")).starts_with("exclusion_deg,sll_db\n10.0,"));
    }
    let pa: StateFile = serde_json::from_str(&read(&tmp.path().join("phased-array/state.json"))).unwrap();
    assert_eq!(pa.phased_array.map(|p| p.rows * p.cols), Some(4));
}

#[test]
fn coupling_file_is_used_and_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let file = ScenarioFile::load(&fixture()).unwrap();
    let cfg = file.surface().unwrap();
    let g = CouplingModel::synthetic(&cfg, &file.coupling).unwrap().matrix * num_complex::Complex64::new(0.5, 0.0);
    let path = tmp.path().join("g.csv");
    fs::write(&path, format_coupling(&g)).unwrap();

    let dir = tmp.path().join("run");
    ok(&[
        "optimize",
        fixture().to_str().unwrap(),
        "--coupling",
        path.to_str().unwrap(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    let state: StateFile = serde_json::from_str(&read(&dir.join("state.json"))).unwrap();
    assert_eq!(
        state.coupling,
        CouplingSource::File {
            path: path.display().to_string()
        }
    );

    // The recorded file is reloaded when the state is re-rendered.
    let bp = tmp.path().join("bp");
    ok(&[
        "beampattern",
        dir.join("state.json").to_str().unwrap(),
        "--out-dir",
        bp.to_str().unwrap(),
    ]);
    assert_eq!(read(&bp.join("beampattern.csv")), read(&dir.join("beampattern.csv")));

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "# coupling N=9\n1,2,3\n").unwrap();
    let out = cli(&[
        "optimize",
        fixture().to_str().unwrap(),
        "--coupling",
        bad.to_str().unwrap(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 0 has 3 numbers"));
}

#[test]
fn sweep_fans_out_and_summarizes() {
    let tmp = tempfile::tempdir().unwrap();
    fs::copy(fixture(), tmp.path().join("base.json")).unwrap();
    let sweep = tmp.path().join("sweep.json");
    fs::write(
        &sweep,
        r#"{ "scenario": "base.json", "parameter": "thresholds.clutter_gain_db.0",
             "values": [-10.0, 0.0], "schemes": ["aware", "random"], "seeds": [1] }"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    ok(&["sweep", sweep.to_str().unwrap(), "--jobs", "2", "--out-dir", out.to_str().unwrap()]);
    let summary = read(&out.join("summary.csv"));
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "run,value,scheme,seed,min_rate_bps_hz,sll_db,satisfied,error");
    assert_eq!(lines.len(), 5);
    for run in ["aware-0-s1", "aware-1-s1", "random-0-s1", "random-1-s1"] {
        assert!(lines.iter().any(|l| l.starts_with(&format!("{run},"))), "{run}");
        let snap: ScenarioFile = serde_json::from_str(&read(&out.join(run).join("scenario.json"))).unwrap();
        let expect = if run.contains("-0-") { -10.0 } else { 0.0 };
        assert_eq!(snap.thresholds.clutter_gain_db, vec![expect]);
    }
}

#[test]
fn reference_subcommand_writes_loadable_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("ref.json");
    ok(&["reference", path.to_str().unwrap()]);
    let file = ScenarioFile::load(&path).unwrap();
    assert_eq!(file, ScenarioFile::reference());
    assert_eq!(file.scenario().unwrap().users.len(), 1);
}
