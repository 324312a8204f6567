use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn instances() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn instance(name: &str) -> String {
    instances().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_struct-wdro"))
        .args(args)
        .env_remove("STRUCT_WDRO_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn uq_prints_one_row_and_writes_json() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("uq.json");
    let o = run(&[
        "uq",
        "--instance",
        &instance("two_plane.json"),
        "--M",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.starts_with("M=2 value=-1.91785714"), "{line}");
    assert!(line.contains("status=Optimal"));
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rec["M"], 2);
    assert!((rec["value"].as_f64().unwrap() + 1.9178571428571427).abs() < 1e-7);
    assert_eq!(rec["n_vars"], 34);
}

#[test]
fn uq_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let o = run(&["uq", "--instance", &instance("two_plane.json"), "--M", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let broken = write(
        &dir,
        "broken.json",
        "{\n  \"nominal\": {\"atoms\": [[1.0]],\n",
    );
    let o = run(&["uq", "--instance", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
    let o = run(&[
        "uq",
        "--instance",
        &instance("two_plane.json"),
        "--tol",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["uq", "--instance", &instance("missing.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cap_is_reported_with_exit_three() {
    let o = run(&[
        "uq",
        "--instance",
        &instance("two_plane.json"),
        "--M",
        "10",
        "--cap",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_struct-wdro"))
        .args(["uq", "--instance", &instance("two_plane.json"), "--M", "10"])
        .env("STRUCT_WDRO_CAP", "50")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_emits_nonincreasing_curve() {
    let o = run(&[
        "sweep",
        "--instance",
        &instance("two_plane.json"),
        "--M-range",
        "2..10",
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(
        rows[0],
        ["M", "value", "status", "n_vars", "n_rows", "solve_ms"]
    );
    assert_eq!(rows.len(), 1 + 9 + 1);
    let values: Vec<f64> = rows[1..10].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-7), "{values:?}");
    assert_eq!(rows[10][0], "unstructured");
    assert!((rows[10][1].parse::<f64>().unwrap() + 0.875).abs() < 1e-7);
}

#[test]
fn sweep_at_zero_radius_is_constant() {
    let o = run(&[
        "sweep",
        "--instance",
        &instance("two_plane.json"),
        "--rho",
        "0",
        "--M-range",
        "2..5",
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for row in &csv_rows(&stdout(&o))[1..] {
        assert!(
            (row[1].parse::<f64>().unwrap() + 2.875).abs() < 1e-7,
            "{row:?}"
        );
    }
}

#[test]
fn sweep_marks_capped_rows() {
    let o = run(&[
        "sweep",
        "--instance",
        &instance("two_plane.json"),
        "--M-range",
        "2,3,12",
        "--cap",
        "2000",
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[1][2], "Optimal");
    assert_eq!(rows[3][0], "12");
    assert_eq!(rows[3][2], "CapExceeded");
    let o = run(&[
        "sweep",
        "--instance",
        &instance("two_plane.json"),
        "--M-range",
        "12",
        "--cap",
        "2000",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_is_deterministic() {
    let args = [
        "sweep",
        "--instance",
        &instance("two_plane.json"),
        "--M-range",
        "2..6",
        "--no-timing",
        "--seed",
        "3",
    ];
    let a = run(&args);
    let b = run(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn dro_reports_decision_and_best_level() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("dro.csv");
    let o = run(&[
        "dro",
        "--instance",
        &instance("outer_decision.json"),
        "--no-timing",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = csv_rows(&text);
    assert_eq!(
        rows[0],
        ["M", "theta", "value", "proxy", "status", "n_vars", "n_rows", "solve_ms"]
    );
    assert_eq!(rows.len(), 1 + 7 + 1);
    for row in &rows[1..8] {
        let theta: f64 = row[1].parse().unwrap();
        assert!((-3.0..=3.0).contains(&theta));
        assert!((row[2].parse::<f64>().unwrap() + 1.375).abs() < 1e-6);
    }
    assert_eq!(rows[8][0], "M*");
    assert!(rows[8][1].parse::<usize>().is_ok());
}

#[test]
fn dro_singleton_and_empty_decision_sets() {
    let dir = TempDir::new().unwrap();
    let base: Value =
        serde_json::from_str(&std::fs::read_to_string(instance("outer_decision.json")).unwrap())
            .unwrap();
    let mut single = base.clone();
    single["loss"]["theta_box"] = serde_json::json!([[0.5, 0.5]]);
    let path = write(&dir, "single.json", &single.to_string());
    let o = run(&[
        "dro",
        "--instance",
        &path,
        "--M-range",
        "2..4",
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for row in &csv_rows(&stdout(&o))[1..4] {
        assert!(
            (row[1].parse::<f64>().unwrap() - 0.5).abs() < 1e-9,
            "{row:?}"
        );
    }
    let mut empty = base;
    empty["loss"]["theta_box"] = serde_json::json!([[1.0, -1.0]]);
    let path = write(&dir, "empty.json", &empty.to_string());
    let o = run(&["dro", "--instance", &path]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["dro", "--instance", &instance("two_plane.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wasserstein_examples() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.json");
    let o = run(&[
        "wasserstein",
        &instance("two_plane_perturbed.json"),
        &instance("two_plane_nominal.json"),
        "--plan",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = stdout(&o).lines().next().unwrap().parse::<f64>().unwrap();
    assert!((first - 0.19).abs() < 1e-9);
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rec["plan"].as_array().unwrap().len(), 2);
    let same = run(&[
        "wasserstein",
        &instance("two_plane_nominal.json"),
        &instance("two_plane_nominal.json"),
    ]);
    assert_eq!(stdout(&same).trim().parse::<f64>().unwrap(), 0.0);
    let plane = write(
        &dir,
        "plane.json",
        r#"{"atoms": [[0.0, 1.0]], "weights": [1.0]}"#,
    );
    let o = run(&["wasserstein", &plane, &instance("two_plane_nominal.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_examples() {
    let o = run(&["oracle", "--case", "lifted/UMsym", "--rho", "1", "--M", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o)
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - 2.598076).abs() < 1e-6, "{v}");
    let o = run(&["oracle", "--case", "variance", "--rho", "0.3"]);
    let text = stdout(&o);
    assert!(text.contains("variance/S 0.3\n"), "{text}");
    assert!(text.contains("variance/U 0.6\n"), "{text}");
    assert_eq!(
        run(&["oracle", "--case", "unknown", "--rho", "0.3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["oracle", "--case", "lifted", "--rho", "0.3", "--M", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn compare_values_are_ordered() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cmp.json");
    let o = run(&[
        "compare",
        "--instance",
        &instance("two_plane.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let u = rec["unstructured"].as_f64().unwrap();
    let sym = rec["symmetrized"].as_f64().unwrap();
    assert!(sym <= u + 1e-7);
    assert!(rec["multitransport"].as_f64().is_some());
}

#[test]
fn json_results_round_trip_exactly() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.json");
    let o = run(&[
        "oracle",
        "--case",
        "symmetrization",
        "--rho",
        "0.37",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let parsed: Value = serde_json::from_str(&text).unwrap();
    for (line, rec) in stdout(&o).lines().zip(parsed.as_array().unwrap()) {
        let printed: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert_eq!(printed.to_bits(), rec["value"].as_f64().unwrap().to_bits());
    }
    let again: Value = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(again, parsed);
}

#[test]
fn fixtures_subcommand_matches_stored_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("golden.json");
    let o = run(&["fixtures", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fresh: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let stored_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/golden.json");
    let stored: Value =
        serde_json::from_str(&std::fs::read_to_string(stored_path).unwrap()).unwrap();
    let (a, b) = (
        fresh["entries"].as_array().unwrap(),
        stored["entries"].as_array().unwrap(),
    );
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x["case"], y["case"]);
        assert!((x["value"].as_f64().unwrap() - y["value"].as_f64().unwrap()).abs() <= 1e-6);
    }
}
