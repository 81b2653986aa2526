use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_witten-index"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn witten-index")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("witten-index-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn clifford_reports_and_rejects_zero() {
    let ok = run(&["clifford", "-n", "5", "--json"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["ok"], true);

    let bad = run(&["clifford", "-n", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn random_instance_is_deterministic_and_cross_checks() {
    let a = run(&["random-instance", "-n", "2", "--seed", "11"]);
    let b = run(&["random-instance", "-n", "2", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let spec = tmp("random.json");
    std::fs::write(&spec, &a.stdout).unwrap();
    let out = run(&["local-index", spec.to_str().unwrap(), "--cross-check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["agree"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 3);
}

#[test]
fn de_rham_orientations() {
    for (lin, expected) in [("1,0,0,1", 1), ("1,0,0,-1", -1), ("0,-2,1,0", 1)] {
        let spec = run(&["de-rham-spec", "--linearization", lin]);
        assert_eq!(spec.status.code(), Some(0));
        let path = tmp(&format!("derham-{}.json", lin.replace(',', "_")));
        std::fs::write(&path, &spec.stdout).unwrap();
        let out = run(&["local-index", path.to_str().unwrap(), "--method", "grid"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["index"], expected, "linearization {lin}");
    }
}

#[test]
fn improper_spec_exits_with_precondition_code() {
    let spec = run(&["random-instance", "-n", "2", "--seed", "5"]);
    let mut v: serde_json::Value = serde_json::from_slice(&spec.stdout).unwrap();
    for e in v["Zs"][1]["entries"].as_array_mut().unwrap() {
        *e = serde_json::json!([0.0, 0.0]);
    }
    let path = tmp("improper.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = run(&["local-index", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("proper singular point condition fails"), "{err}");
}

#[test]
fn missing_spec_is_usage_error() {
    let out = run(&["local-index", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_counterexample_csv_and_summary() {
    let csv = tmp("counter.csv");
    let out = run(&[
        "spectrum",
        "circle-counterexample",
        "--s",
        "1:10:2",
        "--N",
        "64",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for p in v["points"].as_array().unwrap() {
        assert!(p["integer_deviation"].as_f64().unwrap() < 1e-6);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("s,k,eigenvalue,grading,cluster_mu"));
    assert_eq!(text.lines().count(), 1 + 2 * 129);
}

#[test]
fn spectrum_morse_summary_has_fit() {
    let summary = tmp("morse.json");
    let out = run(&[
        "spectrum",
        "circle-morse",
        "--s",
        "10:100:3",
        "--N",
        "128",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert!(v["fit"]["violations"].as_array().unwrap().is_empty());
    assert!(v["points"].as_array().unwrap().iter().all(|p| p["index"] == 0));
}

#[test]
fn spectrum_rejects_bad_range() {
    for s in ["10:1:3", "abc", "1:2", "-1"] {
        let out = run(&["spectrum", "circle-morse", "--s", s]);
        assert_eq!(out.status.code(), Some(2), "range {s}");
    }
}

#[test]
fn geometry_commands() {
    let ph = run(&["poincare-hopf", "--preset", "sphere"]);
    assert_eq!(ph.status.code(), Some(0));
    assert_eq!(json(&ph)["chi"], 2);

    let unknown = run(&["poincare-hopf", "--preset", "klein"]);
    assert_eq!(unknown.status.code(), Some(2));

    let pin = run(&["pin-sphere", "-m", "3"]);
    assert_eq!(json(&pin)["total"], 2);

    let sub = run(&["submanifold", "--n-m", "2", "--normal-rank", "1", "--omega", "0.7"]);
    assert_eq!(sub.status.code(), Some(0));
    assert_eq!(json(&sub)["index"], 0);
}

#[test]
fn clifford_three_has_dimension_two() {
    let out = run(&["clifford", "-n", "3", "--json"]);
    assert_eq!(json(&out)["dim"], 2);
}

#[test]
fn odd_configuration_has_index_zero() {
    let single = run(&["random-instance", "-n", "3", "--seed", "4"]);
    let path = tmp("odd-single.json");
    std::fs::write(&path, &single.stdout).unwrap();
    let local = json(&run(&["local-index", path.to_str().unwrap()]));
    assert_eq!(local["index"].as_i64().unwrap().abs(), 1);

    let torus = run(&["random-instance", "-n", "3", "--seed", "4", "--torus"]);
    let path = tmp("odd-torus.json");
    std::fs::write(&path, &torus.stdout).unwrap();
    let out = run(&["local-index", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["index"], 0);
    assert_eq!(v["per_point"].as_array().unwrap().len(), 8);
}
