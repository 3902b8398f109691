use std::path::Path;
use std::process::{Command, Output};

use radtherm::frame::ThermalFrame;
use radtherm::sensitivity::{read_budget_csv, read_sweep_csv};
use radtherm::surrogate::{load_model, LabeledDataset};

fn radtherm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radtherm"))
        .args(args)
        .env("RADTHERM_DATA_DIR", std::env::temp_dir().join("radtherm-cli-test-unused"))
        .output()
        .unwrap()
}

fn stdout_ok(args: &[&str]) -> String {
    let o = radtherm(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn number(args: &[&str]) -> f64 {
    stdout_ok(args).trim().parse().unwrap()
}

#[test]
fn model_b_with_unit_emissivity_equals_model_a() {
    let common = ["--ts", "950C", "--tw", "1105C", "--tg", "980C", "--alpha", "0.05"];
    let b: Vec<&str> = ["forward", "--model", "B", "--eps", "1.0"].iter().chain(&common).copied().collect();
    let a: Vec<&str> = ["forward", "--model", "A"].iter().chain(&common).copied().collect();
    assert_eq!(stdout_ok(&b), stdout_ok(&a));
}

#[test]
fn invert_of_forward_round_trips() {
    let s = stdout_ok(&["forward", "--model", "D", "--ts", "950C", "--tw", "1105C", "--tg", "980C", "--eps", "0.82", "--alpha", "0.05"]);
    let t = number(&["invert", "--model", "D", "--signal", s.trim(), "--tw", "1378.15K", "--tg", "980"]);
    assert!((t - 950.0).abs() <= 0.01, "{t}");
}

#[test]
fn model_b_budget_is_emissivity_dominated() {
    let text = stdout_ok(&["budget", "--model", "B", "--k", "1.96", "--grid", "11"]);
    let recs = read_budget_csv(&text).unwrap();
    assert!(!recs.is_empty());
    for r in recs.iter().filter(|r| r.parameter == "emissivity") {
        assert!(r.combined_uc_c > 0.0);
        assert!(r.u_c * r.u_c / (r.combined_uc_c * r.combined_uc_c) > 0.99, "{r:?}");
    }
}

#[test]
fn artifacts_round_trip_and_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n).to_str().unwrap().to_string();

    let sweep = stdout_ok(&["sweep", "--model", "C", "--param", "wall_temp", "--grid", "5", "--temps", "900C,950C"]);
    let recs = read_sweep_csv(&sweep).unwrap();
    assert_eq!(recs.len(), 10);
    assert_eq!(sweep, stdout_ok(&["sweep", "--model", "C", "--param", "wall_temp", "--grid", "5", "--temps", "900C,950C"]));

    stdout_ok(&["dataset", "--n", "1200", "--seed", "7", "--out", &d("a.csv")]);
    stdout_ok(&["dataset", "--n", "1200", "--seed", "7", "--out", &d("b.csv")]);
    let a = std::fs::read(d("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d("b.csv")).unwrap());
    let data = LabeledDataset::read_csv(Path::new(&d("a.csv"))).unwrap();
    assert_eq!(data.len(), 1200);
    assert_eq!(data.seed, 7);
    assert_eq!(data.to_csv().as_bytes(), &a[..]);

    for m in ["m1.mlpt", "m2.mlpt"] {
        stdout_ok(&["train", "--data", &d("a.csv"), "--epochs", "2", "--seed", "3", "--model-out", &d(m), "--out", &d(&format!("{m}.json"))]);
    }
    assert_eq!(std::fs::read(d("m1.mlpt")).unwrap(), std::fs::read(d("m2.mlpt")).unwrap());
    let report = |m: &str| std::fs::read_to_string(d(&format!("{m}.mlpt.json"))).unwrap().replace(&format!("{m}.mlpt"), "M");
    assert_eq!(report("m1"), report("m2"));
    let model = load_model(Path::new(&d("m1.mlpt"))).unwrap();
    assert_eq!(model.training_seed(), 3);

    let bench = stdout_ok(&["bench", "--model-file", &d("m1.mlpt"), "--n", "1000", "--repeats", "1"]);
    let v: serde_json::Value = serde_json::from_str(&bench).unwrap();
    assert_eq!(v["rows"], 1000);
    assert!(v["speedup"].as_f64().unwrap() > 0.0);

    stdout_ok(&["render", "--width", "40", "--height", "8", "--out", &d("f1.thfr")]);
    stdout_ok(&["render", "--width", "40", "--height", "8", "--out", &d("f2.thfr")]);
    assert_eq!(std::fs::read(d("f1.thfr")).unwrap(), std::fs::read(d("f2.thfr")).unwrap());
    let f = ThermalFrame::load(Path::new(&d("f1.thfr"))).unwrap();
    assert_eq!(f.values.len(), 320);
    assert_eq!(f.encode(), std::fs::read(d("f1.thfr")).unwrap());
}

#[test]
fn render_into_store_uses_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_radtherm"))
        .args(["render", "--width", "20", "--height", "4"])
        .env("RADTHERM_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(meta["camera_id"], "demo");
    assert!(dir.path().join("index.json").exists());
}

#[test]
fn usage_and_domain_exit_codes() {
    assert_eq!(radtherm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(radtherm(&["forward", "--ts", "950C", "--unknown"]).status.code(), Some(2));
    assert_eq!(radtherm(&["forward", "--ts", "950C", "--eps=-0.1"]).status.code(), Some(1));
    assert_eq!(radtherm(&["train", "--data", "/nonexistent.csv"]).status.code(), Some(1));
}
