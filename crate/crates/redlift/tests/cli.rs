use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_redlift"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn redlift")
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn redlift");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("redlift-cli-{}-{}", tag, std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn gen_to(dir: &Scratch, name: &str, args: &[&str]) -> String {
    let path = dir.path(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    let o = run(&full);
    assert!(o.status.success(), "gen failed: {}", String::from_utf8_lossy(&o.stderr));
    path
}

fn failing_checks(report: &Value) -> Vec<String> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["pass"].as_bool().unwrap())
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn gen_is_deterministic() {
    for kind in ["data_set", "omega", "quadruple", "system", "schur_param"] {
        let a = run(&["gen", kind, "--seed", "17", "--K", "4"]);
        let b = run(&["gen", kind, "--seed", "17", "--K", "4"]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{kind}");
        let c = run(&["gen", kind, "--seed", "18", "--K", "4"]);
        assert_ne!(a.stdout, c.stdout, "{kind}");
    }
}

#[test]
fn gen_records_metadata() {
    let v = json(&run(&["gen", "omega", "--seed", "5", "--isometric"]));
    assert_eq!(v["kind"], "omega");
    assert_eq!(v["meta"]["generator"], "chacha8");
    assert_eq!(v["meta"]["seed"], 5);
    assert!(v["meta"]["args"].as_array().unwrap().iter().any(|a| a == "isometric"));
}

#[test]
fn instances_round_trip_bit_exactly() {
    let dir = Scratch::new("roundtrip");
    for kind in ["data_set", "omega", "quadruple", "system", "schur_param"] {
        let first = gen_to(&dir, "a.json", &[kind, "--seed", "3", "--K", "3"]);
        let parsed: Value = serde_json::from_slice(&std::fs::read(&first).unwrap()).unwrap();
        let second = dir.path("b.json");
        std::fs::write(&second, serde_json::to_vec(&parsed).unwrap()).unwrap();
        let reparsed: Value = serde_json::from_slice(&std::fs::read(&second).unwrap()).unwrap();
        assert_eq!(parsed, reparsed, "{kind}");
        let a = run(&["verify", &first, "--K", "3"]);
        let b = run(&["verify", &second, "--K", "3"]);
        assert_eq!(a.stdout, b.stdout, "{kind}");
    }
}

#[test]
fn from_omega_reproduces_omega_entries() {
    let dir = Scratch::new("fromomega");
    let w = gen_to(&dir, "w.json", &["omega", "--seed", "11"]);
    let d = gen_to(&dir, "d.json", &["data_set", "--from-omega", &w, "--K", "3"]);
    let o = run(&["verify", &d, "--K", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let report = json(&o);
    let rt = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "omega:round-trip")
        .unwrap();
    assert!(rt["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn verify_passes_on_generated_data_sets() {
    let dir = Scratch::new("verify");
    for extra in [&[][..], &["--strict"][..], &["--isometric"][..]] {
        let mut args = vec!["data_set", "--seed", "7", "--K", "6"];
        args.extend_from_slice(extra);
        let path = gen_to(&dir, "d.json", &args);
        let o = run(&["verify", &path, "--K", "6"]);
        let report = json(&o);
        assert_eq!(report["summary"], "pass", "{:?}: {:?}", extra, failing_checks(&report));
        assert!(o.status.success());
        assert!(report["checks"].as_array().unwrap().len() >= 12);
        for name in ["intertwining:identity", "intertwining:order", "inverse:relation"] {
            assert!(report["checks"].as_array().unwrap().iter().any(|c| c["name"] == name), "{name}");
        }
    }
}

#[test]
fn verify_passes_on_other_kinds() {
    let dir = Scratch::new("kinds");
    for args in [
        &["omega", "--seed", "2"][..],
        &["quadruple", "--seed", "2"][..],
        &["system", "--seed", "2"][..],
        &["system", "--seed", "2", "--norm", "0.7"][..],
        &["schur_param", "--seed", "2"][..],
        &["schur_param", "--seed", "2", "--state", "2"][..],
    ] {
        let path = gen_to(&dir, "x.json", args);
        let o = run(&["verify", &path, "--K", "6"]);
        let report = json(&o);
        assert!(o.status.success(), "{:?}: {:?}", args, failing_checks(&report));
    }
}

#[test]
fn corrupted_order_condition_fails_verification() {
    let dir = Scratch::new("corrupt");
    let path = gen_to(&dir, "d.json", &["data_set", "--seed", "7", "--K", "4"]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for entry in v["payload"]["q"]["data"].as_array_mut().unwrap() {
        for part in entry.as_array_mut().unwrap() {
            *part = Value::from(part.as_f64().unwrap() * 0.5);
        }
    }
    let bad = dir.path("bad.json");
    std::fs::write(&bad, serde_json::to_vec(&v).unwrap()).unwrap();
    let o = run(&["verify", &bad, "--K", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let report = json(&o);
    assert_eq!(report["summary"], "fail");
    assert!(failing_checks(&report).iter().any(|n| n == "intertwining:order"));
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = Scratch::new("malformed");
    let bad = dir.path("bad.json");
    std::fs::write(&bad, r#"{"kind":"omega","payload":{"omega1":1}}"#).unwrap();
    let o = run(&["verify", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = run(&["verify", &dir.path("missing.json")]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["gen", "omega", "--tol-check", "2.0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn isometric_coefficient_defect_shrinks_with_degree() {
    let dir = Scratch::new("defect");
    let w = gen_to(&dir, "w.json", &["omega", "--isometric", "--seed", "4"]);
    let defect = |k: &str| -> f64 {
        let report = json(&run(&["verify", &w, "--K", k]));
        report["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == "coefficients:isometry-defect")
            .unwrap()["residual"]
            .as_f64()
            .unwrap()
    };
    let (d4, d8, d12) = (defect("4"), defect("8"), defect("12"));
    assert!(d8 < d4 && d12 < d8, "{d4} {d8} {d12}");
    assert!(d12 / d8 <= 2.0 * d8 / d4, "{d4} {d8} {d12}");
}

fn sweep_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn sweep_starts_at_the_unperturbed_norm() {
    let dir = Scratch::new("sweep");
    let q = gen_to(&dir, "q.json", &["quadruple", "--seed", "6"]);
    let o = run(&["sweep", &q, "--K", "8", "--steps", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("t,norm,bound2,bound3"));
    let rows = sweep_rows(&text);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][0], "0");

    let t = json(&run(&["transform", &q, "--K", "8"]));
    let at_zero: f64 = rows[0][1].parse().unwrap();
    assert!((at_zero - t["gamma_norm"].as_f64().unwrap()).abs() <= 1e-12);
    for r in &rows {
        let norm: f64 = r[1].parse().unwrap();
        let b2: f64 = r[2].parse().unwrap();
        assert!(norm <= b2 + 1e-10);
        if !r[3].is_empty() {
            assert!(b2 <= r[3].parse::<f64>().unwrap() + 1e-10);
        }
    }
}

#[test]
fn sweep_is_flat_when_the_parameter_is_decoupled() {
    let dir = Scratch::new("flat");
    let q = gen_to(&dir, "q.json", &["quadruple", "--g-zero", "--seed", "6"]);
    let rows = sweep_rows(&stdout(&run(&["sweep", &q, "--K", "8", "--steps", "4"])));
    let first: f64 = rows[0][1].parse().unwrap();
    for r in &rows {
        assert!((r[1].parse::<f64>().unwrap() - first).abs() <= 1e-12);
    }
}

#[test]
fn inverse_recovers_the_normal_form() {
    let dir = Scratch::new("inverse");
    let w = gen_to(&dir, "w.json", &["omega", "--seed", "8"]);
    let q = gen_to(&dir, "q.json", &["quadruple", "--from-omega", &w]);
    let o = run(&["inverse", &q, "--K", "4"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["report"]["summary"], "pass");
    for key in ["psi", "phi"] {
        let m = &v[key];
        let n = m["rows"].as_u64().unwrap() as usize;
        assert_eq!(m["cols"].as_u64().unwrap() as usize, n);
        for (i, e) in m["data"].as_array().unwrap().iter().enumerate() {
            let expect = if i / n == i % n { 1.0 } else { 0.0 };
            assert!((e[0].as_f64().unwrap() - expect).abs() <= 1e-9, "{key}");
            assert!(e[1].as_f64().unwrap().abs() <= 1e-9, "{key}");
        }
    }
    let recovered = dir.path("w2.json");
    std::fs::write(&recovered, serde_json::to_vec_pretty(&v["omega"]).unwrap()).unwrap();
    let o = run(&["equiv", &w, &recovered]);
    assert!(o.status.success());
    assert_eq!(json(&o)["equivalent"], true);
}

#[test]
fn inverse_rejects_non_coisometric_input() {
    let dir = Scratch::new("reject");
    let s = gen_to(&dir, "s.json", &["system", "--norm", "0.6", "--seed", "1"]);
    let o = run(&["inverse", &s, "--split", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = run(&["inverse", &s]);
    assert_eq!(o.status.code(), Some(2));

    let q = gen_to(&dir, "q.json", &["quadruple", "--seed", "3"]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&q).unwrap()).unwrap();
    for block in ["z", "b", "c", "d"] {
        for entry in v["payload"]["system"][block]["data"].as_array_mut().unwrap() {
            for part in entry.as_array_mut().unwrap() {
                *part = Value::from(part.as_f64().unwrap() * 0.9);
            }
        }
    }
    let shrunk = dir.path("shrunk.json");
    std::fs::write(&shrunk, serde_json::to_vec(&v).unwrap()).unwrap();
    let o = run(&["inverse", &shrunk]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not co-isometric, defect"), "{err}");
}

#[test]
fn product_and_equivalence_of_systems() {
    let dir = Scratch::new("product");
    let a = gen_to(&dir, "a.json", &["system", "--seed", "1"]);
    let b = gen_to(&dir, "b.json", &["system", "--seed", "2"]);
    let p = json(&run(&["product", &a, &b]));
    assert_eq!(p["class"], "co_isometry");
    assert_eq!(json(&run(&["equiv", &a, &a]))["equivalent"], true);
    let o = run(&["equiv", &a, &b]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["equivalent"], false);
}

#[test]
fn interpolant_reports_and_rejects_wrong_shapes() {
    let dir = Scratch::new("interp");
    let d = gen_to(&dir, "d.json", &["data_set", "--seed", "9", "--K", "5"]);
    let o = run(&["interpolant", &d, "--K", "5"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["report"]["summary"], "pass");
    let p = gen_to(&dir, "p.json", &["schur_param", "--dims", "3,3"]);
    let o = run(&["interpolant", &d, "--param", &p]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dash_means_standard_streams() {
    let generated = run(&["gen", "data_set", "--seed", "12", "--K", "4"]);
    let o = run_stdin(&["verify", "-", "--K", "4"], &generated.stdout);
    assert!(o.status.success());
    assert_eq!(json(&o)["summary"], "pass");
    let o = run_stdin(&["gen", "quadruple", "--from-omega", "-"], &run(&["gen", "omega"]).stdout);
    assert!(o.status.success());
    assert_eq!(json(&o)["kind"], "quadruple");
}
