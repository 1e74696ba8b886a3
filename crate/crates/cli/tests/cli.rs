use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dedekind"))
        .args(args)
        .env_remove("DEDEKIND_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sum_json() {
    let out = run(&["sum", "--i", "1", "--j", "1", "--p", "2", "--q", "3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["s"], "-1/18");
    assert_eq!(v["R"], "12");
    assert_eq!(v["check"], true);
    assert!(v["sI"].is_string() && v["sR"].is_string());
}

#[test]
fn sum_plain_and_methods() {
    let out = run(&["sum", "--i", "2", "--j", "2", "--p", "3", "--q", "7"]);
    let direct = stdout(&out);
    for m in ["closed-form", "closed-form-literal", "table", "todd"] {
        let out = run(&["sum", "--i", "2", "--j", "2", "--p", "3", "--q", "7", "--method", m]);
        assert_eq!(stdout(&out), direct, "{m}");
    }
    let out = run(&["sum", "--i", "1", "--j", "2", "--p", "3", "--q", "7"]);
    assert_eq!(stdout(&out), "0\n");
    let out = run(&["sum", "--i", "1", "--j", "1", "--p", "2", "--q", "3", "--method", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["sum", "--i", "1", "--j", "1", "--p", "2", "--q", "4"]).status.code(), Some(2));
    assert_eq!(run(&["sum", "--i", "1", "--j", "1", "--p", "x", "--q", "4"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["unit", "--D", "12"]).status.code(), Some(2));
    assert_eq!(run(&["zeta", "--matrix", "2,3,1,3", "--N", "2"]).status.code(), Some(2));
    assert_eq!(run(&["zeta", "--matrix", "2,3,1", "--N", "2"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let out = run(&["equidist", "--i", "1", "--j", "1", "--qmax", "5", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn cf_csv() {
    let out = run(&["cf", "--p", "2", "--q", "3"]);
    assert_eq!(stdout(&out), "k,p_k,q_k,D_k,a_k\n-1,1,0,-3,\n0,0,1,2,\n1,1,1,-1,1\n2,2,3,0,2\n");
    let out = run(&["cf", "--p", "2", "--q", "3", "--parity", "odd"]);
    assert_eq!(stdout(&out).lines().count(), 6);
}

#[test]
fn todd_csv() {
    let out = run(&["todd", "--p", "1", "--q", "2", "--degree", "2", "--check-numeric"]);
    assert_eq!(out.status.code(), Some(0));
    // t_02(1,2) = 2 (B_2(0) + B_2(1/2)) and t_11(1,2) = 2 (0 + 1/4)
    assert_eq!(stdout(&out), "i,j,t_ij\n0,2,1/6\n1,1,1/2\n2,0,1/6\n");
}

#[test]
fn unit_and_matrix() {
    let v = json(&run(&["unit", "--D", "2"]));
    assert_eq!((v["fundamental"]["x"].as_i64(), v["fundamental"]["y"].as_i64()), (Some(2), Some(2)));
    assert_eq!(v["fundamental"]["norm"], -1);
    assert_eq!(v["totally_positive"]["x"], 6);
    let v = json(&run(&["matrix", "--D", "5"]));
    let (p, q, r, s) = (v["p"].as_i64().unwrap(), v["q"].as_i64().unwrap(), v["r"].as_i64().unwrap(), v["s"].as_i64().unwrap());
    assert_eq!(p * s - q * r, 1);
    assert_eq!(p + s, 3);
    assert!(0 < p && p < q);
}

#[test]
fn zeta_json() {
    let v = json(&run(&["zeta", "--D", "5", "--N", "2"]));
    assert_eq!(v["value"], "1/30");
    assert_eq!(v["method"], "both");
    assert_eq!(v["agreement"], true);
    let v = json(&run(&["zeta", "--D", "5", "--N", "2", "--siegel"]));
    assert_eq!((v["value"].as_str(), v["method"].as_str()), (Some("1/30"), Some("siegel")));
    let a = json(&run(&["zeta", "--matrix", "2,3,1,2", "--N", "3", "--meyer"]));
    let b = json(&run(&["zeta", "--matrix", "2,3,1,2", "--N", "3", "--siegel"]));
    assert_eq!(a["value"], b["value"]);
}

#[test]
fn equidist_csv_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |path: &std::path::Path, workers: &'static str| {
        vec![
            "equidist".to_string(), "--i".into(), "1".into(), "--j".into(), "3".into(),
            "--qmax".into(), "60".into(), "--out".into(), path.display().to_string(),
            "--weyl".into(), "1,1".into(), "--weil".into(), "50".into(), "--workers".into(), workers.into(),
        ]
    };
    let run_with = |v: Vec<String>| {
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        run(&refs)
    };
    let oa = run_with(args(&a, "1"));
    let ob = run_with(args(&b, "4"));
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (va, vb) = (json(&oa), json(&ob));
    assert_eq!(va["weyl"], vb["weyl"]);
    assert_eq!(va["weil"]["passed"], true);
    let text = std::fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,p,x,y,x_exact,y_exact"));
    assert_eq!(lines.count() as u64, va["rows"].as_u64().unwrap());
    let again = run_with(args(&a, "1"));
    assert_eq!(again.stdout, oa.stdout);
}

#[test]
fn verify_suites() {
    for (suite, extra) in [
        ("oracle", vec!["--qmax", "30"]),
        ("hickerson", vec!["--qmax", "60"]),
        ("tables", vec!["--qmax", "30"]),
        ("todd", vec!["--qmax", "12"]),
        ("zeta", vec!["--D", "3,5,13", "--matrices", "5"]),
        ("congruence", vec!["--qmax", "60"]),
        ("weyl", vec!["--xmax", "400", "--pmax", "100"]),
    ] {
        let mut args = vec!["verify", "--suite", suite];
        args.extend(extra);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", stdout(&out));
        let v = json(&out);
        assert_eq!(v["suite"], suite);
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn verify_failure_exit_code() {
    // at this scale the Weyl sums have not yet dropped below the threshold
    let out = run(&["verify", "--suite", "weyl", "--xmax", "20", "--pmax", "20"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["passed"], false);
}
