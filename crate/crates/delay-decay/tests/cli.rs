use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("delay-decay").chain(args.iter().copied());
    let code = delay_decay::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no `{key}` in\n{text}"));
    line[key.len()..].trim().parse().unwrap()
}

#[test]
fn check_prints_both_conditions() {
    let (code, out, _) = run(&["check", "--dist", "dirac:tau=0.3", "--mu", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("cond1 M(2mu) <= mu^2: ✓"));
    assert!(out.contains("cond2 M(mu)(M(mu)-1) < mu: ✓"));
    assert!((field(&out, "rate_bound_y:") + 0.5021).abs() < 1e-4);
}

#[test]
fn critical_dirac() {
    let (code, out, _) = run(&["critical", "--family", "dirac", "--lo", "0.2", "--hi", "0.5", "--tol", "1e-5"]);
    assert_eq!(code, 0);
    assert!((field(&out, "critical tau:") - 0.34657).abs() < 2e-5);
}

#[test]
fn infeasible_search_is_an_answer() {
    let (code, out, _) = run(&["mu-search", "--dist", "gamma:k=1,lambda=4.5"]);
    assert_eq!(code, 0);
    assert!(out.contains("feasible: false"));
    let (code, out, _) = run(&["mu-search", "--dist", "gamma:k=1,lambda=4.5", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["result"]["feasible"], false);
    assert!(v["result"]["search_trace"].as_array().unwrap().len() > 500);
}

#[test]
fn exit_codes() {
    let (code, _, err) = run(&["check", "--dist", "uniform:a=0.5,b=0.2", "--mu", "2"]);
    assert_eq!(code, 3);
    assert!(err.contains("--dist") && err.contains("b ≤ a"), "{err}");
    let (code, _, err) = run(&["check", "--dist", "gamma:k=1,k=2", "--mu", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("offset 10"), "{err}");
    let (code, _, err) = run(&["check", "--dist", "dirac:tau=0.3", "--mu", "2", "--frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.contains("--frobnicate"));
    let (code, _, _) = run(&["check", "--dist", "dirac:tau=0.3", "--mu", "0.5"]);
    assert_eq!(code, 3);
    let (code, _, err) = run(&["critical", "--family", "dirac", "--lo", "0.5", "--hi", "0.9"]);
    assert_eq!(code, 4, "{err}");
    let (code, _, err) = run(&["critical", "--family", "uniform", "--k", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("--k"));
    let (code, _, _) = run(&["simulate", "--dist", "dirac:tau=0.3", "--t-end", "1", "--h", "0.5"]);
    assert_eq!(code, 3);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify"));
}

#[test]
fn sweep_csv_and_threads() {
    let (code, out, _) = run(&["sweep", "--family", "uniform", "--a-grid", "0.3:0.4:0.05"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[1], "scan,critical,bracket,feasible_side");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("0.3,") && lines[2].ends_with(",below"));
    assert!(lines[4].starts_with("0.4,") && lines[4].ends_with(",none"));
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    let p = path.to_str().unwrap();
    let (code, out, _) = run(&["simulate", "--dist", "dirac:tau=0.3", "--t-end", "2", "--h", "0.01", "--out", p]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# dist=dirac:tau=0.3 t_end=2 h=0.01"));
    assert_eq!(text.lines().count(), 2 + 201);
    let (_, again, _) = run(&["simulate", "--dist", "dirac:tau=0.3", "--t-end", "2", "--h", "0.01"]);
    assert_eq!(again, text);
}

#[test]
fn history_table_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    std::fs::write(&path, "s,u\n-1,0\n0,1\n").unwrap();
    let p = path.to_str().unwrap();
    let (code, out, err) =
        run(&["simulate", "--dist", "dirac:tau=1", "--t-end", "1", "--h", "0.1", "--history", p]);
    assert_eq!(code, 0, "{err}");
    // u = 1 - t²/2 on [0, 1]
    let last: Vec<f64> = out.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[1] - 0.5).abs() < 1e-12);
}

#[test]
fn classify_and_verify() {
    let (code, out, _) = run(&["classify", "--dist", "dirac:tau=1.7", "--h", "0.01"]);
    assert_eq!(code, 0);
    assert!(out.contains("regime: growing_oscillation"));
    let (code, out, _) = run(&["verify", "--dist", "gamma:k=1,lambda=6"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 4);
    let (code, out, _) = run(&["verify", "--dist", "dirac:tau=0.5"]);
    assert_eq!(code, 1);
    assert!(out.contains("verify: FAIL"));
}

#[test]
fn config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("recipe.conf");
    std::fs::write(&path, "# recipe\nfamily = \"dirac\", tau = 0.3\nt_end = 5\nh = 0.1\n").unwrap();
    let p = path.to_str().unwrap();
    let (code, out, err) = run(&["simulate", "--config", p, "--h", "0.05"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("# dist=dirac:tau=0.3 t_end=5 h=0.05"));
    let (code, _, err) = run(&["simulate", "--config", "/nonexistent/recipe.conf"]);
    assert_eq!(code, 2);
    assert!(err.contains("--config"));
}

#[test]
fn binary_is_deterministic() {
    let exe = env!("CARGO_BIN_EXE_delay-decay");
    let args = ["sweep", "--family", "truncnormal", "--m-grid", "-1,0,0.5", "--format", "json"];
    let a = Command::new(exe).args(args).env("DELAY_DECAY_THREADS", "1").output().unwrap();
    let b = Command::new(exe).args(args).env("DELAY_DECAY_THREADS", "0").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let bad = Command::new(exe).args(args).env("DELAY_DECAY_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("DELAY_DECAY_THREADS"));
}
