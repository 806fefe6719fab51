use std::fs;
use std::process::{Command, Output};

fn doco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doco")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn run_ogd_default_three_passing_rows() {
    let o = doco(&["run-ogd"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("true")));
}

#[test]
fn out_of_range_lambda_is_a_config_error() {
    let o = doco(&["run-ogd", "--lambdas", "0.9,1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1.5"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "# comment\nT=300\nlambdas=1.5\n").unwrap();
    let o = doco(&["run-ogd", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config line 3"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "T=300\nseed=4\ngen=drifting-linear\n").unwrap();
    let csv = stdout(&doco(&["run-ogd", "--config", cfg.to_str().unwrap(), "--seed", "6"]));
    assert!(csv.contains("# T=300\n"));
    assert!(csv.contains("# seed=6\n"));
    assert!(data_rows(&csv).iter().all(|r| r.ends_with(",300,6,drifting-linear")));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let first = stdout(&doco(&[
        "run-sogd", "--T", "1024", "--tau", "256", "--dim", "2", "--seed", "3",
    ]));
    let echoed: String = first
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| !l.starts_with("schema=") && !l.starts_with("note:") && !l.starts_with("warning:"))
        .map(|l| format!("{l}\n"))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("echo.cfg");
    fs::write(&cfg, echoed).unwrap();
    let second = stdout(&doco(&["run-sogd", "--config", cfg.to_str().unwrap()]));
    assert_eq!(first, second);
}

#[test]
fn small_tau_warns_but_completes() {
    let o = doco(&["run-sogd", "--T", "512", "--tau", "8"]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: tau=8"));
    assert_eq!(data_rows(&stdout(&o)).len(), 7 + 20);
}

#[test]
fn verbose_sogd_writes_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sogd.csv");
    let o = doco(&[
        "run-sogd",
        "--T",
        "600",
        "--tau",
        "200",
        "--verbosity",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["sogd.omega.csv", "sogd.deviation.csv", "sogd.bits.csv"] {
        let body = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(body.lines().count(), 600 + 1, "{name}");
    }
    assert!(fs::read_to_string(&out).unwrap().contains("lambda,regret,bound"));
}

#[test]
fn sweep_density_follows_config() {
    let csv = stdout(&doco(&[
        "sweep-lambda",
        "--T",
        "2048",
        "--tau",
        "256",
        "--lambdas",
        "sweep:33",
    ]));
    assert_eq!(data_rows(&csv).len(), 33);
}
