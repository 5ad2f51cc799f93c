use std::path::PathBuf;
use std::process::Command;

fn qflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qflow"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn list_and_explain() {
    let out = qflow().arg("list-suites").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for s in ["identities", "growth", "flow", "trace", "action"] {
        assert!(text.contains(s));
    }
    let out = qflow().args(["explain", "flow"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("picard"));
}

#[test]
fn trace_csv_passes() {
    let out = qflow().args(["run", "--suite", "trace", "--format", "csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,trace_direct,trace_flow,theta_ref,abs_err,theta_err,pass"));
    assert_eq!(lines.filter(|l| l.ends_with(",true")).count(), 6);
}

#[test]
fn invalid_config_exits_2() {
    let out = qflow().args(["run", "--suite", "trace", "--cap", "4", "--cutoff", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("cap"));

    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "dim = 9\n").unwrap();
    let out = qflow().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = qflow().args(["run", "--suite", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_tolerance_exits_1() {
    let out = qflow().args(["run", "--suite", "trace", "--tol", "theta=1e-300"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("FAIL"));
}

#[test]
fn json_is_deterministic_and_config_file_applies() {
    let cfg = scratch("run.cfg");
    std::fs::write(&cfg, "# small run\ndim = 2\nsamples = 2\nsuite = identities,flow\n").unwrap();
    let run = |name: &str| {
        let path = scratch(name);
        let st = qflow().args(["run", "--format", "json", "--config"]).arg(&cfg).arg("--out").arg(&path).status().unwrap();
        assert!(st.success());
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        v["metadata"]["wall_time_s"] = serde_json::Value::Null;
        v
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a, b);
    assert_eq!(a["metadata"]["config"]["dim"], "2");
    let suites: std::collections::BTreeSet<_> =
        a["records"].as_array().unwrap().iter().map(|r| r["suite"].as_str().unwrap().to_string()).collect();
    assert_eq!(suites.into_iter().collect::<Vec<_>>(), ["flow", "identities"]);
}

#[test]
fn multi_suite_csv_files() {
    let out = scratch("multi.csv");
    let st = qflow().args(["run", "--suite", "trace,action", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    for s in ["trace", "action"] {
        let p = out.with_file_name(format!("multi.{s}.csv"));
        assert!(std::fs::read_to_string(p).unwrap().lines().count() > 1);
    }
}
