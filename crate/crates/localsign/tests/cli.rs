use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_localsign"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("localsign-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const SUM3: &str = r#"{"coeff": {"p": 3, "m": 1, "f": 1}, "construction": "sum",
    "chars": [{"at_p": 2, "at_gen": 1}, {"at_p": 2, "at_gen": 2}]}"#;

#[test]
fn epsilon_table_report_has_sorted_keys_and_checks() {
    let out = run(&["epsilon-table", "--p", "5", "--kind", "ram-minus-p", "--max-order-exp", "2"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["certificates", "command", "input_digest", "passed", "results", "version"]);
    assert_eq!(v["results"]["checks"]["balanced"], true);
    assert_eq!(v["results"]["records"].as_array().unwrap().len(), 25);
    let first = text.find("\"certificates\"").unwrap();
    assert!(first < text.find("\"version\"").unwrap());
}

#[test]
fn epsilon_table_csv_and_out_file() {
    let path = scratch("table.csv", "");
    let out = run(
        &["epsilon-table", "--p", "3", "--kind", "unram", "--format", "csv", "--out", path.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("p,kind,delta_sq,k,sqrt_choice,order,exponents,"));
    assert_eq!(csv.lines().count(), 1 + 3);
}

#[test]
fn lsd_and_mazur_rubin_succeed() {
    let module = scratch("sum.json", SUM3);
    let out = run(&["lsd", "--module", module.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["dims"], serde_json::json!([0, 2, 0]));
    assert_eq!(v["results"]["agreement"], true);

    let pair = format!(
        r#"{{"first": {{"module": {SUM3}, "positive_summand": 1, "weight": 1}},
            "second": {{"module": {SUM3}, "positive_summand": 2, "weight": 2}}}}"#
    );
    let pair = scratch("pair.json", &pair);
    let out = run(&["mazur-rubin", "--pair", pair.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((v["results"]["delta"].as_u64(), v["results"]["holds"].as_bool()), (Some(1), Some(true)));
}

#[test]
fn input_errors_exit_two() {
    let bad_pair = scratch("bad_pair.json", r#"{"first": 1}"#);
    let anomalous = scratch(
        "anomalous.json",
        r#"{"coeff": {"p": 3, "m": 1, "f": 1}, "construction": "sum",
            "chars": [{"at_p": 1, "at_gen": 1}, {"at_p": 1, "at_gen": 2}]}"#,
    );
    for args in [
        vec!["mazur-rubin", "--pair", bad_pair.to_str().unwrap()],
        vec!["lsd", "--module", anomalous.to_str().unwrap()],
        vec!["lsd", "--module", "/nonexistent/module.json"],
        vec!["epsilon-table", "--p", "4", "--kind", "unram"],
        vec!["epsilon-table", "--p", "3", "--kind", "ramified"],
    ] {
        let out = run(&args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = run(&["mazur-rubin", "--pair", bad_pair.to_str().unwrap()], &[]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "input");
}

#[test]
fn budget_errors_exit_three() {
    let module = scratch("sum_budget.json", SUM3);
    let out = run(&["lsd", "--module", module.to_str().unwrap(), "--w-limit", "4"], &[("LOCALSIGN_MAX_W_LIMIT", "3")]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["epsilon-table", "--p", "7", "--kind", "unram"], &[("LOCALSIGN_MAX_P", "5")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn selfcheck_quick_passes() {
    let out = run(&["selfcheck"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["results"]["suites"].as_array().unwrap().len() >= 6);
}
