use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ktree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktree"))
        .args(args)
        .output()
        .expect("spawn ktree")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).expect("json on stdout")
}

const LEVELWISE: &[&str] = &[
    "check-levelwise", "--k", "2", "--p", "2", "--delta", "-1", "--weight", "power:a=1", "--jmax", "40",
    "--rmax", "40",
];

#[test]
fn levelwise_example_is_bounded() {
    let mut args = LEVELWISE.to_vec();
    args.extend(["--format", "json"]);
    let o = ktree(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let sup = v["empirical_sup_logk"].as_f64().unwrap();
    assert!(2f64.powf(sup) <= 1.5);
    assert_eq!(v["verdict"], "bounded-on-grid");

    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["condition", "empirical_sup_logk", "grid", "params", "verdict", "witness"]);
}

#[test]
fn linear_output_drops_the_log() {
    let mut args = LEVELWISE.to_vec();
    args.extend(["--format", "json", "--linear"]);
    let v = json(&ktree(&args));
    assert_eq!(v["empirical_sup"].as_f64(), Some(1.0));
    assert!(v.get("empirical_sup_logk").is_none());
}

#[test]
fn csv_trace_has_a_header_and_one_row_per_radius() {
    let o = ktree(LEVELWISE);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,value_logk"));
    assert_eq!(lines.count(), 41);
}

#[test]
fn rho_example_minimizes_at_zero() {
    let o = ktree(&["rho-optimize", "--p", "2", "--delta", "0", "--r", "0", "--wE", "1", "--wF", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    assert_eq!(row[1], row[3]);
}

#[test]
fn neg2_reports_the_exact_norm() {
    let o = ktree(&["exp-neg2", "--k", "2", "--p", "2", "--j", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "norm_pow,,10,1024"));
}

fn assert_config_error(args: &[&str], needle: &str) {
    let o = ktree(args);
    assert_eq!(o.status.code(), Some(2), "{args:?}");
    let err = stderr(&o);
    assert!(err.contains(needle), "{err}");
    assert!(err.starts_with("error:"));
}

#[test]
fn inadmissible_parameters_exit_two() {
    assert_config_error(&["check-levelwise", "--p", "2", "--delta", "1", "--weight", "power:a=1"], "delta");
    assert_config_error(
        &["check-suffcond", "--p", "2", "--beta", "0.8", "--alpha", "0.5", "--weight", "power:a=1"],
        "alpha",
    );
    assert_config_error(&["check-levelwise", "--bogus", "1"], "--bogus");
    assert_config_error(&["check-ap", "--mode", "assert:0"], "mode");
    assert_config_error(&["nonsense"], "nonsense");
}

#[test]
fn one_line_diagnostic_for_domain_errors() {
    let o = ktree(&["check-levelwise", "--p", "2", "--delta", "1", "--weight", "power:a=1"]);
    assert_eq!(stderr(&o).trim_end().lines().count(), 1);
}

#[test]
fn assert_violation_exits_one_with_witness() {
    let o = ktree(&["check-ap", "--weight", "power:a=3", "--p", "2", "--mode", "assert:0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("0.5") && err.contains("\"kind\""), "{err}");
}

#[test]
fn identical_configs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let run = |out: &str| {
        let o = ktree(&["exp-neg2", "--k", "2", "--p", "2", "--j", "5", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o).trim().to_string()
    };
    let first = run(d);
    let bytes = fs::read(&first).unwrap();
    let second = run(d);
    assert_eq!(first, second);
    assert_eq!(fs::read(&second).unwrap(), bytes);

    let name = Path::new(&first).file_name().unwrap().to_str().unwrap();
    assert!(name.starts_with("neg2_2_2_") && name.ends_with(".csv"), "{name}");

    let other = ktree(&["exp-neg2", "--k", "2", "--p", "2", "--j", "6", "--out", d]);
    assert_ne!(stdout(&other).trim(), first);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.kv");
    fs::write(&cfg, "# small grid\nk=3\np=3\njmax=4\nrmax=4\ndelta=-1\nweight=power:a=1\n").unwrap();
    let o = ktree(&[
        "check-levelwise", "--config", cfg.to_str().unwrap(), "--p", "2", "--jmax", "6", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["grid"]["k"], 3);
    assert_eq!(v["grid"]["j_max"], 6);
    assert_eq!(v["grid"]["r_max"], 4);
    assert_eq!(v["params"]["p"], 2.0);

    fs::write(&cfg, "colour=red\n").unwrap();
    assert_config_error(&["check-levelwise", "--config", cfg.to_str().unwrap()], "colour");
}

#[test]
fn selftests_pass() {
    let o = ktree(&["geometry-selftest", "--k", "3", "--depth", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "suite,checks,status\ngeometry,280,pass\n");

    let o = ktree(&["rho-optimize", "--selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",pass")));
}
