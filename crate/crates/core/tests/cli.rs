use hermite_mz::quadrature::{build_rule, QuadratureRule};
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermite-mz"))
        .args(args)
        .env_remove("HERMITE_MZ_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hermite-mz-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn help_and_usage_errors() {
    let o = cli(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("mz-ratio"));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["nodes"]).status.code(), Some(2));
    let o = cli(&["kernel-bound", "--delta", "1.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
    assert_eq!(cli(&["growth", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(cli(&["growth", "--p", "2", "--n-list", "32,16"]).status.code(), Some(2));
    assert_eq!(cli(&["nodes", "--n", "100001"]).status.code(), Some(2));
    assert_eq!(cli(&["interp", "--n", "4", "--t", "0", "--function", "nope"]).status.code(), Some(2));
    assert_eq!(cli(&["nodes", "--n", "3", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn three_point_rule_as_csv() {
    let o = cli(&["nodes", "--n", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "j,t,lambda,mu");
    assert_eq!(lines.len(), 4);
    let row = |i: usize| -> Vec<f64> { lines[i].split(',').map(|x| x.parse().unwrap()).collect() };
    let sqrt_pi = std::f64::consts::PI.sqrt();
    assert!((row(1)[1] - 1.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(row(2)[1], 0.0);
    assert!((row(3)[1] + 1.5f64.sqrt()).abs() < 1e-15);
    assert!((row(1)[2] - sqrt_pi / 6.0).abs() < 1e-15);
    assert!((row(2)[2] - 2.0 * sqrt_pi / 3.0).abs() < 1e-15);
}

#[test]
fn nodes_round_trip_through_csv() {
    let n = 60;
    let text = stdout(&cli(&["nodes", "--n", "60", "--format", "csv"]));
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        for k in 0..3 {
            cols[k].push(v[k]);
        }
    }
    let [t, l, m] = cols;
    let parsed = QuadratureRule::from_parts(n, t, l, m).unwrap();
    let built = build_rule(n).unwrap();
    assert_eq!(parsed.nodes(), built.nodes());
    assert_eq!(parsed.lambda(), built.lambda());
    assert_eq!(parsed.mu(), built.mu());
}

#[test]
fn parseval_ratios_from_the_command_line() {
    let o = cli(&["mz-ratio", "--p", "2", "--d", "1", "--n-list", "16,32", "--trials", "5", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["id"], "mz_ratio_sweep");
    for row in v["rows"].as_array().unwrap() {
        for key in ["upper_max", "upper_min", "lower_max"] {
            let r = row[key].as_f64().unwrap();
            assert!((r - 1.0).abs() <= 1e-8, "{key} = {r}");
        }
    }
}

#[test]
fn eval_accepts_negative_abscissae() {
    let o = cli(&["eval", "--n", "3", "--t", "-1.5,0,2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("t,h0,h1,h2,h3\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn output_directory_from_environment() {
    let dir = scratch_dir("env");
    let o = Command::new(env!("CARGO_BIN_EXE_hermite-mz"))
        .args(["nodes", "--n", "4", "--output", "sub/rule.json"])
        .env("HERMITE_MZ_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("sub/rule.json")).unwrap()).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 5);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn multi_report_commands_emit_arrays() {
    let o = cli(&["growth", "--p", "3", "--n-list", "8,16,32,64"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["hermite_norm_growth", "mz_witness_hn"]);
    let csv = stdout(&cli(&["growth", "--p", "3", "--n-list", "8,16,32,64", "--format", "csv"]));
    assert!(csv.starts_with("# hermite_norm_growth\nn,"));
    assert!(csv.contains("\n\n# mz_witness_hn\nn,"));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["counterexample", "--p", "6", "--alpha", "0.2", "--n-list", "16,23,32,45"];
    let one = cli(&[&args[..], &["--threads", "1"]].concat());
    let four = cli(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}
