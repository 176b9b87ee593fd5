use std::path::PathBuf;
use std::process::{Command, Output};

use serde::de::DeserializeOwned;
use serde::Serialize;
use stc_cli::{CvOutput, FrontierOutput, MaxAlphaRow, PvalueOutput, SimulateOutput, TableOutput, TestOutput};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stc")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = stc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    stc(args).status.code().unwrap()
}

fn json<T: DeserializeOwned>(args: &[&str]) -> T {
    let mut full = vec!["--output", "json"];
    full.extend_from_slice(args);
    serde_json::from_str(&ok(&full)).unwrap()
}

/// Parsing emitted JSON and writing it back gives the same bytes.
fn round_trips<T: DeserializeOwned + Serialize>(args: &[&str]) {
    let mut full = vec!["--output", "json"];
    full.extend_from_slice(args);
    let text = ok(&full);
    let value: T = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&value).unwrap() + "\n", text, "{args:?}");
}

fn test_args<'a>(file: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["test", "--data", file, "--design", "did", "--treated", "treated", "--post-start", "3"];
    v.extend_from_slice(extra);
    v
}

#[test]
fn cv_examples() {
    let out = ok(&["cv", "--m", "5", "--alpha", "0.05", "--rho", "1.0", "--k", "1"]);
    assert!(out.contains("cv = 3.041"), "{out}");
    assert!(out.contains("closed_form_k1"), "{out}");

    let r: CvOutput = json(&["cv", "--m", "5", "--alpha", "0.05", "--rho", "1.0", "--k", "2"]);
    assert_eq!(r.cv, 3.459);
    assert_eq!(r.method, stc_core::Method::Optimized);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["cv", "--m", "5", "--alpha", "0.6", "--rho", "1", "--k", "1"]), 2);
    assert_eq!(code(&["cv", "--m", "5", "--alpha", "0.05"]), 2);
    assert_eq!(code(&["cv", "--m", "5", "--alpha", "0.05", "--rho", "1", "--k", "9"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    let bad = data("bad_schema.csv");
    assert_eq!(code(&["test", "--data", &bad, "--design", "mean", "--treated", "a", "--alpha", "0.05", "--rho", "1"]), 4);
    let file = data("jump_did.csv");
    assert_eq!(code(&["test", "--data", &file, "--design", "did", "--treated", "nobody", "--post-start", "3", "--alpha", "0.05", "--rho", "1"]), 4);
    assert_eq!(code(&["test", "--data", "/nonexistent.csv", "--design", "mean", "--treated", "a", "--alpha", "0.05", "--rho", "1"]), 4);
    // DiD without a post period is a usage error.
    assert_eq!(code(&["test", "--data", &file, "--design", "did", "--treated", "treated", "--alpha", "0.05", "--rho", "1"]), 2);
}

#[test]
fn schema_errors_name_the_line() {
    let bad = data("bad_schema.csv");
    let out = stc(&["test", "--data", &bad, "--design", "mean", "--treated", "a", "--alpha", "0.05", "--rho", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn null_data_does_not_reject() {
    let file = data("null_did.csv");
    let r: TestOutput = json(&test_args(&file, &["--alpha", "0.05", "--rho", "1", "--k", "1"]));
    assert!(!r.reject);
    assert!(r.p_value > 0.9, "{}", r.p_value);
}

#[test]
fn large_jump_rejects() {
    let file = data("jump_did.csv");
    let r: TestOutput = json(&test_args(&file, &["--alpha", "0.05", "--rho", "1", "--k", "1"]));
    assert!(r.reject);
    assert_eq!(r.cv, 3.041);
    assert!((r.effect - 100.0).abs() < 1e-3);
}

#[test]
fn one_sided_halves_p() {
    let file = data("moderate_did.csv");
    let two: TestOutput = json(&test_args(&file, &["--alpha", "0.05", "--rho", "1"]));
    let one: TestOutput = json(&test_args(&file, &["--alpha", "0.05", "--rho", "1", "--one-sided", "greater"]));
    assert!((one.p_value - 0.5 * two.p_value).abs() <= 1e-5 * two.p_value, "{} {}", one.p_value, two.p_value);
    let wrong: TestOutput = json(&test_args(&file, &["--alpha", "0.05", "--rho", "1", "--one-sided", "less"]));
    assert_eq!(wrong.p_value, 1.0);
    assert!(!wrong.reject);
}

#[test]
fn pvalue_from_t_matches_data() {
    let file = data("moderate_did.csv");
    let from_data: PvalueOutput = json(&["pvalue", "--data", &file, "--design", "did", "--treated", "treated", "--post-start", "3", "--rho", "1"]);
    let t = from_data.t_stat.unwrap().to_string();
    let from_t: PvalueOutput = json(&["pvalue", "--t", &t, "--m", "8", "--rho", "1"]);
    assert!((from_t.p_value - from_data.p_value).abs() <= 1e-4 * from_data.p_value);
    assert_eq!(code(&["pvalue", "--t", "2", "--rho", "1"]), 2);
}

#[test]
fn frontier_is_na_at_zero_t() {
    let file = data("zero_t_did.csv");
    let out = ok(&["rho-frontier", "--data", &file, "--design", "did", "--treated", "treated", "--post-start", "3"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("alpha,k,rho_hat"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| r.ends_with(",NA")), "{out}");
}

#[test]
fn frontier_monotone_in_k_and_alpha() {
    let file = data("moderate_did.csv");
    let f: FrontierOutput = json(&["rho-frontier", "--data", &file, "--design", "did", "--treated", "treated", "--post-start", "3"]);
    let value = |alpha: f64, k: usize| {
        f.rows.iter().find(|r| r.alpha == alpha && r.k == k).and_then(|r| r.rho_hat).unwrap_or(0.0)
    };
    for alpha in [0.01, 0.05, 0.1] {
        for k in 1..8 {
            assert!(value(alpha, k + 1) <= value(alpha, k), "alpha {alpha} k {k}");
        }
    }
    for k in 1..=8 {
        assert!(value(0.01, k) <= value(0.1, k), "k {k}");
        assert!(value(0.01, k) <= value(0.05, k), "k {k}");
    }
    assert!(value(0.05, 1) > 0.0);
}

#[test]
fn table_csv_layout() {
    let out = ok(&["table", "--k", "1", "--alphas", "0.01,0.05", "--ms", "5,10", "--rhos", "0.2:1.0:0.4", "--output", "csv"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "alpha,rho,5,10");
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert_eq!(lines[3], "0.01,1,5.044,3.408");
    assert_eq!(lines[6], "0.05,1,3.041,2.373");
}

#[test]
fn table_marks_failed_cells() {
    let out = ok(&["table", "--k", "1", "--alphas", "0.05", "--ms", "1,5", "--rhos", "1", "--output", "csv"]);
    assert_eq!(out.lines().nth(1), Some("0.05,1,NA,3.041"));
}

#[test]
fn max_alpha_grid() {
    let rows: Vec<MaxAlphaRow> = json(&["max-alpha", "--ms", "5,10", "--rhos", "1,2"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].m, 5);
    let a = rows[0].alpha_underline_percent.unwrap();
    assert!((a - 9.456).abs() < 0.01, "{a}");
    let rows: Vec<MaxAlphaRow> = json(&["max-alpha", "--ms", "3", "--rhos", "1"]);
    assert!(rows[0].error.is_some());
}

#[test]
fn simulate_is_reproducible_and_needs_a_seed() {
    let args = ["simulate", "--design", "normal", "--dgp", "1", "--m", "10", "--rho", "1", "--delta", "0", "--alpha", "0.05", "--reps", "20000", "--seed", "42"];
    let a: SimulateOutput = json(&args);
    let b: SimulateOutput = json(&args);
    assert_eq!(a, b);
    assert!(a.rejection_rate <= 0.05 + 3.0 * a.se, "{a:?}");

    let threaded = Command::new(env!("CARGO_BIN_EXE_stc"))
        .env("STC_THREADS", "1")
        .args(["--output", "json"])
        .args(args)
        .output()
        .unwrap();
    let c: SimulateOutput = serde_json::from_slice(&threaded.stdout).unwrap();
    assert_eq!(a, c);

    assert_eq!(code(&["simulate", "--design", "normal", "--dgp", "1", "--m", "10", "--rho", "1", "--alpha", "0.05"]), 2);
}

#[test]
fn simulate_writes_per_rep_csv() {
    let dir = std::env::temp_dir().join(format!("stc-reps-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("reps.csv");
    let p = path.to_string_lossy().into_owned();
    let r: SimulateOutput = json(&["simulate", "--design", "twfe", "--dgp", "2", "--m", "6", "--sigma", "1", "--alpha", "0.1", "--reps", "50", "--seed", "3", "--reps-csv", &p]);
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "rep,t_stat,reject");
    assert_eq!(rows.len(), 51);
    let rejected = rows[1..].iter().filter(|l| l.ends_with(",true")).count() as u64;
    assert_eq!(rejected, r.rejections);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("stc-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cv.json");
    let p = path.to_string_lossy().into_owned();
    let out = ok(&["--output", "json", "--out", &p, "cv", "--m", "10", "--alpha", "0.01", "--rho", "2"]);
    assert!(out.is_empty());
    let r: CvOutput = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r.cv, 6.58);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn json_round_trips() {
    let moderate = data("moderate_did.csv");
    let zero = data("zero_t_did.csv");
    round_trips::<CvOutput>(&["cv", "--m", "5", "--alpha", "0.05", "--rho", "1", "--k", "2"]);
    round_trips::<CvOutput>(&["cv", "--m", "7", "--alpha", "0.05", "--rho", "0.7", "--one-sided"]);
    round_trips::<TestOutput>(&test_args(&moderate, &["--alpha", "0.05", "--rho", "1"]));
    round_trips::<TestOutput>(&test_args(&moderate, &["--alpha", "0.05", "--rho", "1", "--one-sided", "less"]));
    round_trips::<FrontierOutput>(&["rho-frontier", "--data", &zero, "--design", "did", "--treated", "treated", "--post-start", "3"]);
    round_trips::<FrontierOutput>(&["rho-frontier", "--data", &moderate, "--design", "did", "--treated", "treated", "--post-start", "3"]);
    round_trips::<PvalueOutput>(&["pvalue", "--t", "3.3", "--m", "12", "--rho", "1.5", "--k", "2"]);
    round_trips::<TableOutput>(&["table", "--alphas", "0.05", "--ms", "2,5", "--rhos", "0.5,5", "--k", "2"]);
    round_trips::<Vec<MaxAlphaRow>>(&["max-alpha", "--ms", "3,5", "--rhos", "0.5"]);
    round_trips::<SimulateOutput>(&["simulate", "--design", "normal", "--dgp", "2", "--m", "5", "--rho", "0.5", "--alpha", "0.05", "--reps", "500", "--seed", "1"]);
}
