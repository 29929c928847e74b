use etadist::cumulant::{SaddleResult, TailAsymptotic};
use etadist::zeta_line::DiscrepancyReport;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_etadist"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("etadist-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_of(out: &Output) -> (i32, Value) {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    (out.status.code().unwrap(), v)
}

#[test]
fn moments_report_both_sides() {
    let v = json_of(&run(&["moments", "--k", "1", "--l", "1", "--Y", "10", "--T", "1e7", "--sigma", "0.75", "--m", "0"]));
    let r = &v["result"];
    assert_eq!(r["within_budget"], true);
    assert!(r["difference"].as_f64().unwrap() <= r["budget"].as_f64().unwrap());
    assert_eq!(v["metadata"]["library_version"], etadist::VERSION);
    assert_eq!(v["metadata"]["parameters"]["T"], 1e7);
}

#[test]
fn exit_codes_and_error_json() {
    let (code, v) = error_of(&run(&["tail", "--sigmaa", "0.7"]));
    assert_eq!((code, v["error"].as_str().unwrap()), (2, "parameter"));
    let (code, v) = error_of(&run(&["tail"]));
    assert_eq!((code, v["error"].as_str().unwrap()), (2, "parameter"));
    let (code, _) = error_of(&run(&["density", "--sigma", "0.3"]));
    assert_eq!(code, 2);
    let (code, v) = error_of(&run(&["moments", "--k", "30", "--l", "30", "--Y", "1e4"]));
    assert_eq!((code, v["error"].as_str().unwrap()), (3, "capacity"));
    let (code, _) = error_of(&run(&["empirical", "--n-samples", "1.5"]));
    assert_eq!(code, 2);
    assert!(run(&["--help"]).status.success());
}

#[test]
fn csv_with_sidecar_and_stable_reruns() {
    let dir = scratch("csv");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for p in [&a, &b] {
        let out = run(&["constants", "--sigma", "0.6", "--n-max", "3", "--format", "csv", "--output", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next(), Some("n,g_n,G_n"));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let strip = |p: PathBuf| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v["metadata"].as_object_mut().unwrap().remove("timestamp");
        v["metadata"]["parameters"].as_object_mut().unwrap().remove("output");
        v
    };
    let (ma, mb) = (strip(dir.join("a.meta.json")), strip(dir.join("b.meta.json")));
    assert_eq!(ma, mb);
    assert!(ma["metadata"]["error_budget"]["g1_consistency"].as_f64().unwrap() < 1e-8);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_file_then_flags() {
    let dir = scratch("cfg");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "sigma = 0.6\nm = 1\nY = 5\nT = 1e8\n").unwrap();
    let v = json_of(&run(&["moments", "--config", cfg.to_str().unwrap(), "--m", "0"]));
    let p = &v["metadata"]["parameters"];
    assert_eq!((p["sigma"].as_f64(), p["m"].as_u64(), p["Y"].as_f64(), p["T"].as_f64()), (Some(0.6), Some(0), Some(5.0), Some(1e8)));
    std::fs::write(&cfg, "sigma\n").unwrap();
    assert_eq!(error_of(&run(&["moments", "--config", cfg.to_str().unwrap()])).0, 2);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn empirical_independent_of_threads() {
    let base = ["empirical", "--sigma", "0.8", "--T", "1e4", "--n-samples", "3000", "--Y", "100", "--format", "csv"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let two = run(&[&base[..], &["--threads", "3"]].concat());
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,re,im"));
    assert_eq!(text.lines().count(), 3001);
}

#[test]
fn tail_round_trips_and_mc() {
    let v = json_of(&run(&[
        "tail", "--sigma", "0.75", "--m", "0", "--alpha", "0", "--tau", "3", "--kappa-min", "1", "--kappa-floor", "1",
        "--table-limit", "1e5", "--mc-samples", "2e4", "--Y", "100", "--seed", "5",
    ]));
    let r = &v["result"];
    let s: SaddleResult = serde_json::from_value(r["saddle"].clone()).unwrap();
    assert!(s.log_tail_main < 0.0 && s.error_scale > 0.0);
    let a: TailAsymptotic = serde_json::from_value(r["asymptotic"].clone()).unwrap();
    assert!(a.log_value < 0.0);
    assert_eq!(r["monte_carlo"]["seed"], 5);
    // default kappa floor hides the asymptotic at small kappa
    let v = json_of(&run(&["tail", "--tau", "3", "--kappa-min", "1", "--table-limit", "1e5"]));
    assert!(v["result"]["asymptotic"].is_null());
}

#[test]
fn density_metadata_has_normalization() {
    let v = json_of(&run(&["density", "--sigma", "0.75", "--m", "0", "--extent", "4", "--step", "0.2"]));
    let b = &v["metadata"]["error_budget"];
    assert!(b["normalization_residual"].as_f64().unwrap() < 1e-3);
    assert_eq!(v["data"]["value"].as_array().unwrap().len(), 41 * 41);
}

#[test]
fn discrepancy_and_selberg_reports() {
    let v = json_of(&run(&[
        "empirical", "--sigma", "0.8", "--T", "1e5", "--n-samples", "5000", "--Y", "50", "--discrepancy", "true", "--step", "0.1",
    ]));
    let d: DiscrepancyReport = serde_json::from_value(v["result"]["discrepancy"].clone()).unwrap();
    assert!(d.value > 0.0 && d.value < 1.0);
    let v = json_of(&run(&["selberg-check", "--sigma", "0.8", "--T", "1e5", "--n-samples", "5000", "--Y", "50", "--L", "40"]));
    let r = &v["result"];
    assert!(r["difference"].as_f64().unwrap() <= v["metadata"]["error_budget"]["kernel_bound"].as_f64().unwrap());
}

#[test]
fn marginal_and_saddle_tables() {
    let v = json_of(&run(&["marginal", "--x-min", "-1", "--x-max", "1", "--x-step", "0.5", "--tol", "1e-6"]));
    let cdf: Vec<f64> = v["data"]["cdf"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(cdf.len(), 5);
    assert!(cdf.windows(2).all(|w| w[0] < w[1]));
    let v = json_of(&run(&["saddle", "--tau", "1.5", "--table-limit", "1e5"]));
    assert_eq!(v["data"]["tilted"].as_array().unwrap().len(), 241);
}
