use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rhi-lab"))
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rhi-lab-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("RHI_LAB_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const TWO_STEP: &str = r#"{"kind":"step","breakpoints":["0","1/2","1"],"values":["1","3"]}"#;

#[test]
fn verify_endpoint_on_two_step() {
    let dir = scratch_dir("t13");
    let w = write(&dir, "twostep.json", TWO_STEP);
    let out = run(&["verify", "--theorem", "t1.3", "--weight", w.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["theorem"], "t1.3");
    assert_eq!(v["holds"], true);
    assert!((v["ratio"].as_f64().unwrap() - 0.9449).abs() < 1e-3, "{v}");
}

#[test]
fn fw_of_constant_is_one() {
    let dir = scratch_dir("fw");
    let w = write(&dir, "const.json", r#"{"kind":"step","breakpoints":["0","2"],"values":["5/2"]}"#);
    let out = run(&["constants", "--weight", w.to_str().unwrap(), "--kind", "fw", "--depth", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"], "1");
    assert_eq!(v["exact"], true);
}

#[test]
fn dyadic_sweep_holds() {
    let out = run(&["sweep", "--theorem", "t4.2", "--corpus", "random", "--n", "2", "--depth", "3", "--count", "1000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["holding"], 1000);
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 1000);
}

#[test]
fn sweep_is_deterministic() {
    let args = ["sweep", "--theorem", "t1.2", "--count", "20", "--seed", "3"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn failing_verdict_exits_two() {
    // δ below [w]_{A1} = 3 breaks the Wik hypothesis, and the bound fails
    let dir = scratch_dir("wik");
    let w = write(&dir, "twostep.json", TWO_STEP);
    let out = run(&["verify", "--theorem", "wik", "--weight", w.to_str().unwrap(), "--delta", "1"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["holds"], false);
}

#[test]
fn usage_and_parse_errors_exit_one() {
    assert_eq!(run(&["verify", "--weight", "x.json"]).status.code(), Some(1));
    let dir = scratch_dir("bad");
    let w = write(&dir, "bad.json", r#"{"kind":"step","breakpoints":["0","x"],"values":["1"]}"#);
    let out = run(&["constants", "--weight", w.to_str().unwrap(), "--kind", "a1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    let out = run(&["verify", "--theorem", "nope", "--weight", w.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let missing = run(&["constants", "--weight", "/nonexistent/w.json", "--kind", "a1"]);
    assert_eq!(missing.status.code(), Some(1));
    let good = write(&dir, "two.json", TWO_STEP);
    let out = run(&["verify", "--theorem", "t1.2", "--weight", good.to_str().unwrap(), "--r", "50"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("range error"));
}

#[test]
fn out_and_manifest_files() {
    let dir = scratch_dir("out");
    let w = write(&dir, "twostep.json", TWO_STEP);
    let out_path = dir.join("report.json");
    let manifest = dir.join("manifest.json");
    let out = run(&[
        "constants",
        "--weight",
        w.to_str().unwrap(),
        "--kind",
        "a1",
        "--out",
        out_path.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["value"], "3");
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["command"], "constants");
    assert_eq!(m["results"][0], report);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn dyadic_verify_and_superlevel() {
    let dir = scratch_dir("dy");
    let w = write(&dir, "d.json", r#"{"kind":"dyadic","dim":1,"depth":1,"cells":["1","3"]}"#);
    let out = run(&["verify", "--theorem", "t4.2", "--weight", w.to_str().unwrap(), "--r", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["exact"], true);
    let out = run(&["verify", "--theorem", "l-superlevel", "--weight", w.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let m = write(&dir, "m.json", r#"{"kind":"cdf","knots":[["0","0"],["1/4","1/2"],["1","1"]]}"#);
    let out = run(&["verify", "--theorem", "cor4.3", "--weight", w.to_str().unwrap(), "--measure", m.to_str().unwrap(), "--r", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn grid_dump() {
    let dir = scratch_dir("grid");
    let m = write(&dir, "m.json", r#"{"kind":"cdf","knots":[["0","0"],["1/4","1/2"],["1","1"]]}"#);
    let out = run(&["grid", "--measure", m.to_str().unwrap(), "--depth", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["boxes"].as_array().unwrap().len(), 7);
}

#[test]
fn profile_csv() {
    let dir = scratch_dir("prof");
    let w = write(&dir, "twostep.json", TWO_STEP);
    let out = run(&["profile", "--weight", w.to_str().unwrap(), "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# op=M\n"));
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip_while(|l| *l != "x,value")
        .skip(1)
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert!(rows.contains(&(0.0, 2.0)));
    assert!(rows.contains(&(1.0, 3.0)));
    assert!(rows.windows(2).all(|p| p[0].0 <= p[1].0));
}

#[test]
fn sharpness_small_run() {
    let args = ["sharpness", "--variant", "t3.1", "--delta", "2", "--r", "1.5", "--pieces", "64", "--budget", "300", "--restarts", "2", "--seed", "1"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let (va, vb) = (json(&a), json(&b));
    assert_eq!(va["traceHash"], vb["traceHash"]);
    let ratio = va["bestRatio"].as_f64().unwrap();
    assert!(ratio > 0.5 && ratio <= 1.0 + 1e-9, "{ratio}");
    assert_eq!(va["witnessWeight"]["kind"], "step");
}

#[test]
fn threads_env_is_validated() {
    let out = bin().args(["sweep", "--theorem", "t1.2", "--count", "2"]).env("RHI_LAB_THREADS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
