//! End-to-end runs of the `pkm` binary: exit codes, cache behaviour,
//! determinism and golden reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("pkm-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn pkm(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pkm"))
        .args(args)
        .env("PKM_CACHE_DIR", cache)
        .output()
        .expect("pkm runs")
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn exit_codes() {
    let s = Scratch::new("exit");
    assert_eq!(pkm(&s.0, &["coeff", "--k", "11", "--m", "1"]).status.code(), Some(2));
    assert_eq!(pkm(&s.0, &["coeff", "--k", "12", "--m", "0"]).status.code(), Some(2));
    assert_eq!(pkm(&s.0, &["inner", "--k", "12", "--m", "1", "--t", "0"]).status.code(), Some(2));
    assert_eq!(
        pkm(&s.0, &["zeros", "--k", "24", "--m", "1", "--y-max", "0.9"]).status.code(),
        Some(2)
    );
    assert_eq!(pkm(&s.0, &["mass", "--k", "12", "--m", "1", "--region", "0,1"]).status.code(), Some(2));
    // Rounding alone exceeds 1e-20 at 256 bits.
    assert_eq!(
        pkm(&s.0, &["--tol", "1e-20", "coeff", "--k", "12", "--m", "1", "--n-max", "3"]).status.code(),
        Some(3)
    );
    // The m = k trend does not decrease at these weights.
    assert_eq!(pkm(&s.0, &["verify", "--bound", "pkmm"]).status.code(), Some(4));
    assert_eq!(pkm(&s.0, &["zeros", "--k", "12", "--m", "1"]).status.code(), Some(0));
}

#[test]
fn second_run_hits_the_cache_without_rewriting() {
    let s = Scratch::new("cache");
    let args = ["coeff", "--k", "16", "--m", "2", "--n-max", "12"];
    let first = pkm(&s.0, &args);
    assert!(first.status.success());
    assert!(!String::from_utf8_lossy(&first.stderr).contains("cache hit"));
    let files: Vec<_> = fs::read_dir(&s.0).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let bytes = fs::read(&files[0]).unwrap();
    let second = pkm(&s.0, &args);
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read(&files[0]).unwrap(), bytes);
    // A shorter request is served from the same file.
    let short = pkm(&s.0, &["coeff", "--k", "16", "--m", "2", "--n-max", "5"]);
    assert!(String::from_utf8_lossy(&short.stderr).contains("cache hit"));
    assert_eq!(fs::read(&files[0]).unwrap(), bytes);
}

#[test]
fn output_does_not_depend_on_threads_or_cache() {
    let (a, b) = (Scratch::new("det-a"), Scratch::new("det-b"));
    for args in [
        &["zeros", "--k", "36", "--m", "1"][..],
        &["mass", "--k", "20", "--m", "1", "--format", "csv"][..],
        &["eval", "--k", "16", "--m", "2", "--x", "-0.2", "--y", "0.3"][..],
    ] {
        let one: Vec<&str> = ["--threads", "1"].iter().chain(args).copied().collect();
        let four: Vec<&str> = ["--threads", "4"].iter().chain(args).copied().collect();
        let cold = pkm(&a.0, &one);
        let warm = pkm(&a.0, &four);
        let other = pkm(&b.0, &four);
        assert!(cold.status.success(), "{args:?}");
        assert_eq!(cold.stdout, warm.stdout, "{args:?}");
        assert_eq!(cold.stdout, other.stdout, "{args:?}");
    }
}

#[test]
fn csv_and_json_agree() {
    let s = Scratch::new("formats");
    let json = pkm(&s.0, &["norm", "--k", "24", "--m", "3"]);
    let csv = pkm(&s.0, &["norm", "--k", "24", "--m", "3", "--format", "csv"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let text = String::from_utf8(csv.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2].parse::<f64>().unwrap(), v["log_norm"].as_f64().unwrap());
}

#[test]
fn golden_coefficients() {
    let s = Scratch::new("golden-coeff");
    let out = pkm(&s.0, &["coeff", "--k", "12", "--m", "1", "--n-max", "10", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("coeff-k12-m1.csv"));
}

#[test]
fn golden_zero_inventory() {
    let s = Scratch::new("golden-zeros");
    let out = pkm(&s.0, &["zeros", "--k", "48", "--m", "1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("zeros-k48-m1.json"));
}

#[test]
fn golden_equidistribution_reports() {
    let s = Scratch::new("golden-equidist");
    let grow = pkm(&s.0, &["equidist", "--schedule", "m=k*logk"]);
    assert_eq!(String::from_utf8(grow.stdout).unwrap(), golden("equidist-klogk.json"));
    // The growing schedule does not show the decreasing pattern here.
    assert_eq!(grow.status.code(), Some(4));
    let fixed = pkm(&s.0, &["equidist", "--schedule", "m=1"]);
    assert_eq!(String::from_utf8(fixed.stdout).unwrap(), golden("equidist-m1.json"));
    assert_eq!(fixed.status.code(), Some(0));
}
