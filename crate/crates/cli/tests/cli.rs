use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cse2d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cse2d")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = cse2d(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

/// Bytes after the three PGM header lines.
fn pgm_body(bytes: &[u8]) -> &[u8] {
    let mut newlines = 0;
    let at = bytes.iter().position(|&b| {
        newlines += (b == b'\n') as u32;
        newlines == 3
    });
    &bytes[at.unwrap() + 1..]
}

#[test]
fn pgm_round_trip_64() {
    let dir = tempfile::tempdir().unwrap();
    let (pgm, cse, back, stats) = (path(dir.path(), "a.pgm"), path(dir.path(), "a.cse"), path(dir.path(), "b.pgm"), path(dir.path(), "s.json"));
    let gen = ok_json(&["gen", "--kind", "iid", "--params", "p=0.2", "--size", "64x64", "--seed", "7", "-o", &pgm]);
    assert!((gen["entropy_bits_per_symbol"].as_f64().unwrap() - 0.7219).abs() < 1e-4);
    assert_eq!(gen["entropy_kind"], "analytical");
    assert!(cse2d(&["compress", "-i", &pgm, "-o", &cse, "--stats-json", &stats]).status.success());
    assert!(cse2d(&["decompress", "-i", &cse, "-o", &back]).status.success());
    let (a, b) = (std::fs::read(&pgm).unwrap(), std::fs::read(&back).unwrap());
    assert_eq!(pgm_body(&a), pgm_body(&b));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    for key in ["escape", "m", "n", "J", "l0", "l1", "l2", "l3", "total_bits", "bits_per_symbol", "transmitted"] {
        assert!(s.get(key).is_some(), "missing {key}");
    }
    assert_eq!(s["m"], 64);
}

#[test]
fn non_primitive_grid_is_escaped() {
    let dir = tempfile::tempdir().unwrap();
    let (grid, cse, stats, back) = (path(dir.path(), "p.txt"), path(dir.path(), "p.cse"), path(dir.path(), "s.json"), path(dir.path(), "q.txt"));
    std::fs::write(&grid, "2 2 4\n0 1 0 1\n1 1 1 1\n").unwrap();
    assert!(cse2d(&["compress", "-i", &grid, "-o", &cse, "--stats-json", &stats]).status.success());
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(s["escape"], true);
    assert!(cse2d(&["decompress", "-i", &cse, "-o", &back]).status.success());
    assert_eq!(std::fs::read_to_string(&back).unwrap(), "2 2 4\n0 1 0 1\n1 1 1 1\n");
    assert_eq!(cse2d(&["compress", "-i", &grid, "-o", &cse, "--strict"]).status.code(), Some(1));
}

#[test]
fn strict_and_stats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (grid, cse) = (path(dir.path(), "p.grid"), path(dir.path(), "p.cse"));
    std::fs::write(&grid, "2 3 3\n0 1 1\n1 1 1\n1 1 1\n").unwrap();
    assert!(cse2d(&["compress", "-i", &grid, "-o", &cse, "--strict"]).status.success());
    let from_grid = ok_json(&["stats", "-i", &grid]);
    let from_container = ok_json(&["stats", "-i", &cse]);
    assert_eq!(from_grid, from_container);
    assert_eq!(from_grid["escape"], false);
    assert_eq!(from_grid["transmitted"]["b1"], 1);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bmp = path(dir.path(), "a.bmp");
    std::fs::write(&bmp, b"BM").unwrap();
    assert_eq!(cse2d(&["compress", "-i", &bmp, "-o", &path(dir.path(), "a.cse")]).status.code(), Some(2));
    assert_eq!(cse2d(&["gen", "--kind", "iid", "--params", "p=0.5", "--size", "4x4", "-o", &bmp]).status.code(), Some(2));
    assert_eq!(cse2d(&["gen", "--kind", "laplace", "--params", "p=0.5", "--size", "4x4", "-o", "x.txt"]).status.code(), Some(2));
}

#[test]
fn corrupt_container_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.cse");
    std::fs::write(&bad, b"not a container").unwrap();
    let out = cse2d(&["decompress", "-i", &bad, "-o", &path(dir.path(), "x.txt")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
}

#[test]
fn gen_reports_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "u.txt");
    let uniform = ok_json(&["gen", "--kind", "iid", "--params", "probs=0.25,0.25,0.25,0.25", "--size", "8x8", "--seed", "1", "-o", &out]);
    assert_eq!(uniform["entropy_bits_per_symbol"], 2.0);
    assert_eq!(uniform["J"], 4);
    let frozen = ok_json(&["gen", "--kind", "markov2d", "--params", "probs=0.5,0.5 wh=1 wv=0", "--size", "8x8", "--seed", "1", "-o", &out]);
    assert_eq!(frozen["entropy_kind"], "estimated");
    assert_eq!(frozen["primitive"], false);
    assert!(cse2d(&["gen", "--kind", "iid", "--params", "probs=0.5,0.6", "--size", "2x2", "-o", &out]).status.code() == Some(1));
}

#[test]
fn verify_suites() {
    let r = ok_json(&["verify", "--mode", "exhaustive", "--size", "2x3"]);
    assert_eq!(r["round_trip"]["checked"], 64);
    let r = ok_json(&["verify", "--mode", "lemmas", "--size", "2x2"]);
    assert_eq!(r["lemma2"]["violations"], 0);
    let r = ok_json(&["verify", "--mode", "random", "--count", "6", "--max", "5", "--seed", "3"]);
    assert_eq!(r["round_trip"]["checked"], 6);
    assert_eq!(cse2d(&["verify", "--mode", "lemmas", "--size", "5x5"]).status.code(), Some(1));
}

#[test]
fn compare_reports_both_pipelines() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = path(dir.path(), "c.pgm");
    let gen = ok_json(&["gen", "--kind", "iid", "--params", "p=0.5", "--size", "8x64", "--seed", "1", "-o", &pgm]);
    assert_eq!(gen["primitive"], true);
    let r = ok_json(&["compare", "-i", &pgm]);
    assert_eq!(r["baseline"]["singles"], 255);
    assert_eq!(r["codec"]["transmitted"]["b1"], 1);
    assert_eq!(cse2d(&["compare", "-i", &pgm, "--m-cap", "4"]).status.code(), Some(1));
}
