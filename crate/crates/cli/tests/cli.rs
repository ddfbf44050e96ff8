use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tpz_core::segment::{self, SegmentSequence};
use tpz_core::Symbol;

fn tpz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpz"))
        .args(args)
        .env_remove("TPZ_BUDGET")
        .output()
        .expect("tpz runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(p: &Path) -> Value {
    let text = std::fs::read_to_string(p).unwrap();
    let header = text.lines().next().unwrap();
    serde_json::from_str(header.strip_prefix("#TPZ1 ").unwrap()).unwrap()
}

fn body(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap().lines().skip(1).collect()
}

fn reports(o: &Output) -> Vec<Value> {
    serde_json::from_slice::<Value>(&o.stdout).unwrap().as_array().unwrap().clone()
}

fn separator(dir: &Path) -> PathBuf {
    let p = path(dir, "p.tpz");
    let o = tpz(&["generate", "separator", "--K", "17", "--L", "64", "--length", "1000000", "--out", s(&p)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn generate_segment_example() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "s.tpz");
    let o = tpz(&["generate", "segment", "--v", "1/4,1/4", "--length", "100000", "--out", s(&p)]);
    assert_eq!(code(&o), 0);
    let m = manifest(&p);
    assert_eq!(m["construction"], "segment");
    assert_eq!(m["derived"]["t"], 5);
    assert_eq!(m["derived"]["a1"], "7");
    assert_eq!(m["horizon"], 100_000);
    assert_eq!(body(&p).len(), 100_000);
}

#[test]
fn file_round_trips_against_in_memory_generation() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "s.tpz");
    assert_eq!(code(&tpz(&["generate", "segment", "--v", "1/3,1/5", "--length", "50000", "--out", s(&p)])), 0);
    let v = (
        "1/3".parse().unwrap(),
        "1/5".parse().unwrap(),
    );
    let params = segment::derive_params(v, None, 6).unwrap();
    let seq = SegmentSequence::generate(&params, 50_000).unwrap();
    let expected: String = seq.sequence().symbols().iter().map(|s| s.digit() as char).collect();
    assert_eq!(body(&p), expected);
    assert!(body(&p).bytes().all(|c| Symbol::from_digit(c).is_some()));
}

#[test]
fn generate_separator_example_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let p = separator(dir.path());
    let m = manifest(&p);
    assert_eq!(m["schedule"]["a1"], "3332");
    assert_eq!(m["derived"]["a"][1], "710545668");
    let dec = &m["derived"]["decompositions"][0];
    assert!(dec["p"].as_str().is_some() && dec["q"].as_str().is_some());
    assert_eq!(dec["is_partition"], true);

    let o = tpz(&["verify", "--in", s(&p), "--checks", "pq,ps,toeplitz"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rs = reports(&o);
    assert_eq!(rs.len(), 3);
    for r in &rs {
        assert_eq!(r["status"], "pass", "{r}");
        assert_eq!(r["counterexamples"].as_array().unwrap().len(), 0);
        for key in ["check_name", "paper_anchor", "statistics", "budget", "seed", "wall_time"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn corrupted_body_fails_toeplitz_with_index() {
    let dir = tempfile::tempdir().unwrap();
    let p = separator(dir.path());
    let text = std::fs::read_to_string(&p).unwrap();
    let (header, rest) = text.split_once('\n').unwrap();
    let mut digits: Vec<u8> = rest.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
    let j = 500_000usize;
    digits[j - 1] = if digits[j - 1] == b'1' { b'2' } else { b'1' };
    let lines: Vec<&str> = digits.chunks(4096).map(|c| std::str::from_utf8(c).unwrap()).collect();
    let bad = path(dir.path(), "bad.tpz");
    std::fs::write(&bad, format!("{header}\n{}\n", lines.join("\n"))).unwrap();

    let o = tpz(&["verify", "--in", s(&bad), "--checks", "toeplitz"]);
    assert_eq!(code(&o), 1);
    let r = &reports(&o)[0];
    assert_eq!(r["status"], "fail");
    let ce = r["counterexamples"].as_array().unwrap();
    assert_eq!(ce.len(), 1);
    assert!(ce[0].as_str().unwrap().starts_with(&format!("index {j}:")), "{ce:?}");
}

#[test]
fn dispatch_rules_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = separator(dir.path());
    let o = tpz(&["verify", "--in", s(&p), "--checks", "pis"]);
    assert_eq!(code(&o), 0);
    let r = &reports(&o)[0];
    assert_eq!(r["status"], "skipped");
    assert!(r["statistics"]["reason"].as_str().unwrap().contains("segment"));

    let o = tpz(&["verify", "--in", s(&p), "--checks", "nonsense"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown check"));

    let o = tpz(&["generate", "separator", "--K", "5", "--L", "64", "--length", "10", "--out", s(&path(dir.path(), "x.tpz"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("K"));
    assert!(!path(dir.path(), "x.tpz").exists());

    assert_eq!(code(&tpz(&["verify"])), 2);
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "s.tpz");
    assert_eq!(code(&tpz(&["generate", "segment", "--v", "1/4,1/4", "--length", "100000", "--out", s(&p)])), 0);
    let run = || tpz(&["verify", "--in", s(&p), "--checks", "all", "--seed", "7"]);
    let (a, b) = (run(), run());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    assert!(reports(&a).iter().all(|r| r["wall_time"].is_null()));
}

#[test]
fn interior_example_lists_exact_targets() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "i.tpz");
    assert_eq!(code(&tpz(&["generate", "interior", "--a1", "20", "--dexp", "4", "--levels", "4", "--out", s(&p)])), 0);
    let m = manifest(&p);
    let targets = m["derived"]["targets"].as_array().unwrap();
    assert_eq!(targets.len(), 4);
    let o = tpz(&["verify", "--in", s(&p), "--checks", "targets,toeplitz"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    let csv = path(dir.path(), "cloud.csv");
    let o = tpz(&["analyze", "--in", s(&p), "--window", "660", "--stride", "7", "--range", "1:42900", "--out", s(&csv)]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("start_index")).count();
    assert_eq!(rows as u64, (42_900 - 660) / 7 + 1);
    assert!(text.lines().last().unwrap().contains("hull_area"));

    let svg = path(dir.path(), "fig.svg");
    assert_eq!(code(&tpz(&["plot", "--in", s(&csv), "--out", s(&svg)])), 0);
    let fig = std::fs::read_to_string(&svg).unwrap();
    assert!(fig.starts_with("<svg") && fig.trim_end().ends_with("</svg>"));
    assert_eq!(fig.matches(r#"r="1.5""#).count(), rows);
}

#[test]
fn sweep_reports_winding_number() {
    let dir = tempfile::tempdir().unwrap();
    let p = separator(dir.path());
    let out = path(dir.path(), "sweep.csv");
    let o = tpz(&["sweep", "--in", s(&p), "--level", "1", "--stride", "2000", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let footer: Value = serde_json::from_str(text.lines().last().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(footer["winding_number"].as_i64().unwrap().abs(), 1);
    assert_eq!(footer["closed"], true);
    let svg = path(dir.path(), "sweep.svg");
    assert_eq!(code(&tpz(&["plot", "--in", s(&out), "--out", s(&svg)])), 0);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));

    let o = tpz(&["sweep", "--in", s(&p), "--level", "1", "--stride", "100000000"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn budget_overrun_exits_3_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "s.tpz");
    assert_eq!(code(&tpz(&["generate", "segment", "--v", "1/4,1/4", "--length", "100000", "--out", s(&p)])), 0);
    let o = tpz(&["analyze", "--in", s(&p), "--window", "100", "--budget", "5"]);
    assert_eq!(code(&o), 3);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# truncated"));
    assert_eq!(text.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 5);

    let o = tpz(&["verify", "--in", s(&p), "--checks", "pis", "--budget", "10"]);
    assert_eq!(code(&o), 3);
    assert_eq!(reports(&o)[0]["status"], "skipped");

    let o = Command::new(env!("CARGO_BIN_EXE_tpz"))
        .args(["verify", "--in", s(&p), "--checks", "pis"])
        .env("TPZ_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}
