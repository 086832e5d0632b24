use std::path::Path;
use std::process::Command;

use homeminer::bench::fixtures::demo_home;
use homeminer::engine::Recommendation;
use homeminer::rules::read_rules_jsonl;
use homeminer::wsdd::read_patterns_jsonl;

fn homeminer(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_homeminer")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "homeminer {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_log(dir: &Path) -> String {
    let path = dir.join("demo.jsonl");
    demo_home("H1", 40, 3)
        .write_jsonl(std::fs::File::create(&path).unwrap())
        .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn mine_extract_replay_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_log(dir.path());
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    homeminer(&["mine", &log, "--min-support", "0.01", "--max-window", "5", "--out", out_s]);
    let patterns = read_patterns_jsonl(std::fs::File::open(out.join("patterns.jsonl")).unwrap()).unwrap();
    assert!(!patterns.is_empty());
    assert!(patterns.iter().all(|p| p.rel_support > 0.01 && (2..=5).contains(&p.pattern.len())));

    let actions = dir.path().join("actions.toml");
    std::fs::write(&actions, "[actions]\nlighting = [0, 67]\naudio = [0, 67]\nvideo = [0, 67]\n").unwrap();
    let patterns_path = out.join("patterns.jsonl");
    homeminer(&[
        "rules",
        "extract",
        patterns_path.to_str().unwrap(),
        "--actions",
        actions.to_str().unwrap(),
        "--log",
        &log,
    ]);
    let rules = read_rules_jsonl(std::fs::File::open(out.join("rules.jsonl")).unwrap()).unwrap();
    assert!(!rules.is_empty());
    assert!(rules.iter().all(|r| r.confidence > 0.0 && r.confidence <= 1.0));

    let data = dir.path().join("data");
    let replayed = homeminer(&[
        "replay",
        &log,
        "--speed",
        "0",
        "--rules",
        out.join("rules.jsonl").to_str().unwrap(),
        "--symbols",
        out.join("symbols.jsonl").to_str().unwrap(),
        "--data-dir",
        data.to_str().unwrap(),
    ]);
    let recs: Vec<Recommendation> = String::from_utf8(replayed.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|r| r.text.starts_with("Suggestion: ")));
    assert!(data.join("journal.jsonl").exists());

    // the default policy caps every home-day at three
    let mut per_day = std::collections::BTreeMap::new();
    for r in &recs {
        *per_day.entry(r.created_at.date_naive()).or_insert(0) += 1;
    }
    assert!(per_day.values().all(|&n| n <= 3));
}

#[test]
fn replay_without_rules_mines_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_log(dir.path());
    let a = homeminer(&["replay", &log, "--speed", "0"]).stdout;
    let b = homeminer(&["replay", &log, "--speed", "0"]).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_homeminer"))
        .args(["mine", "/no/such/log.jsonl"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/log.jsonl"));
}
