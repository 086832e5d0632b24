//! Writes a journal to disk, "crashes" halfway through with a torn record,
//! restarts and finishes. The final snapshot matches an uninterrupted run.
//!
//! cargo run -p homeminer-service --example journal_restart

use std::io::Write;

use homeminer_service::fixtures::{feedback_journal, HOME};
use homeminer_service::store::JOURNAL_FILE;
use homeminer_service::Store;

fn main() {
    let records = feedback_journal(10, 48, 30, 6);
    let dir = tempfile::tempdir().expect("temp dir");

    let mut straight = Store::open(dir.path().join("straight")).expect("open");
    for r in &records {
        straight.submit(r.clone()).expect("apply");
    }

    let crashed = dir.path().join("crashed");
    let half = records.len() / 2;
    {
        let mut store = Store::open(&crashed).expect("open");
        for r in &records[..half] {
            store.submit(r.clone()).expect("apply");
        }
    }
    let mut f = std::fs::OpenOptions::new()
        .append(true)
        .open(crashed.join(JOURNAL_FILE))
        .expect("journal");
    f.write_all(b"{\"kind\":\"feedback\",\"recommendation_id\":\"H1-0").expect("write");
    drop(f);

    let mut store = Store::open(&crashed).expect("reopen");
    println!("restarted with {} records applied (torn tail dropped)", store.state().applied());
    for r in &records[half..] {
        store.submit(r.clone()).expect("apply");
    }
    let same = store.snapshot().to_json() == straight.snapshot().to_json();
    println!("{} records, snapshots identical: {same}", records.len());
    let rules = &store.state().home(HOME).expect("home").rules;
    for rule in rules.iter().take(3) {
        println!("  {} active={} streak={} votes={}", rule.id, rule.active, rule.negative_streak, rule.feedback_log.len());
    }
}
