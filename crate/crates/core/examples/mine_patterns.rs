//! Mines the bundled demo log and prints its most frequent routines.
//!
//! cargo run -p homeminer --example mine_patterns -- [log.jsonl] [min_support]

use std::fs::File;
use std::path::PathBuf;

use homeminer::events::{parse_log, symbolize, EventFilter, LogFormat, SymbolPolicy, SymbolTable};
use homeminer::wsdd::{mine, Item, MiningParams};

fn describe(items: &[Item], table: &SymbolTable) -> String {
    items
        .iter()
        .map(|it| match it.symbol().and_then(|s| table.get(s)) {
            Some(e) => e.desc.clone(),
            None => "*".into(),
        })
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo_home.jsonl"));
    let min_support: f64 = args.next().map_or(0.01, |a| a.parse().expect("min support"));

    let parsed = parse_log(File::open(&path).expect("open log"), LogFormat::from_path(&path)).expect("parse log");
    let log = parsed.log.filtered(&EventFilter::default());
    let symbolized = symbolize(&log, SymbolPolicy::device());
    let params = MiningParams::new(5, min_support);
    let mut mined = mine(&symbolized.symbols, &symbolized.timestamps, &params).expect("mine");
    mined.sort_by_key(|m| std::cmp::Reverse(m.pattern.support_count));

    println!(
        "{}: {} events, {} symbols, {} patterns above {:.1}%",
        log.home_id,
        symbolized.symbols.len(),
        symbolized.table.len(),
        mined.len(),
        min_support * 100.0
    );
    for m in mined.iter().take(15) {
        println!(
            "{:>5}  {:>6.2}%  {}",
            m.pattern.support_count,
            m.pattern.relative_support * 100.0,
            describe(&m.pattern.items, &symbolized.table)
        );
    }
}
