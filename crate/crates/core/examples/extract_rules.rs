//! Turns mined routines into association rules whose consequent is an
//! energy-saving action, ranked by weight.
//!
//! cargo run -p homeminer --example extract_rules -- [actions.toml]

use std::fs::File;
use std::path::{Path, PathBuf};

use homeminer::events::{parse_log, symbolize, EventFilter, LogFormat, SymbolPolicy};
use homeminer::rules::{extract_rules, ActionCatalog, RuleConfig};
use homeminer::wsdd::{mine, MiningParams};

fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let actions_path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| fixtures.join("actions.toml"));
    let catalog = ActionCatalog::from_toml(&std::fs::read_to_string(actions_path).expect("read catalog")).expect("catalog");

    let path = fixtures.join("demo_home.jsonl");
    let log = parse_log(File::open(&path).expect("open log"), LogFormat::Jsonl)
        .expect("parse log")
        .log
        .filtered(&EventFilter::default());
    let symbolized = symbolize(&log, SymbolPolicy::device());
    let mined = mine(&symbolized.symbols, &symbolized.timestamps, &MiningParams::default()).expect("mine");
    let actions = catalog.resolve(&symbolized.table);
    let mut rules = extract_rules(
        &log.home_id,
        mined.iter().map(|m| m.pattern.items.as_slice()),
        &actions,
        &symbolized.symbols,
        &RuleConfig::default(),
    );
    rules.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.id.cmp(&b.id)));

    println!("{} patterns, {} rules", mined.len(), rules.len());
    let desc = |s| symbolized.table.get(s).map_or("?".to_string(), |e| e.desc.clone());
    for r in rules.iter().take(10) {
        let x: Vec<String> = r.antecedent.iter().map(|&s| desc(s)).collect();
        println!(
            "{:<22} w={:.2} conf={:.2} sup={:>4}  [{}] => {}",
            r.id,
            r.weight,
            r.confidence,
            r.support_count,
            x.join(", "),
            desc(r.consequent)
        );
    }
}
