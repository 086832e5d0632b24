//! Learns rules from the first six weeks of the demo home, then streams the
//! rest of the log through the matcher and prints each suggestion.
//!
//! cargo run -p homeminer --example stream_recommendations

use chrono::Duration;
use homeminer::bench::fixtures::demo_home;
use homeminer::engine::{EngineConfig, EngineRule, HomeEngine};
use homeminer::events::{symbolize, EventFilter, EventLog, SymbolPolicy};
use homeminer::rules::{extract_rules, ActionCatalog, RuleConfig};
use homeminer::wsdd::{mine, MiningParams};

fn main() {
    let log = demo_home("H1", 60, 1);
    let split = log.events()[0].timestamp + Duration::days(42);
    let (train, live): (Vec<_>, Vec<_>) = log.events().iter().cloned().partition(|e| e.timestamp < split);
    let train = EventLog::from_events("H1", train).filtered(&EventFilter::default());

    let symbolized = symbolize(&train, SymbolPolicy::device());
    let mined = mine(&symbolized.symbols, &symbolized.timestamps, &MiningParams::default()).expect("mine");
    let actions = ActionCatalog::default().resolve(&symbolized.table);
    let rules = extract_rules(
        "H1",
        mined.iter().map(|m| m.pattern.items.as_slice()),
        &actions,
        &symbolized.symbols,
        &RuleConfig::default(),
    );
    println!("trained on {} events: {} rules", train.len(), rules.len());

    let mut engine = HomeEngine::new(
        "H1",
        symbolized.table,
        rules.iter().map(EngineRule::from),
        EngineConfig::default(),
    )
    .expect("valid config");
    let mut sent = 0;
    for event in &live {
        for rec in engine.step(event).expect("ordered log") {
            sent += 1;
            println!("{}  {}  [{}] {}", rec.created_at.format("%a %d %b %H:%M"), rec.id, rec.rule_id, rec.text);
        }
    }
    if let Some(last) = live.last() {
        for rec in engine.on_timeout(last.timestamp + Duration::hours(1)) {
            sent += 1;
            println!("{}  {}  [{}] {}", rec.created_at.format("%a %d %b %H:%M"), rec.id, rec.rule_id, rec.text);
        }
    }
    println!("{sent} suggestions over {} live events", live.len());
}
