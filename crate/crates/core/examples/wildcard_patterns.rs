//! Mining with single-position wildcards on a home that mostly alternates
//! between two scenes. `(a, *, a)` covers every `(a, x, a)`, so it always
//! outranks `(a, b, a)`.
//!
//! cargo run -p homeminer --example wildcard_patterns

use homeminer::bench::fixtures::alternating_home;
use homeminer::wsdd::{mine, Item, MiningParams};

fn name(it: &Item) -> String {
    match it {
        Item::Wildcard => "*".into(),
        Item::Sym(s) => ((b'a' + s.0 as u8) as char).to_string(),
    }
}

fn main() {
    let (seq, ts) = alternating_home(20_000, 2014);
    let mut mined = mine(&seq, &ts, &MiningParams::new(3, 0.02).with_wildcards(1)).expect("mine");
    mined.sort_by_key(|m| std::cmp::Reverse(m.pattern.support_count));
    println!("{:<12} {:>7} {:>8}", "pattern", "count", "support");
    for m in mined.iter().take(12) {
        let items: Vec<String> = m.pattern.items.iter().map(name).collect();
        println!(
            "{:<12} {:>7} {:>7.2}%",
            format!("({})", items.join(",")),
            m.pattern.support_count,
            m.pattern.relative_support * 100.0
        );
    }
}
