//! Plants routines with steady and with erratic timing into noise and shows
//! which ones the miner flags as periodic.
//!
//! cargo run -p homeminer --example periodic_patterns

use homeminer::bench::synthetic::home_like;
use homeminer::bench::{generate, PlantedPattern};
use homeminer::wsdd::{mine, Item, MiningParams};

fn main() {
    let mut spec = home_like(20_000, 3);
    spec.planted = vec![
        PlantedPattern::periodic(vec![20, 22, 21], 0.002, 24 * 3600, 0.03),
        PlantedPattern::periodic(vec![23, 35, 24], 0.002, 6 * 3600, 0.1),
        PlantedPattern::periodic(vec![25, 27, 26], 0.002, 12 * 3600, 0.6),
        PlantedPattern::random(vec![28, 29, 30], 0.002),
    ];
    let log = generate(&spec).expect("valid spec");
    let mined = mine(&log.symbols, &log.timestamps, &MiningParams::new(4, 0.0015)).expect("mine");

    println!("{:<14} {:>8} {:>6} {:>10} {:>7} {:>9}", "plant", "count", "cv", "mean gap", "gap cv", "periodic");
    for plant in &log.manifest.plants {
        let items: Vec<Item> = plant.symbols.iter().copied().map(Item::Sym).collect();
        let Some(m) = mined.iter().find(|m| m.pattern.items == items) else {
            println!("{:<14} not found", plant.symbols.iter().map(|s| s.0.to_string()).collect::<Vec<_>>().join(","));
            continue;
        };
        let p = &m.periodicity;
        println!(
            "{:<14} {:>8} {:>6.2} {:>9.1}h {:>7.2} {:>9}",
            plant.symbols.iter().map(|s| s.0.to_string()).collect::<Vec<_>>().join(","),
            m.pattern.support_count,
            plant.jitter_cv,
            p.mean_interval.unwrap_or(f64::NAN) / 3600.0,
            p.interval_cv.unwrap_or(f64::NAN),
            p.is_periodic
        );
    }
}
