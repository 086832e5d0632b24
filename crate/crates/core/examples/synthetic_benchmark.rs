//! Times the three miners on a synthetic home-sized log and prints the CSV
//! report.
//!
//! cargo run --release -p homeminer --example synthetic_benchmark -- 80000 3

use std::time::Duration;

use homeminer::bench::memory::TrackingAllocator;
use homeminer::bench::synthetic::home_like;
use homeminer::bench::{generate, run_benchmark, write_report, BenchConfig, BenchInput, Miner};
use homeminer::wsdd::MiningParams;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

fn main() {
    let mut args = std::env::args().skip(1);
    let events: usize = args.next().map_or(80_000, |a| a.parse().expect("event count"));
    let repeats: usize = args.next().map_or(3, |a| a.parse().expect("repeat count"));

    let log = generate(&home_like(events, 7)).expect("valid spec");
    let input = BenchInput::new(format!("home_like_{events}"), log.symbols);
    let config = BenchConfig {
        repeats,
        warmup: 1,
        timeout: Duration::from_secs(120),
    };
    let rows = run_benchmark(&[input], &[MiningParams::new(5, 0.01)], &Miner::ALL, &config);
    write_report(&rows, std::io::stdout()).expect("stdout");
}
