//! Peak heap use of the miners grows with the input.

use homeminer::bench::memory::{self, TrackingAllocator};
use homeminer::bench::synthetic::home_like;
use homeminer::bench::{generate, harness::spearman};
use homeminer::oracle::{prefix_growth_mine, wsdd_baseline};
use homeminer::wsdd::MiningParams;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

#[test]
fn peak_memory_rises_with_log_size() {
    assert!(memory::is_active());
    let sizes = [2_000usize, 5_000, 10_000, 20_000, 40_000];
    let params = MiningParams::new(5, 0.001);
    let mut wsdd = Vec::new();
    let mut prefix = Vec::new();
    for &n in &sizes {
        let log = generate(&home_like(n, 1)).unwrap();
        wsdd.push(wsdd_baseline(&log.symbols, &params).unwrap().peak_memory.unwrap() as f64);
        prefix.push(prefix_growth_mine(&log.symbols, &params).unwrap().peak_memory.unwrap() as f64);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    assert!(spearman(&xs, &wsdd) > 0.8, "wsdd {wsdd:?}");
    assert!(spearman(&xs, &prefix) > 0.8, "prefix {prefix:?}");
}
