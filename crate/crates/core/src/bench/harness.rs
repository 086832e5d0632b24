//! Run-time and peak-memory comparison of the miners.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::events::Symbol;
use crate::oracle::{brute_force_cancellable, prefix_growth_patterns};
use crate::wsdd::{mine_patterns, MiningParams};

use super::memory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Miner {
    Wsdd,
    PrefixGrowth,
    BruteForce,
}

impl Miner {
    pub const ALL: [Miner; 3] = [Miner::Wsdd, Miner::PrefixGrowth, Miner::BruteForce];

    pub fn name(self) -> &'static str {
        match self {
            Miner::Wsdd => "wsdd",
            Miner::PrefixGrowth => "prefix_growth",
            Miner::BruteForce => "brute_force",
        }
    }

    /// Runs the miner and returns the number of patterns found.
    pub fn run(
        self,
        seq: &[Symbol],
        params: &MiningParams,
        cancel: &AtomicBool,
    ) -> Option<usize> {
        let found = match self {
            Miner::Wsdd => mine_patterns(seq, params, cancel),
            Miner::PrefixGrowth => prefix_growth_patterns(seq, params, cancel),
            Miner::BruteForce => brute_force_cancellable(seq, params, cancel),
        };
        found.ok().map(|p| p.len())
    }
}

impl fmt::Display for Miner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Miner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "wsdd" => Ok(Miner::Wsdd),
            "prefix" | "prefix_growth" | "prefixspan" => Ok(Miner::PrefixGrowth),
            "brute" | "brute_force" => Ok(Miner::BruteForce),
            other => Err(format!("unknown miner `{other}` (wsdd, prefix, brute)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub repeats: usize,
    pub warmup: usize,
    /// Per-run limit; a run that exceeds it is recorded as DNF.
    pub timeout: Duration,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            repeats: 5,
            warmup: 1,
            timeout: Duration::from_secs(600),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchInput {
    pub name: String,
    pub symbols: Arc<Vec<Symbol>>,
}

impl BenchInput {
    pub fn new(name: impl Into<String>, symbols: Vec<Symbol>) -> Self {
        BenchInput {
            name: name.into(),
            symbols: Arc::new(symbols),
        }
    }
}

/// One line of the benchmark report. `None` timings mean DNF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub miner: Miner,
    pub events: usize,
    pub min_support: f64,
    pub max_window: usize,
    pub wall_ms: Option<f64>,
    pub peak_mem_mib: Option<f64>,
    pub patterns_found: Option<usize>,
}

impl BenchRow {
    pub fn is_dnf(&self) -> bool {
        self.wall_ms.is_none()
    }
}

struct RunOutcome {
    wall_ms: f64,
    peak_bytes: Option<u64>,
    patterns: usize,
}

fn run_once(
    miner: Miner,
    seq: Arc<Vec<Symbol>>,
    params: MiningParams,
    timeout: Duration,
) -> Option<RunOutcome> {
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    let flag = Arc::clone(&cancel);
    let worker = std::thread::spawn(move || {
        let (found, wall, peak) = memory::measure(|| miner.run(&seq, &params, &flag));
        let _ = tx.send(found.map(|patterns| RunOutcome {
            wall_ms: wall.as_secs_f64() * 1e3,
            peak_bytes: peak,
            patterns,
        }));
    });
    let outcome = match rx.recv_timeout(timeout) {
        Ok(outcome) => outcome,
        Err(_) => {
            cancel.store(true, Ordering::Relaxed);
            None
        }
    };
    let _ = worker.join();
    outcome
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

/// Benchmarks one miner on one input: warm-up runs are discarded, the
/// median of `repeats` timed runs is reported. Stops at the first DNF.
pub fn bench_one(
    miner: Miner,
    input: &BenchInput,
    params: &MiningParams,
    config: &BenchConfig,
) -> BenchRow {
    let mut row = BenchRow {
        miner,
        events: input.symbols.len(),
        min_support: params.min_support,
        max_window: params.max_window,
        wall_ms: None,
        peak_mem_mib: None,
        patterns_found: None,
    };
    for _ in 0..config.warmup {
        if run_once(miner, Arc::clone(&input.symbols), params.clone(), config.timeout).is_none() {
            return row;
        }
    }
    let mut walls = Vec::new();
    let mut peaks = Vec::new();
    for _ in 0..config.repeats.max(1) {
        match run_once(miner, Arc::clone(&input.symbols), params.clone(), config.timeout) {
            Some(out) => {
                walls.push(out.wall_ms);
                if let Some(p) = out.peak_bytes {
                    peaks.push(p as f64 / (1024.0 * 1024.0));
                }
                row.patterns_found = Some(out.patterns);
            }
            None => {
                row.patterns_found = None;
                return row;
            }
        }
    }
    row.wall_ms = median(&mut walls);
    row.peak_mem_mib = median(&mut peaks);
    row
}

/// Every `(input, params, miner)` combination, serially.
pub fn run_benchmark(
    inputs: &[BenchInput],
    params: &[MiningParams],
    miners: &[Miner],
    config: &BenchConfig,
) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for input in inputs {
        for p in params {
            for &miner in miners {
                let row = bench_one(miner, input, p, config);
                tracing::info!(
                    miner = miner.name(),
                    input = %input.name,
                    events = row.events,
                    wall_ms = ?row.wall_ms,
                    "benchmark row"
                );
                rows.push(row);
            }
        }
    }
    rows
}

pub const REPORT_HEADER: &str =
    "miner,events,min_support,max_window,wall_ms,peak_mem_mib,patterns_found";

pub fn write_report<W: Write>(rows: &[BenchRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        let wall = r.wall_ms.map_or("DNF".to_string(), |w| format!("{w:.3}"));
        let mem = r.peak_mem_mib.map_or(String::new(), |m| format!("{m:.2}"));
        let found = r.patterns_found.map_or(String::new(), |n| n.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.miner, r.events, r.min_support, r.max_window, wall, mem, found
        )?;
    }
    out.flush()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
