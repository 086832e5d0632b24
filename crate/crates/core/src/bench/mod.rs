//! Synthetic workloads with ground truth, fixtures, and the miner benchmark.

pub mod fixtures;
pub mod harness;
pub mod memory;
pub mod synthetic;

pub use harness::{run_benchmark, write_report, BenchConfig, BenchInput, BenchRow, Miner};
pub use synthetic::{generate, Manifest, NoiseModel, PlantedPattern, SyntheticLog, SyntheticSpec};
