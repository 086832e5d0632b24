//! Seeded synthetic event sequences with planted patterns.
//!
//! Noise events and planted occurrences are laid out on a time line and
//! merged in time order; every planted occurrence stays contiguous, so the
//! manifest records its exact start index. Non-periodic plants are placed
//! uniformly at random in time (a Poisson process conditioned on the count),
//! periodic plants at a fixed interval with Gaussian jitter.

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{DeviceGroup, Event, EventLog, Symbol};

#[derive(Debug, Error, PartialEq)]
pub enum SyntheticError {
    #[error("infeasible synthetic spec: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPattern {
    pub symbols: Vec<u32>,
    /// Target support relative to the number of windows of this length.
    pub target_support: f64,
    /// Fixed spacing between occurrences in seconds; `None` plants at random.
    #[serde(default)]
    pub period_s: Option<i64>,
    /// Coefficient of variation of the gaps between periodic occurrences.
    #[serde(default)]
    pub jitter_cv: f64,
}

impl PlantedPattern {
    pub fn random(symbols: Vec<u32>, target_support: f64) -> Self {
        PlantedPattern {
            symbols,
            target_support,
            period_s: None,
            jitter_cv: 0.0,
        }
    }

    pub fn periodic(symbols: Vec<u32>, target_support: f64, period_s: i64, jitter_cv: f64) -> Self {
        PlantedPattern {
            symbols,
            target_support,
            period_s: Some(period_s),
            jitter_cv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// i.i.d. uniform over the alphabet.
    Uniform,
    /// i.i.d. Zipf over the alphabet.
    Zipf { exponent: f64 },
    /// Each symbol has a few preferred successors chosen with probability
    /// `stickiness`; otherwise the next symbol is uniform.
    Markov { successors: usize, stickiness: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub alphabet_size: u32,
    pub event_count: usize,
    #[serde(default)]
    pub planted: Vec<PlantedPattern>,
    pub noise: NoiseModel,
    /// Mean gap between consecutive events, seconds.
    #[serde(default = "default_gap")]
    pub mean_gap_s: f64,
    pub seed: u64,
}

fn default_gap() -> f64 {
    300.0
}

/// Unix time of the first synthetic event (2014-01-01T00:00:00Z).
pub const EPOCH: i64 = 1_388_534_400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantRecord {
    pub symbols: Vec<Symbol>,
    pub target_support: f64,
    pub planted_count: usize,
    /// Exact start indices of every planted occurrence, ascending.
    pub positions: Vec<usize>,
    pub period_s: Option<i64>,
    pub jitter_cv: f64,
}

impl PlantRecord {
    /// Planted count over the number of windows of this length.
    pub fn realized_support(&self, n: usize) -> f64 {
        crate::wsdd::relative_support(self.planted_count, self.symbols.len(), n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub event_count: usize,
    pub plants: Vec<PlantRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLog {
    pub symbols: Vec<Symbol>,
    pub timestamps: Vec<i64>,
    pub manifest: Manifest,
}

const ROOMS: [&str; 6] = ["living room", "kitchen", "bedroom", "bathroom", "office", "hallway"];

impl SyntheticLog {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Renders the sequence as smart-home events. Symbol `k` becomes device
    /// `D{k/2}`; even symbols switch it on (scene 5), odd ones off (scene 0).
    pub fn to_event_log(&self, home_id: &str) -> EventLog {
        let events = self
            .symbols
            .iter()
            .zip(&self.timestamps)
            .map(|(s, &t)| {
                let k = s.0 as usize;
                let room = (k / 2) % ROOMS.len();
                Event {
                    timestamp: DateTime::<Utc>::from_timestamp(t, 0).expect("timestamp in range"),
                    home_id: home_id.to_string(),
                    zone_id: format!("Z{room}"),
                    zone_name: ROOMS[room].to_string(),
                    device_id: format!("D{}", k / 2),
                    scene_id: if k.is_multiple_of(2) { 5 } else { 0 },
                    source_id: 1,
                    group: DeviceGroup::Lighting,
                }
            })
            .collect();
        EventLog::from_events(home_id, events)
    }
}

enum Block {
    Noise,
    Plant(usize),
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SyntheticError> {
        let bad = |m: String| Err(SyntheticError::Infeasible(m));
        if !(self.mean_gap_s.is_finite() && self.mean_gap_s > 0.0) {
            return bad(format!("mean_gap_s must be positive, got {}", self.mean_gap_s));
        }
        let planted_events: usize = self
            .planted
            .iter()
            .map(|p| self.planted_count(p) * p.symbols.len())
            .sum();
        if planted_events > self.event_count {
            return bad(format!(
                "planted occurrences need {planted_events} events but only {} are available",
                self.event_count
            ));
        }
        if self.alphabet_size == 0 && planted_events < self.event_count {
            return bad("noise events need a non-empty alphabet".into());
        }
        if let NoiseModel::Zipf { exponent } = self.noise {
            if !(exponent.is_finite() && exponent > 0.0) {
                return bad(format!("zipf exponent must be positive, got {exponent}"));
            }
        }
        if let NoiseModel::Markov { successors, stickiness } = self.noise {
            if successors == 0 || !(0.0..=1.0).contains(&stickiness) {
                return bad("markov noise needs successors >= 1 and stickiness in [0, 1]".into());
            }
        }
        let span = self.event_count as f64 * self.mean_gap_s;
        for p in &self.planted {
            if p.symbols.len() < 2 {
                return bad("planted patterns need at least two symbols".into());
            }
            if !(p.target_support > 0.0 && p.target_support <= 1.0) {
                return bad(format!("target support {} outside (0, 1]", p.target_support));
            }
            if !(p.jitter_cv.is_finite() && p.jitter_cv >= 0.0) {
                return bad(format!("jitter_cv must be non-negative, got {}", p.jitter_cv));
            }
            if let Some(period) = p.period_s {
                let count = self.planted_count(p);
                if period <= 0 {
                    return bad(format!("period must be positive, got {period}"));
                }
                if count > 1 && (count - 1) as f64 * period as f64 > span {
                    return bad(format!(
                        "{count} occurrences every {period}s do not fit in {span:.0}s"
                    ));
                }
            }
        }
        Ok(())
    }

    fn planted_count(&self, p: &PlantedPattern) -> usize {
        let windows = (self.event_count + 1).saturating_sub(p.symbols.len()).max(1);
        (p.target_support * windows as f64).round() as usize
    }
}

fn noise_source(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Box<dyn FnMut(&mut ChaCha8Rng) -> u32> {
    let k = spec.alphabet_size.max(1);
    match spec.noise {
        NoiseModel::Uniform => Box::new(move |r| r.gen_range(0..k)),
        NoiseModel::Zipf { exponent } => {
            let zipf = Zipf::new(k as u64, exponent).expect("validated zipf");
            Box::new(move |r| (zipf.sample(r) as u32).saturating_sub(1).min(k - 1))
        }
        NoiseModel::Markov {
            successors,
            stickiness,
        } => {
            let table: Vec<Vec<u32>> = (0..k)
                .map(|_| (0..successors).map(|_| rng.gen_range(0..k)).collect())
                .collect();
            let mut prev = rng.gen_range(0..k);
            Box::new(move |r| {
                let next = if r.gen_bool(stickiness) {
                    *table[prev as usize].choose(r).expect("non-empty successor list")
                } else {
                    r.gen_range(0..k)
                };
                prev = next;
                next
            })
        }
    }
}

/// Generates a log and its ground-truth manifest. Same spec, same output.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticLog, SyntheticError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.event_count;
    let span = n as f64 * spec.mean_gap_s;

    let counts: Vec<usize> = spec.planted.iter().map(|p| spec.planted_count(p)).collect();
    let planted_events: usize = counts
        .iter()
        .zip(&spec.planted)
        .map(|(c, p)| c * p.symbols.len())
        .sum();

    let mut blocks: Vec<(f64, Block)> = Vec::with_capacity(n);
    for _ in 0..(n - planted_events) {
        blocks.push((rng.gen_range(0.0..span), Block::Noise));
    }
    for (idx, (plant, &count)) in spec.planted.iter().zip(&counts).enumerate() {
        match plant.period_s {
            None => {
                for _ in 0..count {
                    blocks.push((rng.gen_range(0.0..span), Block::Plant(idx)));
                }
            }
            Some(period) => {
                let period = period as f64;
                let reach = count.saturating_sub(1) as f64 * period;
                let first = rng.gen_range(0.0..=(span - reach).max(0.0));
                // gap = P + e2 - e1, so sd(gap) = sqrt(2) * sd(e)
                let sd = plant.jitter_cv * period / std::f64::consts::SQRT_2;
                let jitter = Normal::new(0.0, sd).expect("finite jitter");
                for k in 0..count {
                    let t = first + k as f64 * period + jitter.sample(&mut rng);
                    blocks.push((t, Block::Plant(idx)));
                }
            }
        }
    }
    blocks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut next_noise = noise_source(spec, &mut rng);
    let mut symbols = Vec::with_capacity(n);
    let mut timestamps = Vec::with_capacity(n);
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); spec.planted.len()];
    let mut last = EPOCH;
    for (t, block) in blocks {
        let t = (EPOCH + t.round() as i64).max(last);
        match block {
            Block::Noise => {
                symbols.push(Symbol(next_noise(&mut rng)));
                timestamps.push(t);
                last = t;
            }
            Block::Plant(idx) => {
                positions[idx].push(symbols.len());
                for (j, &s) in spec.planted[idx].symbols.iter().enumerate() {
                    symbols.push(Symbol(s));
                    timestamps.push(t + j as i64);
                    last = t + j as i64;
                }
            }
        }
    }

    let plants = spec
        .planted
        .iter()
        .zip(positions)
        .map(|(p, positions)| PlantRecord {
            symbols: p.symbols.iter().copied().map(Symbol).collect(),
            target_support: p.target_support,
            planted_count: positions.len(),
            positions,
            period_s: p.period_s,
            jitter_cv: p.jitter_cv,
        })
        .collect();
    Ok(SyntheticLog {
        symbols,
        timestamps,
        manifest: Manifest {
            seed: spec.seed,
            event_count: n,
            plants,
        },
    })
}

/// A home-shaped workload: a 40-symbol alphabet with Markov habits and a
/// few planted routines, one of them daily.
pub fn home_like(event_count: usize, seed: u64) -> SyntheticSpec {
    let daily_share = (event_count as f64 * 300.0 / 86_400.0 - 2.0).max(1.0)
        / event_count.max(2) as f64;
    SyntheticSpec {
        alphabet_size: 40,
        event_count,
        planted: vec![
            PlantedPattern::random(vec![0, 1], 0.05),
            PlantedPattern::random(vec![2, 4, 3], 0.02),
            PlantedPattern::random(vec![6, 8, 7, 9], 0.012),
            PlantedPattern::periodic(vec![10, 12, 11], daily_share.min(0.01), 86_400, 0.05),
        ],
        noise: NoiseModel::Markov {
            successors: 3,
            stickiness: 0.85,
        },
        mean_gap_s: 300.0,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(alphabet: u32, n: usize, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            alphabet_size: alphabet,
            event_count: n,
            planted: Vec::new(),
            noise: NoiseModel::Uniform,
            mean_gap_s: 60.0,
            seed,
        }
    }

    #[test]
    fn same_seed_same_log() {
        let spec = home_like(5_000, 7);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SyntheticSpec { seed: 8, ..spec };
        assert_ne!(generate(&other).unwrap().symbols, generate(&home_like(5_000, 7)).unwrap().symbols);
    }

    #[test]
    fn manifest_positions_are_exact() {
        let mut spec = uniform(20, 10_000, 3);
        spec.planted.push(PlantedPattern::random(vec![30, 31, 32], 0.05));
        let log = generate(&spec).unwrap();
        assert_eq!(log.len(), 10_000);
        let plant = &log.manifest.plants[0];
        let target = 0.05 * (10_000 - 3 + 1) as f64;
        assert!((plant.planted_count as f64 - target).abs() <= 0.02 * target);
        for &p in &plant.positions {
            assert_eq!(&log.symbols[p..p + 3], &plant.symbols[..]);
        }
        assert!(log.timestamps.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn single_symbol_alphabet() {
        let log = generate(&uniform(1, 100, 1)).unwrap();
        assert!(log.symbols.iter().all(|&s| s == Symbol(0)));
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let mut spec = uniform(5, 100, 1);
        spec.planted.push(PlantedPattern::random(vec![1, 2, 3, 4], 0.5));
        assert!(generate(&spec).is_err());

        let mut spec = uniform(5, 100, 1);
        spec.planted.push(PlantedPattern::periodic(vec![1, 2], 0.1, 1_000_000, 0.0));
        assert!(generate(&spec).is_err());

        let mut spec = uniform(5, 100, 1);
        spec.planted.push(PlantedPattern::random(vec![1], 0.1));
        assert!(generate(&spec).is_err());

        assert!(generate(&uniform(0, 10, 1)).is_err());
    }

    #[test]
    fn zipf_noise_stays_in_alphabet() {
        let mut spec = uniform(10, 2_000, 5);
        spec.noise = NoiseModel::Zipf { exponent: 1.2 };
        let log = generate(&spec).unwrap();
        assert!(log.symbols.iter().all(|s| s.0 < 10));
    }

    #[test]
    fn event_log_rendering() {
        let log = generate(&home_like(500, 1)).unwrap();
        let events = log.to_event_log("H9");
        assert_eq!(events.len(), 500);
        assert_eq!(events.home_id, "H9");
        assert!(events.events().iter().all(|e| e.scene_id == 0 || e.scene_id == 5));
    }
}
