//! Window Sliding with De-Duplication (WSDD).
//!
//! A window of up to `max_window` symbols slides over the chronologically
//! ordered symbol sequence. Every contiguous pattern of length
//! `2..=max_window` starting at the current position is counted in the same
//! pass that enumerates it, in a hash map keyed by the pattern itself. Each
//! `(pattern, start)` pair is inserted at most once, so overlapping windows
//! never count the same occurrence twice. The minimum support filter is
//! applied afterwards.
//!
//! Wildcards stand for exactly one symbol of any value and may only occupy
//! interior positions.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::sync::atomic::{AtomicBool, Ordering};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::events::Symbol;

#[derive(Debug, Error, PartialEq)]
pub enum MiningError {
    #[error("invalid mining parameters: {0}")]
    InvalidParams(String),
    #[error("sequence has {symbols} symbols but {timestamps} timestamps")]
    LengthMismatch { symbols: usize, timestamps: usize },
    #[error("timestamps decrease at index {index}")]
    Unordered { index: usize },
}

/// Returned by the cancellable miners when the cancel flag was raised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cancelled;

/// One pattern position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    Sym(Symbol),
    Wildcard,
}

impl Item {
    pub fn matches(self, s: Symbol) -> bool {
        match self {
            Item::Sym(own) => own == s,
            Item::Wildcard => true,
        }
    }

    pub fn symbol(self) -> Option<Symbol> {
        match self {
            Item::Sym(s) => Some(s),
            Item::Wildcard => None,
        }
    }
}

impl From<Symbol> for Item {
    fn from(s: Symbol) -> Self {
        Item::Sym(s)
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Sym(s) => s.fmt(f),
            Item::Wildcard => f.write_str("*"),
        }
    }
}

impl Serialize for Item {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Item {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "*" {
            Ok(Item::Wildcard)
        } else {
            raw.parse().map(Item::Sym).map_err(serde::de::Error::custom)
        }
    }
}

/// Canonical text key for a pattern, e.g. `S1 * S1`.
pub fn pattern_key(items: &[Item]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    /// Longest pattern reported.
    pub max_window: usize,
    /// Patterns need relative support strictly greater than this.
    pub min_support: f64,
    /// Wildcards allowed per pattern.
    pub max_wildcards: usize,
    pub periodicity_cv_threshold: f64,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            max_window: 5,
            min_support: 0.01,
            max_wildcards: 0,
            periodicity_cv_threshold: 0.15,
        }
    }
}

impl MiningParams {
    pub fn new(max_window: usize, min_support: f64) -> Self {
        MiningParams {
            max_window,
            min_support,
            ..MiningParams::default()
        }
    }

    pub fn with_wildcards(mut self, max_wildcards: usize) -> Self {
        self.max_wildcards = max_wildcards;
        self
    }

    pub fn validate(&self) -> Result<(), MiningError> {
        if self.max_window < 2 {
            return Err(MiningError::InvalidParams(format!(
                "max_window must be at least 2, got {}",
                self.max_window
            )));
        }
        if !(0.0..=1.0).contains(&self.min_support) {
            return Err(MiningError::InvalidParams(format!(
                "min_support must lie in [0, 1], got {}",
                self.min_support
            )));
        }
        if !self.periodicity_cv_threshold.is_finite() || self.periodicity_cv_threshold < 0.0 {
            return Err(MiningError::InvalidParams(format!(
                "periodicity_cv_threshold must be a non-negative number, got {}",
                self.periodicity_cv_threshold
            )));
        }
        Ok(())
    }

    /// Whether a pattern of `len` symbols seen `count` times in a sequence
    /// of `n` symbols passes the minimum support filter.
    pub fn passes(&self, count: usize, len: usize, n: usize) -> bool {
        relative_support(count, len, n) > self.min_support
    }

    /// No extension of a prefix with `count` occurrences can pass the filter
    /// when this returns true, because counts only shrink as patterns grow
    /// while the window count used for normalisation is smallest at
    /// `max_window`.
    pub fn hopeless(&self, count: usize, n: usize) -> bool {
        relative_support(count, self.max_window, n) <= self.min_support
    }
}

/// `count / max(1, n - len + 1)`
pub fn relative_support(count: usize, len: usize, n: usize) -> f64 {
    let windows = (n + 1).saturating_sub(len).max(1);
    count as f64 / windows as f64
}

/// A contiguous pattern together with where it occurs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub items: Vec<Item>,
    pub support_count: usize,
    /// Support normalised by the number of windows of this length.
    pub relative_support: f64,
    /// Support normalised by the number of events.
    pub event_support: f64,
    pub occurrence_starts: Vec<usize>,
}

impl Pattern {
    pub fn from_starts(items: Vec<Item>, occurrence_starts: Vec<usize>, n: usize) -> Self {
        let support_count = occurrence_starts.len();
        Pattern {
            relative_support: relative_support(support_count, items.len(), n),
            event_support: support_count as f64 / n.max(1) as f64,
            items,
            support_count,
            occurrence_starts,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn has_wildcard(&self) -> bool {
        self.items.contains(&Item::Wildcard)
    }

    pub fn wildcard_positions(&self) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, it)| **it == Item::Wildcard)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn key(&self) -> String {
        pattern_key(&self.items)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityInfo {
    pub is_periodic: bool,
    /// Mean gap between successive occurrences, seconds.
    pub mean_interval: Option<f64>,
    /// Coefficient of variation of the gaps.
    pub interval_cv: Option<f64>,
}

impl PeriodicityInfo {
    pub const NONE: PeriodicityInfo = PeriodicityInfo {
        is_periodic: false,
        mean_interval: None,
        interval_cv: None,
    };
}

/// Periodicity test on occurrence start times (Unix seconds).
///
/// A pattern is periodic when it occurred at least three times and the
/// coefficient of variation (population standard deviation over mean) of
/// the gaps between occurrences is at most `threshold`.
pub fn periodicity(starts: &[i64], threshold: f64) -> PeriodicityInfo {
    if starts.len() < 2 {
        return PeriodicityInfo::NONE;
    }
    let gaps: Vec<f64> = starts.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
    let cv = (mean > 0.0).then(|| var.sqrt() / mean);
    PeriodicityInfo {
        is_periodic: starts.len() >= 3 && cv.is_some_and(|cv| cv <= threshold),
        mean_interval: Some(mean),
        interval_cv: cv,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedPattern {
    pub pattern: Pattern,
    pub periodicity: PeriodicityInfo,
}

/// Wire form of one line of `patterns.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub pattern: Vec<Item>,
    pub count: usize,
    pub rel_support: f64,
    pub periodic: bool,
    pub mean_interval_s: Option<f64>,
    #[serde(default)]
    pub event_support: f64,
    #[serde(default)]
    pub interval_cv: Option<f64>,
    #[serde(default)]
    pub wildcards: Vec<usize>,
}

impl From<&MinedPattern> for PatternRecord {
    fn from(m: &MinedPattern) -> Self {
        PatternRecord {
            pattern: m.pattern.items.clone(),
            count: m.pattern.support_count,
            rel_support: m.pattern.relative_support,
            periodic: m.periodicity.is_periodic,
            mean_interval_s: m.periodicity.mean_interval,
            event_support: m.pattern.event_support,
            interval_cv: m.periodicity.interval_cv,
            wildcards: m.pattern.wildcard_positions(),
        }
    }
}

pub fn write_patterns_jsonl<W: Write>(patterns: &[MinedPattern], mut out: W) -> io::Result<()> {
    for p in patterns {
        serde_json::to_writer(&mut out, &PatternRecord::from(p))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_patterns_jsonl<R: io::Read>(input: R) -> io::Result<Vec<PatternRecord>> {
    use std::io::BufRead;
    let mut out = Vec::new();
    for line in io::BufReader::new(input).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(io::Error::other)?);
    }
    Ok(out)
}

/// Collapses a pattern list into the `pattern -> count` map used for
/// comparing miners.
pub fn count_map(patterns: &[Pattern]) -> BTreeMap<Vec<Item>, usize> {
    patterns
        .iter()
        .map(|p| (p.items.clone(), p.support_count))
        .collect()
}

/// Start positions where `items` matches `seq` contiguously.
pub fn occurrences(seq: &[Symbol], items: &[Item]) -> Vec<usize> {
    if items.is_empty() || items.len() > seq.len() {
        return Vec::new();
    }
    seq.windows(items.len())
        .enumerate()
        .filter(|(_, w)| items.iter().zip(w.iter()).all(|(it, &s)| it.matches(s)))
        .map(|(i, _)| i)
        .collect()
}

pub(crate) fn check_inputs(
    seq: &[Symbol],
    timestamps: &[i64],
    params: &MiningParams,
) -> Result<(), MiningError> {
    params.validate()?;
    if seq.len() != timestamps.len() {
        return Err(MiningError::LengthMismatch {
            symbols: seq.len(),
            timestamps: timestamps.len(),
        });
    }
    if let Some(i) = timestamps.windows(2).position(|w| w[1] < w[0]) {
        return Err(MiningError::Unordered { index: i + 1 });
    }
    Ok(())
}

/// Interior wildcard masks for a pattern of length `len`: bit `j` set means
/// position `j + 1` is a wildcard.
pub(crate) fn wildcard_masks(len: usize, max_wildcards: usize) -> Vec<u32> {
    if len < 3 || max_wildcards == 0 {
        return Vec::new();
    }
    let interior = (len - 2) as u32;
    (1u32..(1 << interior))
        .filter(|m| m.count_ones() as usize <= max_wildcards)
        .collect()
}

const CANCEL_STRIDE: usize = 4096;

/// Windows of up to `max_window` items packed into one `u64`, `bits` per
/// item. Code 1 is the wildcard, symbol `s` is `s + 2`, and 0 never occurs,
/// so the length of a key is recoverable from its leading zeros.
#[derive(Clone, Copy)]
struct Packing {
    bits: u32,
}

impl Packing {
    fn for_sequence(seq: &[Symbol], max_window: usize) -> Option<Packing> {
        let top = seq.iter().map(|s| s.0 as u64).max().unwrap_or(0) + 2;
        let bits = 64 - top.leading_zeros();
        (bits as usize * max_window <= 64).then_some(Packing { bits })
    }

    fn len(self, key: u64) -> usize {
        (64 - key.leading_zeros()).div_ceil(self.bits) as usize
    }

    fn pack(self, window: &[Symbol], mask: u32) -> u64 {
        window.iter().enumerate().fold(0u64, |k, (j, s)| {
            let code = if j > 0 && mask & (1 << (j - 1)) != 0 {
                1
            } else {
                s.0 as u64 + 2
            };
            (k << self.bits) | code
        })
    }

    fn unpack(self, key: u64) -> Vec<Item> {
        let len = self.len(key);
        let low = (1u64 << self.bits) - 1;
        (0..len)
            .rev()
            .map(|j| match (key >> (j as u32 * self.bits)) & low {
                1 => Item::Wildcard,
                code => Item::Sym(Symbol((code - 2) as u32)),
            })
            .collect()
    }
}

/// Calls `visit(start, key)` for every window key of length `2..=max_len`
/// (wildcard variants included) in start order.
fn for_each_key(
    seq: &[Symbol],
    packing: Packing,
    max_len: usize,
    masks: &[Vec<u32>],
    cancel: &AtomicBool,
    mut visit: impl FnMut(usize, u64),
) -> Result<(), Cancelled> {
    let n = seq.len();
    for start in 0..n {
        if start % CANCEL_STRIDE == 0 && cancel.load(Ordering::Relaxed) {
            return Err(Cancelled);
        }
        let longest = max_len.min(n - start);
        let mut key = seq[start].0 as u64 + 2;
        for len in 2..=longest {
            key = (key << packing.bits) | (seq[start + len - 1].0 as u64 + 2);
            visit(start, key);
            for &mask in &masks[len] {
                visit(start, packing.pack(&seq[start..start + len], mask));
            }
        }
    }
    Ok(())
}

fn count_packed(
    seq: &[Symbol],
    params: &MiningParams,
    packing: Packing,
    masks: &[Vec<u32>],
    cancel: &AtomicBool,
) -> Result<FrequentWindows, Cancelled> {
    let n = seq.len();
    let max_len = params.max_window.min(n);
    let mut counts: FxHashMap<u64, u32> = FxHashMap::default();
    for_each_key(seq, packing, max_len, masks, cancel, |_, key| {
        *counts.entry(key).or_insert(0) += 1;
    })?;

    let mut slots: FxHashMap<u64, usize> = FxHashMap::default();
    let mut starts: Vec<(u64, Vec<usize>)> = Vec::new();
    for (key, count) in counts {
        if params.passes(count as usize, packing.len(key), n) {
            slots.insert(key, starts.len());
            starts.push((key, Vec::with_capacity(count as usize)));
        }
    }
    if !starts.is_empty() {
        for_each_key(seq, packing, max_len, masks, cancel, |start, key| {
            if let Some(&slot) = slots.get(&key) {
                starts[slot].1.push(start);
            }
        })?;
    }
    Ok(starts
        .into_iter()
        .map(|(key, s)| (packing.unpack(key), s))
        .collect())
}

/// Fallback for alphabets too large to pack: keys are the windows
/// themselves.
fn count_unpacked(
    seq: &[Symbol],
    params: &MiningParams,
    masks: &[Vec<u32>],
    cancel: &AtomicBool,
) -> Result<FrequentWindows, Cancelled> {
    let n = seq.len();
    let max_len = params.max_window.min(n);
    let mut plain: FxHashMap<&[Symbol], Vec<u32>> = FxHashMap::default();
    let mut wild: FxHashMap<Vec<Item>, Vec<u32>> = FxHashMap::default();
    for start in 0..n {
        if start % CANCEL_STRIDE == 0 && cancel.load(Ordering::Relaxed) {
            return Err(Cancelled);
        }
        let longest = max_len.min(n - start);
        for len in 2..=longest {
            let window = &seq[start..start + len];
            plain.entry(window).or_default().push(start as u32);
            for &mask in &masks[len] {
                let key: Vec<Item> = window
                    .iter()
                    .enumerate()
                    .map(|(j, &s)| {
                        if j > 0 && mask & (1 << (j - 1)) != 0 {
                            Item::Wildcard
                        } else {
                            Item::Sym(s)
                        }
                    })
                    .collect();
                wild.entry(key).or_default().push(start as u32);
            }
        }
    }

    let widen = |v: Vec<u32>| v.into_iter().map(|s| s as usize).collect::<Vec<_>>();
    let mut out: Vec<(Vec<Item>, Vec<usize>)> = Vec::new();
    out.extend(
        plain
            .into_iter()
            .filter(|(k, v)| params.passes(v.len(), k.len(), n))
            .map(|(k, v)| (k.iter().copied().map(Item::Sym).collect(), widen(v))),
    );
    out.extend(
        wild.into_iter()
            .filter(|(k, v)| params.passes(v.len(), k.len(), n))
            .map(|(k, v)| (k, widen(v))),
    );
    Ok(out)
}

/// Patterns paired with the start positions of their occurrences.
pub type FrequentWindows = Vec<(Vec<Item>, Vec<usize>)>;

/// The counting core: every pattern of length `2..=max_window` whose
/// relative support passes the filter, with its start positions in
/// ascending order. Unordered.
pub fn count_frequent(
    seq: &[Symbol],
    params: &MiningParams,
    cancel: &AtomicBool,
) -> Result<FrequentWindows, Cancelled> {
    let max_len = params.max_window.min(seq.len());
    let masks: Vec<Vec<u32>> = (0..=max_len)
        .map(|len| wildcard_masks(len, params.max_wildcards))
        .collect();
    match Packing::for_sequence(seq, params.max_window) {
        Some(packing) => count_packed(seq, params, packing, &masks, cancel),
        None => count_unpacked(seq, params, &masks, cancel),
    }
}

/// Canonical ordering shared by every miner: shorter patterns first, then
/// lexicographic by item.
pub fn sort_canonical(patterns: &mut [Pattern]) {
    patterns.sort_by(|a, b| (a.items.len(), &a.items).cmp(&(b.items.len(), &b.items)));
}

/// Frequent patterns without periodicity annotation.
pub fn mine_patterns(
    seq: &[Symbol],
    params: &MiningParams,
    cancel: &AtomicBool,
) -> Result<Vec<Pattern>, Cancelled> {
    let n = seq.len();
    let mut patterns: Vec<Pattern> = count_frequent(seq, params, cancel)?
        .into_iter()
        .map(|(items, starts)| Pattern::from_starts(items, starts, n))
        .collect();
    sort_canonical(&mut patterns);
    Ok(patterns)
}

/// Mines every contiguous pattern of length `2..=max_window` whose relative
/// support exceeds `min_support`, with wildcards when `max_wildcards > 0`.
pub fn mine(
    seq: &[Symbol],
    timestamps: &[i64],
    params: &MiningParams,
) -> Result<Vec<MinedPattern>, MiningError> {
    check_inputs(seq, timestamps, params)?;
    let never = AtomicBool::new(false);
    let patterns = mine_patterns(seq, params, &never).expect("mining without a cancel flag");
    Ok(patterns
        .into_iter()
        .map(|pattern| {
            let times: Vec<i64> = pattern
                .occurrence_starts
                .iter()
                .map(|&i| timestamps[i])
                .collect();
            MinedPattern {
                periodicity: periodicity(&times, params.periodicity_cv_threshold),
                pattern,
            }
        })
        .collect())
}

/// Wildcard-aware mining. Wildcarded patterns report their wildcard
/// positions through [`Pattern::wildcard_positions`]; with
/// `max_wildcards == 0` this is exactly [`mine`].
pub fn mine_wildcarded(
    seq: &[Symbol],
    timestamps: &[i64],
    params: &MiningParams,
) -> Result<Vec<MinedPattern>, MiningError> {
    mine(seq, timestamps, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| Symbol((b - b'a') as u32)).collect()
    }

    fn items(s: &str) -> Vec<Item> {
        s.bytes()
            .map(|b| {
                if b == b'*' {
                    Item::Wildcard
                } else {
                    Item::Sym(Symbol((b - b'a') as u32))
                }
            })
            .collect()
    }

    fn ts(n: usize) -> Vec<i64> {
        (0..n as i64).map(|i| i * 60).collect()
    }

    fn counts(mined: &[MinedPattern]) -> BTreeMap<Vec<Item>, usize> {
        mined
            .iter()
            .map(|m| (m.pattern.items.clone(), m.pattern.support_count))
            .collect()
    }

    #[test]
    fn alternating_pairs() {
        let seq = syms("ababab");
        let mined = mine(&seq, &ts(6), &MiningParams::new(2, 0.0)).unwrap();
        let c = counts(&mined);
        assert_eq!(c[&items("ab")], 3);
        assert_eq!(c[&items("ba")], 2);
        assert_eq!(c.len(), 2);
        let ab = mined.iter().find(|m| m.pattern.items == items("ab")).unwrap();
        assert_eq!(ab.pattern.occurrence_starts, vec![0, 2, 4]);
        assert!((ab.pattern.relative_support - 0.6).abs() < 1e-12);
        assert!((ab.pattern.event_support - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_and_single() {
        assert!(mine(&[], &[], &MiningParams::default()).unwrap().is_empty());
        assert!(mine(&syms("a"), &[0], &MiningParams::new(3, 0.0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn wildcard_counts() {
        let seq = syms("axaya");
        let params = MiningParams::new(3, 0.0).with_wildcards(1);
        let c = counts(&mine_wildcarded(&seq, &ts(5), &params).unwrap());
        assert_eq!(c[&items("a*a")], 2);
        assert_eq!(c[&items("axa")], 1);
        assert!(!c.keys().any(|k| k[0] == Item::Wildcard || k[k.len() - 1] == Item::Wildcard));
    }

    #[test]
    fn zero_wildcards_matches_plain_mine() {
        let seq = syms("abcabcaabbcc");
        let p = MiningParams::new(4, 0.0);
        let plain = mine(&seq, &ts(seq.len()), &p).unwrap();
        let again = mine(&seq, &ts(seq.len()), &p.clone().with_wildcards(0)).unwrap();
        assert_eq!(plain, again);
    }

    #[test]
    fn min_support_is_strict() {
        // (a,b) occurs 3 times over 5 windows: 0.6
        let seq = syms("ababab");
        let c = counts(&mine(&seq, &ts(6), &MiningParams::new(2, 0.6)).unwrap());
        assert!(!c.contains_key(&items("ab")));
        let c = counts(&mine(&seq, &ts(6), &MiningParams::new(2, 0.59)).unwrap());
        assert!(c.contains_key(&items("ab")));
    }

    #[test]
    fn rejects_bad_inputs() {
        let seq = syms("ab");
        assert!(matches!(
            mine(&seq, &[0], &MiningParams::default()),
            Err(MiningError::LengthMismatch { .. })
        ));
        assert_eq!(
            mine(&seq, &[5, 1], &MiningParams::default()),
            Err(MiningError::Unordered { index: 1 })
        );
        assert!(matches!(
            mine(&seq, &[0, 1], &MiningParams::new(1, 0.0)),
            Err(MiningError::InvalidParams(_))
        ));
        assert!(matches!(
            mine(&seq, &[0, 1], &MiningParams::new(2, 1.5)),
            Err(MiningError::InvalidParams(_))
        ));
    }

    #[test]
    fn periodicity_examples() {
        let p = periodicity(&[0, 100, 200, 300], 0.15);
        assert_eq!(p.mean_interval, Some(100.0));
        assert_eq!(p.interval_cv, Some(0.0));
        assert!(p.is_periodic);

        // gaps 50, 250: mean 150, population sd 100
        let p = periodicity(&[0, 50, 300], 0.15);
        assert_eq!(p.mean_interval, Some(150.0));
        assert!((p.interval_cv.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(!p.is_periodic);

        assert_eq!(periodicity(&[42], 0.15), PeriodicityInfo::NONE);
        assert_eq!(periodicity(&[], 0.15), PeriodicityInfo::NONE);
        // two occurrences are never periodic
        assert!(!periodicity(&[0, 10], 0.15).is_periodic);
        // zero mean gap has no defined cv
        let p = periodicity(&[5, 5, 5], 0.15);
        assert_eq!(p.interval_cv, None);
        assert!(!p.is_periodic);
    }

    #[test]
    fn mined_patterns_carry_periodicity() {
        let seq = syms("abxabxabxab");
        let times = vec![0, 1, 50, 100, 101, 150, 200, 201, 250, 300, 301];
        let mined = mine(&seq, &times, &MiningParams::new(2, 0.0)).unwrap();
        let ab = mined.iter().find(|m| m.pattern.items == items("ab")).unwrap();
        assert!(ab.periodicity.is_periodic);
        assert_eq!(ab.periodicity.mean_interval, Some(100.0));
    }

    #[test]
    fn occurrences_with_wildcards() {
        let seq = syms("axayab");
        assert_eq!(occurrences(&seq, &items("a*a")), vec![0, 2]);
        assert_eq!(occurrences(&seq, &items("ab")), vec![4]);
        assert!(occurrences(&seq, &items("abcdefg")).is_empty());
    }

    #[test]
    fn record_round_trip() {
        let seq = syms("axaya");
        let params = MiningParams::new(3, 0.0).with_wildcards(1);
        let mined = mine(&seq, &ts(5), &params).unwrap();
        let mut buf = Vec::new();
        write_patterns_jsonl(&mined, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains(r#"{"pattern":["S0","*","S0"],"count":2,"rel_support":0.6666666666666666,"periodic":false,"mean_interval_s":120.0"#));
        let back = read_patterns_jsonl(&buf[..]).unwrap();
        assert_eq!(back.len(), mined.len());
        assert_eq!(back[0], PatternRecord::from(&mined[0]));
    }

    #[test]
    fn cancellation_is_observed() {
        let seq = syms("ab").repeat(10);
        let cancel = AtomicBool::new(true);
        assert_eq!(
            mine_patterns(&seq, &MiningParams::new(3, 0.0), &cancel).unwrap_err(),
            Cancelled
        );
    }

    #[test]
    fn key_format() {
        assert_eq!(pattern_key(&items("a*b")), "S0 * S1");
    }

    #[test]
    fn packed_and_unpacked_counts_agree() {
        let seq: Vec<Symbol> = (0..3000u32).map(|i| Symbol((i * 7 + i / 13) % 11)).collect();
        let never = AtomicBool::new(false);
        for wildcards in 0..=2 {
            let params = MiningParams::new(5, 0.002).with_wildcards(wildcards);
            let max_len = params.max_window;
            let masks: Vec<Vec<u32>> = (0..=max_len).map(|l| wildcard_masks(l, wildcards)).collect();
            let packing = Packing::for_sequence(&seq, max_len).unwrap();
            let mut a = count_packed(&seq, &params, packing, &masks, &never).unwrap();
            let mut b = count_unpacked(&seq, &params, &masks, &never).unwrap();
            a.sort();
            b.sort();
            assert!(!a.is_empty());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn large_alphabet_falls_back() {
        let seq = vec![Symbol(u32::MAX - 3), Symbol(5)];
        assert!(Packing::for_sequence(&seq, 5).is_none());
        let p = Packing::for_sequence(&[Symbol(0), Symbol(1)], 5).unwrap();
        let items = vec![Item::Sym(Symbol(1)), Item::Wildcard, Item::Sym(Symbol(0))];
        let key = p.pack(&[Symbol(1), Symbol(3), Symbol(0)], 1);
        assert_eq!(p.unpack(key), items);
    }
}
