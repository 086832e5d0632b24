//! Reference miners.
//!
//! [`brute_force_mine`] is the ground truth: a first loop collects every
//! candidate window, a second loop scans the whole sequence once per
//! candidate. [`prefix_growth_mine`] is a generic projected-database miner
//! in the PrefixSpan family, restricted to contiguous extensions. Both agree
//! with [`crate::wsdd::mine`] on every input; they exist for differential
//! testing and as benchmark baselines.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use std::collections::BTreeMap;

use crate::bench::memory;
use crate::events::Symbol;
use crate::wsdd::{
    self, sort_canonical, wildcard_masks, Cancelled, Item, MiningError, MiningParams, Pattern,
};

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub patterns: Vec<Pattern>,
    pub miner_name: &'static str,
    pub wall_time: Duration,
    /// Peak heap growth during the call, when allocation tracking is active.
    pub peak_memory: Option<u64>,
}

fn validate(params: &MiningParams) -> Result<(), MiningError> {
    params.validate()
}

pub fn brute_force_mine(seq: &[Symbol], params: &MiningParams) -> Result<Vec<Pattern>, MiningError> {
    validate(params)?;
    let never = AtomicBool::new(false);
    Ok(brute_force_cancellable(seq, params, &never).expect("not cancelled"))
}

pub fn brute_force_cancellable(
    seq: &[Symbol],
    params: &MiningParams,
    cancel: &AtomicBool,
) -> Result<Vec<Pattern>, Cancelled> {
    let n = seq.len();
    let max_len = params.max_window.min(n);

    // first loop: every window shape that occurs anywhere
    let mut candidates: Vec<Vec<Item>> = Vec::new();
    for start in 0..n {
        if cancel.load(Ordering::Relaxed) {
            return Err(Cancelled);
        }
        for len in 2..=max_len.min(n - start) {
            let window = &seq[start..start + len];
            candidates.push(window.iter().copied().map(Item::Sym).collect());
            for mask in wildcard_masks(len, params.max_wildcards) {
                let mut items: Vec<Item> = window.iter().copied().map(Item::Sym).collect();
                for (j, item) in items.iter_mut().enumerate().take(len - 1).skip(1) {
                    if mask & (1 << (j - 1)) != 0 {
                        *item = Item::Wildcard;
                    }
                }
                candidates.push(items);
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();

    // second loop: count each candidate over the full sequence
    let mut out = Vec::new();
    for cand in candidates {
        if cancel.load(Ordering::Relaxed) {
            return Err(Cancelled);
        }
        let len = cand.len();
        let mut starts = Vec::new();
        for start in 0..=(n - len) {
            let mut hit = true;
            for j in 0..len {
                if !cand[j].matches(seq[start + j]) {
                    hit = false;
                    break;
                }
            }
            if hit {
                starts.push(start);
            }
        }
        if params.passes(starts.len(), len, n) {
            out.push(Pattern::from_starts(cand, starts, n));
        }
    }
    sort_canonical(&mut out);
    Ok(out)
}

/// One sequence of the projected database: the window that started at
/// `origin`, with the already-matched prefix removed.
#[derive(Debug, Clone)]
struct Postfix {
    origin: u32,
    rest: Vec<Symbol>,
}

struct Grower<'a> {
    params: &'a MiningParams,
    n: usize,
    cancel: &'a AtomicBool,
    out: Vec<Pattern>,
}

impl Grower<'_> {
    fn grow(
        &mut self,
        prefix: &mut Vec<Item>,
        db: &[Postfix],
        wildcards: usize,
    ) -> Result<(), Cancelled> {
        if self.cancel.load(Ordering::Relaxed) {
            return Err(Cancelled);
        }
        let len = prefix.len() + 1;
        if len > self.params.max_window {
            return Ok(());
        }

        let mut projected: BTreeMap<Symbol, Vec<Postfix>> = BTreeMap::new();
        for p in db {
            if let Some((&head, tail)) = p.rest.split_first() {
                projected.entry(head).or_default().push(Postfix {
                    origin: p.origin,
                    rest: tail.to_vec(),
                });
            }
        }

        for (sym, sub) in projected {
            let count = sub.len();
            prefix.push(Item::Sym(sym));
            if len >= 2 && self.params.passes(count, len, self.n) {
                let starts = sub.iter().map(|p| p.origin as usize).collect();
                self.out.push(Pattern::from_starts(prefix.clone(), starts, self.n));
            }
            if !self.params.hopeless(count, self.n) {
                self.grow(prefix, &sub, wildcards)?;
            }
            prefix.pop();
        }

        // a wildcard needs a concrete symbol after it
        if !prefix.is_empty() && wildcards < self.params.max_wildcards && len < self.params.max_window
        {
            let sub: Vec<Postfix> = db
                .iter()
                .filter(|p| p.rest.len() >= 2)
                .map(|p| Postfix {
                    origin: p.origin,
                    rest: p.rest[1..].to_vec(),
                })
                .collect();
            if !sub.is_empty() && !self.params.hopeless(sub.len(), self.n) {
                prefix.push(Item::Wildcard);
                self.grow(prefix, &sub, wildcards + 1)?;
                prefix.pop();
            }
        }
        Ok(())
    }
}

pub fn prefix_growth_patterns(
    seq: &[Symbol],
    params: &MiningParams,
    cancel: &AtomicBool,
) -> Result<Vec<Pattern>, Cancelled> {
    let n = seq.len();
    let db: Vec<Postfix> = (0..n)
        .map(|i| Postfix {
            origin: i as u32,
            rest: seq[i..(i + params.max_window).min(n)].to_vec(),
        })
        .collect();
    let mut grower = Grower {
        params,
        n,
        cancel,
        out: Vec::new(),
    };
    grower.grow(&mut Vec::new(), &db, 0)?;
    let mut out = grower.out;
    sort_canonical(&mut out);
    Ok(out)
}

pub fn prefix_growth_mine(
    seq: &[Symbol],
    params: &MiningParams,
) -> Result<BaselineResult, MiningError> {
    validate(params)?;
    let never = AtomicBool::new(false);
    let (patterns, wall_time, peak_memory) =
        memory::measure(|| prefix_growth_patterns(seq, params, &never).expect("not cancelled"));
    Ok(BaselineResult {
        patterns,
        miner_name: "prefix_growth",
        wall_time,
        peak_memory,
    })
}

/// Runs the WSDD counting pass through the same measurement wrapper as the
/// baselines.
pub fn wsdd_baseline(seq: &[Symbol], params: &MiningParams) -> Result<BaselineResult, MiningError> {
    validate(params)?;
    let never = AtomicBool::new(false);
    let (patterns, wall_time, peak_memory) =
        memory::measure(|| wsdd::mine_patterns(seq, params, &never).expect("not cancelled"));
    Ok(BaselineResult {
        patterns,
        miner_name: "wsdd",
        wall_time,
        peak_memory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wsdd::count_map;

    fn syms(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| Symbol((b - b'a') as u32)).collect()
    }

    fn items(s: &str) -> Vec<Item> {
        s.bytes()
            .map(|b| match b {
                b'*' => Item::Wildcard,
                _ => Item::Sym(Symbol((b - b'a') as u32)),
            })
            .collect()
    }

    #[test]
    fn brute_force_hand_enumeration() {
        let c = count_map(&brute_force_mine(&syms("ababab"), &MiningParams::new(3, 0.0)).unwrap());
        assert_eq!(c[&items("aba")], 2);
        assert_eq!(c[&items("bab")], 2);
        assert_eq!(c[&items("ab")], 3);
        assert_eq!(c[&items("ba")], 2);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn empty_inputs() {
        assert!(brute_force_mine(&[], &MiningParams::default()).unwrap().is_empty());
        assert!(prefix_growth_mine(&[], &MiningParams::default())
            .unwrap()
            .patterns
            .is_empty());
    }

    #[test]
    fn full_support_threshold_is_empty() {
        let seq = syms("aaaaaa");
        let p = MiningParams::new(3, 1.0);
        assert!(prefix_growth_mine(&seq, &p).unwrap().patterns.is_empty());
        assert!(brute_force_mine(&seq, &p).unwrap().is_empty());
    }

    #[test]
    fn wildcards_agree_on_small_case() {
        let seq = syms("axayaxab");
        let p = MiningParams::new(4, 0.0).with_wildcards(2);
        let brute = count_map(&brute_force_mine(&seq, &p).unwrap());
        let prefix = count_map(&prefix_growth_mine(&seq, &p).unwrap().patterns);
        assert_eq!(brute, prefix);
        assert_eq!(brute[&items("a*a")], 3);
        assert!(!brute.contains_key(&items("a**a")));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(brute_force_mine(&syms("ab"), &MiningParams::new(1, 0.0)).is_err());
        assert!(prefix_growth_mine(&syms("ab"), &MiningParams::new(2, -0.1)).is_err());
    }

    #[test]
    fn cancelled_brute_force() {
        let cancel = AtomicBool::new(true);
        assert!(brute_force_cancellable(&syms("abab"), &MiningParams::new(2, 0.0), &cancel).is_err());
        assert!(prefix_growth_patterns(&syms("abab"), &MiningParams::new(2, 0.0), &cancel).is_err());
    }
}
