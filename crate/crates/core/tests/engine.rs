use chrono::{DateTime, Duration, TimeZone, Utc};
use homeminer::engine::{EmissionPolicy, EngineConfig, EngineRule, HomeEngine, Recommendation};
use homeminer::events::{Symbol, SymbolPolicy, SymbolTable};
use proptest::prelude::*;

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2014, 3, 1, 0, 0, 0).unwrap()
}

fn rule_strategy() -> impl Strategy<Value = EngineRule> {
    (
        prop::collection::vec((0u32..4).prop_map(Symbol), 1..4),
        (0u32..4).prop_map(Symbol),
        0u32..4,
        0u32..3,
    )
        .prop_map(|(antecedent, consequent, weight, conf)| EngineRule {
            id: format!("{antecedent:?}>{consequent}"),
            antecedent,
            consequent,
            weight: weight as f64,
            confidence: conf as f64 / 2.0,
            active: true,
        })
}

fn rules_strategy() -> impl Strategy<Value = Vec<EngineRule>> {
    prop::collection::vec(rule_strategy(), 1..5).prop_map(|mut rules| {
        rules.sort_by(|a, b| a.id.cmp(&b.id));
        rules.dedup_by(|a, b| a.id == b.id);
        rules
    })
}

fn engine(rules: &[EngineRule], policy: EmissionPolicy) -> HomeEngine {
    let config = EngineConfig {
        policy,
        ..EngineConfig::default()
    };
    HomeEngine::new("H", SymbolTable::new(SymbolPolicy::device()), rules.to_vec(), config).unwrap()
}

fn replay(e: &mut HomeEngine, stream: &[(DateTime<Utc>, Symbol)]) -> Vec<Recommendation> {
    let mut out = Vec::new();
    for &(at, s) in stream {
        out.extend(e.step_symbol(at, Some(s)).unwrap());
    }
    if let Some(&(last, _)) = stream.last() {
        out.extend(e.on_timeout(last + Duration::hours(1)));
    }
    out
}

/// Brute-force scan: at each position, the rules whose antecedent ends
/// there and whose consequent does not follow; the winner by weight, then
/// confidence, then id.
fn scan(rules: &[EngineRule], stream: &[Symbol]) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..stream.len() {
        let best = rules
            .iter()
            .filter(|r| {
                let k = r.antecedent.len();
                i + 1 >= k
                    && stream[i + 1 - k..=i] == r.antecedent[..]
                    && stream.get(i + 1) != Some(&r.consequent)
            })
            .min_by(|a, b| {
                b.weight
                    .total_cmp(&a.weight)
                    .then(b.confidence.total_cmp(&a.confidence))
                    .then(a.id.cmp(&b.id))
            });
        if let Some(r) = best {
            out.push(r.id.clone());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn emissions_match_brute_force_scan(
        rules in rules_strategy(),
        stream in prop::collection::vec((0u32..4).prop_map(Symbol), 0..40),
    ) {
        let timed: Vec<_> = stream.iter().enumerate().map(|(i, &s)| (t0() + Duration::minutes(i as i64), s)).collect();
        let mut e = engine(&rules, EmissionPolicy::unlimited());
        let got: Vec<String> = replay(&mut e, &timed).into_iter().map(|r| r.rule_id).collect();
        prop_assert_eq!(got, scan(&rules, &stream));
    }

    #[test]
    fn policy_ceilings_hold_and_replay_is_deterministic(
        rules in rules_strategy(),
        stream in prop::collection::vec(((0u32..4).prop_map(Symbol), 1i64..240), 0..200),
    ) {
        let mut at = t0();
        let timed: Vec<_> = stream.iter().map(|&(s, gap)| { at += Duration::minutes(gap); (at, s) }).collect();
        let policy = EmissionPolicy::default();
        let recs = replay(&mut engine(&rules, policy.clone()), &timed);
        prop_assert_eq!(&recs, &replay(&mut engine(&rules, policy.clone()), &timed));

        let mut per_day = std::collections::BTreeMap::new();
        for r in &recs {
            *per_day.entry(r.created_at.date_naive()).or_insert(0u32) += 1;
        }
        prop_assert!(per_day.values().all(|&n| n <= policy.per_home_daily_cap));
        for (i, a) in recs.iter().enumerate() {
            for b in &recs[i + 1..] {
                if a.rule_id == b.rule_id {
                    prop_assert!(b.created_at - a.created_at >= policy.per_rule_cooldown);
                }
            }
        }
        let times: Vec<_> = recs.iter().map(|r| r.created_at).collect();
        let mut dedup = times.clone();
        dedup.dedup();
        prop_assert_eq!(times, dedup, "one recommendation per event");
    }
}
