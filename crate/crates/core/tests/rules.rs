use homeminer::events::Symbol;
use homeminer::rules::{
    extract_rule, filter_relevant, is_relevant, ActionSet, AssociationRule, Feature,
    FeedbackSample, RegressionModel, RuleConfig, RuleFeatures, Vote,
};
use homeminer::wsdd::{Item, Pattern};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn base_rule() -> AssociationRule {
    let seq = [Symbol(0), Symbol(9)];
    extract_rule(
        "H",
        &[Item::Sym(Symbol(0)), Item::Sym(Symbol(9))],
        &ActionSet::new([Symbol(9)]),
        &seq,
        &RuleConfig::default(),
    )
    .unwrap()
}

/// Straight from the definition: retired once any run of consecutive
/// negatives reaches the threshold; the streak is the trailing run.
fn reference(votes: &[Vote], threshold: u32) -> (bool, u32) {
    let mut run = 0;
    let mut retired = false;
    for v in votes {
        run = if *v == Vote::NotUseful { run + 1 } else { 0 };
        retired |= run >= threshold;
    }
    (!retired, run)
}

fn pattern_strategy() -> impl Strategy<Value = Pattern> {
    prop::collection::vec(prop_oneof![4 => (0u32..6).prop_map(|s| Item::Sym(Symbol(s))), 1 => Just(Item::Wildcard)], 2..6)
        .prop_map(|mut items| {
            items[0] = Item::Sym(items[0].symbol().unwrap_or(Symbol(0)));
            Pattern::from_starts(items, vec![0], 100)
        })
}

proptest! {
    #[test]
    fn feedback_fold_matches_reference(
        votes in prop::collection::vec(prop_oneof![Just(Vote::Useful), Just(Vote::NotUseful)], 0..40),
        threshold in 1u32..12,
    ) {
        let mut rule = base_rule();
        for v in &votes {
            rule.apply_feedback(*v, None, threshold);
        }
        let (active, streak) = reference(&votes, threshold);
        prop_assert_eq!(rule.active, active);
        prop_assert_eq!(rule.negative_streak, streak);
        prop_assert_eq!(rule.feedback_log.len(), votes.len());
    }

    #[test]
    fn relevance_filter_is_idempotent(patterns in prop::collection::vec(pattern_strategy(), 0..30)) {
        let actions = ActionSet::new([Symbol(4), Symbol(5)]);
        let once = filter_relevant(&patterns, &actions);
        let twice = filter_relevant(&once, &actions);
        prop_assert_eq!(&once, &twice);
        for p in &once {
            prop_assert!(is_relevant(p, &actions));
        }
    }

    #[test]
    fn extracted_rules_are_well_formed(
        pattern in pattern_strategy(),
        seq in prop::collection::vec((0u32..6).prop_map(Symbol), 0..200),
    ) {
        let actions = ActionSet::new([Symbol(4), Symbol(5)]);
        if let Ok(rule) = extract_rule("H", &pattern.items, &actions, &seq, &RuleConfig::default()) {
            prop_assert!(is_relevant(&pattern, &actions));
            prop_assert!(!rule.antecedent.is_empty());
            prop_assert!(rule.antecedent.iter().all(|s| !actions.contains(*s)));
            prop_assert!(actions.contains(rule.consequent));
            prop_assert_eq!(rule.pattern_length, rule.antecedent.len() + 1);
            prop_assert!((0.0..=1.0).contains(&rule.confidence));
            prop_assert!(rule.support_count <= rule.antecedent_count);
        } else {
            prop_assert!(!is_relevant(&pattern, &actions));
        }
    }
}

/// 50 rules with feedback `2 conf + 0.5 len + noise`.
pub fn synthetic_feedback(seed: u64, sigma: f64) -> Vec<FeedbackSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    (0..50)
        .map(|_| {
            let len = rng.gen_range(2..=6);
            let f = RuleFeatures {
                confidence: rng.gen_range(0.0..1.0),
                pattern_length: len as f64,
                support: rng.gen_range(0.0..0.5),
                action_position: rng.gen_range(1..=len) as f64,
            };
            FeedbackSample {
                features: f,
                score: 2.0 * f.confidence + 0.5 * f.pattern_length + noise.sample(&mut rng),
            }
        })
        .collect()
}

#[test]
fn regression_recovers_known_coefficients() {
    let mut false_flags = 0;
    let seeds = 100;
    for seed in 0..seeds {
        let m = RegressionModel::fit(&synthetic_feedback(seed, 0.01)).unwrap();
        for (f, truth) in [
            (Feature::Confidence, 2.0),
            (Feature::PatternLength, 0.5),
            (Feature::Support, 0.0),
            (Feature::ActionPosition, 0.0),
        ] {
            assert!((m.estimate(f) - truth).abs() <= 0.05, "seed {seed} {f:?}");
        }
        assert!(m.coefficient(Feature::Confidence).is_significant());
        assert!(m.coefficient(Feature::PatternLength).is_significant());
        false_flags += [Feature::Support, Feature::ActionPosition]
            .iter()
            .filter(|&&f| m.coefficient(f).is_significant())
            .count();
    }
    // two null coefficients at a 5% level
    assert!(false_flags <= 2 * seeds as usize * 15 / 100, "{false_flags} false positives");
}
