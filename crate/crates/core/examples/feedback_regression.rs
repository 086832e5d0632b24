//! Fits the usefulness regression to synthetic feedback with known
//! coefficients, then shows the threshold that excludes the weakest rules.
//!
//! cargo run -p homeminer --example feedback_regression -- [sigma]

use homeminer::events::Symbol;
use homeminer::rules::{
    threshold_for_fraction, usefulness_coefficient, AssociationRule, Feature, FeedbackSample, RegressionModel,
    RuleFeatures, DEFAULT_EXCLUDE_FRACTION,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let sigma: f64 = std::env::args().nth(1).map_or(0.01, |a| a.parse().expect("sigma"));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, sigma).expect("sigma");
    let samples: Vec<FeedbackSample> = (0..50)
        .map(|_| {
            let len = rng.gen_range(2..=6);
            let features = RuleFeatures {
                confidence: rng.gen_range(0.0..1.0),
                pattern_length: len as f64,
                support: rng.gen_range(0.0..0.5),
                action_position: rng.gen_range(1..=len) as f64,
            };
            let score = 2.0 * features.confidence + 0.5 * features.pattern_length + noise.sample(&mut rng);
            FeedbackSample { features, score }
        })
        .collect();

    let model = RegressionModel::fit(&samples).expect("fit");
    println!("score = 2.0 conf + 0.5 len + N(0, {sigma}), 50 rules, R^2 = {:.4}", model.r_squared);
    println!("{:<16} {:>9} {:>9} {:>8} {:>8}", "feature", "estimate", "std err", "p", "signif");
    println!("{:<16} {:>9.4}", "intercept", model.intercept);
    for f in Feature::ALL {
        let c = model.coefficient(f);
        println!(
            "{:<16} {:>9.4} {:>9.4} {:>8.4} {:>8}",
            format!("{f:?}"),
            c.estimate,
            c.std_error.unwrap_or(f64::NAN),
            c.p_value.unwrap_or(f64::NAN),
            c.is_significant()
        );
    }

    // the same model scoring rules of growing length and confidence
    let rules: Vec<AssociationRule> = (0..20)
        .map(|i| {
            let len = 2 + i % 4;
            AssociationRule {
                id: format!("H1/r{i}"),
                home_id: "H1".into(),
                antecedent: (0..len as u32 - 1).map(Symbol).collect(),
                consequent: Symbol(99),
                support_count: 10,
                antecedent_count: 20,
                relative_support: 0.01,
                confidence: (i % 10) as f64 / 10.0,
                pattern_length: len,
                action_position: len,
                weight: 0.0,
                active: true,
                deactivation: None,
                negative_streak: 0,
                feedback_log: Vec::new(),
            }
        })
        .collect();
    let threshold = threshold_for_fraction(&rules, &model, DEFAULT_EXCLUDE_FRACTION);
    let excluded = rules.iter().filter(|r| usefulness_coefficient(r, &model) < threshold).count();
    println!(
        "usefulness threshold {threshold:.3} excludes {excluded} of {} rules ({:.0}% target)",
        rules.len(),
        DEFAULT_EXCLUDE_FRACTION * 100.0
    );
}
