//! Feedback metrics over a time window.

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use homeminer::engine::RecommendationStatus;
use serde::{Deserialize, Serialize};

use crate::state::ServiceState;

/// `[from, to)`; open ends are unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsWindow {
    pub from: Option<DateTime<Utc>>,
    pub to: Option<DateTime<Utc>>,
}

impl MetricsWindow {
    pub fn all() -> Self {
        Self::default()
    }

    /// Whole civil days, both inclusive.
    pub fn days(from: NaiveDate, to: NaiveDate) -> Self {
        MetricsWindow {
            from: Some(from.and_hms_opt(0, 0, 0).expect("midnight").and_utc()),
            to: Some((to + Duration::days(1)).and_hms_opt(0, 0, 0).expect("midnight").and_utc()),
        }
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.from.is_none_or(|f| t >= f) && self.to.is_none_or(|e| t < e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    pub window: MetricsWindow,
    pub recommendations_sent: u64,
    pub answered: u64,
    pub voted_useful: u64,
    pub voted_not_useful: u64,
    pub ratio_useful_answered: f64,
    pub active_rules: u64,
    pub rules_emitting: u64,
    pub rules_retired_by_streak: u64,
    pub recs_per_day_per_home: f64,
}

/// `useful / max(1, answered)`
pub fn useful_ratio(useful: u64, answered: u64) -> f64 {
    useful as f64 / answered.max(1) as f64
}

/// A ratio as a percentage with two decimals, e.g. `9.21%`.
pub fn percent(ratio: f64) -> String {
    format!("{:.2}%", ratio * 100.0)
}

impl MetricsSnapshot {
    pub fn ratio_percent(&self) -> String {
        percent(self.ratio_useful_answered)
    }
}

pub fn compute_metrics(state: &ServiceState, window: MetricsWindow) -> MetricsSnapshot {
    let recs: Vec<_> = state
        .recommendations()
        .filter(|r| window.contains(r.recommendation.created_at))
        .collect();
    let count = |s: RecommendationStatus| recs.iter().filter(|r| r.recommendation.status == s).count() as u64;
    let voted_useful = count(RecommendationStatus::AcceptedUseful);
    let voted_not_useful = count(RecommendationStatus::RejectedNotUseful);
    let answered = voted_useful + voted_not_useful;
    let emitting: BTreeSet<&str> = recs.iter().map(|r| r.recommendation.rule_id.as_str()).collect();

    let rules = || state.homes().flat_map(|(_, h)| h.rules.iter());
    let homes = state.homes().count().max(1) as f64;
    let days = match (window.from, window.to) {
        (Some(f), Some(t)) => ((t - f).num_seconds() as f64 / 86_400.0).ceil().max(1.0),
        _ => {
            let dates: BTreeSet<NaiveDate> = recs.iter().map(|r| r.recommendation.created_at.date_naive()).collect();
            match (dates.first(), dates.last()) {
                (Some(a), Some(b)) => ((*b - *a).num_days() + 1) as f64,
                _ => 1.0,
            }
        }
    };
    MetricsSnapshot {
        window,
        recommendations_sent: recs.len() as u64,
        answered,
        voted_useful,
        voted_not_useful,
        ratio_useful_answered: useful_ratio(voted_useful, answered),
        active_rules: rules().filter(|r| r.active).count() as u64,
        rules_emitting: emitting.len() as u64,
        rules_retired_by_streak: rules().filter(|r| r.is_retired()).count() as u64,
        recs_per_day_per_home: recs.len() as f64 / days / homes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(percent(useful_ratio(7, 76)), "9.21%");
        assert_eq!(percent(useful_ratio(5, 55)), "9.09%");
        assert_eq!(useful_ratio(0, 0), 0.0);
    }

    #[test]
    fn empty_state_is_all_zero() {
        let m = compute_metrics(&ServiceState::new(), MetricsWindow::all());
        assert_eq!(m.recommendations_sent, 0);
        assert_eq!(m.ratio_useful_answered, 0.0);
        assert_eq!(m.recs_per_day_per_home, 0.0);
        assert_eq!(m.ratio_percent(), "0.00%");
    }
}
