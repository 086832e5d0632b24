//! The service state as a fold over journal records.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, Utc};
use homeminer::engine::{
    EngineError, EngineRule, EngineState, HomeEngine, Recommendation, RecommendationStatus,
};
use homeminer::events::{iso, SymbolTable};
use homeminer::rules::{
    apply_usefulness_threshold, fit_feedback_regression, threshold_for_fraction,
    AssociationRule, RegressionError, RegressionModel, RuleBook, Vote,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::journal::Record;

/// Pending recommendations without a vote expire after this long.
pub const RECOMMENDATION_TTL: Duration = Duration::hours(24);

#[derive(Debug, Error, PartialEq)]
pub enum ApplyError {
    #[error("unknown home `{0}`")]
    UnknownHome(String),
    #[error("unknown recommendation `{0}`")]
    UnknownRecommendation(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("recommendation `{id}` is already {status}")]
    NotPending { id: String, status: &'static str },
    #[error("recommendation `{0}` has expired")]
    Expired(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error("invalid record: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecommendation {
    #[serde(flatten)]
    pub recommendation: Recommendation,
    #[serde(with = "iso::option", default)]
    pub answered_at: Option<DateTime<Utc>>,
}

impl StoredRecommendation {
    pub fn expires_at(&self) -> DateTime<Utc> {
        self.recommendation.created_at + RECOMMENDATION_TTL
    }
}

#[derive(Debug, Clone)]
pub struct HomeState {
    pub engine: HomeEngine,
    pub rules: RuleBook,
    pub model: Option<RegressionModel>,
}

/// What applying a record produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub emitted: Vec<Recommendation>,
    pub expired: Vec<String>,
    /// The rule touched by feedback or a reset.
    pub rule: Option<AssociationRule>,
    /// Rules newly excluded by a refit.
    pub excluded: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ServiceState {
    homes: BTreeMap<String, HomeState>,
    recommendations: BTreeMap<String, StoredRecommendation>,
    pending: BTreeSet<String>,
    applied: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomeSnapshot {
    pub rules: Vec<AssociationRule>,
    pub engine: EngineState,
    pub model: Option<RegressionModel>,
}

/// Everything that survives a restart, in a deterministic layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub applied: u64,
    pub homes: BTreeMap<String, HomeSnapshot>,
    pub recommendations: Vec<StoredRecommendation>,
}

impl Snapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }
}

impl ServiceState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds records in order.
    pub fn replay<'a>(records: impl IntoIterator<Item = &'a Record>) -> Result<Self, (usize, ApplyError)> {
        let mut state = ServiceState::new();
        for (i, r) in records.into_iter().enumerate() {
            state.apply(r).map_err(|e| (i + 1, e))?;
        }
        Ok(state)
    }

    pub fn applied(&self) -> u64 {
        self.applied
    }

    pub fn homes(&self) -> impl Iterator<Item = (&String, &HomeState)> {
        self.homes.iter()
    }

    pub fn home(&self, id: &str) -> Option<&HomeState> {
        self.homes.get(id)
    }

    pub fn recommendations(&self) -> impl Iterator<Item = &StoredRecommendation> {
        self.recommendations.values()
    }

    pub fn recommendation(&self, id: &str) -> Option<&StoredRecommendation> {
        self.recommendations.get(id)
    }

    pub fn rule(&self, rule_id: &str) -> Option<&AssociationRule> {
        self.homes.values().find_map(|h| h.rules.get(rule_id))
    }

    fn home_of(&self, id: &str) -> Result<&HomeState, ApplyError> {
        self.homes
            .get(id)
            .ok_or_else(|| ApplyError::UnknownHome(id.to_string()))
    }

    /// Checks that `record` would apply cleanly, without changing anything.
    pub fn validate(&self, record: &Record) -> Result<(), ApplyError> {
        match record {
            Record::RulesLoaded {
                home_id,
                policy,
                symbols,
                rules,
                config,
                ..
            } => {
                config.validate()?;
                let table = SymbolTable::from_entries(*policy, symbols.clone())
                    .map_err(|e| ApplyError::Invalid(e.to_string()))?;
                for r in rules {
                    if &r.home_id != home_id {
                        return Err(ApplyError::Invalid(format!("rule {} belongs to {}", r.id, r.home_id)));
                    }
                    if r.antecedent.is_empty() || table.get(r.consequent).is_none() {
                        return Err(ApplyError::Invalid(format!("rule {} does not match the symbol table", r.id)));
                    }
                }
                Ok(())
            }
            Record::Event { event } => {
                let home = self.home_of(&event.home_id)?;
                match home.engine.state().last_event_at {
                    Some(last) if event.timestamp < last => Err(EngineError::OutOfOrder {
                        at: event.timestamp,
                        last,
                    }
                    .into()),
                    _ => Ok(()),
                }
            }
            Record::Tick { home_id, .. } => self.home_of(home_id).map(|_| ()),
            Record::Feedback {
                recommendation_id,
                at,
                ..
            } => {
                let rec = self
                    .recommendations
                    .get(recommendation_id)
                    .ok_or_else(|| ApplyError::UnknownRecommendation(recommendation_id.clone()))?;
                let status = rec.recommendation.status;
                if status != RecommendationStatus::Pending {
                    return Err(ApplyError::NotPending {
                        id: recommendation_id.clone(),
                        status: status.as_str(),
                    });
                }
                if *at >= rec.expires_at() {
                    return Err(ApplyError::Expired(recommendation_id.clone()));
                }
                let home = self.home_of(&rec.recommendation.home_id)?;
                home.rules
                    .get(&rec.recommendation.rule_id)
                    .map(|_| ())
                    .ok_or_else(|| ApplyError::UnknownRule(rec.recommendation.rule_id.clone()))
            }
            Record::ResetRule { home_id, rule_id, .. } => self
                .home_of(home_id)?
                .rules
                .get(rule_id)
                .map(|_| ())
                .ok_or_else(|| ApplyError::UnknownRule(rule_id.clone())),
            Record::Refit {
                home_id,
                exclude_fraction,
                ..
            } => {
                if !(0.0..=1.0).contains(exclude_fraction) {
                    return Err(ApplyError::Invalid(format!(
                        "exclude_fraction {exclude_fraction} outside [0, 1]"
                    )));
                }
                fit_feedback_regression(self.home_of(home_id)?.rules.iter())?;
                Ok(())
            }
        }
    }

    pub fn apply(&mut self, record: &Record) -> Result<Outcome, ApplyError> {
        self.validate(record)?;
        let mut out = Outcome::default();
        match record {
            Record::RulesLoaded {
                home_id,
                policy,
                symbols,
                rules,
                config,
            } => {
                let table = SymbolTable::from_entries(*policy, symbols.clone())
                    .map_err(|e| ApplyError::Invalid(e.to_string()))?;
                let engine = HomeEngine::new(
                    home_id.clone(),
                    table,
                    rules.iter().map(EngineRule::from),
                    config.clone(),
                )?;
                let book = RuleBook::new(rules.iter().cloned(), homeminer::rules::DEFAULT_RETIREMENT_THRESHOLD);
                self.homes.insert(
                    home_id.clone(),
                    HomeState {
                        engine,
                        rules: book,
                        model: None,
                    },
                );
            }
            Record::Event { event } => {
                out.expired = self.expire(&event.home_id, event.timestamp);
                let home = self.homes.get_mut(&event.home_id).expect("validated");
                out.emitted = home.engine.step(event)?;
                self.store(&out.emitted);
            }
            Record::Tick { home_id, at } => {
                out.expired = self.expire(home_id, *at);
                let home = self.homes.get_mut(home_id).expect("validated");
                out.emitted = home.engine.on_timeout(*at);
                self.store(&out.emitted);
            }
            Record::Feedback {
                recommendation_id,
                vote,
                at,
            } => {
                let rec = self
                    .recommendations
                    .get_mut(recommendation_id)
                    .expect("validated");
                rec.recommendation.status = match vote {
                    Vote::Useful => RecommendationStatus::AcceptedUseful,
                    Vote::NotUseful => RecommendationStatus::RejectedNotUseful,
                };
                rec.answered_at = Some(*at);
                self.pending.remove(recommendation_id);
                let (home_id, rule_id) = (
                    rec.recommendation.home_id.clone(),
                    rec.recommendation.rule_id.clone(),
                );
                let home = self.homes.get_mut(&home_id).expect("validated");
                let rule = home
                    .rules
                    .apply_feedback(&rule_id, *vote, Some(*at))
                    .expect("validated")
                    .clone();
                home.engine.update_rule(&rule);
                out.rule = Some(rule);
            }
            Record::ResetRule { home_id, rule_id, .. } => {
                let home = self.homes.get_mut(home_id).expect("validated");
                let rule = home.rules.admin_reset(rule_id).expect("validated").clone();
                home.engine.update_rule(&rule);
                out.rule = Some(rule);
            }
            Record::Refit {
                home_id,
                exclude_fraction,
                ..
            } => {
                let home = self.homes.get_mut(home_id).expect("validated");
                let model = fit_feedback_regression(home.rules.iter())?;
                let threshold = threshold_for_fraction(home.rules.iter(), &model, *exclude_fraction);
                out.excluded = Some(apply_usefulness_threshold(home.rules.iter_mut(), &model, threshold));
                for rule in home.rules.iter() {
                    home.engine.update_rule(rule);
                }
                home.model = Some(model);
            }
        }
        self.applied += 1;
        Ok(out)
    }

    fn store(&mut self, emitted: &[Recommendation]) {
        for rec in emitted {
            self.pending.insert(rec.id.clone());
            self.recommendations.insert(
                rec.id.clone(),
                StoredRecommendation {
                    recommendation: rec.clone(),
                    answered_at: None,
                },
            );
        }
    }

    fn expire(&mut self, home_id: &str, now: DateTime<Utc>) -> Vec<String> {
        let due: Vec<String> = self
            .pending
            .iter()
            .filter(|id| {
                let r = &self.recommendations[*id];
                r.recommendation.home_id == home_id && r.expires_at() <= now
            })
            .cloned()
            .collect();
        for id in &due {
            self.pending.remove(id);
            if let Some(r) = self.recommendations.get_mut(id) {
                r.recommendation.status = RecommendationStatus::Expired;
            }
        }
        due
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            applied: self.applied,
            homes: self
                .homes
                .iter()
                .map(|(id, h)| {
                    (
                        id.clone(),
                        HomeSnapshot {
                            rules: h.rules.iter().cloned().collect(),
                            engine: h.engine.state().clone(),
                            model: h.model.clone(),
                        },
                    )
                })
                .collect(),
            recommendations: self.recommendations.values().cloned().collect(),
        }
    }
}
