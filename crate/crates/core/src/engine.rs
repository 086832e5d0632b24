//! Streaming rule matcher.
//!
//! Every incoming event spawns one matcher instance per rule whose
//! antecedent starts with it. Instances advance on contiguous matches and
//! die on the first mismatch. An instance that has seen the whole antecedent
//! waits for the next event: if that event is the rule's action the user
//! already did the right thing and nothing is sent, otherwise a
//! recommendation is emitted. A completed instance also fires when the home
//! stays silent for `completion_timeout`.
//!
//! Time comes only from event timestamps and explicit [`HomeEngine::on_timeout`]
//! calls, so replays are deterministic.

use std::collections::{BTreeMap, VecDeque};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{iso, Event, EventFilter, Symbol, SymbolTable};
use crate::rules::AssociationRule;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("event at {at} is older than the last accepted event at {last}")]
    OutOfOrder { at: DateTime<Utc>, last: DateTime<Utc> },
    #[error("event for home `{got}` sent to engine of home `{expected}`")]
    WrongHome { expected: String, got: String },
    #[error("invalid engine configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionPolicy {
    #[serde(with = "secs")]
    pub per_rule_cooldown: Duration,
    pub per_home_daily_cap: u32,
    #[serde(with = "secs")]
    pub completion_timeout: Duration,
}

impl Default for EmissionPolicy {
    fn default() -> Self {
        EmissionPolicy {
            per_rule_cooldown: Duration::hours(6),
            per_home_daily_cap: 3,
            completion_timeout: Duration::minutes(5),
        }
    }
}

impl EmissionPolicy {
    /// No cooldown or cap to speak of; used to observe raw matching.
    pub fn unlimited() -> Self {
        EmissionPolicy {
            per_rule_cooldown: Duration::seconds(1),
            per_home_daily_cap: u32::MAX,
            completion_timeout: Duration::minutes(5),
        }
    }
}

mod secs {
    use chrono::Duration;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(d.num_seconds())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::seconds(i64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub policy: EmissionPolicy,
    /// Partial instances idle this long are dropped.
    #[serde(with = "secs")]
    pub gap_bound: Duration,
    /// Mismatching events an instance may skip before it dies. 0 is strict
    /// contiguity, which is what the miner counts.
    pub gap_tolerance: u32,
    /// Live partial instances per home; the oldest are evicted first.
    pub instance_budget: usize,
    pub filter: EventFilter,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            policy: EmissionPolicy::default(),
            gap_bound: Duration::minutes(30),
            gap_tolerance: 0,
            instance_budget: 10_000,
            filter: EventFilter::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let p = &self.policy;
        let bad = |m: &str| Err(EngineError::Config(m.to_string()));
        if p.per_rule_cooldown <= Duration::zero() {
            return bad("per_rule_cooldown must be positive");
        }
        if p.per_home_daily_cap == 0 {
            return bad("per_home_daily_cap must be positive");
        }
        if p.completion_timeout <= Duration::zero() {
            return bad("completion_timeout must be positive");
        }
        if self.gap_bound <= Duration::zero() {
            return bad("gap_bound must be positive");
        }
        if self.instance_budget == 0 {
            return bad("instance_budget must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecommendationStatus {
    Pending,
    AcceptedUseful,
    RejectedNotUseful,
    Expired,
}

impl RecommendationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecommendationStatus::Pending => "pending",
            RecommendationStatus::AcceptedUseful => "accepted_useful",
            RecommendationStatus::RejectedNotUseful => "rejected_not_useful",
            RecommendationStatus::Expired => "expired",
        }
    }
}

impl std::str::FromStr for RecommendationStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pending" => Ok(RecommendationStatus::Pending),
            "accepted_useful" => Ok(RecommendationStatus::AcceptedUseful),
            "rejected_not_useful" => Ok(RecommendationStatus::RejectedNotUseful),
            "expired" => Ok(RecommendationStatus::Expired),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    /// The event after the antecedent was not the action.
    NextEvent,
    /// Nothing happened for `completion_timeout`.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub id: String,
    pub rule_id: String,
    pub home_id: String,
    #[serde(with = "iso")]
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub status: RecommendationStatus,
    pub trigger: Trigger,
}

/// A rule as the matcher sees it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineRule {
    pub id: String,
    pub antecedent: Vec<Symbol>,
    pub consequent: Symbol,
    pub weight: f64,
    pub confidence: f64,
    pub active: bool,
}

impl From<&AssociationRule> for EngineRule {
    fn from(r: &AssociationRule) -> Self {
        EngineRule {
            id: r.id.clone(),
            antecedent: r.antecedent.clone(),
            consequent: r.consequent,
            weight: r.weight,
            confidence: r.confidence,
            active: r.active,
        }
    }
}

/// One partial match of a rule antecedent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatcherInstance {
    pub rule_id: String,
    /// Index of the next expected antecedent symbol.
    pub position: usize,
    #[serde(with = "iso")]
    pub anchor_at: DateTime<Utc>,
    #[serde(with = "iso")]
    pub last_advance: DateTime<Utc>,
    pub skipped: u32,
}

/// An antecedent seen in full, waiting for the next event or the timeout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub rule_id: String,
    #[serde(with = "iso")]
    pub completed_at: DateTime<Utc>,
}

/// Everything that changes while events stream in. Serializes
/// deterministically so snapshots can be compared byte for byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub instances: VecDeque<MatcherInstance>,
    pub completions: Vec<Completion>,
    #[serde(with = "iso::option", default)]
    pub last_event_at: Option<DateTime<Utc>>,
    pub last_emitted: BTreeMap<String, DateTime<Utc>>,
    pub emitted_per_day: BTreeMap<NaiveDate, u32>,
    pub next_recommendation: u64,
    pub evicted: u64,
}

/// The matcher for one home.
#[derive(Debug, Clone)]
pub struct HomeEngine {
    home_id: String,
    config: EngineConfig,
    table: SymbolTable,
    rules: Vec<EngineRule>,
    by_id: FxHashMap<String, usize>,
    by_first: FxHashMap<Symbol, Vec<usize>>,
    state: EngineState,
}

impl HomeEngine {
    pub fn new(
        home_id: impl Into<String>,
        table: SymbolTable,
        rules: impl IntoIterator<Item = EngineRule>,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        let mut engine = HomeEngine {
            home_id: home_id.into(),
            config,
            table,
            rules: Vec::new(),
            by_id: FxHashMap::default(),
            by_first: FxHashMap::default(),
            state: EngineState::default(),
        };
        engine.set_rules(rules);
        Ok(engine)
    }

    pub fn home_id(&self) -> &str {
        &self.home_id
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn rules(&self) -> &[EngineRule] {
        &self.rules
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn restore_state(&mut self, state: EngineState) {
        self.state = state;
    }

    /// Replaces the rule set. Live instances of rules that disappear are
    /// dropped.
    pub fn set_rules(&mut self, rules: impl IntoIterator<Item = EngineRule>) {
        self.rules = rules
            .into_iter()
            .filter(|r| !r.antecedent.is_empty())
            .collect();
        self.rules.sort_by(|a, b| a.id.cmp(&b.id));
        self.by_id = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        self.by_first.clear();
        for (i, r) in self.rules.iter().enumerate() {
            self.by_first.entry(r.antecedent[0]).or_default().push(i);
        }
        let by_id = &self.by_id;
        self.state.instances.retain(|m| by_id.contains_key(&m.rule_id));
        self.state.completions.retain(|c| by_id.contains_key(&c.rule_id));
    }

    /// Updates weight and activity of one rule, e.g. after feedback.
    pub fn update_rule(&mut self, rule: &AssociationRule) {
        if let Some(&i) = self.by_id.get(&rule.id) {
            let r = &mut self.rules[i];
            r.weight = rule.weight;
            r.confidence = rule.confidence;
            r.active = rule.active;
        }
    }

    fn rule(&self, id: &str) -> Option<&EngineRule> {
        self.by_id.get(id).map(|&i| &self.rules[i])
    }

    /// Feeds one event. Filtered-out events are ignored entirely; events
    /// that map to no known symbol break every partial match.
    pub fn step(&mut self, event: &Event) -> Result<Vec<Recommendation>, EngineError> {
        if event.home_id != self.home_id {
            return Err(EngineError::WrongHome {
                expected: self.home_id.clone(),
                got: event.home_id.clone(),
            });
        }
        if !self.config.filter.accepts(event) {
            self.check_order(event.timestamp)?;
            return Ok(self.on_timeout(event.timestamp));
        }
        let sym = self.table.lookup(event);
        self.step_symbol(event.timestamp, sym)
    }

    fn check_order(&self, at: DateTime<Utc>) -> Result<(), EngineError> {
        match self.state.last_event_at {
            Some(last) if at < last => Err(EngineError::OutOfOrder { at, last }),
            _ => Ok(()),
        }
    }

    /// [`HomeEngine::step`] on an already symbolized event.
    pub fn step_symbol(
        &mut self,
        at: DateTime<Utc>,
        sym: Option<Symbol>,
    ) -> Result<Vec<Recommendation>, EngineError> {
        self.check_order(at)?;
        let mut out = self.on_timeout(at);
        self.state.last_event_at = Some(at);

        // The event resolves whatever completed on the previous one.
        let pending = std::mem::take(&mut self.state.completions);
        let candidates: Vec<&str> = pending
            .iter()
            .filter(|c| self.rule(&c.rule_id).is_some_and(|r| Some(r.consequent) != sym))
            .map(|c| c.rule_id.as_str())
            .collect();
        if let Some(rec) = self.emit(&candidates, at, Trigger::NextEvent) {
            out.push(rec);
        }

        self.advance(at, sym);
        if let Some(s) = sym {
            self.spawn(at, s);
        }
        self.collect_completions(at);
        Ok(out)
    }

    /// Advances time without an event: fires completions older than
    /// `completion_timeout` and drops partial instances idle past
    /// `gap_bound`.
    pub fn on_timeout(&mut self, now: DateTime<Utc>) -> Vec<Recommendation> {
        let mut out = Vec::new();
        let timeout = self.config.policy.completion_timeout;
        if self
            .state
            .completions
            .first()
            .is_some_and(|c| c.completed_at + timeout <= now)
        {
            // All completions stem from the same event and share a deadline.
            let pending = std::mem::take(&mut self.state.completions);
            let fire_at = pending[0].completed_at + timeout;
            let ids: Vec<&str> = pending.iter().map(|c| c.rule_id.as_str()).collect();
            if let Some(rec) = self.emit(&ids, fire_at, Trigger::Timeout) {
                out.push(rec);
            }
        }
        let gap = self.config.gap_bound;
        self.state.instances.retain(|m| m.last_advance + gap > now);
        out
    }

    fn advance(&mut self, at: DateTime<Utc>, sym: Option<Symbol>) {
        let tolerance = self.config.gap_tolerance;
        let rules = &self.rules;
        let by_id = &self.by_id;
        self.state.instances.retain_mut(|m| {
            let Some(&i) = by_id.get(&m.rule_id) else {
                return false;
            };
            if Some(rules[i].antecedent[m.position]) == sym {
                m.position += 1;
                m.last_advance = at;
                true
            } else if m.skipped < tolerance {
                m.skipped += 1;
                true
            } else {
                false
            }
        });
    }

    fn spawn(&mut self, at: DateTime<Utc>, sym: Symbol) {
        let Some(idx) = self.by_first.get(&sym) else {
            return;
        };
        for &i in idx {
            let r = &self.rules[i];
            if !r.active {
                continue;
            }
            self.state.instances.push_back(MatcherInstance {
                rule_id: r.id.clone(),
                position: 1,
                anchor_at: at,
                last_advance: at,
                skipped: 0,
            });
        }
    }

    fn collect_completions(&mut self, at: DateTime<Utc>) {
        let rules = &self.rules;
        let by_id = &self.by_id;
        let mut done: Vec<String> = Vec::new();
        self.state.instances.retain(|m| {
            let len = rules[by_id[&m.rule_id]].antecedent.len();
            if m.position == len {
                done.push(m.rule_id.clone());
                false
            } else {
                true
            }
        });
        done.sort();
        done.dedup();
        self.state.completions = done
            .into_iter()
            .map(|rule_id| Completion {
                rule_id,
                completed_at: at,
            })
            .collect();
        let budget = self.config.instance_budget;
        while self.state.instances.len() > budget {
            self.state.instances.pop_front();
            self.state.evicted += 1;
        }
    }

    /// Picks at most one of the candidate rules and records the emission.
    /// Inactive and cooling-down rules are removed first; among the rest
    /// the highest weight wins, then confidence, then the smaller id.
    fn emit(&mut self, candidates: &[&str], at: DateTime<Utc>, trigger: Trigger) -> Option<Recommendation> {
        let cooldown = self.config.policy.per_rule_cooldown;
        let best = candidates
            .iter()
            .filter_map(|id| self.rule(id))
            .filter(|r| r.active)
            .filter(|r| {
                self.state
                    .last_emitted
                    .get(&r.id)
                    .is_none_or(|&t| at - t >= cooldown)
            })
            .min_by(|a, b| {
                b.weight
                    .total_cmp(&a.weight)
                    .then(b.confidence.total_cmp(&a.confidence))
                    .then(a.id.cmp(&b.id))
            })?
            .clone();

        let day = at.date_naive();
        let today = self.state.emitted_per_day.get(&day).copied().unwrap_or(0);
        if today >= self.config.policy.per_home_daily_cap {
            tracing::debug!(rule = %best.id, "daily cap reached");
            return None;
        }
        self.state.emitted_per_day.insert(day, today + 1);
        self.state.last_emitted.insert(best.id.clone(), at);
        self.state.next_recommendation += 1;
        Some(Recommendation {
            id: format!("{}-{:06}", self.home_id, self.state.next_recommendation),
            rule_id: best.id.clone(),
            home_id: self.home_id.clone(),
            created_at: at,
            text: render_text(&best, &self.table),
            status: RecommendationStatus::Pending,
            trigger,
        })
    }
}

fn action_desc(scene_id: u32, unit: &str, group: &str) -> String {
    let verb = match scene_id {
        0 => "turn off".to_string(),
        67 => "switch to standby".to_string(),
        n => format!("switch to scene {n}"),
    };
    if unit == group {
        format!("{verb} the {group}")
    } else {
        format!("{verb} the {group} ({unit})")
    }
}

/// `Suggestion: {action_desc} in {zone_name}? Reply YES if useful, NO if not.`
pub fn render_text(rule: &EngineRule, table: &SymbolTable) -> String {
    let (action, zone) = match table.get(rule.consequent) {
        Some(e) => {
            if e.zone_name.trim().is_empty() {
                tracing::warn!(symbol = %rule.consequent, zone = %e.zone_id, "symbol has no room name");
            }
            (
                action_desc(e.scene_id, &e.unit, e.group.as_str()),
                e.display_zone().to_string(),
            )
        }
        None => {
            tracing::warn!(symbol = %rule.consequent, rule = %rule.id, "consequent missing from symbol table");
            (rule.consequent.to_string(), "unknown room".to_string())
        }
    };
    format!("Suggestion: {action} in {zone}? Reply YES if useful, NO if not.")
}
