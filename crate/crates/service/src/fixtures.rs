//! Scripted journals for tests, examples and the acceptance suite.

use chrono::{DateTime, Duration, TimeZone, Utc};
use homeminer::engine::{EmissionPolicy, EngineConfig};
use homeminer::events::{DeviceGroup, Event, Symbol, SymbolPolicy, SymbolTable};
use homeminer::rules::{rule_id, AssociationRule, Vote, DEFAULT_RETIREMENT_THRESHOLD};

use crate::journal::Record;

pub const HOME: &str = "H1";
const ROOMS: [&str; 4] = ["living room", "kitchen", "bedroom", "office"];

pub fn start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2014, 3, 1, 6, 0, 0).single().expect("valid date")
}

fn event(device: usize, scene: u32, at: DateTime<Utc>) -> Event {
    let room = ROOMS[device % ROOMS.len()];
    Event {
        timestamp: at,
        home_id: HOME.into(),
        zone_id: format!("Z{}", device % ROOMS.len()),
        zone_name: room.into(),
        device_id: format!("D{device}"),
        scene_id: scene,
        source_id: 381,
        group: DeviceGroup::Lighting,
    }
}

/// A home with `rules` light-switch rules `(D{i} on) -> D{i} off`.
/// Symbol `2i` is device `i` on, `2i + 1` is it off; the last symbol is an
/// unrelated hallway event.
pub struct ScriptedHome {
    pub table: SymbolTable,
    pub rules: Vec<AssociationRule>,
    pub config: EngineConfig,
}

impl ScriptedHome {
    pub fn new(rules: usize) -> Self {
        let mut table = SymbolTable::new(SymbolPolicy::device());
        for i in 0..rules {
            table.intern(&event(i, 5, start()));
            table.intern(&event(i, 0, start()));
        }
        table.intern(&event(99, 5, start()));
        let rules = (0..rules)
            .map(|i| {
                let x = vec![Symbol(2 * i as u32)];
                let y = Symbol(2 * i as u32 + 1);
                AssociationRule {
                    id: rule_id(HOME, &x, y),
                    home_id: HOME.into(),
                    antecedent: x,
                    consequent: y,
                    support_count: 10,
                    antecedent_count: 20,
                    relative_support: 0.02,
                    confidence: 0.5,
                    pattern_length: 2,
                    action_position: 2,
                    weight: 2.5 + i as f64 * 0.01,
                    active: true,
                    deactivation: None,
                    negative_streak: 0,
                    feedback_log: Vec::new(),
                }
            })
            .collect();
        let config = EngineConfig {
            policy: EmissionPolicy::unlimited(),
            ..EngineConfig::default()
        };
        ScriptedHome { table, rules, config }
    }

    pub fn load(&self) -> Record {
        Record::RulesLoaded {
            home_id: HOME.into(),
            policy: self.table.policy(),
            symbols: self.table.entries().to_vec(),
            rules: self.rules.clone(),
            config: self.config.clone(),
        }
    }

    /// Switches device `i` on then walks down the hallway: one
    /// recommendation for rule `i`, emitted at `at + 1 min`.
    pub fn trigger(&self, i: usize, at: DateTime<Utc>) -> [Record; 2] {
        [
            Record::Event { event: event(i, 5, at) },
            Record::Event {
                event: event(99, 5, at + Duration::minutes(1)),
            },
        ]
    }
}

/// Recommendation id `n` (1-based) of the scripted home.
pub fn recommendation_id(n: usize) -> String {
    format!("{HOME}-{n:06}")
}

/// A journal in which `sent` recommendations go out one per hour across
/// `rules` rules; `answered` of them receive a vote two minutes later,
/// `useful` of those positive. Answers and positive votes are spread
/// evenly. The journal ends two days after the last recommendation so
/// every unanswered one has expired. Use enough rules that no rule
/// collects ten negative votes in a row, or it retires and goes quiet.
pub fn feedback_journal(rules: usize, sent: usize, answered: usize, useful: usize) -> Vec<Record> {
    assert!(useful <= answered && answered <= sent);
    let home = ScriptedHome::new(rules);
    let mut out = vec![home.load()];
    let mut at = start();
    let mut answered_so_far = 0;
    for k in 0..sent {
        out.extend(home.trigger(k % rules, at));
        if (k * answered) % sent < answered {
            let vote = if (answered_so_far * useful) % answered < useful {
                Vote::Useful
            } else {
                Vote::NotUseful
            };
            answered_so_far += 1;
            out.push(Record::Feedback {
                recommendation_id: recommendation_id(k + 1),
                vote,
                at: at + Duration::minutes(2),
            });
        }
        at += Duration::hours(1);
    }
    out.push(Record::Tick {
        home_id: HOME.into(),
        at: at + Duration::days(2),
    });
    out
}

/// One rule, one recommendation per vote, each answered with the scripted
/// vote.
pub fn vote_journal(votes: &[Vote]) -> Vec<Record> {
    let home = ScriptedHome::new(1);
    let mut out = vec![home.load()];
    let mut at = start();
    for (k, &vote) in votes.iter().enumerate() {
        out.extend(home.trigger(0, at));
        out.push(Record::Feedback {
            recommendation_id: recommendation_id(k + 1),
            vote,
            at: at + Duration::minutes(2),
        });
        at += Duration::hours(1);
    }
    out
}

/// The scripted vote sequence that retires a rule.
pub fn retiring_votes() -> Vec<Vote> {
    let mut v = vec![Vote::Useful];
    v.extend(std::iter::repeat_n(Vote::NotUseful, DEFAULT_RETIREMENT_THRESHOLD as usize));
    v
}

/// Nine negatives, one positive, nine negatives: never ten in a row.
pub fn surviving_votes() -> Vec<Vote> {
    let n = DEFAULT_RETIREMENT_THRESHOLD as usize - 1;
    let mut v = vec![Vote::NotUseful; n];
    v.push(Vote::Useful);
    v.extend(std::iter::repeat_n(Vote::NotUseful, n));
    v
}
