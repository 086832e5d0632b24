//! Association rules derived from mined patterns.
//!
//! A pattern is *relevant* when it contains an energy-lowering action that
//! is preceded by at least one ordinary event. The rule `X -> Y` takes the
//! events before the first action as `X` and that action as `Y`; anything
//! after `Y` is dropped. Rules carry a weight used to prioritise them, and
//! are retired after a run of negative feedback.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::events::{iso, DeviceGroup, Symbol, SymbolEntry, SymbolTable};
use crate::wsdd::{occurrences, relative_support, Item, Pattern};

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("pattern {0} has no ordinary event before its first action")]
    NoSplit(String),
    #[error("unknown rule `{0}`")]
    NotFound(String),
    #[error("invalid action catalog: {0}")]
    Catalog(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum RegressionError {
    #[error("need feedback on at least {need} rules, have {have}")]
    InsufficientData { have: usize, need: usize },
    #[error("no explanatory variable is linearly independent of the intercept (dropped: {dropped:?})")]
    RankDeficient { dropped: Vec<Feature> },
}

/// Energy-lowering scenes per device group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCatalog {
    actions: BTreeMap<DeviceGroup, BTreeSet<u32>>,
}

/// Scene 0 is "off"; 67 is the standby scene.
const OFF: u32 = 0;
const STANDBY: u32 = 67;

impl Default for ActionCatalog {
    fn default() -> Self {
        let mut actions = BTreeMap::new();
        actions.insert(DeviceGroup::Lighting, BTreeSet::from([OFF, STANDBY, 422]));
        for g in [DeviceGroup::Audio, DeviceGroup::Video, DeviceGroup::Heating] {
            actions.insert(g, BTreeSet::from([OFF, STANDBY]));
        }
        ActionCatalog { actions }
    }
}

#[derive(Deserialize)]
struct CatalogFile {
    actions: BTreeMap<String, Vec<u32>>,
}

impl ActionCatalog {
    pub fn empty() -> Self {
        ActionCatalog {
            actions: BTreeMap::new(),
        }
    }

    pub fn with(mut self, group: DeviceGroup, scenes: impl IntoIterator<Item = u32>) -> Self {
        self.actions.entry(group).or_default().extend(scenes);
        self
    }

    fn from_file(file: CatalogFile) -> Result<Self, RuleError> {
        let mut catalog = ActionCatalog::empty();
        for (name, scenes) in file.actions {
            let group: DeviceGroup = name.parse().unwrap_or(DeviceGroup::Unknown);
            if group == DeviceGroup::Unknown && !name.eq_ignore_ascii_case("unknown") {
                return Err(RuleError::Catalog(format!("unknown device group `{name}`")));
            }
            catalog = catalog.with(group, scenes);
        }
        Ok(catalog)
    }

    /// `actions = {lighting = [0, 422], audio = [0]}`
    pub fn from_toml(text: &str) -> Result<Self, RuleError> {
        let file: CatalogFile =
            toml::from_str(text).map_err(|e| RuleError::Catalog(e.to_string()))?;
        Self::from_file(file)
    }

    /// `{"actions": {"lighting": [0, 422], "audio": [0]}}`
    pub fn from_json(text: &str) -> Result<Self, RuleError> {
        let file: CatalogFile =
            serde_json::from_str(text).map_err(|e| RuleError::Catalog(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn is_action(&self, group: DeviceGroup, scene_id: u32) -> bool {
        self.actions
            .get(&group)
            .is_some_and(|scenes| scenes.contains(&scene_id))
    }

    pub fn is_action_entry(&self, entry: &SymbolEntry) -> bool {
        self.is_action(entry.group, entry.scene_id)
    }

    /// The action symbols of one home.
    pub fn resolve(&self, table: &SymbolTable) -> ActionSet {
        ActionSet(
            table
                .entries()
                .iter()
                .filter(|e| self.is_action_entry(e))
                .map(|e| e.symbol)
                .collect(),
        )
    }
}

/// Action symbols resolved against a symbol table. Symbols outside the set
/// are ordinary events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionSet(BTreeSet<Symbol>);

impl ActionSet {
    pub fn new(symbols: impl IntoIterator<Item = Symbol>) -> Self {
        ActionSet(symbols.into_iter().collect())
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.0.contains(&s)
    }

    fn is_action_item(&self, item: Item) -> bool {
        item.symbol().is_some_and(|s| self.contains(s))
    }
}

/// Where to cut a pattern into antecedent and consequent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Consequent is the first action; later symbols are dropped.
    #[default]
    FirstAction,
    /// Only patterns whose first action is their last symbol yield rules.
    ActionFinal,
}

fn first_action(items: &[Item], actions: &ActionSet) -> Option<usize> {
    items.iter().position(|&it| actions.is_action_item(it))
}

pub fn is_relevant(pattern: &Pattern, actions: &ActionSet) -> bool {
    !pattern.has_wildcard() && first_action(&pattern.items, actions).is_some_and(|i| i >= 1)
}

/// Keeps wildcard-free patterns that contain an action preceded by at least
/// one ordinary event.
pub fn filter_relevant<'a>(
    patterns: impl IntoIterator<Item = &'a Pattern>,
    actions: &ActionSet,
) -> Vec<Pattern> {
    patterns
        .into_iter()
        .filter(|p| is_relevant(p, actions))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Useful,
    NotUseful,
}

impl Vote {
    pub fn score(self) -> f64 {
        match self {
            Vote::Useful => 1.0,
            Vote::NotUseful => -1.0,
        }
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vote::Useful => "useful",
            Vote::NotUseful => "not_useful",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub vote: Vote,
    #[serde(with = "iso::option", default)]
    pub at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deactivation {
    /// Too many consecutive negative votes.
    Streak,
    /// Usefulness coefficient below the configured threshold.
    Usefulness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule {
    pub id: String,
    pub home_id: String,
    pub antecedent: Vec<Symbol>,
    pub consequent: Symbol,
    /// Occurrences of antecedent immediately followed by consequent.
    pub support_count: usize,
    pub antecedent_count: usize,
    pub relative_support: f64,
    pub confidence: f64,
    /// `|antecedent| + 1`
    pub pattern_length: usize,
    /// 1-based position of the consequent in the mined pattern.
    pub action_position: usize,
    pub weight: f64,
    pub active: bool,
    pub deactivation: Option<Deactivation>,
    pub negative_streak: u32,
    pub feedback_log: Vec<FeedbackEntry>,
}

pub const DEFAULT_RETIREMENT_THRESHOLD: u32 = 10;

pub fn rule_id(home_id: &str, antecedent: &[Symbol], consequent: Symbol) -> String {
    let x: Vec<String> = antecedent.iter().map(ToString::to_string).collect();
    format!("{home_id}/{}>{consequent}", x.join("."))
}

impl AssociationRule {
    pub fn features(&self) -> RuleFeatures {
        RuleFeatures {
            confidence: self.confidence,
            pattern_length: self.pattern_length as f64,
            support: self.relative_support,
            action_position: self.action_position as f64,
        }
    }

    pub fn is_retired(&self) -> bool {
        self.deactivation == Some(Deactivation::Streak)
    }

    /// Records a vote. A useful vote clears the negative streak; reaching
    /// `retirement_threshold` consecutive negatives retires the rule for
    /// good (only [`AssociationRule::admin_reset`] brings it back).
    pub fn apply_feedback(&mut self, vote: Vote, at: Option<DateTime<Utc>>, retirement_threshold: u32) {
        self.feedback_log.push(FeedbackEntry { vote, at });
        match vote {
            Vote::Useful => self.negative_streak = 0,
            Vote::NotUseful => self.negative_streak += 1,
        }
        if self.negative_streak >= retirement_threshold {
            self.active = false;
            self.deactivation = Some(Deactivation::Streak);
        }
    }

    pub fn admin_reset(&mut self) {
        self.negative_streak = 0;
        self.active = true;
        self.deactivation = None;
    }

    /// Mean of +1 (useful) / -1 (not useful) over all votes.
    pub fn feedback_score(&self) -> Option<f64> {
        if self.feedback_log.is_empty() {
            return None;
        }
        let sum: f64 = self.feedback_log.iter().map(|f| f.vote.score()).sum();
        Some(sum / self.feedback_log.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    pub split: SplitMode,
    pub retirement_threshold: u32,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            split: SplitMode::FirstAction,
            retirement_threshold: DEFAULT_RETIREMENT_THRESHOLD,
        }
    }
}

/// Builds the rule for a relevant pattern, measuring support and confidence
/// against the mined sequence and weighting it with the prior model.
pub fn extract_rule(
    home_id: &str,
    pattern: &[Item],
    actions: &ActionSet,
    seq: &[Symbol],
    config: &RuleConfig,
) -> Result<AssociationRule, RuleError> {
    let no_split = || RuleError::NoSplit(crate::wsdd::pattern_key(pattern));
    if pattern.contains(&Item::Wildcard) {
        return Err(no_split());
    }
    let cut = first_action(pattern, actions).filter(|&i| i >= 1).ok_or_else(no_split)?;
    if config.split == SplitMode::ActionFinal && cut + 1 != pattern.len() {
        return Err(no_split());
    }
    let antecedent: Vec<Symbol> = pattern[..cut].iter().filter_map(|it| it.symbol()).collect();
    let consequent = pattern[cut].symbol().ok_or_else(no_split)?;

    let x: Vec<Item> = antecedent.iter().copied().map(Item::Sym).collect();
    let mut xy = x.clone();
    xy.push(Item::Sym(consequent));
    let antecedent_count = occurrences(seq, &x).len();
    let support_count = occurrences(seq, &xy).len();
    let confidence = if antecedent_count == 0 {
        0.0
    } else {
        support_count as f64 / antecedent_count as f64
    };

    let mut rule = AssociationRule {
        id: rule_id(home_id, &antecedent, consequent),
        home_id: home_id.to_string(),
        pattern_length: antecedent.len() + 1,
        antecedent,
        consequent,
        support_count,
        antecedent_count,
        relative_support: relative_support(support_count, xy.len(), seq.len()),
        confidence,
        action_position: cut + 1,
        weight: 0.0,
        active: true,
        deactivation: None,
        negative_streak: 0,
        feedback_log: Vec::new(),
    };
    rule.weight = usefulness_coefficient(&rule, &RegressionModel::prior());
    Ok(rule)
}

/// Extracts one rule per distinct `X -> Y` from the relevant patterns.
/// Patterns that only differ after the action collapse into one rule.
pub fn extract_rules<'a>(
    home_id: &str,
    patterns: impl IntoIterator<Item = &'a [Item]>,
    actions: &ActionSet,
    seq: &[Symbol],
    config: &RuleConfig,
) -> Vec<AssociationRule> {
    let mut by_id: BTreeMap<String, AssociationRule> = BTreeMap::new();
    for p in patterns {
        match extract_rule(home_id, p, actions, seq, config) {
            Ok(rule) => {
                by_id
                    .entry(rule.id.clone())
                    .and_modify(|r| r.action_position = r.action_position.min(rule.action_position))
                    .or_insert(rule);
            }
            Err(e) => tracing::debug!(%e, "pattern skipped"),
        }
    }
    by_id.into_values().collect()
}

pub fn write_rules_jsonl<W: Write>(rules: &[AssociationRule], mut out: W) -> io::Result<()> {
    for r in rules {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_rules_jsonl<R: io::Read>(input: R) -> io::Result<Vec<AssociationRule>> {
    let mut out = Vec::new();
    for line in io::BufReader::new(input).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(io::Error::other)?);
        }
    }
    Ok(out)
}

/// All rules of one home, keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleBook {
    rules: BTreeMap<String, AssociationRule>,
    pub retirement_threshold: u32,
}

impl RuleBook {
    pub fn new(rules: impl IntoIterator<Item = AssociationRule>, retirement_threshold: u32) -> Self {
        RuleBook {
            rules: rules.into_iter().map(|r| (r.id.clone(), r)).collect(),
            retirement_threshold,
        }
    }

    pub fn get(&self, id: &str) -> Option<&AssociationRule> {
        self.rules.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AssociationRule> {
        self.rules.values()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut AssociationRule> {
        self.rules.values_mut()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn apply_feedback(
        &mut self,
        id: &str,
        vote: Vote,
        at: Option<DateTime<Utc>>,
    ) -> Result<&AssociationRule, RuleError> {
        let threshold = self.retirement_threshold;
        let rule = self
            .rules
            .get_mut(id)
            .ok_or_else(|| RuleError::NotFound(id.to_string()))?;
        rule.apply_feedback(vote, at, threshold);
        Ok(rule)
    }

    pub fn admin_reset(&mut self, id: &str) -> Result<&AssociationRule, RuleError> {
        let rule = self
            .rules
            .get_mut(id)
            .ok_or_else(|| RuleError::NotFound(id.to_string()))?;
        rule.admin_reset();
        Ok(rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Confidence,
    PatternLength,
    Support,
    ActionPosition,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::Confidence,
        Feature::PatternLength,
        Feature::Support,
        Feature::ActionPosition,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleFeatures {
    pub confidence: f64,
    pub pattern_length: f64,
    pub support: f64,
    pub action_position: f64,
}

impl RuleFeatures {
    pub fn get(&self, f: Feature) -> f64 {
        match f {
            Feature::Confidence => self.confidence,
            Feature::PatternLength => self.pattern_length,
            Feature::Support => self.support,
            Feature::ActionPosition => self.action_position,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSample {
    pub features: RuleFeatures,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub feature: Feature,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    /// Column removed as collinear; its estimate is fixed at zero.
    pub dropped: bool,
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

impl Coefficient {
    pub fn is_significant(&self) -> bool {
        self.p_value.is_some_and(|p| p < SIGNIFICANCE_LEVEL)
    }
}

/// Ordinary least squares of feedback score on rule features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub intercept: f64,
    /// One entry per [`Feature::ALL`], in that order.
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub samples: usize,
}

pub const MIN_REGRESSION_RULES: usize = 5;

impl RegressionModel {
    /// Unit weights on confidence and pattern length, used before any
    /// feedback exists.
    pub fn prior() -> Self {
        Self::with_estimates(1.0, 1.0)
    }

    pub fn with_estimates(confidence: f64, pattern_length: f64) -> Self {
        let coefficients = Feature::ALL
            .iter()
            .map(|&feature| Coefficient {
                feature,
                estimate: match feature {
                    Feature::Confidence => confidence,
                    Feature::PatternLength => pattern_length,
                    _ => 0.0,
                },
                std_error: None,
                t_stat: None,
                p_value: None,
                dropped: false,
            })
            .collect();
        RegressionModel {
            intercept: 0.0,
            coefficients,
            r_squared: 0.0,
            samples: 0,
        }
    }

    pub fn coefficient(&self, f: Feature) -> &Coefficient {
        self.coefficients
            .iter()
            .find(|c| c.feature == f)
            .expect("every feature has a coefficient")
    }

    pub fn estimate(&self, f: Feature) -> f64 {
        self.coefficient(f).estimate
    }

    pub fn dropped(&self) -> Vec<Feature> {
        self.coefficients
            .iter()
            .filter(|c| c.dropped)
            .map(|c| c.feature)
            .collect()
    }

    pub fn fit(samples: &[FeedbackSample]) -> Result<Self, RegressionError> {
        if samples.len() < MIN_REGRESSION_RULES {
            return Err(RegressionError::InsufficientData {
                have: samples.len(),
                need: MIN_REGRESSION_RULES,
            });
        }
        let n = samples.len();
        let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];
        columns.extend(
            Feature::ALL
                .iter()
                .map(|&f| samples.iter().map(|s| s.features.get(f)).collect()),
        );
        let y: Vec<f64> = samples.iter().map(|s| s.score).collect();

        let qr = thin_qr(&columns);
        if qr.kept.len() == 1 {
            return Err(RegressionError::RankDeficient {
                dropped: Feature::ALL.to_vec(),
            });
        }
        let p = qr.kept.len();
        let qty: Vec<f64> = qr.q.iter().map(|q| dot(q, &y)).collect();
        let beta = back_substitute(&qr.r, &qty);

        let fitted: Vec<f64> = (0..n)
            .map(|i| qr.kept.iter().zip(&beta).map(|(&c, b)| columns[c][i] * b).sum())
            .collect();
        let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
        let mean_y = y.iter().sum::<f64>() / n as f64;
        let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
        let r_squared = if tss > 0.0 {
            1.0 - rss / tss
        } else if rss == 0.0 {
            1.0
        } else {
            0.0
        };

        let df = n - p;
        let r_inv = invert_upper(&qr.r);
        let student = (df > 0).then(|| StudentsT::new(0.0, 1.0, df as f64).expect("df > 0"));
        let sigma2 = (df > 0).then(|| rss / df as f64);

        let mut intercept = 0.0;
        let mut coefficients: Vec<Coefficient> = Feature::ALL
            .iter()
            .map(|&feature| Coefficient {
                feature,
                estimate: 0.0,
                std_error: None,
                t_stat: None,
                p_value: None,
                dropped: true,
            })
            .collect();
        for (k, &col) in qr.kept.iter().enumerate() {
            if col == 0 {
                intercept = beta[k];
                continue;
            }
            let c = &mut coefficients[col - 1];
            c.estimate = beta[k];
            c.dropped = false;
            if let (Some(s2), Some(t)) = (sigma2, &student) {
                let var: f64 = r_inv[k][k..].iter().map(|v| v * v).sum::<f64>() * s2;
                let se = var.sqrt();
                c.std_error = Some(se);
                if se > 0.0 {
                    let tval = beta[k] / se;
                    c.t_stat = Some(tval);
                    c.p_value = Some(2.0 * (1.0 - t.cdf(tval.abs())));
                }
            }
        }
        let model = RegressionModel {
            intercept,
            coefficients,
            r_squared,
            samples: n,
        };
        let dropped = model.dropped();
        if !dropped.is_empty() {
            tracing::warn!(?dropped, "collinear regression columns dropped");
        }
        Ok(model)
    }
}

struct ThinQr {
    /// Indices of the columns that survived, in order.
    kept: Vec<usize>,
    q: Vec<Vec<f64>>,
    /// Upper triangular, `kept.len()` square.
    r: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const COLLINEAR_TOL: f64 = 1e-9;

/// Modified Gram-Schmidt with one re-orthogonalisation pass; columns whose
/// residual is negligible relative to their norm are dropped.
fn thin_qr(columns: &[Vec<f64>]) -> ThinQr {
    let mut kept = Vec::new();
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let norm0 = dot(col, col).sqrt();
        let mut v = col.clone();
        let mut coeffs = vec![0.0; q.len()];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let c = dot(qk, &v);
                coeffs[k] += c;
                v.iter_mut().zip(qk).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm0 == 0.0 || norm <= COLLINEAR_TOL * norm0 {
            continue;
        }
        v.iter_mut().for_each(|vi| *vi /= norm);
        coeffs.push(norm);
        kept.push(j);
        q.push(v);
        r_cols.push(coeffs);
    }
    let p = kept.len();
    let mut r = vec![vec![0.0; p]; p];
    for (j, coeffs) in r_cols.iter().enumerate() {
        for (i, &c) in coeffs.iter().enumerate() {
            r[i][j] = c;
        }
    }
    ThinQr { kept, q, r }
}

fn back_substitute(r: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let p = b.len();
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| r[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / r[i][i];
    }
    x
}

fn invert_upper(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = r.len();
    let mut inv = vec![vec![0.0; p]; p];
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        let x = back_substitute(r, &e);
        for row in 0..p {
            inv[row][col] = x[row];
        }
    }
    inv
}

/// Fits the feedback model on every rule that has received at least one vote.
/// The dependent variable is the rule's mean vote score.
pub fn fit_feedback_regression<'a>(
    rules: impl IntoIterator<Item = &'a AssociationRule>,
) -> Result<RegressionModel, RegressionError> {
    let samples: Vec<FeedbackSample> = rules
        .into_iter()
        .filter_map(|r| {
            r.feedback_score().map(|score| FeedbackSample {
                features: r.features(),
                score,
            })
        })
        .collect();
    RegressionModel::fit(&samples)
}

/// `beta_confidence * confidence + beta_length * pattern_length`
pub fn usefulness_coefficient(rule: &AssociationRule, model: &RegressionModel) -> f64 {
    model.estimate(Feature::Confidence) * rule.confidence
        + model.estimate(Feature::PatternLength) * rule.pattern_length as f64
}

/// Share of rules excluded by the default usefulness threshold (19 of 54).
pub const DEFAULT_EXCLUDE_FRACTION: f64 = 19.0 / 54.0;

/// The usefulness value below which `exclude_fraction` of `rules` fall.
pub fn threshold_for_fraction<'a>(
    rules: impl IntoIterator<Item = &'a AssociationRule>,
    model: &RegressionModel,
    exclude_fraction: f64,
) -> f64 {
    let mut scores: Vec<f64> = rules
        .into_iter()
        .map(|r| usefulness_coefficient(r, model))
        .collect();
    if scores.is_empty() {
        return f64::NEG_INFINITY;
    }
    scores.sort_by(f64::total_cmp);
    let k = (exclude_fraction.clamp(0.0, 1.0) * scores.len() as f64).round() as usize;
    if k == 0 {
        f64::NEG_INFINITY
    } else if k >= scores.len() {
        f64::INFINITY
    } else {
        scores[k]
    }
}

/// Re-weights every rule with `model` and deactivates those whose
/// coefficient falls below `threshold`. Streak-retired rules stay retired.
/// Returns how many rules were newly excluded.
pub fn apply_usefulness_threshold<'a>(
    rules: impl IntoIterator<Item = &'a mut AssociationRule>,
    model: &RegressionModel,
    threshold: f64,
) -> usize {
    let mut excluded = 0;
    for rule in rules {
        rule.weight = usefulness_coefficient(rule, model);
        if rule.is_retired() {
            continue;
        }
        if rule.weight < threshold {
            if rule.active {
                excluded += 1;
            }
            rule.active = false;
            rule.deactivation = Some(Deactivation::Usefulness);
        } else if rule.deactivation == Some(Deactivation::Usefulness) {
            rule.active = true;
            rule.deactivation = None;
        }
    }
    excluded
}
