//! JSON HTTP API over the store.

use std::sync::Arc;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, NaiveDate, Utc};
use homeminer::engine::RecommendationStatus;
use homeminer::events::{iso, Event};
use homeminer::rules::{AssociationRule, Vote};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::clock::Clock;
use crate::journal::Record;
use crate::metrics::{compute_metrics, MetricsSnapshot, MetricsWindow};
use crate::state::{ApplyError, StoredRecommendation};
use crate::store::{SharedStore, StoreError};

#[derive(Clone)]
pub struct AppState {
    pub store: SharedStore,
    pub clock: Arc<dyn Clock>,
    /// When set, every route except `/api/health` needs
    /// `Authorization: Bearer <token>`.
    pub token: Option<String>,
}

pub fn router(state: AppState) -> Router {
    let protected = Router::new()
        .route("/api/recommendations", get(list_recommendations))
        .route("/api/recommendations/{id}/feedback", post(post_feedback))
        .route("/api/rules", get(list_rules))
        .route("/api/rules/{id}/reset", post(reset_rule))
        .route("/api/metrics", get(metrics))
        .route("/api/events", post(post_events))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .route("/api/health", get(health))
        .merge(protected)
        .with_state(state)
}

pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::Rejected(a) => match a {
                ApplyError::UnknownHome(_)
                | ApplyError::UnknownRecommendation(_)
                | ApplyError::UnknownRule(_) => StatusCode::NOT_FOUND,
                ApplyError::NotPending { .. } | ApplyError::Expired(_) => StatusCode::CONFLICT,
                ApplyError::Engine(_) | ApplyError::Regression(_) | ApplyError::Invalid(_) => {
                    StatusCode::UNPROCESSABLE_ENTITY
                }
            },
            StoreError::Journal(_) | StoreError::Replay { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

async fn require_token(State(state): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let presented = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token.as_str()) {
            return ApiError::new(StatusCode::UNAUTHORIZED, "missing or wrong bearer token").into_response();
        }
    }
    next.run(req).await
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    let store = state.store.lock().expect("store lock");
    Json(json!({
        "status": "ok",
        "homes": store.state().homes().count(),
        "records": store.state().applied(),
        "persistent": store.is_persistent(),
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RuleSummary {
    pub confidence: f64,
    pub weight: f64,
    pub pattern_length: usize,
}

/// A recommendation as the API returns it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RecommendationView {
    pub id: String,
    pub home_id: String,
    pub rule_id: String,
    pub text: String,
    #[serde(with = "iso")]
    pub created_at: DateTime<Utc>,
    pub status: RecommendationStatus,
    #[serde(with = "iso::option", default)]
    pub answered_at: Option<DateTime<Utc>>,
    pub rule: Option<RuleSummary>,
}

fn view(r: &StoredRecommendation, rule: Option<&AssociationRule>) -> RecommendationView {
    let rec = &r.recommendation;
    RecommendationView {
        id: rec.id.clone(),
        home_id: rec.home_id.clone(),
        rule_id: rec.rule_id.clone(),
        text: rec.text.clone(),
        created_at: rec.created_at,
        status: rec.status,
        answered_at: r.answered_at,
        rule: rule.map(|r| RuleSummary {
            confidence: r.confidence,
            weight: r.weight,
            pattern_length: r.pattern_length,
        }),
    }
}

#[derive(Debug, Deserialize)]
struct RecommendationQuery {
    home: Option<String>,
    status: Option<String>,
}

/// Newest first.
async fn list_recommendations(
    State(state): State<AppState>,
    Query(q): Query<RecommendationQuery>,
) -> Result<Json<Vec<RecommendationView>>, ApiError> {
    let status: Option<RecommendationStatus> = q
        .status
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(|e: String| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e))?;
    let store = state.store.lock().expect("store lock");
    let s = store.state();
    if let Some(home) = &q.home {
        if s.home(home).is_none() {
            return Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown home `{home}`")));
        }
    }
    let mut out: Vec<RecommendationView> = s
        .recommendations()
        .filter(|r| q.home.as_ref().is_none_or(|h| &r.recommendation.home_id == h))
        .filter(|r| status.is_none_or(|st| r.recommendation.status == st))
        .map(|r| {
            let rule = s
                .home(&r.recommendation.home_id)
                .and_then(|h| h.rules.get(&r.recommendation.rule_id));
            view(r, rule)
        })
        .collect();
    out.sort_by(|a, b| b.created_at.cmp(&a.created_at).then(b.id.cmp(&a.id)));
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
pub struct FeedbackBody {
    pub vote: Vote,
}

async fn post_feedback(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<FeedbackBody>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let Json(body) = body.map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.body_text()))?;
    let at = state.clock.now();
    let mut store = state.store.lock().expect("store lock");
    let out = store.submit(Record::Feedback {
        recommendation_id: id.clone(),
        vote: body.vote,
        at,
    })?;
    let rec = store.state().recommendation(&id).expect("feedback applied");
    Ok(Json(json!({
        "recommendation": view(rec, out.rule.as_ref()),
        "rule": out.rule,
    })))
}

#[derive(Debug, Deserialize)]
struct HomeQuery {
    home: Option<String>,
}

async fn list_rules(
    State(state): State<AppState>,
    Query(q): Query<HomeQuery>,
) -> Result<Json<Vec<AssociationRule>>, ApiError> {
    let store = state.store.lock().expect("store lock");
    let s = store.state();
    match &q.home {
        Some(h) => s
            .home(h)
            .map(|home| Json(home.rules.iter().cloned().collect()))
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown home `{h}`"))),
        None => Ok(Json(s.homes().flat_map(|(_, h)| h.rules.iter().cloned()).collect())),
    }
}

async fn reset_rule(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<AssociationRule>, ApiError> {
    let at = state.clock.now();
    let mut store = state.store.lock().expect("store lock");
    let home_id = store
        .state()
        .rule(&id)
        .map(|r| r.home_id.clone())
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown rule `{id}`")))?;
    let out = store.submit(Record::ResetRule {
        home_id,
        rule_id: id,
        at,
    })?;
    Ok(Json(out.rule.expect("reset returns the rule")))
}

#[derive(Debug, Deserialize)]
struct MetricsQuery {
    from: Option<String>,
    to: Option<String>,
}

/// `YYYY-MM-DD` (whole day) or an ISO-8601 instant.
fn parse_bound(s: &str, end: bool) -> Result<DateTime<Utc>, ApiError> {
    if let Ok(d) = s.parse::<NaiveDate>() {
        let w = MetricsWindow::days(d, d);
        return Ok(if end { w.to } else { w.from }.expect("bounded"));
    }
    iso::parse(s).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("bad time `{s}`: {e}")))
}

async fn metrics(
    State(state): State<AppState>,
    Query(q): Query<MetricsQuery>,
) -> Result<Json<MetricsSnapshot>, ApiError> {
    let window = MetricsWindow {
        from: q.from.as_deref().map(|s| parse_bound(s, false)).transpose()?,
        to: q.to.as_deref().map(|s| parse_bound(s, true)).transpose()?,
    };
    let store = state.store.lock().expect("store lock");
    Ok(Json(compute_metrics(store.state(), window)))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum EventsBody {
    One(Event),
    Many(Vec<Event>),
}

/// Injects events (replay and tests). A batch stops at the first rejected
/// event; earlier events stay applied.
async fn post_events(
    State(state): State<AppState>,
    body: Result<Json<EventsBody>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let Json(body) = body.map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.body_text()))?;
    let events = match body {
        EventsBody::One(e) => vec![e],
        EventsBody::Many(v) => v,
    };
    let mut store = state.store.lock().expect("store lock");
    let mut emitted = Vec::new();
    for event in events {
        let out = store.submit(Record::Event { event })?;
        emitted.extend(out.emitted);
    }
    Ok(Json(json!({ "accepted": true, "recommendations": emitted })))
}
