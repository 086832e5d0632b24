use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::Duration;
use homeminer_service::api::{router, AppState, RecommendationView};
use homeminer_service::fixtures::{self, ScriptedHome};
use homeminer_service::{Store, VirtualClock};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(token: Option<&str>) -> (Router, VirtualClock) {
    let clock = VirtualClock::new(fixtures::start());
    let mut store = Store::in_memory();
    store.submit(ScriptedHome::new(2).load()).unwrap();
    let state = AppState {
        store: store.shared(),
        clock: Arc::new(clock.clone()),
        token: token.map(String::from),
    };
    (router(state), clock)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

fn event(device: usize, scene: u32, minutes: i64) -> Value {
    let room = ["living room", "kitchen", "bedroom", "office"][device % 4];
    json!({
        "ts": homeminer::events::iso::format(&(fixtures::start() + Duration::minutes(minutes))),
        "home": "H1", "zone": format!("Z{}", device % 4), "zone_name": room,
        "device": format!("D{device}"), "scene": scene, "source": 381, "group": "lighting"
    })
}

/// Switches light `i` on at `minutes` then walks the hallway.
async fn trigger(app: &Router, i: usize, minutes: i64) -> Vec<Value> {
    let (status, body) = call(app, "POST", "/api/events", Some(json!([event(i, 5, minutes), event(99, 5, minutes + 1)]))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["recommendations"].as_array().unwrap().clone()
}

#[tokio::test]
async fn health_and_empty_metrics() {
    let (app, _) = app(None);
    let (status, body) = call(&app, "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    let (status, m) = call(&app, "GET", "/api/metrics", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(m["recommendations_sent"], 0);
    assert_eq!(m["ratio_useful_answered"], 0.0);
}

#[tokio::test]
async fn recommendation_feedback_round_trip() {
    let (app, clock) = app(None);
    let recs = trigger(&app, 0, 0).await;
    assert_eq!(recs.len(), 1);
    let id = recs[0]["id"].as_str().unwrap().to_string();
    assert!(recs[0]["text"].as_str().unwrap().contains("living room"));

    let (status, list) = call(&app, "GET", "/api/recommendations?home=H1&status=pending", None).await;
    assert_eq!(status, StatusCode::OK);
    let list: Vec<RecommendationView> = serde_json::from_value(list).unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0].rule.as_ref().unwrap().pattern_length, 2);

    clock.advance(Duration::minutes(5));
    let uri = format!("/api/recommendations/{id}/feedback");
    let (status, body) = call(&app, "POST", &uri, Some(json!({"vote": "useful"}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["recommendation"]["status"], "accepted_useful");
    let (status, _) = call(&app, "POST", &uri, Some(json!({"vote": "not_useful"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, _) = call(&app, "POST", "/api/recommendations/nope/feedback", Some(json!({"vote": "useful"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", &uri, Some(json!({"vote": "maybe"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, "GET", "/api/recommendations?status=bogus", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, "GET", "/api/rules?home=H9", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (_, m) = call(&app, "GET", "/api/metrics?from=2014-03-01&to=2014-03-01", None).await;
    assert_eq!(m["recommendations_sent"], 1);
    assert_eq!(m["voted_useful"], 1);
    let (_, m) = call(&app, "GET", "/api/metrics?from=2014-03-02", None).await;
    assert_eq!(m["recommendations_sent"], 0);
}

#[tokio::test]
async fn expired_recommendation_conflicts() {
    let (app, clock) = app(None);
    let id = trigger(&app, 0, 0).await[0]["id"].as_str().unwrap().to_string();
    clock.advance(Duration::hours(25));
    let (status, _) = call(&app, "POST", &format!("/api/recommendations/{id}/feedback"), Some(json!({"vote": "useful"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    trigger(&app, 1, 26 * 60).await;
    let (_, list) = call(&app, "GET", "/api/recommendations?status=expired", None).await;
    assert_eq!(list.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn out_of_order_and_unknown_home_events() {
    let (app, _) = app(None);
    trigger(&app, 0, 10).await;
    let (status, _) = call(&app, "POST", "/api/events", Some(event(0, 5, 0))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let mut foreign = event(0, 5, 100);
    foreign["home"] = json!("H7");
    let (status, _) = call(&app, "POST", "/api/events", Some(foreign)).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/api/events", Some(json!({"ts": "yesterday"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn ten_negative_votes_retire_the_rule() {
    let (app, clock) = app(None);
    for k in 0..10 {
        let minutes = k * 60;
        let id = trigger(&app, 0, minutes).await[0]["id"].as_str().unwrap().to_string();
        clock.set(fixtures::start() + Duration::minutes(minutes + 2));
        let (status, _) = call(&app, "POST", &format!("/api/recommendations/{id}/feedback"), Some(json!({"vote": "not_useful"}))).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, rules) = call(&app, "GET", "/api/rules?home=H1", None).await;
    let rule = rules.as_array().unwrap().iter().find(|r| r["id"] == "H1/S0>S1").unwrap().clone();
    assert_eq!(rule["active"], false);
    assert_eq!(rule["negative_streak"], 10);
    assert_eq!(rule["deactivation"], "streak");
    assert!(trigger(&app, 0, 11 * 60).await.is_empty(), "retired rules stay silent");

    let (status, reset) = call(&app, "POST", "/api/rules/H1%2FS0%3ES1/reset", None).await;
    assert_eq!(status, StatusCode::OK, "{reset}");
    assert_eq!(reset["active"], true);
    assert_eq!(trigger(&app, 0, 12 * 60).await.len(), 1);
}

#[tokio::test]
async fn bearer_token_guards_everything_but_health() {
    let (app, _) = app(Some("s3cret"));
    let (status, _) = call(&app, "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "GET", "/api/rules", None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let req = Request::builder()
        .uri("/api/rules")
        .header("authorization", "Bearer s3cret")
        .body(Body::empty())
        .unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::OK);
}

#[test]
fn fixture_is_used() {
    assert_eq!(fixtures::recommendation_id(3), "H1-000003");
}
