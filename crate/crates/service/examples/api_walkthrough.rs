//! Drives the HTTP API in-process: inject events, list the pending
//! suggestion, answer it, read metrics. Pass `--serve` to keep the same
//! store listening on 127.0.0.1:8080 afterwards.
//!
//! cargo run -p homeminer-service --example api_walkthrough [-- --serve]

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use chrono::Duration;
use homeminer_service::api::{router, AppState};
use homeminer_service::fixtures::{self, ScriptedHome};
use homeminer_service::journal::Record;
use homeminer_service::{Store, VirtualClock};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .expect("request");
    let resp = app.clone().oneshot(req).await.expect("infallible");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    let value: Value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    println!("{method} {uri} -> {status}");
    value
}

#[tokio::main]
async fn main() {
    let home = ScriptedHome::new(3);
    let mut store = Store::in_memory();
    store.submit(home.load()).expect("rules");
    let clock = VirtualClock::new(fixtures::start());
    let app = router(AppState {
        store: store.shared(),
        clock: Arc::new(clock.clone()),
        token: None,
    });

    let events: Vec<Value> = home
        .trigger(1, fixtures::start())
        .into_iter()
        .map(|r| match r {
            Record::Event { event } => serde_json::to_value(event).expect("event"),
            _ => unreachable!(),
        })
        .collect();
    let posted = call(&app, "POST", "/api/events", Some(Value::Array(events))).await;
    println!("  emitted: {}", posted["recommendations"][0]["text"]);

    let pending = call(&app, "GET", "/api/recommendations?status=pending", None).await;
    let id = pending[0]["id"].as_str().expect("one pending").to_string();
    println!("  {id}: rule {} weight {}", pending[0]["rule_id"], pending[0]["rule"]["weight"]);

    clock.advance(Duration::minutes(3));
    let answered = call(&app, "POST", &format!("/api/recommendations/{id}/feedback"), Some(json!({"vote": "useful"}))).await;
    println!("  status now {}", answered["recommendation"]["status"]);
    let again = call(&app, "POST", &format!("/api/recommendations/{id}/feedback"), Some(json!({"vote": "useful"}))).await;
    println!("  {}", again["error"]);

    let metrics = call(&app, "GET", "/api/metrics", None).await;
    println!("  {}", serde_json::to_string_pretty(&metrics).expect("json"));

    if std::env::args().any(|a| a == "--serve") {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:8080").await.expect("bind");
        println!("listening on http://127.0.0.1:8080/api/health");
        axum::serve(listener, app).await.expect("serve");
    }
}
