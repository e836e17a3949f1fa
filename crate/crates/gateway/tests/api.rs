use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use futures_util::StreamExt;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

use dialplan_core::fixtures;
use dialplan_core::session::{build_engine, Session};
use dialplan_core::spec::load_spec;
use dialplan_core::trace::{replay, snapshot_at, write_record, ReplayMode, StepRecord};
use dialplan_gateway::model::{Graph, NodeType, Scope};
use dialplan_gateway::{router, AppState};
use dialplan_testkit::scenario::CAR_INSPECTION_SCRIPT;

fn app() -> Router {
    let car = build_engine(&load_spec(fixtures::car_inspection(4)).unwrap()).unwrap();
    let trip = build_engine(&load_spec(fixtures::TRIP_BOOKING).unwrap()).unwrap();
    router(AppState::new([("car".to_string(), car), ("trip".to_string(), trip)]), None)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn scripted(app: &Router) -> String {
    let (st, v) = call(app, Method::POST, "/api/v1/sessions", Some(json!({"agent": "car"}))).await;
    assert_eq!(st, StatusCode::CREATED);
    let id = v["id"].as_str().unwrap().to_string();
    for text in CAR_INSPECTION_SCRIPT {
        let (st, v) = call(app, Method::POST, &format!("/api/v1/sessions/{id}/utterances"), Some(json!({"text": text}))).await;
        assert_eq!(st, StatusCode::OK, "{v}");
    }
    id
}

fn records(v: &Value) -> Vec<StepRecord> {
    serde_json::from_value(v["records"].clone()).unwrap()
}

#[tokio::test]
async fn agents_are_listed() {
    let app = app();
    let (st, v) = call(&app, Method::GET, "/api/v1/agents", None).await;
    assert_eq!(st, StatusCode::OK);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|a| a["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["car", "trip"]);
    assert_eq!(v[0]["nodes"], 66);
    assert_eq!(v[0]["edges"], 280);
}

#[tokio::test]
async fn graph_marks_root_goal_and_scope() {
    let app = app();
    let (st, v) = call(&app, Method::GET, "/api/v1/agents/car/graph", None).await;
    assert_eq!(st, StatusCode::OK);
    let g: Graph = serde_json::from_value(v).unwrap();
    assert_eq!(g.nodes.iter().filter(|n| n.kind == NodeType::Root).count(), 1);
    assert_eq!(g.nodes[g.root].kind, NodeType::Root);
    let goals: Vec<_> = g.nodes.iter().filter(|n| n.kind == NodeType::Goal).collect();
    assert!(!goals.is_empty());
    assert!(goals.iter().all(|n| n.scope.is_none() && n.action.is_none()));
    assert!(g.nodes.iter().filter(|n| n.kind != NodeType::Goal).all(|n| n.scope == Some(Scope::Dialogue)));
    for e in &g.edges {
        assert!(e.from < g.nodes.len() && e.to < g.nodes.len());
        assert_eq!(e.id, format!("{}:{}", e.from, e.outcome));
    }

    let (_, v) = call(&app, Method::GET, "/api/v1/agents/trip/graph", None).await;
    let g: Graph = serde_json::from_value(v).unwrap();
    assert!(g.nodes.iter().any(|n| n.scope == Some(Scope::Web)));
    assert!(g.nodes.iter().any(|n| n.scope == Some(Scope::System)));
}

#[tokio::test]
async fn new_session_waits_at_the_root() {
    let app = app();
    let (st, v) = call(&app, Method::POST, "/api/v1/sessions", Some(json!({"agent": "car"}))).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(v["mode"], "live");
    assert_eq!(v["steps"], 0);
    assert_eq!(v["snapshot"]["step"], 0);
    assert_eq!(v["snapshot"]["node"], 0);
    assert_eq!(v["progress"]["state"], "awaiting");
    assert_eq!(v["progress"]["action"], "dialogue-disambiguation-start_conversation");

    let id = v["id"].as_str().unwrap();
    let (st, again) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(again, v);
}

#[tokio::test]
async fn utterances_advance_to_the_goal() {
    let app = app();
    let id = scripted(&app).await;
    let (_, v) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}"), None).await;
    assert_eq!(v["progress"]["state"], "complete");
    let steps = v["steps"].as_u64().unwrap();
    assert!(steps >= CAR_INSPECTION_SCRIPT.len() as u64);

    let (st, e) = call(&app, Method::POST, &format!("/api/v1/sessions/{id}/utterances"), Some(json!({"text": "more"}))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(e["error"]["code"], "conflict");
    assert_eq!(e["error"]["message"], "conversation complete");
}

#[tokio::test]
async fn errors_are_typed() {
    let app = app();
    let (st, e) = call(&app, Method::GET, "/api/v1/agents/nope/graph", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(e["error"]["code"], "not-found");
    let (st, _) = call(&app, Method::POST, "/api/v1/sessions", Some(json!({"agent": "nope"}))).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = call(&app, Method::GET, "/api/v1/sessions/s999", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = call(&app, Method::POST, "/api/v1/sessions/s999/utterances", Some(json!({"text": "x"}))).await;
    assert_eq!(st, StatusCode::NOT_FOUND);

    let (_, v) = call(&app, Method::POST, "/api/v1/sessions", Some(json!({"agent": "car"}))).await;
    let id = v["id"].as_str().unwrap();
    let (st, _) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}/steps/1"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, e) = call(&app, Method::POST, "/api/v1/replays", Some(json!({"agent": "car", "trace": "{oops"}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(e["error"]["code"], "bad-request");
}

#[tokio::test]
async fn steps_match_prefix_replay() {
    let app = app();
    let id = scripted(&app).await;
    let (_, t) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}/trace"), None).await;
    let recs = records(&t);
    let engine = build_engine(&load_spec(fixtures::car_inspection(4)).unwrap()).unwrap();
    for k in 0..=recs.len() {
        let (st, v) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}/steps/{k}"), None).await;
        assert_eq!(st, StatusCode::OK);
        let expected = snapshot_at(&engine, &recs, k).unwrap();
        assert_eq!(v, serde_json::to_value(&expected).unwrap());
        assert_eq!(v["step"], k);
    }
}

#[tokio::test]
async fn replay_upload_reproduces_the_executor_path() {
    // a trace written by a session outside the gateway
    let engine = Arc::new(build_engine(&load_spec(fixtures::car_inspection(4)).unwrap()).unwrap());
    let mut s = Session::new(engine.clone());
    s.run().unwrap();
    for text in CAR_INSPECTION_SCRIPT {
        s.reply(text).unwrap();
    }
    let mut jsonl = Vec::new();
    for r in s.trace() {
        write_record(&mut jsonl, r).unwrap();
    }
    let expected = replay(&engine, s.trace(), ReplayMode::Recorded);
    assert!(expected.consistent);

    let app = app();
    let (st, v) = call(
        &app,
        Method::POST,
        "/api/v1/replays",
        Some(json!({"agent": "car", "trace": String::from_utf8(jsonl).unwrap()})),
    )
    .await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    assert_eq!(v["report"]["consistent"], true);
    assert_eq!(v["report"]["path"], serde_json::to_value(&expected.path).unwrap());
    assert_eq!(v["session"]["mode"], "replay");
    assert_eq!(v["session"]["progress"]["state"], "closed");
    assert_eq!(v["session"]["snapshot"], serde_json::to_value(s.snapshot()).unwrap());

    let id = v["session"]["id"].as_str().unwrap();
    let (_, t) = call(&app, Method::GET, &format!("/api/v1/sessions/{id}/trace"), None).await;
    let steps = t["path"]["steps"].as_array().unwrap();
    assert_eq!(steps.len(), expected.path.len());
    for (s, p) in steps.iter().zip(&expected.path) {
        assert_eq!(s["node"], p.node);
        assert_eq!(s["to"], p.to);
        assert_eq!(s["edge"], format!("{}:{}", p.node, p.outcome));
    }
    // revisited edges are reported once with their multiplicity
    let edges = t["path"]["edges"].as_array().unwrap();
    let total: u64 = edges.iter().map(|e| e["count"].as_u64().unwrap()).sum();
    assert_eq!(total as usize, steps.len());
    assert!(edges.iter().any(|e| e["count"].as_u64().unwrap() >= 2));

    let (st, _) = call(&app, Method::POST, &format!("/api/v1/sessions/{id}/utterances"), Some(json!({"text": "hi"}))).await;
    assert_eq!(st, StatusCode::CONFLICT);
}

#[tokio::test]
async fn tampered_upload_is_rejected_with_divergences() {
    let engine = Arc::new(build_engine(&load_spec(fixtures::car_inspection(4)).unwrap()).unwrap());
    let mut s = Session::new(engine);
    s.run().unwrap();
    s.reply("hello there").unwrap();
    s.reply("oil low").unwrap();
    let mut recs = s.trace().to_vec();
    let last = recs.len() - 1;
    recs[last].next_node += 1;
    let jsonl: String = recs.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();

    let app = app();
    let (st, v) = call(&app, Method::POST, "/api/v1/replays", Some(json!({"agent": "car", "trace": jsonl}))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "divergent-trace");
    assert_eq!(v["error"]["divergences"][0]["step"], last);
}

#[tokio::test]
async fn event_socket_streams_steps() {
    let app = app();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let server = app.clone();
    tokio::spawn(async move { axum::serve(listener, server).await.unwrap() });

    let (_, v) = call(&app, Method::POST, "/api/v1/sessions", Some(json!({"agent": "car"}))).await;
    let id = v["id"].as_str().unwrap().to_string();
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/api/v1/sessions/{id}/events")).await.unwrap();

    let next = |m: Message| -> Value { serde_json::from_str(m.to_text().unwrap()).unwrap() };
    let hello = next(ws.next().await.unwrap().unwrap());
    assert_eq!(hello, json!({"type": "hello", "v": 1, "session": id, "steps": 0}));

    let (_, after) = call(&app, Method::POST, &format!("/api/v1/sessions/{id}/utterances"), Some(json!({"text": "oil low"}))).await;
    let n = after["steps"].as_u64().unwrap();
    assert!(n >= 1);
    for i in 0..n {
        let ev = next(ws.next().await.unwrap().unwrap());
        assert_eq!(ev["type"], "step");
        assert_eq!(ev["session"], id.as_str());
        assert_eq!(ev["record"]["step"], i);
        assert_eq!(ev["progress"], after["progress"]);
    }
    let last = tokio::time::timeout(std::time::Duration::from_millis(100), ws.next()).await;
    assert!(last.is_err(), "no further events expected");
}
