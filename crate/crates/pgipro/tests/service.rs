use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pgipro::fixture::{osdorp, OSDORP_FRONT, OSDORP_JSON};
use pgipro::service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Api {
    app: Router,
    state: Arc<AppState>,
}

impl Api {
    fn new(config: ServiceConfig) -> Self {
        let state = AppState::new(config);
        Api { app: router(state.clone()), state }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Value, Option<String>) {
        let mut req = Request::builder().method(method).uri(uri);
        if body.is_some() {
            req = req.header(header::CONTENT_TYPE, "application/json");
        }
        let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let retry = res
            .headers()
            .get(header::RETRY_AFTER)
            .map(|v| v.to_str().unwrap().to_string());
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, value, retry)
    }

    async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        let (s, v, _) = self.call(Method::POST, uri, Some(body.to_string())).await;
        (s, v)
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        let (s, v, _) = self.call(Method::GET, uri, None).await;
        (s, v)
    }

    async fn upload_fixture(&self) -> String {
        let (status, body, _) = self.call(Method::POST, "/graphs", Some(OSDORP_JSON.to_string())).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["graph_id"].as_str().unwrap().to_string()
    }

    async fn open(&self, graph_id: &str) -> (StatusCode, Value) {
        self.post("/sessions", json!({ "graph_id": graph_id, "source": "O", "target": "D", "heuristic": "middle" }))
            .await
    }
}

fn vec_of(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn on_front(v: &[f64]) -> bool {
    OSDORP_FRONT.iter().any(|p| p.as_slice() == v)
}

/// Recomputes a route's value from the fixture edges.
fn path_value(nodes: &Value) -> Vec<f64> {
    let g = osdorp();
    let ids: Vec<&str> = nodes.as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    g.path_value_by_ids(&ids).unwrap().as_slice().to_vec()
}

fn check_route(view: &Value) {
    let value = vec_of(&view["value"]);
    assert!(on_front(&value), "{value:?}");
    assert_eq!(path_value(&view["nodes"]), value);
    let objectives = view["objectives"].as_array().unwrap();
    assert_eq!(objectives.len(), 2);
    for (o, v) in objectives.iter().zip(&value) {
        assert_eq!(o["value"].as_f64().unwrap(), *v);
    }
    assert_eq!(view["polyline"].as_array().unwrap().len(), view["nodes"].as_array().unwrap().len());
}

#[tokio::test]
async fn graph_upload_and_fetch() {
    let api = Api::new(ServiceConfig::default());
    let id = api.upload_fixture().await;
    let (status, doc) = api.get(&format!("/graphs/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["nodes"].as_array().unwrap().len(), osdorp().node_count());
    assert_eq!(doc["edges"].as_array().unwrap().len(), osdorp().edge_count());

    let (status, err) = api.get("/graphs/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");

    let (status, err, _) = api.call(Method::POST, "/graphs", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(err["message"].is_string());

    // well-formed JSON, invalid graph: self-loop
    let bad = json!({
        "objectives": [{ "name": "a", "unit": "" }],
        "nodes": [{ "id": "x" }],
        "edges": [{ "from": "x", "to": "x", "costs": [1.0] }],
    });
    let (status, err) = api.post("/graphs", bad).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "invalid_graph");
}

#[tokio::test]
async fn full_session_flow() {
    let log = tempfile::tempdir().unwrap();
    let log_path = log.path().join("transcripts.jsonl");
    let api = Api::new(ServiceConfig { transcript_log: Some(log_path.clone()), ..ServiceConfig::default() });
    let gid = api.upload_fixture().await;

    let (status, created) = api.open(&gid).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    let sid = created["session_id"].as_str().unwrap().to_string();
    assert_eq!(created["status"], "active");
    check_route(&created["initial"]);

    let (status, snap) = api.get(&format!("/sessions/{sid}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(snap["pending"], false);
    assert!(snap["candidate"].is_null());
    assert_eq!(snap["transcript"].as_array().unwrap().len(), 1);

    // choose before any steer
    let (status, err) = api.post(&format!("/sessions/{sid}/choose"), json!({ "preferred": "candidate" })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "no_pending_comparison");

    let before = vec_of(&created["initial"]["value"]);
    let (status, step) = api.post(&format!("/sessions/{sid}/steer"), json!({ "objective": 0, "direction": "improve" })).await;
    assert_eq!(status, StatusCode::OK, "{step}");
    check_route(&step["candidate"]);
    check_route(&step["incumbent"]);
    let cand = vec_of(&step["candidate"]["value"]);
    assert!(cand[0] < before[0]);
    let deltas = vec_of(&step["candidate"]["deltas"]);
    let inc = vec_of(&step["incumbent"]["value"]);
    assert_eq!(deltas, vec![cand[0] - inc[0], cand[1] - inc[1]]);

    // alternation: a second steer is refused until the user chooses
    let (status, err) = api.post(&format!("/sessions/{sid}/steer"), json!({ "objective": 1, "direction": "improve" })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "pending_comparison");
    let (_, snap) = api.get(&format!("/sessions/{sid}")).await;
    assert_eq!(snap["pending"], true);
    check_route(&snap["candidate"]);

    let (status, chosen) = api.post(&format!("/sessions/{sid}/choose"), json!({ "preferred": "candidate" })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(vec_of(&chosen["best"]["value"]), cand);

    // bad requests
    let (status, err) = api.post(&format!("/sessions/{sid}/steer"), json!({ "objective": 5, "direction": "improve" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "invalid_objective");
    let (status, _) = api.post(&format!("/sessions/{sid}/steer"), json!({ "objective": 0, "direction": "sideways" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = api.post("/sessions/nope/steer", json!({ "objective": 0, "direction": "improve" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // walk objective 0 down until exhausted
    let mut exhausted = false;
    for _ in 0..10 {
        let (status, step) = api.post(&format!("/sessions/{sid}/steer"), json!({ "objective": 0, "direction": "improve" })).await;
        assert_eq!(status, StatusCode::OK, "{step}");
        if step["status"] == "exhausted" {
            check_route(&step["best"]);
            exhausted = true;
            break;
        }
        let (status, _) = api.post(&format!("/sessions/{sid}/choose"), json!({ "preferred": "candidate" })).await;
        assert_eq!(status, StatusCode::OK);
    }
    assert!(exhausted);
    let (_, snap) = api.get(&format!("/sessions/{sid}")).await;
    assert_eq!(snap["status"], "exhausted");
    assert_eq!(vec_of(&snap["best"]["value"]), vec![568.0, 8.0]);
    let (status, err) = api.post(&format!("/sessions/{sid}/steer"), json!({ "objective": 1, "direction": "improve" })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "exhausted");

    let (status, closed) = api.post(&format!("/sessions/{sid}/close"), json!({})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(closed["status"], "closed");
    let (_, snap) = api.get(&format!("/sessions/{sid}")).await;
    assert_eq!(snap["status"], "closed");
    let (status, err) = api.post(&format!("/sessions/{sid}/steer"), json!({ "objective": 1, "direction": "improve" })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "session_closed");

    // closing again is harmless and does not log twice
    let (status, _) = api.post(&format!("/sessions/{sid}/close"), json!({})).await;
    assert_eq!(status, StatusCode::OK);
    let lines: Vec<Value> = std::fs::read_to_string(&log_path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["session_id"], sid.as_str());
    let kinds: Vec<&str> = lines[0]["transcript"].as_array().unwrap().iter().map(|e| e["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds.first(), Some(&"initial_proposal"));
    assert_eq!(kinds.last(), Some(&"exit"));
    assert!(kinds.contains(&"exhausted"));

    // two more sessions append two more lines
    for _ in 0..2 {
        let (_, created) = api.open(&gid).await;
        let sid = created["session_id"].as_str().unwrap();
        api.post(&format!("/sessions/{sid}/close"), json!({})).await;
    }
    assert_eq!(std::fs::read_to_string(&log_path).unwrap().lines().count(), 3);
}

#[tokio::test]
async fn session_creation_errors() {
    let api = Api::new(ServiceConfig { max_sessions: 2, ..ServiceConfig::default() });
    let gid = api.upload_fixture().await;

    let (status, _) = api.post("/sessions", json!({ "graph_id": "missing", "source": "O", "target": "D" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = api.post("/sessions", json!({ "graph_id": gid, "source": "O", "target": "nowhere" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = api.post("/sessions", json!({ "graph_id": gid, "source": "O", "target": "D", "extra": 1 })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    // D has no outgoing edges back to O
    let (status, err) = api.post("/sessions", json!({ "graph_id": gid, "source": "D", "target": "O" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{err}");
    assert_eq!(err["code"], "unreachable");

    let (a, _) = api.open(&gid).await;
    let (b, _) = api.open(&gid).await;
    assert_eq!((a, b), (StatusCode::CREATED, StatusCode::CREATED));
    let (status, err, retry) = api
        .call(Method::POST, "/sessions", Some(json!({ "graph_id": gid, "source": "O", "target": "D" }).to_string()))
        .await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(err["code"], "capacity");
    assert!(retry.is_some());
    assert_eq!(api.state.session_count(), 2);
}

#[tokio::test]
async fn session_ids_are_unique() {
    let api = Api::new(ServiceConfig::default());
    let gid = api.upload_fixture().await;
    let mut ids = std::collections::BTreeSet::new();
    for _ in 0..20 {
        let (_, created) = api.open(&gid).await;
        assert!(ids.insert(created["session_id"].as_str().unwrap().to_string()));
    }
}

#[tokio::test]
async fn idle_sessions_expire() {
    let api = Api::new(ServiceConfig { session_ttl: Duration::from_millis(50), ..ServiceConfig::default() });
    let gid = api.upload_fixture().await;
    let (_, created) = api.open(&gid).await;
    let sid = created["session_id"].as_str().unwrap().to_string();
    assert_eq!(api.state.session_count(), 1);
    tokio::time::sleep(Duration::from_millis(120)).await;
    let (status, _) = api.get(&format!("/sessions/{sid}")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(api.state.session_count(), 0);
}

#[tokio::test]
async fn oracle_budget_overrun_is_retryable() {
    let api = Api::new(ServiceConfig { oracle_budget: Duration::ZERO, ..ServiceConfig::default() });
    let gid = api.upload_fixture().await;
    let (status, err, retry) = api
        .call(Method::POST, "/sessions", Some(json!({ "graph_id": gid, "source": "O", "target": "D" }).to_string()))
        .await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(err["code"], "oracle_timeout");
    assert_eq!(retry.as_deref(), Some("1"));
}

#[tokio::test]
async fn concurrent_sessions_do_not_interfere() {
    let api = Arc::new(Api::new(ServiceConfig::default()));
    let gid = api.upload_fixture().await;
    let mut tasks = Vec::new();
    for k in 0..8usize {
        let api = api.clone();
        let gid = gid.clone();
        tasks.push(tokio::spawn(async move {
            let (_, created) = api.open(&gid).await;
            let sid = created["session_id"].as_str().unwrap().to_string();
            let objective = k % 2;
            let mut seen = Vec::new();
            loop {
                let (status, step) = api
                    .post(&format!("/sessions/{sid}/steer"), json!({ "objective": objective, "direction": "improve" }))
                    .await;
                assert_eq!(status, StatusCode::OK);
                if step["status"] == "exhausted" {
                    break;
                }
                seen.push(vec_of(&step["candidate"]["value"]));
                api.post(&format!("/sessions/{sid}/choose"), json!({ "preferred": "candidate" })).await;
            }
            (objective, seen)
        }));
    }
    let mut by_objective: [Option<Vec<Vec<f64>>>; 2] = [None, None];
    for t in tasks {
        let (objective, seen) = t.await.unwrap();
        // same requests on the same graph give the same sequence
        match &by_objective[objective] {
            Some(prev) => assert_eq!(prev, &seen),
            None => by_objective[objective] = Some(seen),
        }
    }
}
