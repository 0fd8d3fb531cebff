mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use harvest_service::{router, SessionManager};

fn app() -> Router {
    router(Arc::new(
        SessionManager::new(vec![common::bundle(11)], None).unwrap(),
    ))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

async fn session(app: &Router) -> String {
    let (st, v) = call(app, Method::POST, "/sessions", None).await;
    assert_eq!(st, StatusCode::CREATED);
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn health_and_bundles() {
    let app = app();
    let (st, v) = call(&app, Method::GET, "/health", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    let (_, v) = call(&app, Method::GET, "/bundles", None).await;
    assert_eq!(v[0]["name"], "micro-11");
    assert_eq!(v[0]["scenarios"], 63);
}

#[tokio::test]
async fn planner_workflow_end_to_end() {
    let app = app();
    let id = session(&app).await;
    let base = format!("/sessions/{id}");

    let (st, ov) = call(&app, Method::GET, &format!("{base}/overview"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(ov["focus_periods"], 3);
    assert_eq!(ov["ranges"].as_array().unwrap().len(), 2 * 3);
    assert_eq!(ov["ranges"][0]["assortment"], 1);
    assert_eq!(ov["ranges"][0]["period"], 1);
    let (_, ov1) = call(
        &app,
        Method::GET,
        &format!("{base}/overview?periods=1"),
        None,
    )
    .await;
    assert_eq!(ov1["ranges"].as_array().unwrap().len(), 2);
    let (_, all) = call(
        &app,
        Method::GET,
        &format!("{base}/overview?periods=all"),
        None,
    )
    .await;
    assert_eq!(all["focus_periods"], 3);

    let (st, v) = call(&app, Method::GET, &format!("{base}/scores"), None).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "criteria-not-set");

    let (st, c) = call(
        &app,
        Method::PUT,
        &format!("{base}/criteria"),
        Some(json!({"per_assortment": [0.2, 0.2]})),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{c}");
    assert_eq!(c["cache_hit"], false);
    let ranking = c["ranking"].as_array().unwrap();
    assert_eq!(ranking.len(), 19);
    let top = ranking[0]["id"].as_u64().unwrap();

    let (st, scores) = call(&app, Method::GET, &format!("{base}/scores"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(scores.as_array().unwrap().len(), 19);

    let (st, f) = call(
        &app,
        Method::POST,
        &format!("{base}/filter"),
        Some(json!({"rules": [{"floor": 0.0, "periods": [1]}]})),
    )
    .await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(f["survivors"].as_array().unwrap().len(), 19);

    let (st, d) = call(&app, Method::GET, &format!("{base}/solutions/{top}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(d["schedule"].as_array().unwrap().len(), 6);
    assert!(d["robustness"].is_array());

    let (st, _) = call(
        &app,
        Method::POST,
        &format!("{base}/inspections"),
        Some(json!({"solution": top})),
    )
    .await;
    assert_eq!(st, StatusCode::OK);
    let (st, _) = call(
        &app,
        Method::POST,
        &format!("{base}/shortlist"),
        Some(json!({"ids": [top]})),
    )
    .await;
    assert_eq!(st, StatusCode::OK);
    let (st, r) = call(
        &app,
        Method::POST,
        &format!("{base}/finalize"),
        Some(json!({"solution": top})),
    )
    .await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(r["final_choice"], top);
    assert_eq!(r["iterations"].as_array().unwrap().len(), 5);
    assert_eq!(r["criteria_history"].as_array().unwrap().len(), 1);

    let (st, v) = call(
        &app,
        Method::POST,
        &format!("{base}/shortlist"),
        Some(json!({"ids": [top]})),
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "finalized");

    let (_, j) = call(&app, Method::GET, &format!("{base}/journal"), None).await;
    let actions: Vec<&str> = j
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["action"].as_str().unwrap())
        .collect();
    assert_eq!(
        actions,
        [
            "set-criteria",
            "filter",
            "inspect-decisions",
            "shortlist",
            "finalize"
        ]
    );

    let (st, rp) = call(&app, Method::POST, &format!("{base}/replay"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(rp["records"], 5);
    assert_eq!(rp["identical"], true);

    let (_, rep) = call(&app, Method::GET, &format!("{base}/report"), None).await;
    assert_eq!(rep, r);
}

#[tokio::test]
async fn second_session_hits_the_cache() {
    let app = app();
    let body = json!({"thresholds": [[0.1, 0.1, 0.1], [0.3, 0.3, 0.3]]});
    let a = session(&app).await;
    let b = session(&app).await;
    let (_, x) = call(
        &app,
        Method::PUT,
        &format!("/sessions/{a}/criteria"),
        Some(body.clone()),
    )
    .await;
    let (_, y) = call(
        &app,
        Method::PUT,
        &format!("/sessions/{b}/criteria"),
        Some(body),
    )
    .await;
    assert_eq!(x["cache_hit"], false);
    assert_eq!(y["cache_hit"], true);
    assert_eq!(x["ranking"], y["ranking"]);
    let (_, list) = call(&app, Method::GET, "/sessions", None).await;
    assert_eq!(list.as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn errors_have_codes_and_statuses() {
    let app = app();
    let (st, v) = call(&app, Method::GET, "/sessions/nope", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown-session");

    let (st, v) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"bundle": "missing"})),
    )
    .await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown-bundle");

    let id = session(&app).await;
    let base = format!("/sessions/{id}");
    let cases = [
        (json!({"per_assortment": [0.2]}), "invalid-threshold"),
        (json!({"per_assortment": [0.2, -1.0]}), "invalid-threshold"),
        (json!({}), "invalid-threshold"),
        (
            json!({"per_assortment": [0.2, 0.2], "thresholds": [[0.1]]}),
            "invalid-threshold",
        ),
        (json!({"per_assortment": "x"}), "invalid-request"),
    ];
    for (body, code) in cases {
        let (st, v) = call(
            &app,
            Method::PUT,
            &format!("{base}/criteria"),
            Some(body.clone()),
        )
        .await;
        assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(v["error"], code, "{body}");
    }

    let (st, v) = call(&app, Method::GET, &format!("{base}/solutions/999"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown-solution");

    let (st, v) = call(
        &app,
        Method::POST,
        &format!("{base}/finalize"),
        Some(json!({"solution": 1})),
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "not-shortlisted");

    let (st, _) = call(
        &app,
        Method::GET,
        &format!("{base}/overview?periods=0"),
        None,
    )
    .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);

    // failed actions are not journaled
    let (_, j) = call(&app, Method::GET, &format!("{base}/journal"), None).await;
    assert_eq!(j.as_array().unwrap().len(), 0);
}
