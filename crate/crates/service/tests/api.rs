use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use seqmine_core::load_transactions;
use seqmine_core::synth::{generate, SynthParams};
use seqmine_service::{app, app_with_queue, QUEUE_DEPTH};

const SAMPLE_LOG: &str = include_str!("../../core/tests/fixtures/sample_log.csv");

fn sample_app() -> Router {
    app(load_transactions(SAMPLE_LOG.as_bytes()).unwrap(), None)
}

async fn call(router: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

async fn get(router: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    call(router, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn get_json(router: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, body) = get(router, uri).await;
    (status, serde_json::from_slice(&body).unwrap())
}

async fn post_mine(router: &Router, body: Value) -> (StatusCode, Value) {
    let req = Request::post("/api/mine")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, body) = call(router, req).await;
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

async fn wait_done(router: &Router, id: &str) -> Value {
    for _ in 0..600 {
        let (status, job) = get_json(router, &format!("/api/jobs/{id}")).await;
        assert_eq!(status, StatusCode::OK);
        match job["state"].as_str().unwrap() {
            "done" | "failed" => return job,
            _ => tokio::time::sleep(Duration::from_millis(50)).await,
        }
    }
    panic!("job {id} did not finish");
}

fn rows(preview: &Value) -> Vec<(String, String)> {
    preview["sample"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["object_id"].as_str().unwrap().to_owned(),
                r["sequence"].as_str().unwrap().to_owned(),
            )
        })
        .collect()
}

fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter().map(|&(a, b)| (a.to_owned(), b.to_owned())).collect()
}

#[tokio::test]
async fn stats_of_sample_log() {
    let router = sample_app();
    let (status, body) = get_json(&router, "/api/stats").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body,
        json!({"objects": 4, "records": 14, "items": 7, "time_span": ["2008-05-10", "2008-05-25"]})
    );
}

#[tokio::test]
async fn preview_follows_the_window() {
    let router = sample_app();
    let (status, wide) = get_json(&router, "/api/preview?start=2008-05-10&end=2008-05-25&k=4").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        rows(&wide),
        pairs(&[
            ("1", "10:20:30:50:40"),
            ("2", "20:40"),
            ("3", "10:50:60:70"),
            ("4", "10:70:60")
        ])
    );
    assert_eq!(wide["interval_days"], 15);
    assert_eq!(wide["stats"]["object_count"], 4);

    let (_, narrow) = get_json(&router, "/api/preview?start=2008-05-15&end=2008-05-25&k=4").await;
    assert_eq!(
        rows(&narrow),
        pairs(&[("1", "30:50:40"), ("2", "20:40"), ("3", "50:60:70"), ("4", "10:70:60")])
    );
    assert_eq!(narrow["interval_days"], 10);
}

#[tokio::test]
async fn preview_is_idempotent() {
    let router = sample_app();
    let uri = "/api/preview?start=2008-05-12&end=2008-05-20&k=2";
    let (_, a) = get(&router, uri).await;
    let (_, b) = get(&router, uri).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn preview_rejects_bad_windows() {
    let router = sample_app();
    let (status, body) = get_json(&router, "/api/preview?start=2008-05-25&end=2008-05-10").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].is_string());
    let (status, _) = get(&router, "/api/preview?start=yesterday&end=2008-05-10").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(&router, "/api/preview?start=2008-05-10&end=2008-05-25&k=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn empty_window_preview() {
    let router = sample_app();
    let (status, body) = get_json(&router, "/api/preview?start=2009-01-01&end=2009-02-01").await;
    assert_eq!(status, StatusCode::OK);
    assert!(rows(&body).is_empty());
    assert_eq!(body["stats"]["object_count"], 0);
}

#[tokio::test]
async fn mine_wide_window_end_to_end() {
    let router = sample_app();
    let (status, body) = post_mine(
        &router,
        json!({"start": "2008-05-10", "end": "2008-05-25", "min_support": 2, "algorithm": "rsp"}),
    )
    .await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let id = body["job_id"].as_str().unwrap().to_owned();

    let job = wait_done(&router, &id).await;
    assert_eq!(job["state"], "done");

    let (status, first) = get(&router, &format!("/api/results/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    let result: Value = serde_json::from_slice(&first).unwrap();
    let got: Vec<(String, u64)> = result["patterns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            (
                p["pattern"].as_str().unwrap().to_owned(),
                p["support"].as_u64().unwrap(),
            )
        })
        .collect();
    let want: Vec<(String, u64)> = [
        ("10", 3),
        ("20", 2),
        ("40", 2),
        ("50", 2),
        ("60", 2),
        ("70", 2),
        ("10:50", 2),
        ("10:60", 2),
        ("10:70", 2),
        ("20:40", 2),
    ]
    .iter()
    .map(|&(p, s)| (p.to_owned(), s))
    .collect();
    assert_eq!(got, want);
    assert_eq!(result["object_count"], 4);
    assert_eq!(result["patterns"][0]["relative_support"], 0.75);
    assert_eq!(result["window"], json!({"start": "2008-05-10", "end": "2008-05-25"}));

    let (_, again) = get(&router, &format!("/api/results/{id}")).await;
    assert_eq!(first, again);

    let (status, csv) = get(&router, &format!("/api/results/{id}/csv")).await;
    assert_eq!(status, StatusCode::OK);
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("pattern,support,relative_support\n10,3,0.75\n"));
    assert_eq!(csv.lines().count(), 11);
}

#[tokio::test]
async fn gsp_jobs_and_independent_windows() {
    let router = sample_app();
    let (_, a) = post_mine(
        &router,
        json!({"start": "2008-05-10", "end": "2008-05-25", "min_support": 2, "algorithm": "gsp"}),
    )
    .await;
    let (_, b) = post_mine(
        &router,
        json!({"start": "2008-05-15", "end": "2008-05-25", "min_support": 2}),
    )
    .await;
    let (a, b) = (
        a["job_id"].as_str().unwrap().to_owned(),
        b["job_id"].as_str().unwrap().to_owned(),
    );
    assert_ne!(a, b);
    wait_done(&router, &a).await;
    wait_done(&router, &b).await;
    let (_, ra) = get_json(&router, &format!("/api/results/{a}")).await;
    let (_, rb) = get_json(&router, &format!("/api/results/{b}")).await;
    assert_eq!(ra["algorithm"], "gsp");
    assert_eq!(ra["patterns"].as_array().unwrap().len(), 10);
    assert_eq!(rb["window"]["start"], "2008-05-15");
    // Under the narrower window only 40, 50, 60 and 70 reach two objects.
    let narrow: Vec<&str> = rb["patterns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["pattern"].as_str().unwrap())
        .collect();
    assert_eq!(narrow, ["40", "50", "60", "70"]);
}

#[tokio::test]
async fn mine_rejects_invalid_requests() {
    let router = sample_app();
    for body in [
        json!({"start": "2008-05-10", "end": "2008-05-25", "min_support": 0}),
        json!({"start": "2008-05-10", "end": "2008-05-25", "min_support": 1.5}),
        json!({"start": "2008-05-25", "end": "2008-05-10", "min_support": 2}),
        json!({"start": "2008-05-10", "end": "2008-05-25", "min_support": 2, "algorithm": "spade"}),
        json!({"start": "2008-05-10", "end": "2008-05-25", "min_support": 2, "max_len": 0}),
    ] {
        let (status, _) = post_mine(&router, body.clone()).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    }
}

#[tokio::test]
async fn unknown_and_unfinished_jobs() {
    let (router, _queue) = app_with_queue(load_transactions(SAMPLE_LOG.as_bytes()).unwrap(), None);
    let (status, _) = get(&router, "/api/jobs/999").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = get(&router, "/api/results/999").await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // No worker is running, so the job stays pending.
    let (_, body) = post_mine(
        &router,
        json!({"start": "2008-05-10", "end": "2008-05-25", "min_support": 2}),
    )
    .await;
    let id = body["job_id"].as_str().unwrap();
    let (_, job) = get_json(&router, &format!("/api/jobs/{id}")).await;
    assert_eq!(job["state"], "pending");
    let (status, _) = get(&router, &format!("/api/results/{id}")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = get(&router, &format!("/api/results/{id}/csv")).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn full_queue_answers_429() {
    let (router, _queue) = app_with_queue(load_transactions(SAMPLE_LOG.as_bytes()).unwrap(), None);
    let req = json!({"start": "2008-05-10", "end": "2008-05-25", "min_support": 2});
    for _ in 0..QUEUE_DEPTH {
        let (status, _) = post_mine(&router, req.clone()).await;
        assert_eq!(status, StatusCode::ACCEPTED);
    }
    let (status, _) = post_mine(&router, req).await;
    assert_eq!(status, StatusCode::TOO_MANY_REQUESTS);
}

#[tokio::test]
async fn previews_are_served_while_a_job_runs() {
    let db = generate(&SynthParams::new(400, 15.0, 15, 3)).unwrap();
    let router = app(db, None);
    let (_, body) = post_mine(
        &router,
        json!({"start": "2008-01-01", "end": "2008-12-31", "min_support": 1, "max_len": 4, "algorithm": "gsp"}),
    )
    .await;
    let id = body["job_id"].as_str().unwrap().to_owned();

    let mut saw_running = false;
    for _ in 0..200 {
        let (_, job) = get_json(&router, &format!("/api/jobs/{id}")).await;
        if job["state"] == "running" {
            let (status, preview) = get_json(&router, "/api/preview?start=2008-01-01&end=2008-01-05&k=3").await;
            assert_eq!(status, StatusCode::OK);
            assert_eq!(rows(&preview).len(), 3);
            let (_, job) = get_json(&router, &format!("/api/jobs/{id}")).await;
            saw_running = job["state"] == "running";
            break;
        }
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    assert!(saw_running, "preview did not complete while the job was running");
}

#[tokio::test]
async fn root_serves_a_page() {
    let router = sample_app();
    let (status, body) = get(&router, "/").await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("/api"));
}
