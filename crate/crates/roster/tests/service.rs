use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use roster::formats::parse_roster_csv;
use roster::jobs::{JobRecord, JobState, StreamRecord};
use roster::service::{router, Service, ServiceConfig};
use roster_core::model::{check_feasibility, generate_instance, GeneratorConfig, BLOCKS_PER_DAY};
use roster_core::RosterInstance;
use serde_json::{json, Value};
use tower::ServiceExt;

fn start(dir: &Path, workers: usize) -> (Arc<Service>, Router) {
    let svc = Service::start(&ServiceConfig {
        data_dir: dir.into(),
        workers,
    })
    .unwrap();
    (svc.clone(), router(svc))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req
            .header("content-type", "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

fn toy() -> RosterInstance {
    generate_instance(&GeneratorConfig::toy(4, 1), 7).unwrap()
}

async fn upload(app: &Router, inst: &RosterInstance) -> String {
    let (s, v) = json_call(app, "POST", "/v1/instances", Some(serde_json::to_value(inst).unwrap())).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

async fn wait(app: &Router, id: &str) -> JobRecord {
    for _ in 0..600 {
        let (s, v) = json_call(app, "GET", &format!("/v1/jobs/{id}"), None).await;
        assert_eq!(s, StatusCode::OK);
        let rec: JobRecord = serde_json::from_value(v).unwrap();
        if rec.state.is_terminal() {
            return rec;
        }
        tokio::time::sleep(Duration::from_millis(100)).await;
    }
    panic!("job {id} did not finish");
}

async fn create(app: &Router, body: Value) -> JobRecord {
    let (s, v) = json_call(app, "POST", "/v1/jobs", Some(body)).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    serde_json::from_value(v).unwrap()
}

fn optimize_body(instance_id: &str) -> Value {
    json!({ "kind": "optimize", "instance_id": instance_id, "config": { "gap_target": 0.05 } })
}

fn records(bytes: &[u8]) -> Vec<StreamRecord> {
    std::str::from_utf8(bytes)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[tokio::test(flavor = "multi_thread")]
async fn optimize_job_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (_svc, app) = start(dir.path(), 1);
    let inst = toy();
    let iid = upload(&app, &inst).await;
    let job = create(&app, optimize_body(&iid)).await;
    assert_eq!(job.state, JobState::Queued);
    // Attach to the stream while the job may still be running.
    let (app2, uri) = (app.clone(), format!("/v1/jobs/{}/events", job.id));
    let stream = tokio::spawn(async move { call(&app2, "GET", &uri, None).await });
    let done = wait(&app, &job.id).await;
    assert_eq!(done.state, JobState::Done, "{:?}", done.error);

    let (status, body) = stream.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    let recs = records(&body);
    assert!(recs.iter().enumerate().all(|(i, r)| r.seq == i));
    assert_eq!(recs.last().unwrap().state, Some(JobState::Done));
    let events: Vec<_> = recs.iter().filter_map(|r| r.event.clone()).collect();
    assert!(!events.is_empty());
    for w in events.windows(2) {
        if let (Some(a), Some(b)) = (w[0].incumbent, w[1].incumbent) {
            assert!(b <= a);
        }
        if let (Some(a), Some(b)) = (w[0].bound, w[1].bound) {
            assert!(b >= a);
        }
    }
    // Replay after completion serves the same lines, and `from` skips.
    let (_, replay) = call(&app, "GET", &format!("/v1/jobs/{}/events", job.id), None).await;
    assert_eq!(replay, body);
    let (_, tail) = call(&app, "GET", &format!("/v1/jobs/{}/events?from=1", job.id), None).await;
    assert_eq!(records(&tail).len(), recs.len() - 1);

    let (s, v) = json_call(&app, "GET", &format!("/v1/jobs/{}/result", job.id), None).await;
    assert_eq!(s, StatusCode::OK);
    let stats = &v["result"]["stats"];
    assert_eq!(stats["employees"].as_array().unwrap().len(), 4);
    for e in stats["employees"].as_array().unwrap() {
        assert!(e["shifts"].is_array() && e["weekend_shifts"].is_array());
        let rate = e["preference_satisfaction"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }

    let (s, csv) = call(&app, "GET", &format!("/v1/jobs/{}/roster.csv", job.id), None).await;
    assert_eq!(s, StatusCode::OK);
    let x = parse_roster_csv(Path::new("r.csv"), std::str::from_utf8(&csv).unwrap(), &inst).unwrap();
    assert!(check_feasibility(&inst, &x).unwrap().feasible);
}

#[tokio::test(flavor = "multi_thread")]
async fn change_requests_spawn_event_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let (_svc, app) = start(dir.path(), 1);
    let inst = toy();
    let iid = upload(&app, &inst).await;
    let job = create(&app, optimize_body(&iid)).await;
    assert_eq!(wait(&app, &job.id).await.state, JobState::Done);
    let (_, csv) = call(&app, "GET", &format!("/v1/jobs/{}/roster.csv", job.id), None).await;
    let x = parse_roster_csv(Path::new("r.csv"), std::str::from_utf8(&csv).unwrap(), &inst).unwrap();

    // Send someone who works on some day on vacation that day.
    let (e, d) = (0..inst.employees)
        .flat_map(|e| (0..inst.days()).map(move |d| (e, d)))
        .find(|&(e, d)| (0..BLOCKS_PER_DAY).any(|b| x.occupied(e, d * BLOCKS_PER_DAY + b)))
        .unwrap();
    let blocks: Vec<usize> = (d * BLOCKS_PER_DAY..(d + 1) * BLOCKS_PER_DAY).collect();
    let change = json!({ "employee": e, "kind": "vacation", "blocks": blocks, "values": [1, 1, 1], "effective_from": 0 });
    let (s, v) = json_call(&app, "POST", &format!("/v1/jobs/{}/changes", job.id), Some(json!({ "changes": [change] }))).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    let child: JobRecord = serde_json::from_value(v).unwrap();
    let done = wait(&app, &child.id).await;
    match done.state {
        JobState::Done => {
            let (_, v) = json_call(&app, "GET", &format!("/v1/jobs/{}/result", child.id), None).await;
            let dev = v["result"]["deviation"].as_u64().unwrap();
            assert!(dev >= 1);
            let y: roster_core::Roster = serde_json::from_value(v["result"]["output"]["result"]["roster"].clone()).unwrap();
            assert_eq!(y.hamming(&x) as u64, dev);
            assert!(blocks.iter().all(|&j| !y.occupied(e, j)));
        }
        // Nobody else may be able to cover; the failure must say so.
        _ => assert!(done.error.unwrap().contains("infeasible"), "{:?}", done.state),
    }

    // Contradictory changes are rejected before any job exists.
    let jobs_before = json_call(&app, "GET", "/v1/jobs", None).await.1.as_array().unwrap().len();
    let on = json!({ "employee": 0, "kind": "vacation", "blocks": [5], "values": [1], "effective_from": 0 });
    let off = json!({ "employee": 0, "kind": "vacation", "blocks": [5], "values": [0], "effective_from": 0 });
    let (s, _) = json_call(&app, "POST", &format!("/v1/jobs/{}/changes", job.id), Some(json!({ "changes": [on, off] }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let jobs_after = json_call(&app, "GET", "/v1/jobs", None).await.1.as_array().unwrap().len();
    assert_eq!(jobs_before, jobs_after);
}

#[tokio::test(flavor = "multi_thread")]
async fn unfinished_jobs_refuse_changes_and_results() {
    let dir = tempfile::tempdir().unwrap();
    // No workers: the job stays queued.
    let (_svc, app) = start(dir.path(), 0);
    let iid = upload(&app, &toy()).await;
    let job = create(&app, optimize_body(&iid)).await;
    let change = json!({ "changes": [] });
    let (s, _) = json_call(&app, "POST", &format!("/v1/jobs/{}/changes", job.id), Some(change)).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call(&app, "GET", &format!("/v1/jobs/{}/result", job.id), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call(&app, "GET", "/v1/jobs/job-999999", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "GET", "/v1/jobs/..%2Fetc", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn malformed_payloads_are_client_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (_svc, app) = start(dir.path(), 0);
    let iid = upload(&app, &toy()).await;
    let bad = [
        json!({ "kind": "optimise", "instance_id": iid }),
        json!({ "kind": "optimize", "instance_id": iid, "config": { "gap_target": 2.0 } }),
        json!({ "kind": "optimize", "instance_id": iid, "weights": { "lambda": [1, 1, 1], "theta": [0.5, 0.5, 1], "gamma": 3, "mu": 1 } }),
    ];
    for body in bad {
        let (s, _) = call(&app, "POST", "/v1/jobs", Some(body.clone())).await;
        assert!(s.is_client_error(), "{body}: {s}");
    }
    let (s, _) = call(&app, "POST", "/v1/jobs", Some(json!({ "kind": "optimize", "instance_id": "inst-000404" }))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let mut inst = toy();
    inst.blocks += 1;
    let (s, _) = call(&app, "POST", "/v1/instances", Some(serde_json::to_value(&inst).unwrap())).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test(flavor = "multi_thread")]
async fn cancelling_a_queued_job_goes_through_running() {
    let dir = tempfile::tempdir().unwrap();
    let iid;
    let id;
    {
        let (_svc, app) = start(dir.path(), 0);
        iid = upload(&app, &toy()).await;
        id = create(&app, optimize_body(&iid)).await.id;
        let (s, _) = call(&app, "POST", &format!("/v1/jobs/{id}/cancel"), None).await;
        assert_eq!(s, StatusCode::OK);
    }
    // The flag lives in memory; a restarted service with a worker re-queues
    // the job and, without the flag, runs it.
    let (_svc, app) = start(dir.path(), 1);
    let done = wait(&app, &id).await;
    assert_eq!(done.state, JobState::Done);
    let (s, _) = call(&app, "POST", &format!("/v1/jobs/{id}/cancel"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);

    // With a worker present, a cancel that lands before the run starts
    // still ends in `cancelled`.
    let job = create(&app, optimize_body(&iid)).await;
    let _ = call(&app, "POST", &format!("/v1/jobs/{}/cancel", job.id), None).await;
    let done = wait(&app, &job.id).await;
    assert!(matches!(done.state, JobState::Cancelled | JobState::Done), "{:?}", done.state);
}

#[tokio::test(flavor = "multi_thread")]
async fn results_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (id, before) = {
        let (_svc, app) = start(dir.path(), 1);
        let iid = upload(&app, &toy()).await;
        let job = create(&app, optimize_body(&iid)).await;
        wait(&app, &job.id).await;
        let (_, v) = json_call(&app, "GET", &format!("/v1/jobs/{}/result", job.id), None).await;
        (job.id, v)
    };
    let (_svc, app) = start(dir.path(), 1);
    let (s, after) = json_call(&app, "GET", &format!("/v1/jobs/{id}/result"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(before, after);
    // New ids continue after the stored ones.
    let iid = upload(&app, &toy()).await;
    assert_eq!(iid, "inst-000002");
}

#[tokio::test(flavor = "multi_thread")]
async fn generated_instances_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (_svc, app) = start(dir.path(), 0);
    let (s, v) = json_call(&app, "POST", "/v1/instances/generate", Some(json!({ "config": { "employees": 5, "weeks": 2 }, "seed": 3 }))).await;
    assert_eq!(s, StatusCode::CREATED);
    let id = v["id"].as_str().unwrap();
    let (_, inst) = json_call(&app, "GET", &format!("/v1/instances/{id}"), None).await;
    let inst: RosterInstance = serde_json::from_value(inst).unwrap();
    let cfg = GeneratorConfig {
        employees: 5,
        weeks: 2,
        ..GeneratorConfig::default()
    };
    assert_eq!(inst, generate_instance(&cfg, 3).unwrap());
    let (_, list) = json_call(&app, "GET", "/v1/instances", None).await;
    assert_eq!(list, json!([id]));
    let (s, schema) = json_call(&app, "GET", "/v1/schema", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(schema["config"]["gap_target"], json!(0.05));
}
