#![allow(dead_code)]

use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tempfile::TempDir;
use tfscope_core::AnalysisConfig;
use tfscope_server::{AnalysisJob, JobId, Pipeline, PipelineConfig};
use tower::ServiceExt;

pub const REPORT_SCHEMA: &str = include_str!("../../../../docs/report.schema.json");
pub const JOBS_SCHEMA: &str = include_str!("../../../../docs/jobs.schema.json");

pub fn config(root: &std::path::Path, workers: usize) -> PipelineConfig {
    PipelineConfig {
        store_dir: root.join("store"),
        workdir_root: root.join("work"),
        workers,
        token_ttl: chrono::Duration::hours(1),
        analysis: AnalysisConfig::default(),
    }
}

pub fn pipeline(workers: usize) -> (TempDir, Pipeline) {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::open(config(dir.path(), workers)).unwrap();
    (dir, p)
}

pub fn wait_terminal(p: &Pipeline, id: &JobId) -> AnalysisJob {
    let deadline = Instant::now() + Duration::from_secs(60);
    loop {
        let job = p.job(id).expect("job exists");
        if job.stage.is_terminal() {
            return job;
        }
        assert!(Instant::now() < deadline, "job {id} stuck at {}", job.stage);
        std::thread::sleep(Duration::from_millis(20));
    }
}

pub fn validate(schema: &str, instance: &Value) -> Result<(), Vec<String>> {
    let schema: Value = serde_json::from_str(schema).unwrap();
    let validator = jsonschema::options()
        .should_validate_formats(true)
        .build(&schema)
        .unwrap();
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

pub struct Reply {
    pub status: StatusCode,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

pub async fn send(app: &Router, method: Method, path: &str, token: Option<&str>, body: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(path);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

/// Registers `user` and logs in; returns `(userId, token)`.
pub async fn login(app: &Router, user: &str) -> (String, String) {
    let creds = format!(r#"{{"username":"{user}","password":"hunter2hunter2"}}"#);
    let r = send(app, Method::POST, "/auth/register", None, Some(&creds)).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
    let r = send(app, Method::POST, "/auth/login", None, Some(&creds)).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    let v = r.json();
    (v["userId"].as_str().unwrap().to_string(), v["token"].as_str().unwrap().to_string())
}
