use std::process::{Command, Output};

use tfscope_core::{AnalysisConfig, RepoSource, ReportDocument};
use tfscope_server::{Pipeline, PipelineConfig, Stage};
use tfscope_testkit::{standard_fixture, workdir};

fn tfscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfscope"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn json_report_matches_library_and_schema() {
    let fx = standard_fixture();
    let out = tfscope(&["analyze", &fx.url(), "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);

    let work = workdir();
    let source = RepoSource::new(fx.url(), None).unwrap();
    let a = tfscope_core::analyze(&source, work.path(), &AnalysisConfig::default(), |_| {}).unwrap();
    assert_eq!(text, ReportDocument::from_analysis(&a).to_json().unwrap());

    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/report.schema.json")).unwrap();
    let instance: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(jsonschema::is_valid(&schema, &instance));

    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cloning"));
    let quiet = tfscope(&["analyze", "-q", &fx.url()]);
    assert!(quiet.stderr.is_empty());
    assert_eq!(stdout(&quiet), text);
}

#[test]
fn cli_and_service_agree() {
    let fx = standard_fixture();
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::open(PipelineConfig {
        store_dir: dir.path().join("store"),
        workdir_root: dir.path().join("work"),
        workers: 1,
        token_ttl: chrono::Duration::hours(1),
        analysis: AnalysisConfig::default(),
    })
    .unwrap();
    let user = p.register_user("ana", "long enough").unwrap();
    let id = p.start_analysis(user, &fx.url(), Some("main")).unwrap();
    let deadline = std::time::Instant::now() + std::time::Duration::from_secs(60);
    while !p.job(&id).unwrap().stage.is_terminal() {
        assert!(std::time::Instant::now() < deadline);
        std::thread::sleep(std::time::Duration::from_millis(20));
    }
    assert_eq!(p.job(&id).unwrap().stage, Stage::Finished);
    let out = tfscope(&["analyze", "-q", &fx.url(), "--branch", "main"]);
    assert_eq!(stdout(&out), p.get_result(&id).unwrap());
}

#[test]
fn tree_format() {
    let fx = standard_fixture();
    let out = tfscope(&["analyze", "-q", &fx.url(), "--format", "tree"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let root = fx.path().file_name().unwrap().to_str().unwrap();
    let want = format!(
        "{root} [TF=2]
  docs [TF=2]
    guide.md [TF=2] (importance=7.86138)
  src [TF=2]
    net [TF=1]
      client.rs [TF=2] (importance=7.98435)
      proto.rs [TF=1] (importance=4.43197)
    core.rs [TF=2] (importance=10.50492)
    helpers.rs [TF=2] (importance=7.88719)
  README.md [TF=2] (importance=9.43977)
"
    );
    assert_eq!(text, want);
}

#[test]
fn output_file() {
    let fx = standard_fixture();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = tfscope(&["analyze", "-q", &fx.url(), "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc = ReportDocument::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc.summary.truck_factor, 2);
}

#[test]
fn subtree_truck_factor() {
    let fx = standard_fixture();
    let out = tfscope(&["tf", "-q", &fx.url(), "--path", "."]);
    assert_eq!(
        stdout(&out),
        ".: TF=2\n  1. carol@example.com (Carol)\n  2. alice@example.com (Alice)\n"
    );
    let out = tfscope(&["tf", "-q", &fx.url(), "--path", "src/core.rs"]);
    assert_eq!(
        stdout(&out),
        "src/core.rs: TF=2\n  1. alice@example.com (Alice)\n  2. bob@example.com (Bob)\n"
    );
    let out = tfscope(&["tf", "-q", &fx.url(), "--path", "src/net"]);
    assert!(stdout(&out).starts_with("src/net: TF=1\n"));
    let out = tfscope(&["tf", "-q", &fx.url(), "--path", "src/nope.rs"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("src/nope.rs"));
}

#[test]
fn flags_shape_the_analysis() {
    let fx = standard_fixture();
    let out = tfscope(&["analyze", "-q", &fx.url(), "--threshold", "0.7", "--exclude", "docs/**", "--top-files", "1"]);
    assert!(out.status.success());
    let doc = ReportDocument::from_json(&stdout(&out)).unwrap();
    assert_eq!(doc.config.analysis.threshold.value(), 0.7);
    assert!(doc.files.iter().all(|f| !f.path.starts_with("docs/")));
    assert_eq!(doc.tree.top_files.len(), 1);
    let core = doc.files.iter().find(|f| f.path == "src/core.rs").unwrap();
    assert!(core.entries.iter().all(|e| e.expert));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("analysis.toml");
    std::fs::write(&cfg, "threshold = 0.7\nexclude = [\"*.md\"]\n").unwrap();
    let out = tfscope(&["analyze", "-q", &fx.url(), "--config", cfg.to_str().unwrap()]);
    let doc = ReportDocument::from_json(&stdout(&out)).unwrap();
    assert_eq!(doc.config.analysis.threshold.value(), 0.7);
    assert!(doc.files.iter().all(|f| !f.path.ends_with(".md")));
}

#[test]
fn facts_export() {
    let fx = standard_fixture();
    let out = tfscope(&["facts", "-q", &fx.url()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schemaVersion"], "1");
    assert_eq!(v["facts"].as_array().unwrap().len(), tfscope_testkit::STANDARD_FACTS.len());
    assert_eq!(v["files"].as_array().unwrap().len(), tfscope_testkit::STANDARD_FILES.len());
    assert_eq!(v["developers"][0]["displayName"], "Alice");
    assert_eq!(v["summary"]["commitCount"], 11);
}

#[test]
fn exit_codes() {
    let out = tfscope(&["analyze", "/definitely/not/a/repo"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let fx = standard_fixture();
    for bad in [
        vec!["analyze", "SRC", "--threshold", "1.5"],
        vec!["analyze", "SRC", "--threshold", "0"],
        vec!["analyze", "SRC", "--threshold", "abc"],
        vec!["analyze", "SRC", "--format", "xml"],
        vec!["analyze", "SRC", "--exclude", "a/[b"],
        vec!["analyze", "SRC", "--config", "/no/such/file.toml"],
        vec!["tf", "SRC"],
        vec!["frobnicate"],
    ] {
        let args: Vec<String> = bad.iter().map(|a| a.replace("SRC", &fx.url())).collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = tfscope(&args);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
    let out = tfscope(&["analyze", "-q", &fx.url(), "--branch", "ghost"]);
    assert_eq!(out.status.code(), Some(1));
}
