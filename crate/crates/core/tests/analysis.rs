use std::collections::BTreeSet;

use tfscope_core::doe::FileKnowledge;
use tfscope_core::report::TreeNode;
use tfscope_core::tree::{subtree_paths, NodeKind};
use tfscope_core::truckfactor::compute_truck_factor;
use tfscope_core::{analyze, Analysis, AnalysisConfig, AnalysisError, ExpertThreshold, Phase, RepoSource, ReportDocument};
use tfscope_testkit::oracle::{STANDARD_ACTIVITY, STANDARD_DOE, STANDARD_FILE_SCORES, STANDARD_TREE_TF};
use tfscope_testkit::{days_before, standard_fixture, workdir, FixtureRepo, ALICE, REFERENCE_TS};

fn run(fixture: &FixtureRepo, config: &AnalysisConfig) -> Analysis {
    let work = workdir();
    let source = RepoSource::new(fixture.url(), Some("main".into())).unwrap();
    analyze(&source, work.path(), config, |_| {}).unwrap()
}

fn ids(v: &[tfscope_core::DeveloperId]) -> Vec<&str> {
    v.iter().map(|d| d.as_str()).collect()
}

#[test]
fn doe_and_experts_match_oracle() {
    let a = run(&standard_fixture(), &AnalysisConfig::default());
    for &(dev, path, doe, norm) in STANDARD_DOE {
        let k = a.knowledge.iter().find(|k| k.path == path).unwrap();
        let e = k.entry(&dev.into()).unwrap_or_else(|| panic!("{dev} on {path}"));
        assert!((e.doe - doe).abs() < 1e-9, "{dev} {path}: {} vs {doe}", e.doe);
        assert!((e.normalized_doe - norm).abs() < 1e-9, "{dev} {path}");
    }
    assert_eq!(a.knowledge.len(), STANDARD_FILE_SCORES.len());
    for (k, &(path, importance, experts)) in a.knowledge.iter().zip(STANDARD_FILE_SCORES) {
        assert_eq!(k.path, path);
        assert!((k.importance_score - importance).abs() < 1e-9, "{path}");
        let got: Vec<&str> = k.experts.iter().map(|d| d.as_str()).collect();
        assert_eq!(got, experts, "{path}");
    }
}

#[test]
fn tree_truck_factors_match_oracle() {
    let a = run(&standard_fixture(), &AnalysisConfig::default());
    let nodes = a.tree.walk();
    assert_eq!(nodes.len(), STANDARD_TREE_TF.len());
    for &(path, value, order) in STANDARD_TREE_TF {
        let n = a.tree.find(path).unwrap_or_else(|| panic!("missing {path}"));
        assert_eq!(n.truck_factor.value, value, "{path}");
        assert_eq!(ids(&n.truck_factor.removed_developers), order, "{path}");
    }
    // the root stops at exactly half coverage
    let trace: Vec<f64> = a.tree.truck_factor.coverage_trace.iter().map(|s| s.coverage).collect();
    assert_eq!(trace, [1.0, 5.0 / 6.0, 0.5]);
}

#[test]
fn every_node_equals_truck_factor_of_its_subtree() {
    let a = run(&standard_fixture(), &AnalysisConfig::default());
    for node in a.tree.walk() {
        let paths = subtree_paths(node);
        let files: Vec<&FileKnowledge> = a.knowledge.iter().filter(|k| paths.contains(&k.path)).collect();
        assert_eq!(files.len(), node.file_count, "{}", node.path);
        assert_eq!(node.truck_factor, compute_truck_factor(&files), "{}", node.path);
        if node.kind == NodeKind::File {
            assert_eq!(node.truck_factor.value, files[0].experts.len(), "{}", node.path);
        }
    }
}

#[test]
fn activity_window() {
    let a = run(&standard_fixture(), &AnalysisConfig::default());
    for &(dev, days, active) in STANDARD_ACTIVITY {
        let id = dev.into();
        assert_eq!(a.activity.last_commit(&id), Some(days_before(days)), "{dev}");
        assert_eq!(a.activity.is_active(&id), active, "{dev}");
    }
}

#[test]
fn tf_developers_and_top_files_of_root() {
    let a = run(&standard_fixture(), &AnalysisConfig::default());
    let root = &a.tree;
    let devs: Vec<(&str, usize, bool)> = root
        .tf_developers
        .iter()
        .map(|d| (d.developer_id.as_str(), d.authored_file_count, d.active))
        .collect();
    assert_eq!(devs, [("carol@example.com", 4, false), ("alice@example.com", 4, true)]);
    assert_eq!(root.tf_developers[0].name, "Carol");
    let top: Vec<(&str, usize)> = root.top_files.iter().map(|t| (t.path.as_str(), t.active_author_count)).collect();
    assert_eq!(
        top,
        [
            ("src/core.rs", 2),
            ("README.md", 2),
            ("src/net/client.rs", 1),
            ("src/helpers.rs", 1),
            ("docs/guide.md", 1),
            ("src/net/proto.rs", 0),
        ]
    );
    let names: Vec<&str> = root.children.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["docs", "src", "README.md"]);
}

#[test]
fn top_files_limit_is_honoured() {
    let config = AnalysisConfig { top_files_limit: 2, ..Default::default() };
    let a = run(&standard_fixture(), &config);
    assert_eq!(a.tree.top_files.len(), 2);
    assert!(a.tree.find("src/core.rs").unwrap().top_files.is_empty());
}

#[test]
fn threshold_changes_expert_sets() {
    let config = AnalysisConfig {
        threshold: ExpertThreshold::new(0.7).unwrap(),
        ..Default::default()
    };
    let a = run(&standard_fixture(), &config);
    let core = a.knowledge.iter().find(|k| k.path == "src/core.rs").unwrap();
    assert_eq!(core.experts.len(), 3);
    let strict = AnalysisConfig {
        threshold: ExpertThreshold::new(1.0).unwrap(),
        ..Default::default()
    };
    let a = run(&standard_fixture(), &strict);
    assert!(a.knowledge.iter().all(|k| k.experts.len() == 1));
}

#[test]
fn phases_are_reported_in_order() {
    let fx = standard_fixture();
    let work = workdir();
    let source = RepoSource::new(fx.url(), None).unwrap();
    let mut seen = Vec::new();
    analyze(&source, work.path(), &AnalysisConfig::default(), |p| seen.push(p)).unwrap();
    assert_eq!(
        seen,
        [Phase::Cloning, Phase::ExtractingHistory, Phase::ComputingDoe, Phase::ComputingTruckFactor]
    );
}

#[test]
fn repository_without_text_files() {
    let fx = FixtureRepo::init("main");
    fx.write("blob.bin", tfscope_testkit::png_bytes());
    fx.commit(ALICE, days_before(1), "binary only");
    let work = workdir();
    let source = RepoSource::new(fx.url(), None).unwrap();
    let err = analyze(&source, work.path(), &AnalysisConfig::default(), |_| {}).unwrap_err();
    assert!(matches!(err, AnalysisError::NoFiles));
}

#[test]
fn reports_are_byte_identical() {
    let fx = standard_fixture();
    let a = ReportDocument::from_analysis(&run(&fx, &AnalysisConfig::default())).to_json().unwrap();
    let b = ReportDocument::from_analysis(&run(&fx, &AnalysisConfig::default())).to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn report_contents() {
    let fx = standard_fixture();
    let doc = ReportDocument::from_analysis(&run(&fx, &AnalysisConfig::default()));
    assert_eq!(doc.schema_version, "1");
    assert_eq!(doc.repository.branch, "main");
    assert_eq!(doc.repository.url, fx.url());
    assert_eq!(doc.summary.reference_ts, REFERENCE_TS);
    assert_eq!(doc.summary.truck_factor, 2);
    assert_eq!((doc.summary.developers, doc.summary.commits, doc.summary.files), (3, 11, 6));

    let devs: Vec<(&str, bool, usize)> = doc
        .developers
        .iter()
        .map(|d| (d.id.as_str(), d.active, d.authored_file_count))
        .collect();
    assert_eq!(
        devs,
        [("alice@example.com", true, 4), ("bob@example.com", true, 3), ("carol@example.com", false, 4)]
    );

    let core = doc.files.iter().find(|f| f.path == "src/core.rs").unwrap();
    let carol = core.entries.iter().find(|e| e.developer_id.as_str() == "carol@example.com").unwrap();
    assert!(!carol.expert);
    assert_eq!(carol.num_days, 900);
    assert_eq!(carol.last_commit_ts, days_before(900));

    let json = doc.to_json().unwrap();
    assert!(json.contains("\"importanceScore\": 10.50492"));
    assert!(json.contains("\"doe\": 2.82450"));
    let back = ReportDocument::from_json(&json).unwrap();
    assert_eq!(back.to_json().unwrap(), json);
}

fn all_paths(node: &TreeNode) -> BTreeSet<&str> {
    node.walk().into_iter().map(|n| n.path.as_str()).collect()
}

#[test]
fn report_tree_mirrors_knowledge_tree() {
    let a = run(&standard_fixture(), &AnalysisConfig::default());
    let doc = ReportDocument::from_analysis(&a);
    let want: BTreeSet<&str> = a.tree.walk().into_iter().map(|n| n.path.as_str()).collect();
    assert_eq!(all_paths(&doc.tree), want);
    for n in doc.tree.walk() {
        let k = a.tree.find(&n.path).unwrap();
        assert_eq!(n.truck_factor.value, k.truck_factor.value);
        assert_eq!(n.kind == NodeKind::File, n.importance_score.is_some());
    }
}
