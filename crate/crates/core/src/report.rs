//! The JSON report document shared by the HTTP service and the CLI.
//!
//! Struct field order fixes key order, and every DOE-derived real is written
//! with exactly five decimals, so equal analyses serialize to equal bytes.

use std::collections::HashMap;
use std::fmt;

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::analysis::{Analysis, AnalysisConfig};
use crate::identity::{DeveloperId, DeveloperIdentity, RawAuthor};
use crate::miner::{ContributionFact, FileRecord, MiningResult, RepoSummary};
use crate::tree::{expert_file_counts, KnowledgeNode, NodeKind, ACTIVE_WINDOW_DAYS};
use crate::truckfactor::TruckFactorResult;

pub const SCHEMA_VERSION: &str = "1";

/// A real rendered with five decimal places.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fixed5(pub f64);

impl fmt::Display for Fixed5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.5}", self.0)
    }
}

impl Serialize for Fixed5 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite value {}", self.0)));
        }
        let raw = RawValue::from_string(self.to_string()).map_err(S::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Fixed5 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(Fixed5)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportDocument {
    pub schema_version: String,
    pub repository: RepositoryBlock,
    pub summary: SummaryBlock,
    pub tree: TreeNode,
    pub developers: Vec<DeveloperRow>,
    pub files: Vec<FileRow>,
    pub config: ConfigBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RepositoryBlock {
    pub name: String,
    pub url: String,
    pub branch: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryBlock {
    pub head_commit: String,
    pub reference_ts: i64,
    pub developers: usize,
    pub commits: usize,
    pub files: usize,
    pub truck_factor: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageRow {
    pub step: usize,
    pub coverage: Fixed5,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TruckFactorBlock {
    pub value: usize,
    pub removed_developers: Vec<DeveloperId>,
    pub coverage_trace: Vec<CoverageRow>,
}

impl From<&TruckFactorResult> for TruckFactorBlock {
    fn from(r: &TruckFactorResult) -> Self {
        Self {
            value: r.value,
            removed_developers: r.removed_developers.clone(),
            coverage_trace: r
                .coverage_trace
                .iter()
                .map(|s| CoverageRow {
                    step: s.step,
                    coverage: Fixed5(s.coverage),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TfDeveloperRow {
    pub developer_id: DeveloperId,
    pub name: String,
    pub email: String,
    pub authored_file_count: usize,
    pub authored_files: Vec<String>,
    pub active: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TopFileRow {
    pub path: String,
    pub importance_score: Fixed5,
    pub active_author_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeNode {
    pub name: String,
    pub path: String,
    pub kind: NodeKind,
    pub file_count: usize,
    pub truck_factor: TruckFactorBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance_score: Option<Fixed5>,
    pub tf_developers: Vec<TfDeveloperRow>,
    pub top_files: Vec<TopFileRow>,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn find(&self, path: &str) -> Option<&TreeNode> {
        let path = path.trim_matches('/');
        if path.is_empty() || path == "." {
            return Some(self);
        }
        let mut node = self;
        for part in path.split('/').filter(|p| !p.is_empty() && *p != ".") {
            node = node.children.iter().find(|c| c.name == part)?;
        }
        Some(node)
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }
}

impl From<&KnowledgeNode> for TreeNode {
    fn from(n: &KnowledgeNode) -> Self {
        Self {
            name: n.name.clone(),
            path: n.path.clone(),
            kind: n.kind,
            file_count: n.file_count,
            truck_factor: (&n.truck_factor).into(),
            importance_score: n.importance_score.map(Fixed5),
            tf_developers: n
                .tf_developers
                .iter()
                .map(|d| TfDeveloperRow {
                    developer_id: d.developer_id.clone(),
                    name: d.name.clone(),
                    email: d.email.clone(),
                    authored_file_count: d.authored_file_count,
                    authored_files: d.authored_files.clone(),
                    active: d.active,
                })
                .collect(),
            top_files: n
                .top_files
                .iter()
                .map(|t| TopFileRow {
                    path: t.path.clone(),
                    importance_score: Fixed5(t.importance_score),
                    active_author_count: t.active_author_count,
                })
                .collect(),
            children: n.children.iter().map(TreeNode::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeveloperRow {
    pub id: DeveloperId,
    pub name: String,
    pub email: String,
    pub aliases: Vec<RawAuthor>,
    pub active: bool,
    pub last_commit_ts: i64,
    pub authored_file_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntryRow {
    pub developer_id: DeveloperId,
    pub adds: u64,
    pub first_authorship: bool,
    pub last_commit_ts: i64,
    pub num_days: u64,
    pub doe: Fixed5,
    pub normalized_doe: Fixed5,
    pub expert: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileRow {
    pub path: String,
    pub loc: u64,
    pub creator_id: DeveloperId,
    pub renamed_from: Vec<String>,
    pub importance_score: Fixed5,
    pub active_author_count: usize,
    pub entries: Vec<EntryRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigBlock {
    #[serde(flatten)]
    pub analysis: AnalysisConfig,
    pub active_window_days: i64,
}

impl ReportDocument {
    pub fn from_analysis(a: &Analysis) -> Self {
        let counts = expert_file_counts(&a.knowledge);
        let developers = a
            .activity
            .developers()
            .map(|id| {
                let ident = a.mining.identities.get(id);
                DeveloperRow {
                    id: id.clone(),
                    name: ident.map(|i| i.display_name.clone()).unwrap_or_default(),
                    email: ident.map(|i| i.email.clone()).unwrap_or_default(),
                    aliases: ident
                        .map(|i| i.aliases.iter().cloned().collect())
                        .unwrap_or_default(),
                    active: a.activity.is_active(id),
                    last_commit_ts: a.activity.last_commit(id).unwrap_or_default(),
                    authored_file_count: counts.get(id).copied().unwrap_or(0),
                }
            })
            .collect();

        let last_ts: HashMap<(&str, &DeveloperId), i64> = a
            .mining
            .facts
            .iter()
            .map(|f| ((f.path.as_str(), &f.developer_id), f.last_commit_ts))
            .collect();
        let files = a
            .mining
            .files
            .iter()
            .zip(&a.knowledge)
            .map(|(record, k)| FileRow {
                path: record.path.clone(),
                loc: record.loc,
                creator_id: record.creator_id.clone(),
                renamed_from: record.renamed_from.clone(),
                importance_score: Fixed5(k.importance_score),
                active_author_count: k.experts.iter().filter(|d| a.activity.is_active(d)).count(),
                entries: k
                    .entries
                    .iter()
                    .map(|e| EntryRow {
                        developer_id: e.developer_id.clone(),
                        adds: e.adds,
                        first_authorship: e.first_authorship,
                        last_commit_ts: last_ts
                            .get(&(record.path.as_str(), &e.developer_id))
                            .copied()
                            .unwrap_or_default(),
                        num_days: e.num_days,
                        doe: Fixed5(e.doe),
                        normalized_doe: Fixed5(e.normalized_doe),
                        expert: k.experts.contains(&e.developer_id),
                    })
                    .collect(),
            })
            .collect();

        let summary = &a.mining.summary;
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            repository: RepositoryBlock {
                name: a.tree.name.clone(),
                url: a.source.url.clone(),
                branch: a.branch.clone(),
            },
            summary: SummaryBlock {
                head_commit: summary.head_commit.clone(),
                reference_ts: summary.reference_ts,
                developers: summary.developer_count,
                commits: summary.commit_count,
                files: summary.file_count,
                truck_factor: a.tree.truck_factor.value,
            },
            tree: (&a.tree).into(),
            developers,
            files,
            config: ConfigBlock {
                analysis: a.config.clone(),
                active_window_days: ACTIVE_WINDOW_DAYS,
            },
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Mining output before any scoring, for offline inspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FactsDocument {
    pub schema_version: String,
    pub repository: RepositoryBlock,
    pub summary: RepoSummary,
    pub developers: Vec<DeveloperIdentity>,
    pub files: Vec<FileRecord>,
    pub facts: Vec<ContributionFact>,
}

impl FactsDocument {
    pub fn new(repository: RepositoryBlock, mining: &MiningResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            repository,
            summary: mining.summary.clone(),
            developers: mining.identities.iter().cloned().collect(),
            files: mining.files.clone(),
            facts: mining.facts.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
