//! Directory tree with a truck factor for every node.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::doe::{FileKnowledge, SECONDS_PER_DAY};
use crate::identity::{DeveloperId, IdentityMap};
use crate::miner::ContributionFact;
use crate::truckfactor::{compute_truck_factor, TruckFactorResult};

pub const ACTIVE_WINDOW_DAYS: i64 = 365;
pub const DEFAULT_TOP_FILES: usize = 50;

/// A developer is active when their latest commit falls within the window
/// ending at `reference_ts`, boundary included.
pub fn is_active_at(last_commit_ts: i64, reference_ts: i64) -> bool {
    last_commit_ts >= reference_ts - ACTIVE_WINDOW_DAYS * SECONDS_PER_DAY
}

pub fn is_active(developer: &DeveloperId, facts: &[ContributionFact], reference_ts: i64) -> bool {
    facts
        .iter()
        .filter(|f| &f.developer_id == developer)
        .map(|f| f.last_commit_ts)
        .max()
        .is_some_and(|ts| is_active_at(ts, reference_ts))
}

/// Latest commit and activity flag of every developer with facts.
#[derive(Clone, Debug, Default)]
pub struct Activity {
    last_commit: BTreeMap<DeveloperId, i64>,
    reference_ts: i64,
}

impl Activity {
    pub fn from_facts(facts: &[ContributionFact], reference_ts: i64) -> Self {
        let mut last_commit: BTreeMap<DeveloperId, i64> = BTreeMap::new();
        for f in facts {
            last_commit
                .entry(f.developer_id.clone())
                .and_modify(|t| *t = (*t).max(f.last_commit_ts))
                .or_insert(f.last_commit_ts);
        }
        Self {
            last_commit,
            reference_ts,
        }
    }

    pub fn last_commit(&self, dev: &DeveloperId) -> Option<i64> {
        self.last_commit.get(dev).copied()
    }

    pub fn is_active(&self, dev: &DeveloperId) -> bool {
        self.last_commit(dev)
            .is_some_and(|ts| is_active_at(ts, self.reference_ts))
    }

    pub fn developers(&self) -> impl Iterator<Item = &DeveloperId> {
        self.last_commit.keys()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Directory,
    File,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TfDeveloper {
    pub developer_id: DeveloperId,
    pub name: String,
    pub email: String,
    pub authored_file_count: usize,
    pub authored_files: Vec<String>,
    pub active: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopFile {
    pub path: String,
    pub importance_score: f64,
    pub active_author_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnowledgeNode {
    pub name: String,
    /// Repository-relative path; empty for the root.
    pub path: String,
    pub kind: NodeKind,
    pub children: Vec<KnowledgeNode>,
    pub file_count: usize,
    pub truck_factor: TruckFactorResult,
    pub tf_developers: Vec<TfDeveloper>,
    pub top_files: Vec<TopFile>,
    /// Set on file nodes only.
    pub importance_score: Option<f64>,
}

impl KnowledgeNode {
    /// Looks up a node by repository-relative path; `""`, `"."` and `"/"`
    /// name the root.
    pub fn find(&self, path: &str) -> Option<&KnowledgeNode> {
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
    pub fn walk(&self) -> Vec<&KnowledgeNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }
}

#[derive(Default)]
struct DirBuilder {
    dirs: BTreeMap<String, DirBuilder>,
    files: BTreeMap<String, usize>,
}

struct Builder<'a> {
    files: &'a [FileKnowledge],
    identities: &'a IdentityMap,
    activity: &'a Activity,
    top_files_limit: usize,
}

impl Builder<'_> {
    fn node(&self, name: String, path: String, kind: NodeKind, subtree: &[usize], children: Vec<KnowledgeNode>) -> KnowledgeNode {
        let set: Vec<&FileKnowledge> = subtree.iter().map(|&i| &self.files[i]).collect();
        let truck_factor = compute_truck_factor(&set);
        let tf_developers = self.tf_developers(&truck_factor, &set);
        let (top_files, importance_score) = match kind {
            NodeKind::Directory => (self.top_files(&set), None),
            NodeKind::File => (Vec::new(), Some(set[0].importance_score)),
        };
        KnowledgeNode {
            name,
            path,
            kind,
            children,
            file_count: subtree.len(),
            truck_factor,
            tf_developers,
            top_files,
            importance_score,
        }
    }

    fn tf_developers(&self, tf: &TruckFactorResult, set: &[&FileKnowledge]) -> Vec<TfDeveloper> {
        let mut devs: Vec<TfDeveloper> = tf
            .removed_developers
            .iter()
            .map(|d| {
                let mut authored: Vec<String> = set
                    .iter()
                    .filter(|f| f.experts.contains(d))
                    .map(|f| f.path.clone())
                    .collect();
                authored.sort();
                let ident = self.identities.get(d);
                TfDeveloper {
                    developer_id: d.clone(),
                    name: ident.map(|i| i.display_name.clone()).unwrap_or_default(),
                    email: ident.map(|i| i.email.clone()).unwrap_or_default(),
                    authored_file_count: authored.len(),
                    authored_files: authored,
                    active: self.activity.is_active(d),
                }
            })
            .collect();
        // stable: removal order breaks ties
        devs.sort_by(|a, b| b.authored_file_count.cmp(&a.authored_file_count));
        devs
    }

    fn top_files(&self, set: &[&FileKnowledge]) -> Vec<TopFile> {
        let mut top: Vec<TopFile> = set
            .iter()
            .map(|f| TopFile {
                path: f.path.clone(),
                importance_score: f.importance_score,
                active_author_count: f.experts.iter().filter(|d| self.activity.is_active(d)).count(),
            })
            .collect();
        top.sort_by(|a, b| {
            b.importance_score
                .total_cmp(&a.importance_score)
                .then_with(|| a.path.cmp(&b.path))
        });
        top.truncate(self.top_files_limit);
        top
    }

    fn build_dir(&self, name: String, path: String, dir: &DirBuilder) -> (KnowledgeNode, Vec<usize>) {
        let mut children = Vec::new();
        let mut subtree = Vec::new();
        for (child_name, child) in &dir.dirs {
            let child_path = join(&path, child_name);
            let (node, files) = self.build_dir(child_name.clone(), child_path, child);
            children.push(node);
            subtree.extend(files);
        }
        for (file_name, &idx) in &dir.files {
            let file_path = self.files[idx].path.clone();
            children.push(self.node(file_name.clone(), file_path, NodeKind::File, &[idx], Vec::new()));
            subtree.push(idx);
        }
        let node = self.node(name, path, NodeKind::Directory, &subtree, children);
        (node, subtree)
    }
}

fn join(parent: &str, name: &str) -> String {
    if parent.is_empty() {
        name.to_string()
    } else {
        format!("{parent}/{name}")
    }
}

/// Builds the tree rooted at `root_name`. Children are listed directories
/// first, each group by name.
pub fn build_knowledge_tree(
    root_name: &str,
    files: &[FileKnowledge],
    identities: &IdentityMap,
    activity: &Activity,
    top_files_limit: usize,
) -> KnowledgeNode {
    let mut root = DirBuilder::default();
    for (i, f) in files.iter().enumerate() {
        let mut parts: Vec<&str> = f.path.split('/').collect();
        let file_name = parts.pop().unwrap_or_default();
        let mut dir = &mut root;
        for p in parts {
            dir = dir.dirs.entry(p.to_string()).or_default();
        }
        dir.files.insert(file_name.to_string(), i);
    }
    let builder = Builder {
        files,
        identities,
        activity,
        top_files_limit,
    };
    builder.build_dir(root_name.to_string(), String::new(), &root).0
}

/// Every developer that is expert on at least one file, with their file count.
pub fn expert_file_counts(files: &[FileKnowledge]) -> HashMap<DeveloperId, usize> {
    let mut counts = HashMap::new();
    for f in files {
        for d in &f.experts {
            *counts.entry(d.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Subtree files of `node` as paths.
pub fn subtree_paths(node: &KnowledgeNode) -> BTreeSet<String> {
    node.walk()
        .into_iter()
        .filter(|n| n.kind == NodeKind::File)
        .map(|n| n.path.clone())
        .collect()
}
