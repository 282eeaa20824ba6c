//! Repository mining: clone, enumerate the analyzed files, and extract the
//! per-developer, per-file history facts the expertise model consumes.
//!
//! Everything here is model-agnostic. Output ordering is fixed (files by
//! path, facts by path then developer) so two runs over the same checkout
//! serialize identically.

mod clone;
mod history;
mod snapshot;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use clone::{clone_repository, Checkout, RepoSource};
pub use history::{walk_history, FileHistory, HistoryWalk, RawContribution, RENAME_SIMILARITY};
pub use snapshot::{count_lines, is_binary, scan_head, FileFilter, HeadFile, BINARY_SNIFF_LEN};

use crate::error::MiningError;
use crate::identity::{resolve_identities, AliasRule, DeveloperId, IdentityMap, RawAuthor};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileRecord {
    pub path: String,
    pub loc: u64,
    pub creator_id: DeveloperId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub renamed_from: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContributionFact {
    pub developer_id: DeveloperId,
    pub path: String,
    pub adds: u64,
    pub first_authorship: bool,
    pub last_commit_ts: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RepoSummary {
    pub head_commit: String,
    pub reference_ts: i64,
    pub developer_count: usize,
    pub commit_count: usize,
    pub file_count: usize,
}

#[derive(Clone, Debug, Default)]
pub struct MiningOptions {
    pub filter: FileFilter,
    pub aliases: Vec<AliasRule>,
}

#[derive(Clone, Debug)]
pub struct MiningResult {
    pub identities: IdentityMap,
    pub files: Vec<FileRecord>,
    pub facts: Vec<ContributionFact>,
    pub summary: RepoSummary,
}

/// Raw author signatures of every commit reachable from head, with counts.
pub fn collect_authors(checkout: &Checkout) -> Result<BTreeMap<RawAuthor, usize>, MiningError> {
    let repo = checkout.repo();
    let mut walk = repo.revwalk()?;
    walk.push(checkout.head())?;
    let mut authors = BTreeMap::new();
    for oid in walk {
        let commit = repo.find_commit(oid?)?;
        let sig = commit.author();
        let raw = RawAuthor::new(
            String::from_utf8_lossy(sig.name_bytes()).trim(),
            String::from_utf8_lossy(sig.email_bytes()).trim(),
        );
        *authors.entry(raw).or_insert(0) += 1;
    }
    Ok(authors)
}

fn identity_of(identities: &IdentityMap, raw: &RawAuthor) -> Result<DeveloperId, MiningError> {
    identities
        .resolve(raw)
        .map(|i| i.id.clone())
        .ok_or_else(|| {
            MiningError::CorruptHistory(git2::Error::from_str(&format!(
                "author {} <{}> missing from identity map",
                raw.name, raw.email
            )))
        })
}

fn build_records(
    walk: &HistoryWalk,
    head_files: &[HeadFile],
    identities: &IdentityMap,
) -> Result<Vec<FileRecord>, MiningError> {
    let mut records = Vec::with_capacity(head_files.len());
    for f in head_files {
        let Some(hist) = walk.files.get(&f.path) else {
            log::warn!("{} has no history; skipped", f.path);
            continue;
        };
        records.push(FileRecord {
            path: f.path.clone(),
            loc: f.loc,
            creator_id: identity_of(identities, &hist.creator)?,
            renamed_from: hist.renamed_from.clone(),
        });
    }
    Ok(records)
}

fn build_facts(
    walk: &HistoryWalk,
    records: &[FileRecord],
    identities: &IdentityMap,
) -> Result<Vec<ContributionFact>, MiningError> {
    let mut facts = Vec::new();
    for record in records {
        let hist = &walk.files[&record.path];
        let mut per_dev: BTreeMap<DeveloperId, RawContribution> = BTreeMap::new();
        for (raw, c) in &hist.contributions {
            per_dev
                .entry(identity_of(identities, raw)?)
                .and_modify(|e| {
                    e.adds += c.adds;
                    e.last_ts = e.last_ts.max(c.last_ts);
                })
                .or_insert(*c);
        }
        for (dev, c) in per_dev {
            facts.push(ContributionFact {
                first_authorship: dev == record.creator_id,
                developer_id: dev,
                path: record.path.clone(),
                adds: c.adds,
                // author dates can run ahead of head after rebases
                last_commit_ts: c.last_ts.min(walk.head_ts),
            });
        }
    }
    Ok(facts)
}

/// Files present at the analyzed version, with LOC and resolved creator.
pub fn enumerate_files(
    checkout: &Checkout,
    identities: &IdentityMap,
    filter: &FileFilter,
) -> Result<Vec<FileRecord>, MiningError> {
    let walk = walk_history(checkout)?;
    build_records(&walk, &scan_head(checkout, filter)?, identities)
}

/// One fact per (developer, analyzed file) pair with at least one touching
/// non-merge commit.
pub fn extract_contribution_facts(
    checkout: &Checkout,
    identities: &IdentityMap,
    files: &[FileRecord],
) -> Result<Vec<ContributionFact>, MiningError> {
    let walk = walk_history(checkout)?;
    build_facts(&walk, files, identities)
}

pub fn summarize(
    checkout: &Checkout,
    files: &[FileRecord],
    facts: &[ContributionFact],
) -> Result<RepoSummary, MiningError> {
    let repo = checkout.repo();
    let reference_ts = repo.find_commit(checkout.head())?.author().when().seconds();
    let mut walk = repo.revwalk()?;
    walk.push(checkout.head())?;
    let commit_count = walk.count();
    Ok(summary_from(
        checkout,
        reference_ts,
        commit_count,
        files,
        facts,
    ))
}

fn summary_from(
    checkout: &Checkout,
    reference_ts: i64,
    commit_count: usize,
    files: &[FileRecord],
    facts: &[ContributionFact],
) -> RepoSummary {
    let developers: std::collections::BTreeSet<&DeveloperId> =
        facts.iter().map(|f| &f.developer_id).collect();
    RepoSummary {
        head_commit: checkout.head().to_string(),
        reference_ts,
        developer_count: developers.len(),
        commit_count,
        file_count: files.len(),
    }
}

/// Full mining pass with a single history walk.
pub fn mine(checkout: &Checkout, options: &MiningOptions) -> Result<MiningResult, MiningError> {
    let walk = walk_history(checkout)?;
    let identities = resolve_identities(&walk.authors, &options.aliases);
    let head_files = scan_head(checkout, &options.filter)?;
    let files = build_records(&walk, &head_files, &identities)?;
    let facts = build_facts(&walk, &files, &identities)?;
    let summary = summary_from(checkout, walk.head_ts, walk.commit_count, &files, &facts);
    Ok(MiningResult {
        identities,
        files,
        facts,
        summary,
    })
}
