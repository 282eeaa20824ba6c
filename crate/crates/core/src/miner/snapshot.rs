use globset::{Glob, GlobSet, GlobSetBuilder};
use git2::{FileMode, ObjectType, TreeWalkMode, TreeWalkResult};

use super::Checkout;
use crate::error::MiningError;

/// Bytes inspected by the binary heuristic.
pub const BINARY_SNIFF_LEN: usize = 8000;

/// Decides which paths at the analyzed version take part in the analysis.
#[derive(Clone, Debug)]
pub struct FileFilter {
    patterns: Vec<String>,
    set: GlobSet,
}

impl Default for FileFilter {
    fn default() -> Self {
        Self::new::<&str>(&[]).expect("empty pattern list")
    }
}

impl FileFilter {
    /// Builds a filter from glob patterns; `*` also matches `/`.
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self, MiningError> {
        let mut builder = GlobSetBuilder::new();
        for p in patterns {
            let glob = Glob::new(p.as_ref()).map_err(|e| MiningError::ExcludePattern {
                pattern: p.as_ref().to_string(),
                reason: e.to_string(),
            })?;
            builder.add(glob);
        }
        let set = builder.build().map_err(|e| MiningError::ExcludePattern {
            pattern: String::new(),
            reason: e.to_string(),
        })?;
        Ok(Self {
            patterns: patterns.iter().map(|p| p.as_ref().to_string()).collect(),
            set,
        })
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    pub fn is_excluded(&self, path: &str) -> bool {
        self.set.is_match(path)
    }
}

pub fn is_binary(content: &[u8]) -> bool {
    content[..content.len().min(BINARY_SNIFF_LEN)].contains(&0)
}

/// Newline-terminated lines plus a trailing unterminated one.
pub fn count_lines(content: &[u8]) -> u64 {
    let newlines = content.iter().filter(|&&b| b == b'\n').count() as u64;
    match content.last() {
        Some(b'\n') | None => newlines,
        Some(_) => newlines + 1,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadFile {
    pub path: String,
    pub loc: u64,
}

/// Regular text files of the head tree, sorted by path.
pub fn scan_head(checkout: &Checkout, filter: &FileFilter) -> Result<Vec<HeadFile>, MiningError> {
    let repo = checkout.repo();
    let tree = repo.find_commit(checkout.head())?.tree()?;
    let mut candidates = Vec::new();
    tree.walk(TreeWalkMode::PreOrder, |dir, entry| {
        if entry.kind() != Some(ObjectType::Blob) {
            return TreeWalkResult::Ok;
        }
        let mode = entry.filemode();
        if mode != i32::from(FileMode::Blob) && mode != i32::from(FileMode::BlobExecutable) {
            return TreeWalkResult::Ok;
        }
        match entry.name() {
            Some(name) => candidates.push((format!("{dir}{name}"), entry.id())),
            None => log::warn!("skipping non UTF-8 path under {dir:?}"),
        }
        TreeWalkResult::Ok
    })?;

    let mut files = Vec::new();
    for (path, oid) in candidates {
        if filter.is_excluded(&path) {
            continue;
        }
        let blob = match repo.find_blob(oid) {
            Ok(b) => b,
            Err(e) => {
                log::warn!("skipping unreadable {path}: {e}");
                continue;
            }
        };
        let content = blob.content();
        if content.is_empty() || is_binary(content) {
            continue;
        }
        files.push(HeadFile {
            path,
            loc: count_lines(content),
        });
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}
