use std::path::PathBuf;

use thiserror::Error;

/// Failures while cloning or walking a repository.
#[derive(Debug, Error)]
pub enum MiningError {
    #[error("repository source URL is empty")]
    EmptyUrl,
    #[error("clone failed: remote `{url}` is unreachable: {reason}")]
    UnreachableRemote { url: String, reason: String },
    #[error("branch `{0}` does not exist in the remote")]
    UnknownBranch(String),
    #[error("clone failed: {0}")]
    CloneFailure(String),
    #[error("repository at {0} is a shallow clone; full history is required")]
    ShallowHistory(PathBuf),
    #[error("repository has no commits")]
    EmptyRepository,
    #[error("corrupt history: {0}")]
    CorruptHistory(#[from] git2::Error),
    #[error("alias file line {line}: {reason}")]
    AliasFile { line: usize, reason: String },
    #[error("invalid exclusion pattern `{pattern}`: {reason}")]
    ExcludePattern { pattern: String, reason: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum DoeError {
    #[error("file size must be at least one line, got {0}")]
    Domain(u64),
    #[error("expert threshold must lie in (0, 1], got {0}")]
    Threshold(f64),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TruckFactorError {
    #[error("no non-removed expert is left")]
    NoExpertsLeft,
}

/// Any failure of a full analysis run.
#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error(transparent)]
    Doe(#[from] DoeError),
    #[error("no analyzable files at the analyzed version")]
    NoFiles,
}
