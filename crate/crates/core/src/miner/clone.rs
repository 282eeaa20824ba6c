use std::fs;
use std::path::{Path, PathBuf};

use git2::build::{CheckoutBuilder, RepoBuilder};
use git2::{ErrorClass, ErrorCode, Oid, Repository};
use serde::{Deserialize, Serialize};

use crate::error::MiningError;

/// Where to fetch a repository from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoSource {
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
}

impl RepoSource {
    pub fn new(url: impl Into<String>, branch: Option<String>) -> Result<Self, MiningError> {
        let url = url.into();
        if url.trim().is_empty() {
            return Err(MiningError::EmptyUrl);
        }
        let branch = branch.filter(|b| !b.trim().is_empty());
        Ok(Self { url, branch })
    }

    /// Last path segment of the URL without a `.git` suffix.
    pub fn repo_name(&self) -> String {
        let trimmed = self.url.trim_end_matches(['/', '\\']);
        let last = trimmed
            .rsplit(['/', '\\', ':'])
            .next()
            .unwrap_or(trimmed);
        let name = last.strip_suffix(".git").unwrap_or(last);
        if name.is_empty() {
            "repository".to_string()
        } else {
            name.to_string()
        }
    }

    fn is_remote(&self) -> bool {
        self.url.contains("://") || is_scp_like(&self.url)
    }
}

fn is_scp_like(url: &str) -> bool {
    // user@host:path
    match (url.find('@'), url.find(':')) {
        (Some(at), Some(colon)) => at < colon && !url[..colon].contains('/'),
        _ => false,
    }
}

/// A full, non-shallow local repository positioned at the analyzed branch tip.
pub struct Checkout {
    repo: Repository,
    root: PathBuf,
    head: Oid,
    branch: String,
}

impl std::fmt::Debug for Checkout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Checkout")
            .field("root", &self.root)
            .field("head", &self.head)
            .field("branch", &self.branch)
            .finish()
    }
}

impl Checkout {
    /// Opens an existing repository at its current HEAD.
    pub fn open(path: &Path) -> Result<Self, MiningError> {
        let repo = Repository::open(path).map_err(|e| MiningError::CloneFailure(e.to_string()))?;
        Self::from_repo(repo)
    }

    fn from_repo(repo: Repository) -> Result<Self, MiningError> {
        let root = repo
            .workdir()
            .unwrap_or_else(|| repo.path())
            .to_path_buf();
        if repo.is_shallow() {
            return Err(MiningError::ShallowHistory(root));
        }
        let head_ref = match repo.head() {
            Ok(h) => h,
            Err(e) if e.code() == ErrorCode::UnbornBranch || e.code() == ErrorCode::NotFound => {
                return Err(MiningError::EmptyRepository)
            }
            Err(e) => return Err(e.into()),
        };
        let head = head_ref.peel_to_commit()?.id();
        let branch = head_ref.shorthand().unwrap_or("HEAD").to_string();
        drop(head_ref);
        Ok(Self {
            repo,
            root,
            head,
            branch,
        })
    }

    pub fn repo(&self) -> &Repository {
        &self.repo
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn head(&self) -> Oid {
        self.head
    }

    /// Branch name the checkout is positioned on.
    pub fn branch(&self) -> &str {
        &self.branch
    }
}

fn classify_clone_error(url: &str, e: git2::Error) -> MiningError {
    match e.class() {
        ErrorClass::Net | ErrorClass::Http | ErrorClass::Ssh | ErrorClass::Ssl => {
            MiningError::UnreachableRemote {
                url: url.to_string(),
                reason: e.message().to_string(),
            }
        }
        _ if matches!(e.code(), ErrorCode::NotFound | ErrorCode::Auth | ErrorCode::Certificate) => {
            MiningError::UnreachableRemote {
                url: url.to_string(),
                reason: e.message().to_string(),
            }
        }
        _ => MiningError::CloneFailure(e.message().to_string()),
    }
}

/// Clones `source` into `workdir/checkout` and checks out the requested
/// branch, or the remote's default branch when none is given.
pub fn clone_repository(source: &RepoSource, workdir: &Path) -> Result<Checkout, MiningError> {
    if !source.is_remote() && !Path::new(&source.url).exists() {
        return Err(MiningError::UnreachableRemote {
            url: source.url.clone(),
            reason: "no such local path".into(),
        });
    }
    fs::create_dir_all(workdir).map_err(|e| MiningError::CloneFailure(e.to_string()))?;
    let target = workdir.join("checkout");
    if target.exists() {
        fs::remove_dir_all(&target).map_err(|e| MiningError::CloneFailure(e.to_string()))?;
    }

    log::info!("cloning {} into {}", source.url, target.display());
    let repo = RepoBuilder::new()
        .clone(&source.url, &target)
        .map_err(|e| classify_clone_error(&source.url, e))?;

    if let Some(branch) = &source.branch {
        let remote_ref = format!("refs/remotes/origin/{branch}");
        let commit = match repo.find_reference(&remote_ref) {
            Ok(r) => r.peel_to_commit()?,
            Err(e) if e.code() == ErrorCode::NotFound => {
                return Err(MiningError::UnknownBranch(branch.clone()))
            }
            Err(e) => return Err(e.into()),
        };
        let local_ref = format!("refs/heads/{branch}");
        if repo.find_reference(&local_ref).is_err() {
            let mut local = repo.branch(branch, &commit, false)?;
            local.set_upstream(Some(&format!("origin/{branch}")))?;
        }
        repo.set_head(&local_ref)?;
        repo.checkout_head(Some(CheckoutBuilder::new().force()))?;
    }
    Checkout::from_repo(repo)
}
