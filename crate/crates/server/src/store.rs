//! Durable state: one JSON document per record under three directories.
//!
//! ```text
//! <root>/users/<userId>.json
//! <root>/jobs/<jobId>.json
//! <root>/results/<resultId>.json
//! ```
//!
//! Writes go to a temporary file in the target directory and are renamed into
//! place, so a crash leaves either the old or the new document. Users and
//! jobs are indexed in memory; results are read from disk on demand.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::de::DeserializeOwned;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::model::{AnalysisJob, JobId, UserAccount, UserId};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt record {path}: {source}")]
    Corrupt {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("username `{0}` is taken")]
    DuplicateUsername(String),
    #[error("result {0} already exists")]
    ResultExists(JobId),
    #[error("unknown job {0}")]
    UnknownJob(JobId),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

const USERS: &str = "users";
const JOBS: &str = "jobs";
const RESULTS: &str = "results";

pub struct Store {
    root: PathBuf,
    users: RwLock<HashMap<UserId, UserAccount>>,
    jobs: RwLock<HashMap<JobId, AnalysisJob>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("root", &self.root).finish()
    }
}

impl Store {
    /// Opens (creating if needed) the store rooted at `root` and loads the
    /// user and job indexes.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for dir in [USERS, JOBS, RESULTS] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(io_err(&p))?;
        }
        let users = load_all::<UserAccount>(&root.join(USERS))?
            .into_iter()
            .map(|u| (u.user_id, u))
            .collect();
        let jobs = load_all::<AnalysisJob>(&root.join(JOBS))?
            .into_iter()
            .map(|j| (j.job_id, j))
            .collect();
        Ok(Self {
            root,
            users: RwLock::new(users),
            jobs: RwLock::new(jobs),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn record_path(&self, space: &str, id: &uuid::Uuid) -> PathBuf {
        self.root.join(space).join(format!("{id}.json"))
    }

    pub fn insert_user(&self, user: UserAccount) -> Result<(), StoreError> {
        let mut users = self.users.write().expect("users lock");
        if users.values().any(|u| u.username == user.username) {
            return Err(StoreError::DuplicateUsername(user.username));
        }
        write_json(&self.record_path(USERS, &user.user_id), &user)?;
        users.insert(user.user_id, user);
        Ok(())
    }

    pub fn user(&self, id: &UserId) -> Option<UserAccount> {
        self.users.read().expect("users lock").get(id).cloned()
    }

    pub fn user_by_name(&self, username: &str) -> Option<UserAccount> {
        self.users
            .read()
            .expect("users lock")
            .values()
            .find(|u| u.username == username)
            .cloned()
    }

    /// Inserts or replaces a job record.
    pub fn put_job(&self, job: &AnalysisJob) -> Result<(), StoreError> {
        let mut jobs = self.jobs.write().expect("jobs lock");
        write_json(&self.record_path(JOBS, &job.job_id), job)?;
        jobs.insert(job.job_id, job.clone());
        Ok(())
    }

    /// Applies `f` to the stored job and persists the result. The record is
    /// left untouched when `f` fails.
    pub fn update_job<E>(
        &self,
        id: &JobId,
        f: impl FnOnce(&mut AnalysisJob) -> Result<(), E>,
    ) -> Result<Result<AnalysisJob, E>, StoreError> {
        let mut jobs = self.jobs.write().expect("jobs lock");
        let current = jobs.get(id).ok_or(StoreError::UnknownJob(*id))?;
        let mut next = current.clone();
        if let Err(e) = f(&mut next) {
            return Ok(Err(e));
        }
        write_json(&self.record_path(JOBS, id), &next)?;
        jobs.insert(*id, next.clone());
        Ok(Ok(next))
    }

    pub fn job(&self, id: &JobId) -> Option<AnalysisJob> {
        self.jobs.read().expect("jobs lock").get(id).cloned()
    }

    pub fn jobs(&self) -> Vec<AnalysisJob> {
        self.jobs.read().expect("jobs lock").values().cloned().collect()
    }

    pub fn next_seq(&self) -> u64 {
        self.jobs
            .read()
            .expect("jobs lock")
            .values()
            .map(|j| j.seq + 1)
            .max()
            .unwrap_or(0)
    }

    /// Stores a finished result document. Results are write-once.
    pub fn put_result(&self, id: &JobId, document: &str) -> Result<(), StoreError> {
        let path = self.record_path(RESULTS, id);
        let dir = path.parent().expect("results dir");
        let mut tmp = NamedTempFile::new_in(dir).map_err(io_err(dir))?;
        tmp.write_all(document.as_bytes()).map_err(io_err(&path))?;
        tmp.as_file().sync_all().map_err(io_err(&path))?;
        tmp.persist_noclobber(&path).map_err(|e| {
            if e.error.kind() == io::ErrorKind::AlreadyExists {
                StoreError::ResultExists(*id)
            } else {
                StoreError::Io {
                    path: path.clone(),
                    source: e.error,
                }
            }
        })?;
        Ok(())
    }

    pub fn result(&self, id: &JobId) -> Result<Option<String>, StoreError> {
        let path = self.record_path(RESULTS, id);
        match fs::read_to_string(&path) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(&path)(e)),
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let dir = path.parent().expect("record has a parent directory");
    let bytes = serde_json::to_vec_pretty(value).expect("records serialize");
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(&bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

fn load_all<T: DeserializeOwned>(dir: &Path) -> Result<Vec<T>, StoreError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let value = serde_json::from_slice(&bytes).map_err(|source| StoreError::Corrupt {
            path: path.clone(),
            source,
        })?;
        out.push(value);
    }
    Ok(out)
}
