//! Asynchronous analysis jobs.
//!
//! `start_analysis` persists a job at `Initialized` and pushes its id onto a
//! queue; a fixed pool of worker threads takes ids in submission order and
//! drives each job through the analysis phases, persisting every stage
//! before the phase runs. Each job clones into its own directory under the
//! workdir root, removed once the job ends.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};

use chrono::{Duration, Utc};
use tfscope_core::{analyze, AnalysisConfig, Phase, RepoSource, ReportDocument};
use uuid::Uuid;

use crate::auth::{hash_password, verify_password, Session, Sessions, MIN_PASSWORD_LEN};
use crate::model::{AnalysisJob, JobId, Stage, UserAccount, UserId};
use crate::store::{Store, StoreError};

pub const INTERRUPTED: &str = "interrupted";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{0}")]
    Validation(String),
    #[error("unknown user")]
    UnknownUser,
    #[error("username `{0}` is taken")]
    DuplicateUsername(String),
    #[error("invalid credentials")]
    InvalidCredentials,
    #[error("not found")]
    NotFound,
    #[error("job is {0}, result not available")]
    NotReady(Stage),
    #[error(transparent)]
    Store(StoreError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl From<StoreError> for PipelineError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::DuplicateUsername(u) => PipelineError::DuplicateUsername(u),
            other => PipelineError::Store(other),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub store_dir: PathBuf,
    pub workdir_root: PathBuf,
    /// Concurrent analyses. Zero accepts jobs without ever running them.
    pub workers: usize,
    pub token_ttl: Duration,
    pub analysis: AnalysisConfig,
}

struct Shared {
    store: Store,
    sessions: Sessions,
    workdir_root: PathBuf,
    analysis: AnalysisConfig,
}

/// Cheap to clone; all clones share one store and worker pool.
#[derive(Clone)]
pub struct Pipeline {
    shared: Arc<Shared>,
    /// Workers exit once the last clone drops this sender.
    queue: Arc<Mutex<Sender<JobId>>>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("store", &self.shared.store)
            .finish()
    }
}

impl Pipeline {
    /// Opens the store, fails jobs left mid-run by a previous process and
    /// starts the workers.
    pub fn open(config: PipelineConfig) -> Result<Self, PipelineError> {
        let store = Store::open(&config.store_dir)?;
        recover(&store)?;
        fs::create_dir_all(&config.workdir_root).map_err(|source| PipelineError::Io {
            context: format!("creating {}", config.workdir_root.display()),
            source,
        })?;
        let shared = Arc::new(Shared {
            store,
            sessions: Sessions::new(config.token_ttl),
            workdir_root: config.workdir_root,
            analysis: config.analysis,
        });
        let (tx, rx) = mpsc::channel::<JobId>();
        let rx = Arc::new(Mutex::new(rx));
        for i in 0..config.workers {
            let shared = Arc::clone(&shared);
            let rx = Arc::clone(&rx);
            std::thread::Builder::new()
                .name(format!("analysis-{i}"))
                .spawn(move || worker_loop(&shared, &rx))
                .map_err(|source| PipelineError::Io {
                    context: "spawning worker".into(),
                    source,
                })?;
        }
        sweep_workdirs(&shared.workdir_root);
        Ok(Self {
            shared,
            queue: Arc::new(Mutex::new(tx)),
        })
    }

    pub fn register_user(&self, username: &str, password: &str) -> Result<UserId, PipelineError> {
        let username = username.trim();
        if username.is_empty() {
            return Err(PipelineError::Validation("username is empty".into()));
        }
        if password.chars().count() < MIN_PASSWORD_LEN {
            return Err(PipelineError::Validation(format!(
                "password must have at least {MIN_PASSWORD_LEN} characters"
            )));
        }
        let account = UserAccount {
            user_id: Uuid::new_v4(),
            username: username.to_string(),
            credential_hash: hash_password(password),
            created_at: Utc::now(),
        };
        let id = account.user_id;
        self.shared.store.insert_user(account)?;
        Ok(id)
    }

    pub fn authenticate(&self, username: &str, password: &str) -> Result<Session, PipelineError> {
        let user = self
            .shared
            .store
            .user_by_name(username.trim())
            .ok_or(PipelineError::InvalidCredentials)?;
        if !verify_password(password, &user.credential_hash) {
            return Err(PipelineError::InvalidCredentials);
        }
        Ok(self.shared.sessions.issue(user.user_id))
    }

    pub fn session_user(&self, token: &str) -> Option<UserId> {
        self.shared
            .sessions
            .user(token)
            .filter(|id| self.shared.store.user(id).is_some())
    }

    /// Persists a new job and queues it. Never waits on the analysis.
    pub fn start_analysis(
        &self,
        user: UserId,
        repo_url: &str,
        branch: Option<&str>,
    ) -> Result<JobId, PipelineError> {
        if self.shared.store.user(&user).is_none() {
            return Err(PipelineError::UnknownUser);
        }
        let source = RepoSource::new(repo_url.trim(), branch.map(|b| b.trim().to_string()))
            .map_err(|e| PipelineError::Validation(e.to_string()))?;
        // the queue lock also serializes sequence numbers
        let queue = self.queue.lock().expect("queue lock");
        let job = AnalysisJob::new(user, source.url, source.branch, self.shared.store.next_seq());
        self.shared.store.put_job(&job)?;
        if queue.send(job.job_id).is_err() {
            log::error!("job {} queued with no workers alive", job.job_id);
        }
        Ok(job.job_id)
    }

    /// The user's jobs, newest first.
    pub fn list_jobs(&self, user: UserId) -> Result<Vec<AnalysisJob>, PipelineError> {
        if self.shared.store.user(&user).is_none() {
            return Err(PipelineError::UnknownUser);
        }
        let mut jobs: Vec<AnalysisJob> = self
            .shared
            .store
            .jobs()
            .into_iter()
            .filter(|j| j.user_id == user)
            .collect();
        jobs.sort_by(|a, b| b.started_at.cmp(&a.started_at).then(b.seq.cmp(&a.seq)));
        Ok(jobs)
    }

    pub fn job(&self, id: &JobId) -> Option<AnalysisJob> {
        self.shared.store.job(id)
    }

    /// Serialized report of a finished job. Result ids equal job ids.
    pub fn get_result(&self, id: &JobId) -> Result<String, PipelineError> {
        let job = self.shared.store.job(id).ok_or(PipelineError::NotFound)?;
        if job.stage != Stage::Finished {
            return Err(PipelineError::NotReady(job.stage));
        }
        let result_id = job.result_id.ok_or(PipelineError::NotFound)?;
        self.shared
            .store
            .result(&result_id)?
            .ok_or(PipelineError::NotFound)
    }

    pub fn store(&self) -> &Store {
        &self.shared.store
    }
}

fn recover(store: &Store) -> Result<(), StoreError> {
    for job in store.jobs() {
        if job.stage.is_terminal() {
            continue;
        }
        log::warn!("job {} was left at {}; marking failed", job.job_id, job.stage);
        if let Err(e) = store.update_job(&job.job_id, |j| j.fail(INTERRUPTED))? {
            log::error!("recovering job {}: {e}", job.job_id);
        }
    }
    Ok(())
}

/// Removes job directories left behind by a previous process. Every job is
/// terminal at this point, so none of them is in use.
fn sweep_workdirs(root: &Path) {
    let Ok(entries) = fs::read_dir(root) else {
        return;
    };
    for entry in entries.flatten() {
        let name = entry.file_name();
        if name.to_str().and_then(|n| Uuid::parse_str(n).ok()).is_some() {
            if let Err(e) = fs::remove_dir_all(entry.path()) {
                log::warn!("removing stale {}: {e}", entry.path().display());
            }
        }
    }
}

fn worker_loop(shared: &Shared, rx: &Mutex<Receiver<JobId>>) {
    loop {
        let next = rx.lock().expect("queue lock").recv();
        match next {
            Ok(id) => run_job(shared, id),
            Err(_) => return,
        }
    }
}

fn phase_stage(p: Phase) -> Stage {
    match p {
        Phase::Cloning => Stage::Cloning,
        Phase::ExtractingHistory => Stage::ExtractingHistory,
        Phase::ComputingDoe => Stage::ComputingDoe,
        Phase::ComputingTruckFactor => Stage::ComputingTruckFactor,
    }
}

fn set_stage(store: &Store, id: &JobId, stage: Stage) {
    match store.update_job(id, |j| j.advance(stage)) {
        Ok(Ok(_)) => {}
        Ok(Err(e)) => log::error!("job {id}: {e}"),
        Err(e) => log::error!("job {id}: persisting {stage}: {e}"),
    }
}

fn run_job(shared: &Shared, id: JobId) {
    let Some(job) = shared.store.job(&id) else {
        log::error!("queued job {id} vanished");
        return;
    };
    if job.stage != Stage::Initialized {
        return;
    }
    let workdir = shared.workdir_root.join(id.to_string());
    let outcome = execute(shared, &job, &workdir);
    if let Err(e) = fs::remove_dir_all(&workdir) {
        if e.kind() != std::io::ErrorKind::NotFound {
            log::warn!("job {id}: removing {}: {e}", workdir.display());
        }
    }
    let update = match outcome {
        Ok(()) => shared.store.update_job(&id, |j| j.finish(id)),
        Err(message) => {
            log::info!("job {id} failed: {message}");
            shared.store.update_job(&id, |j| j.fail(message))
        }
    };
    match update {
        Ok(Ok(_)) => {}
        Ok(Err(e)) => log::error!("job {id}: {e}"),
        Err(e) => log::error!("job {id}: {e}"),
    }
}

fn execute(shared: &Shared, job: &AnalysisJob, workdir: &Path) -> Result<(), String> {
    let source = RepoSource::new(job.repo_url.clone(), job.branch.clone()).map_err(|e| e.to_string())?;
    fs::create_dir_all(workdir).map_err(|e| format!("creating work directory: {e}"))?;
    let analysis = analyze(&source, workdir, &shared.analysis, |phase| {
        set_stage(&shared.store, &job.job_id, phase_stage(phase));
    })
    .map_err(|e| e.to_string())?;
    let json = ReportDocument::from_analysis(&analysis)
        .to_json()
        .map_err(|e| format!("serializing report: {e}"))?;
    shared
        .store
        .put_result(&job.job_id, &json)
        .map_err(|e| e.to_string())
}
