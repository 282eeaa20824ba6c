use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

pub type UserId = Uuid;
pub type JobId = Uuid;

/// Processing stages of an analysis job, in the only order they may occur.
/// `Failed` may follow any non-terminal stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    Initialized,
    Cloning,
    ExtractingHistory,
    ComputingDoe,
    ComputingTruckFactor,
    Finished,
    Failed,
}

impl Stage {
    pub fn is_terminal(self) -> bool {
        matches!(self, Stage::Finished | Stage::Failed)
    }

    pub fn label(self) -> &'static str {
        match self {
            Stage::Initialized => "Initialized",
            Stage::Cloning => "Cloning",
            Stage::ExtractingHistory => "ExtractingHistory",
            Stage::ComputingDoe => "ComputingDoe",
            Stage::ComputingTruckFactor => "ComputingTruckFactor",
            Stage::Finished => "Finished",
            Stage::Failed => "Failed",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UserAccount {
    pub user_id: UserId,
    pub username: String,
    pub credential_hash: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageChange {
    pub stage: Stage,
    pub at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisJob {
    pub job_id: JobId,
    pub user_id: UserId,
    pub repo_url: String,
    pub branch: Option<String>,
    pub stage: Stage,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
    pub error: Option<String>,
    pub result_id: Option<JobId>,
    pub stage_history: Vec<StageChange>,
    /// Submission counter; orders jobs that share a start instant.
    pub seq: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("illegal stage change {from} -> {to}")]
pub struct StageError {
    pub from: Stage,
    pub to: Stage,
}

impl AnalysisJob {
    pub fn new(user_id: UserId, repo_url: String, branch: Option<String>, seq: u64) -> Self {
        let now = Utc::now();
        Self {
            job_id: Uuid::new_v4(),
            user_id,
            repo_url,
            branch,
            stage: Stage::Initialized,
            started_at: now,
            finished_at: None,
            error: None,
            result_id: None,
            stage_history: vec![StageChange {
                stage: Stage::Initialized,
                at: now,
            }],
            seq,
        }
    }

    /// Moves to `stage`, which must lie strictly after the current stage.
    pub fn advance(&mut self, stage: Stage) -> Result<(), StageError> {
        if self.stage.is_terminal() || stage <= self.stage {
            return Err(StageError {
                from: self.stage,
                to: stage,
            });
        }
        let now = Utc::now().max(self.started_at);
        self.stage = stage;
        self.stage_history.push(StageChange { stage, at: now });
        if stage.is_terminal() {
            self.finished_at = Some(now);
        }
        Ok(())
    }

    pub fn finish(&mut self, result_id: JobId) -> Result<(), StageError> {
        self.advance(Stage::Finished)?;
        self.result_id = Some(result_id);
        Ok(())
    }

    pub fn fail(&mut self, message: impl Into<String>) -> Result<(), StageError> {
        self.advance(Stage::Failed)?;
        self.error = Some(message.into());
        Ok(())
    }
}
