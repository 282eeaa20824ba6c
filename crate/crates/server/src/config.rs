//! Service configuration: an optional TOML file, then `TFSCOPE_*`
//! environment overrides.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! store_dir = "/var/lib/tfscope"
//! workers = 2
//! token_ttl_secs = 43200
//! cors_origins = ["http://localhost:4200"]
//!
//! [analysis]
//! threshold = 0.75
//! topFilesLimit = 50
//! exclude = ["vendor/**"]
//! ```

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use chrono::Duration;
use serde::Deserialize;
use tfscope_core::{AnalysisConfig, ExpertThreshold};

use crate::pipeline::PipelineConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("environment variable {name}: {reason}")]
    Env { name: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub store_dir: PathBuf,
    /// Defaults to `<store_dir>/work`.
    pub workdir_root: Option<PathBuf>,
    pub workers: usize,
    pub token_ttl_secs: i64,
    pub cors_origins: Vec<String>,
    pub analysis: AnalysisConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: ([127, 0, 0, 1], 8080).into(),
            store_dir: PathBuf::from("tfscope-data"),
            workdir_root: None,
            workers: 2,
            token_ttl_secs: 12 * 3600,
            cors_origins: vec!["http://localhost:4200".into()],
            analysis: AnalysisConfig::default(),
        }
    }
}

fn env_var<T: std::str::FromStr>(
    lookup: &impl Fn(&str) -> Option<String>,
    name: &str,
) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match lookup(name) {
        None => Ok(None),
        Some(raw) => raw.trim().parse().map(Some).map_err(|e: T::Err| ConfigError::Env {
            name: name.to_string(),
            reason: e.to_string(),
        }),
    }
}

impl ServerConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reads `path` if given, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::from_toml(&text, p)?
            }
            None => Self::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = env_var(&lookup, "TFSCOPE_LISTEN")? {
            self.listen = v;
        }
        if let Some(v) = env_var::<PathBuf>(&lookup, "TFSCOPE_STORE_DIR")? {
            self.store_dir = v;
        }
        if let Some(v) = env_var::<PathBuf>(&lookup, "TFSCOPE_WORKDIR_ROOT")? {
            self.workdir_root = Some(v);
        }
        if let Some(v) = env_var(&lookup, "TFSCOPE_WORKERS")? {
            self.workers = v;
        }
        if let Some(v) = env_var(&lookup, "TFSCOPE_TOKEN_TTL_SECS")? {
            self.token_ttl_secs = v;
        }
        if let Some(v) = lookup("TFSCOPE_CORS_ORIGINS") {
            self.cors_origins = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }
        if let Some(v) = env_var::<f64>(&lookup, "TFSCOPE_THRESHOLD")? {
            self.analysis.threshold = ExpertThreshold::new(v).map_err(|e| ConfigError::Env {
                name: "TFSCOPE_THRESHOLD".into(),
                reason: e.to_string(),
            })?;
        }
        if let Some(v) = env_var(&lookup, "TFSCOPE_TOP_FILES")? {
            self.analysis.top_files_limit = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        if self.token_ttl_secs <= 0 {
            return Err(ConfigError::Invalid("token_ttl_secs must be positive".into()));
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            store_dir: self.store_dir.clone(),
            workdir_root: self
                .workdir_root
                .clone()
                .unwrap_or_else(|| self.store_dir.join("work")),
            workers: self.workers,
            token_ttl: Duration::seconds(self.token_ttl_secs),
            analysis: self.analysis.clone(),
        }
    }
}
