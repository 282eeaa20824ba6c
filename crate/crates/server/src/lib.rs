//! Analysis job pipeline and its HTTP facade.

pub mod api;
pub mod auth;
pub mod config;
pub mod model;
pub mod pipeline;
pub mod store;

pub use api::router;
pub use config::ServerConfig;
pub use model::{AnalysisJob, JobId, Stage, UserId};
pub use pipeline::{Pipeline, PipelineConfig, PipelineError};
