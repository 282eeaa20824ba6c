//! Knowledge-concentration analysis of git repositories.
//!
//! The pipeline is: [`miner`] clones a repository and extracts per-developer,
//! per-file history facts; [`doe`] turns those facts into Degree of Expertise
//! scores and expert sets; [`truckfactor`] runs the greedy truck factor
//! estimate; [`tree`] evaluates it for every directory and file; [`report`]
//! projects the result into a stable JSON document.

pub mod analysis;
pub mod doe;
pub mod error;
pub mod identity;
pub mod miner;
pub mod report;
pub mod tree;
pub mod truckfactor;

pub use analysis::{analyze, analyze_checkout, Analysis, AnalysisConfig, Phase};
pub use doe::{DoeCoefficients, ExpertThreshold, FileKnowledge};
pub use error::{AnalysisError, DoeError, MiningError, TruckFactorError};
pub use identity::{DeveloperId, DeveloperIdentity, IdentityMap};
pub use miner::RepoSource;
pub use report::{FactsDocument, ReportDocument};
pub use tree::KnowledgeNode;
