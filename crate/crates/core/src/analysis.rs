use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::doe::{score_files, DoeCoefficients, ExpertThreshold, FileKnowledge};
use crate::error::AnalysisError;
use crate::identity::AliasRule;
use crate::miner::{clone_repository, mine, Checkout, FileFilter, MiningOptions, MiningResult, RepoSource};
use crate::tree::{build_knowledge_tree, Activity, KnowledgeNode, DEFAULT_TOP_FILES};

/// Knobs of one analysis. Snapshotted into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct AnalysisConfig {
    pub threshold: ExpertThreshold,
    pub coefficients: DoeCoefficients,
    pub exclude: Vec<String>,
    pub top_files_limit: usize,
    pub aliases: Vec<AliasRule>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            threshold: ExpertThreshold::DEFAULT,
            coefficients: DoeCoefficients::default(),
            exclude: Vec::new(),
            top_files_limit: DEFAULT_TOP_FILES,
            aliases: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Cloning,
    ExtractingHistory,
    ComputingDoe,
    ComputingTruckFactor,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub source: RepoSource,
    /// Branch actually analyzed.
    pub branch: String,
    pub config: AnalysisConfig,
    pub mining: MiningResult,
    pub knowledge: Vec<FileKnowledge>,
    pub activity: Activity,
    pub tree: KnowledgeNode,
}

/// Clone, mine, score and build the tree. `progress` is called before each
/// phase starts.
pub fn analyze(
    source: &RepoSource,
    workdir: &Path,
    config: &AnalysisConfig,
    mut progress: impl FnMut(Phase),
) -> Result<Analysis, AnalysisError> {
    progress(Phase::Cloning);
    let checkout = clone_repository(source, workdir)?;
    analyze_checkout(source, &checkout, config, progress)
}

/// Same as [`analyze`] over an existing checkout; never reports `Cloning`.
pub fn analyze_checkout(
    source: &RepoSource,
    checkout: &Checkout,
    config: &AnalysisConfig,
    mut progress: impl FnMut(Phase),
) -> Result<Analysis, AnalysisError> {
    progress(Phase::ExtractingHistory);
    let options = MiningOptions {
        filter: FileFilter::new(&config.exclude)?,
        aliases: config.aliases.clone(),
    };
    let mining = mine(checkout, &options)?;
    if mining.files.is_empty() {
        return Err(AnalysisError::NoFiles);
    }
    log::info!(
        "mined {} files, {} facts, {} commits",
        mining.files.len(),
        mining.facts.len(),
        mining.summary.commit_count
    );

    progress(Phase::ComputingDoe);
    let reference_ts = mining.summary.reference_ts;
    let knowledge = score_files(
        &mining.files,
        &mining.facts,
        reference_ts,
        &config.coefficients,
        config.threshold,
    )?;

    progress(Phase::ComputingTruckFactor);
    let activity = Activity::from_facts(&mining.facts, reference_ts);
    let tree = build_knowledge_tree(
        &source.repo_name(),
        &knowledge,
        &mining.identities,
        &activity,
        config.top_files_limit,
    );
    Ok(Analysis {
        source: source.clone(),
        branch: checkout.branch().to_string(),
        config: config.clone(),
        mining,
        knowledge,
        activity,
        tree,
    })
}
