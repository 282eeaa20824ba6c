use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tfscope_core::identity::parse_alias_rules;
use tfscope_core::miner::{clone_repository, mine, FileFilter, MiningOptions};
use tfscope_core::report::RepositoryBlock;
use tfscope_core::tree::NodeKind;
use tfscope_core::{
    analyze, Analysis, AnalysisConfig, ExpertThreshold, FactsDocument, KnowledgeNode, Phase,
    RepoSource, ReportDocument,
};

/// Where knowledge of a git repository is concentrated, per file and folder.
#[derive(Parser, Debug)]
#[command(name = "tfscope", version)]
struct Cli {
    /// No progress messages on standard error.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze a repository and print its report or knowledge tree.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write to this file instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the truck factor of one file or directory.
    Tf {
        #[command(flatten)]
        common: Common,
        /// Repository-relative path; `.` is the root.
        #[arg(long)]
        path: String,
    },
    /// Export the mined history facts without scoring them.
    Facts {
        #[command(flatten)]
        common: Common,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Clone URL or path of a local repository.
    source: String,
    /// Branch to analyze; defaults to the remote's default branch.
    #[arg(short, long)]
    branch: Option<String>,
    /// Normalized DOE cutoff for expertise, in (0, 1].
    #[arg(long, value_parser = parse_threshold)]
    threshold: Option<ExpertThreshold>,
    /// Glob of paths to leave out; repeatable.
    #[arg(long = "exclude", value_name = "GLOB")]
    exclude: Vec<String>,
    /// Entries per directory in the top-files list.
    #[arg(long)]
    top_files: Option<usize>,
    /// Alias file with `canonical_email <- alias_email` lines.
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// TOML analysis configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tree,
}

fn parse_threshold(s: &str) -> Result<ExpertThreshold, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    ExpertThreshold::new(v).map_err(|e| e.to_string())
}

/// Failure with its exit code.
struct Failure(u8, String);

impl Failure {
    fn usage(msg: impl ToString) -> Self {
        Failure(2, msg.to_string())
    }

    fn run(msg: impl ToString) -> Self {
        Failure(1, msg.to_string())
    }
}

fn phase_label(p: Phase) -> &'static str {
    match p {
        Phase::Cloning => "cloning",
        Phase::ExtractingHistory => "extracting history",
        Phase::ComputingDoe => "computing DOE",
        Phase::ComputingTruckFactor => "computing truck factors",
    }
}

impl Common {
    fn source(&self) -> Result<RepoSource, Failure> {
        RepoSource::new(self.source.clone(), self.branch.clone()).map_err(Failure::usage)
    }

    fn config(&self) -> Result<AnalysisConfig, Failure> {
        let mut config = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
            }
            None => AnalysisConfig::default(),
        };
        if let Some(t) = self.threshold {
            config.threshold = t;
        }
        if !self.exclude.is_empty() {
            config.exclude = self.exclude.clone();
        }
        if let Some(n) = self.top_files {
            config.top_files_limit = n;
        }
        if let Some(p) = &self.aliases {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
            config.aliases = parse_alias_rules(&text).map_err(Failure::usage)?;
        }
        FileFilter::new(&config.exclude).map_err(Failure::usage)?;
        Ok(config)
    }
}

fn workdir() -> Result<tempfile::TempDir, Failure> {
    tempfile::Builder::new()
        .prefix("tfscope-")
        .tempdir()
        .map_err(|e| Failure::run(format!("creating work directory: {e}")))
}

fn run_analysis(common: &Common, quiet: bool) -> Result<Analysis, Failure> {
    let source = common.source()?;
    let config = common.config()?;
    let work = workdir()?;
    analyze(&source, work.path(), &config, |p| {
        if !quiet {
            eprintln!("tfscope: {}", phase_label(p));
        }
    })
    .map_err(Failure::run)
}

/// One line per node, children indented by two spaces.
fn render_tree(root: &KnowledgeNode) -> String {
    let mut out = String::new();
    let mut stack = vec![(root, 0usize)];
    while let Some((node, depth)) = stack.pop() {
        let _ = write!(out, "{:indent$}{} [TF={}]", "", node.name, node.truck_factor.value, indent = depth * 2);
        if node.kind == NodeKind::File {
            if let Some(score) = node.importance_score {
                let _ = write!(out, " (importance={score:.5})");
            }
        }
        out.push('\n');
        stack.extend(node.children.iter().rev().map(|c| (c, depth + 1)));
    }
    out
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::run(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { common, format, output } => {
            let analysis = run_analysis(&common, cli.quiet)?;
            let text = match format {
                Format::Json => ReportDocument::from_analysis(&analysis)
                    .to_json()
                    .map_err(Failure::run)?,
                Format::Tree => render_tree(&analysis.tree),
            };
            emit(&text, output.as_deref())
        }
        Command::Tf { common, path } => {
            let analysis = run_analysis(&common, cli.quiet)?;
            let node = analysis
                .tree
                .find(&path)
                .ok_or_else(|| Failure::run(format!("no file or directory `{path}` in the analyzed tree")))?;
            let mut out = format!("{path}: TF={}\n", node.truck_factor.value);
            for (i, dev) in node.truck_factor.removed_developers.iter().enumerate() {
                let name = analysis
                    .mining
                    .identities
                    .get(dev)
                    .map(|d| d.display_name.as_str())
                    .unwrap_or("");
                let _ = writeln!(out, "  {}. {dev} ({name})", i + 1);
            }
            emit(&out, None)
        }
        Command::Facts { common, output } => {
            let source = common.source()?;
            let config = common.config()?;
            let work = workdir()?;
            if !cli.quiet {
                eprintln!("tfscope: {}", phase_label(Phase::Cloning));
            }
            let checkout = clone_repository(&source, work.path()).map_err(Failure::run)?;
            if !cli.quiet {
                eprintln!("tfscope: {}", phase_label(Phase::ExtractingHistory));
            }
            let options = MiningOptions {
                filter: FileFilter::new(&config.exclude).map_err(Failure::usage)?,
                aliases: config.aliases.clone(),
            };
            let mining = mine(&checkout, &options).map_err(Failure::run)?;
            let repository = RepositoryBlock {
                name: source.repo_name(),
                url: source.url.clone(),
                branch: checkout.branch().to_string(),
            };
            let text = FactsDocument::new(repository, &mining).to_json().map_err(Failure::run)?;
            emit(&text, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("tfscope: error: {msg}");
            ExitCode::from(code)
        }
    }
}
