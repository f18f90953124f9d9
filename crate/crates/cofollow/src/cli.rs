//! Command-line interface.
//!
//! Settings are layered: defaults, then `--config` file (or the
//! configuration recorded in `--manifest`), then the named flags, then
//! `--set key=value` pairs in order.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::pipeline::{config_from_manifest, Pipeline, Step};

#[derive(Debug, Parser)]
#[command(name = "cofollow", version, about = "Co-follower networks of institutions: projection, centrality, communities, regressions and follower topics")]
pub struct Cli {
    #[command(flatten)]
    pub settings: Settings,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Settings {
    /// key = value configuration file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Take the configuration from a run manifest
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "config")]
    pub manifest: Option<PathBuf>,
    /// Override any configuration key
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    pub institutions: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    pub followers: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    pub descriptions: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    pub stopwords: Option<String>,
    /// Per-institution follower list limit
    #[arg(long, global = true)]
    pub truncation: Option<String>,
    /// Institutions a follower must follow to count
    #[arg(long, global = true)]
    pub threshold: Option<String>,
    /// jaccard | max
    #[arg(long, global = true)]
    pub normalization: Option<String>,
    /// inverse | one-minus
    #[arg(long, global = true)]
    pub distance: Option<String>,
    #[arg(long, global = true)]
    pub resolution: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    #[arg(long = "top-fraction", global = true)]
    pub top_fraction: Option<String>,
    #[arg(long = "min-cooccurrence", global = true)]
    pub min_cooccurrence: Option<String>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    pub workers: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Load and validate the institution table
    Ingest,
    /// Project follower lists onto the co-follower graph
    Graph,
    /// Node centralities and their correlations
    Metrics,
    /// Louvain partition and the induced cluster graph
    Communities,
    /// Institution attributes against centralities and counters
    RegressMonadic,
    /// Attribute differences against edge weights
    RegressDyadic,
    /// Attributes against cluster membership
    RegressClusters,
    /// Topics from top-follower descriptions
    Topics,
    /// Cluster graph in DOT format
    ExportDot,
    /// Summary of the run
    Report,
    /// Every stage in order, then the manifest
    Run,
    /// Print the resolved configuration
    ShowConfig,
}

impl Command {
    fn step(self) -> Option<Step> {
        Some(match self {
            Command::Ingest => Step::Ingest,
            Command::Graph => Step::Graph,
            Command::Metrics => Step::Metrics,
            Command::Communities => Step::Communities,
            Command::RegressMonadic => Step::RegressMonadic,
            Command::RegressDyadic => Step::RegressDyadic,
            Command::RegressClusters => Step::RegressClusters,
            Command::Topics => Step::Topics,
            Command::ExportDot => Step::ExportDot,
            Command::Report => Step::Report,
            Command::Run | Command::ShowConfig => return None,
        })
    }
}

impl Settings {
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match (&self.config, &self.manifest) {
            (Some(path), _) => PipelineConfig::load(path)?,
            (None, Some(path)) => config_from_manifest(path)?,
            (None, None) => PipelineConfig::default(),
        };
        let named = [
            ("output", &self.out),
            ("institutions", &self.institutions),
            ("followers", &self.followers),
            ("descriptions", &self.descriptions),
            ("stopwords", &self.stopwords),
            ("truncation", &self.truncation),
            ("threshold", &self.threshold),
            ("normalization", &self.normalization),
            ("distance", &self.distance),
            ("resolution", &self.resolution),
            ("seed", &self.seed),
            ("alpha", &self.alpha),
            ("top_fraction", &self.top_fraction),
            ("min_cooccurrence", &self.min_cooccurrence),
            ("workers", &self.workers),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for pair in &self.set {
            let (k, v) = pair.split_once('=').ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got `{pair}`")))?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = cli.settings.resolve()?;
    match cli.command {
        Command::ShowConfig => {
            print!("{}", cfg.to_text());
            Ok(())
        }
        Command::Run => Pipeline::new(cfg).run(),
        other => Pipeline::new(cfg).step(other.step().expect("stage command")),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind().exit_code()
        }
    }
}
