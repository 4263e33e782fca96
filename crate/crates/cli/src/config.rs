//! Pipeline configuration: defaults, optional TOML config file, command-line
//! flags. Flags win over file values, file values win over defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "tracenet",
    version,
    about = "Contact-network analysis pipeline: ingestion, degree tails, structure, clustering, figures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Population counts, component census, isolated vertices.
    Summary(RunArgs),
    /// Degree distributions, power-law fits, Hill scans, joint-degree table.
    Degrees(RunArgs),
    /// Geodesics, articulation points, transitivity, cliques, mixing, lags.
    Structure(RunArgs),
    /// Modularity clustering with null-model significance and figures.
    Communities(RunArgs),
    /// Force-directed vertex layout of the giant component.
    Render(RunArgs),
    /// Every analysis in sequence.
    All(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Summary(a)
            | Command::Degrees(a)
            | Command::Structure(a)
            | Command::Communities(a)
            | Command::Render(a)
            | Command::All(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeSourceArg {
    Declared,
    Observed,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// TOML config file; explicit flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub vertices: Option<PathBuf>,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Output directory for reports, sidecars and figures.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Null-model replicates for significance testing.
    #[arg(long)]
    pub replicates: Option<u32>,
    /// Clustering restarts (best modularity wins).
    #[arg(long)]
    pub restarts: Option<u32>,
    /// Covariates to analyse (repeatable): orientation, detection_mode, region, age.
    #[arg(long = "covariate")]
    pub covariates: Vec<String>,
    /// Also compute naming-oriented geodesics.
    #[arg(long)]
    pub oriented: bool,
    /// Degree source for stratified tail fits.
    #[arg(long, value_enum)]
    pub degree_source: Option<DegreeSourceArg>,
    /// Layout spacing parameter δ.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub layout_iterations: Option<u32>,
}

/// File-level view of the config; every field optional.
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    vertices: Option<PathBuf>,
    edges: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    replicates: Option<u32>,
    restarts: Option<u32>,
    covariates: Option<Vec<String>>,
    oriented: Option<bool>,
    degree_source: Option<DegreeSourceArg>,
    delta: Option<f64>,
    layout_iterations: Option<u32>,
}

/// Fully resolved pipeline configuration; embedded verbatim in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub vertices: PathBuf,
    pub edges: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub replicates: u32,
    pub restarts: u32,
    pub covariates: Vec<String>,
    pub oriented: bool,
    pub degree_source: DegreeSourceArg,
    pub delta: f64,
    pub layout_iterations: u32,
}

pub const KNOWN_COVARIATES: [&str; 4] = ["orientation", "detection_mode", "region", "age"];

impl PipelineConfig {
    /// Resolves defaults ← config file ← flags and validates.
    pub fn resolve(args: &RunArgs) -> Result<PipelineConfig, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Validation(format!("cannot read config {}: {e}", path.display()))
                })?;
                toml::from_str(&text).map_err(|e| {
                    CliError::Validation(format!("bad config {}: {e}", path.display()))
                })?
            }
            None => FileConfig::default(),
        };

        let vertices = args
            .vertices
            .clone()
            .or(file.vertices)
            .ok_or_else(|| CliError::Validation("missing --vertices".into()))?;
        let edges = args
            .edges
            .clone()
            .or(file.edges)
            .ok_or_else(|| CliError::Validation("missing --edges".into()))?;
        let out = args
            .out
            .clone()
            .or(file.out)
            .ok_or_else(|| CliError::Validation("missing --out".into()))?;
        let covariates = if !args.covariates.is_empty() {
            args.covariates.clone()
        } else {
            file.covariates
                .unwrap_or_else(|| KNOWN_COVARIATES.iter().map(|s| s.to_string()).collect())
        };
        for c in &covariates {
            if !KNOWN_COVARIATES.contains(&c.as_str()) {
                return Err(CliError::Validation(format!(
                    "unknown covariate `{c}` (known: {})",
                    KNOWN_COVARIATES.join(", ")
                )));
            }
        }
        let cfg = PipelineConfig {
            vertices,
            edges,
            out,
            seed: args.seed.or(file.seed).unwrap_or(1),
            replicates: args.replicates.or(file.replicates).unwrap_or(100),
            restarts: args.restarts.or(file.restarts).unwrap_or(8),
            covariates,
            oriented: args.oriented || file.oriented.unwrap_or(false),
            degree_source: args
                .degree_source
                .or(file.degree_source)
                .unwrap_or(DegreeSourceArg::Declared),
            delta: args.delta.or(file.delta).unwrap_or(1.0),
            layout_iterations: args.layout_iterations.or(file.layout_iterations).unwrap_or(300),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seed == 0 {
            return Err(CliError::Validation("seed must be positive".into()));
        }
        if self.replicates == 0 {
            return Err(CliError::Validation("replicates must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(CliError::Validation("restarts must be positive".into()));
        }
        if !(self.delta > 0.0) {
            return Err(CliError::Validation("delta must be > 0".into()));
        }
        if self.layout_iterations == 0 {
            return Err(CliError::Validation("layout_iterations must be positive".into()));
        }
        if self.vertices.as_os_str().is_empty()
            || self.edges.as_os_str().is_empty()
            || self.out.as_os_str().is_empty()
        {
            return Err(CliError::Validation("paths must be non-empty".into()));
        }
        Ok(())
    }

    pub fn wants(&self, covariate: &str) -> bool {
        self.covariates.iter().any(|c| c == covariate)
    }

    pub fn as_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_args() -> RunArgs {
        RunArgs {
            vertices: Some(PathBuf::from("v.csv")),
            edges: Some(PathBuf::from("e.csv")),
            out: Some(PathBuf::from("out")),
            ..RunArgs::default()
        }
    }

    #[test]
    fn defaults_are_applied() {
        let cfg = PipelineConfig::resolve(&base_args()).unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.replicates, 100);
        assert_eq!(cfg.restarts, 8);
        assert_eq!(cfg.covariates.len(), 4);
        assert_eq!(cfg.degree_source, DegreeSourceArg::Declared);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(
            &path,
            "seed = 9\nreplicates = 5\nvertices = \"file_v.csv\"\nedges = \"file_e.csv\"\nout = \"file_out\"\n",
        )
        .unwrap();
        let mut args = RunArgs {
            config: Some(path),
            seed: Some(42),
            ..RunArgs::default()
        };
        let cfg = PipelineConfig::resolve(&args).unwrap();
        assert_eq!(cfg.seed, 42); // flag wins
        assert_eq!(cfg.replicates, 5); // file fills the gap
        assert_eq!(cfg.vertices, PathBuf::from("file_v.csv"));

        args.vertices = Some(PathBuf::from("flag_v.csv"));
        let cfg = PipelineConfig::resolve(&args).unwrap();
        assert_eq!(cfg.vertices, PathBuf::from("flag_v.csv"));
    }

    #[test]
    fn zero_replicates_is_a_validation_error() {
        let args = RunArgs {
            replicates: Some(0),
            ..base_args()
        };
        assert!(matches!(
            PipelineConfig::resolve(&args),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn unknown_covariate_is_rejected() {
        let args = RunArgs {
            covariates: vec!["shoe_size".into()],
            ..base_args()
        };
        assert!(matches!(
            PipelineConfig::resolve(&args),
            Err(CliError::Validation(_))
        ));
    }
}
