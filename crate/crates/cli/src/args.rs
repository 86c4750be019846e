use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use newstag::corpus::SyntheticParams;
use newstag::harness::{ClosureMode, ExperimentConfig};
use newstag::{Method, PropagationConfig, PropagationMode};

#[derive(Debug, Parser)]
#[command(name = "newstag", version, about = "Hashtag-graph credibility propagation for news classification")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Parse a corpus and report its statistics.
    Validate(ValidateArgs),
    /// Generate a synthetic labeled corpus.
    Synth(SynthArgs),
    /// Build and save the relation matrix of a corpus.
    BuildGraph(BuildGraphArgs),
    /// Run repeated train/test experiments.
    Run(RunArgs),
    /// Grid-search the regularization weight.
    GridMu(GridArgs),
    /// Sweep the training fraction.
    SweepVolume(SweepVolumeArgs),
    /// Sweep the detection time horizon.
    SweepTime(SweepTimeArgs),
    /// Run every method variant with the same settings.
    Ablate(RunArgs),
    /// Descriptive analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Export the hashtag graph with node credibility.
    Export(ExportArgs),
    /// Re-run the invocation recorded in a config echo file.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "analysis", content = "params", rename_all = "kebab-case")]
pub enum AnalyzeCommand {
    /// Per-news share of class-exclusive hashtags.
    Purity(PurityArgs),
    /// Cumulative post counts per class at time checkpoints.
    Popularity(PopularityArgs),
    /// Credibility of selected hashtags.
    CaseStudy(CaseStudyArgs),
    /// Residual series of the closure and propagation loops.
    Convergence(ConvergenceArgs),
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct InputArgs {
    /// Corpus in JSON Lines format.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct OutArgs {
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Iterative,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureArg {
    Truncated,
    Tolerance,
    Exact,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: newstag::Error| e.to_string())
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct GraphArgs {
    /// newstag, newstag_no_indirect or newstag_unweighted.
    #[arg(long, default_value = "newstag", value_parser = parse_method)]
    pub method: Method,
    /// Number of closure terms (upper bound in tolerance mode).
    #[arg(long, default_value_t = 10)]
    pub k1: usize,
    #[arg(long, value_enum, default_value_t = ClosureArg::Truncated)]
    pub closure: ClosureArg,
    /// Relative change threshold for `--closure tolerance`.
    #[arg(long, default_value_t = 1e-9)]
    pub closure_tol: f64,
    /// Prune closure entries below this value.
    #[arg(long, default_value_t = 0.0)]
    pub drop_tol: f64,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 0.4)]
    pub mu: f64,
    /// Fixed number of propagation steps; overrides --max-iter and --tol.
    #[arg(long)]
    pub k2: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Stop once the max-norm change falls below this.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Iterative)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Keep only posts within this many hours of publication.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
}

impl GraphArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        cfg.method = self.method;
        cfg.k1 = self.k1;
        cfg.closure = match self.closure {
            ClosureArg::Truncated => ClosureMode::Truncated,
            ClosureArg::Tolerance => ClosureMode::Tolerance(self.closure_tol),
            ClosureArg::Exact => ClosureMode::Exact,
        };
        cfg.drop_tolerance = self.drop_tol;
    }
}

impl ExperimentArgs {
    pub fn config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        self.graph.apply(&mut cfg);
        let (max_iterations, tolerance) = match self.k2 {
            Some(k2) => (k2, 0.0),
            None => (self.max_iter, self.tol),
        };
        cfg.propagation = PropagationConfig {
            mu: self.mu,
            max_iterations,
            tolerance,
            mode: match self.mode {
                ModeArg::Iterative => PropagationMode::Iterative,
                ModeArg::ClosedForm => PropagationMode::ClosedForm,
            },
            ..PropagationConfig::default()
        };
        cfg.train_fraction = self.train_fraction;
        cfg.time_horizon_hours = self.horizon;
        cfg.seed = self.seed;
        cfg.repetitions = self.repetitions;
        cfg
    }
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Also write the report as JSON.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub hashtags: Option<usize>,
    #[arg(long)]
    pub news: Option<usize>,
    #[arg(long)]
    pub fake_ratio: Option<f64>,
    #[arg(long)]
    pub purity: Option<f64>,
    #[arg(long)]
    pub chain_depth: Option<usize>,
    #[arg(long)]
    pub chain_news: Option<usize>,
    /// Any generator parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

impl SynthArgs {
    pub fn params(&self) -> newstag::Result<SyntheticParams> {
        let mut p = SyntheticParams::default();
        for kv in &self.params {
            p.apply_key_values(kv)?;
        }
        if let Some(v) = self.hashtags {
            p.hashtags = v;
        }
        if let Some(v) = self.news {
            p.news = v;
        }
        if let Some(v) = self.fake_ratio {
            p.fake_ratio = v;
        }
        if let Some(v) = self.purity {
            p.purity = v;
        }
        if let Some(v) = self.chain_depth {
            p.chain_depth = v;
        }
        if let Some(v) = self.chain_news {
            p.chain_news = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct BuildGraphArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Relation matrix path; the vocabulary goes to `<out>.vocab`.
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub graph: GraphArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Also write the first repetition's predictions to `<out>.predictions.csv`.
    #[arg(long)]
    pub predictions: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Candidate values; those outside (0,1) are skipped.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    pub grid: Vec<f64>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SweepVolumeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8")]
    pub fractions: Vec<f64>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SweepTimeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long, value_delimiter = ',', default_value = "12,24,36,48,60")]
    pub horizons: Vec<f64>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct PurityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct PopularityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Class summary CSV; per-news counts go to `<out>.counts.csv`.
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, value_delimiter = ',', default_value = "12,24,36,48,60")]
    pub checkpoints: Vec<f64>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct CaseStudyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Hashtags to report, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub watchlist: Vec<String>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationArg {
    /// Co-occurrence counts.
    Direct,
    /// Counts divided by the largest row sum.
    Normalized,
    /// The method's relation matrix.
    All,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ExportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output prefix: writes `<out>.edges.tsv`, `<out>.nodes.tsv` and, with
    /// --dot, `<out>.dot`.
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum, default_value_t = RelationArg::Direct)]
    pub relation: RelationArg,
    #[arg(long)]
    pub dot: bool,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A `.config.json` file written by an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Write the artifacts here instead of the recorded path.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Synth(_) => "synth",
            Command::BuildGraph(_) => "build-graph",
            Command::Run(_) => "run",
            Command::GridMu(_) => "grid-mu",
            Command::SweepVolume(_) => "sweep-volume",
            Command::SweepTime(_) => "sweep-time",
            Command::Ablate(_) => "ablate",
            Command::Analyze(_) => "analyze",
            Command::Export(_) => "export",
            Command::Replay(_) => "replay",
        }
    }

    /// Primary output path, if the command has one.
    pub fn out_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            Command::Validate(a) => a.out.as_mut(),
            Command::Synth(a) => Some(&mut a.out.out),
            Command::BuildGraph(a) => Some(&mut a.out.out),
            Command::Run(a) | Command::Ablate(a) => Some(&mut a.out.out),
            Command::GridMu(a) => Some(&mut a.out.out),
            Command::SweepVolume(a) => Some(&mut a.out.out),
            Command::SweepTime(a) => Some(&mut a.out.out),
            Command::Analyze(AnalyzeCommand::Purity(a)) => Some(&mut a.out.out),
            Command::Analyze(AnalyzeCommand::Popularity(a)) => Some(&mut a.out.out),
            Command::Analyze(AnalyzeCommand::CaseStudy(a)) => Some(&mut a.out.out),
            Command::Analyze(AnalyzeCommand::Convergence(a)) => Some(&mut a.out.out),
            Command::Export(a) => Some(&mut a.out.out),
            Command::Replay(a) => a.out.as_mut(),
        }
    }
}
