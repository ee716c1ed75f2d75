use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use snals::hypergraph::DatasetFormat;
use snals::pipeline::{AblationAxis, TrainConfig};
use snals::{NormScenario, SetPooling};

#[derive(Debug, Parser)]
#[command(name = "snals", version, about = "Hyperedge prediction from local structure and spectrum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Edge and node counts with degree moments.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        human: bool,
    },
    /// Cross-validated training; writes fold records and checkpoints.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// JSON-lines results file (appended).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-fold checkpoints.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        human: bool,
    },
    /// Re-evaluates a fold checkpoint on its held-out fold.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Fold to evaluate; defaults to the fold the checkpoint was trained for.
        #[arg(long)]
        fold: Option<usize>,
        #[arg(long)]
        human: bool,
    },
    /// Scores candidate sets, one per line of the candidates file.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        human: bool,
    },
    /// Local environment, affinity matrix and spectrum of one candidate.
    Explain {
        #[command(flatten)]
        data: DataArgs,
        /// Candidate node ids, e.g. "0,1,2".
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 1)]
        q: u32,
        #[arg(long)]
        human: bool,
    },
    /// Runs every setting of one axis with everything else fixed.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_parser = parse_axis)]
        axis: AblationAxis,
        /// Seeds to average over, e.g. "0,1,2"; defaults to --seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        human: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Benchmark,
    Edgelist,
}

impl From<Format> for DatasetFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Benchmark => DatasetFormat::Benchmark,
            Format::Edgelist => DatasetFormat::EdgeList,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Edge-list file, or benchmark directory / file prefix.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Edgelist)]
    pub format: Format,
}

impl DataArgs {
    /// Dataset name for result records: the file stem.
    pub fn name(&self) -> String {
        self.data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.data.display().to_string())
    }
}

/// Overrides applied on top of the config file, which sits on top of the
/// defaults.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML file with training settings (a `[model]` table holds model settings).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long)]
    pub scenario: Option<NormScenario>,
    #[arg(long)]
    pub pooling: Option<SetPooling>,
    #[arg(long)]
    pub no_spectrum: bool,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    pub fn apply(&self, mut c: TrainConfig) -> TrainConfig {
        if let Some(q) = self.q {
            c.q = q;
        }
        if let Some(s) = self.scenario {
            c.model.norm_scenario = s;
        }
        if let Some(p) = self.pooling {
            c.model.set_pooling = p;
        }
        if self.no_spectrum {
            c.model.spectrum_enabled = false;
        }
        if let Some(f) = self.folds {
            c.folds = f;
        }
        if let Some(b) = self.batch {
            c.batch_size = b;
        }
        if let Some(e) = self.epochs {
            c.max_epochs = e;
        }
        if let Some(lr) = self.lr {
            c.learning_rate = lr;
        }
        if let Some(d) = self.dropout {
            c.model.dropout = d;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        c
    }
}

fn parse_axis(s: &str) -> Result<AblationAxis, String> {
    s.parse()
}
