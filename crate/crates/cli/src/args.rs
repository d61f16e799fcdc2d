use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use turan_gaps::OptimizerConfig;

/// Lagrangians of r-uniform patterns and the gaps between r-graph Turán
/// densities.
///
/// Every run writes its primary output and a JSON run manifest to `--out`,
/// named by a hash of the manifest. Set TURAN_WORKERS to bound the number
/// of worker threads (default: all available cores).
#[derive(Debug, Parser)]
#[command(name = "turan-gaps", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format (defaults: csv for chain and ladder, table otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Directory for result files and manifests.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Table => "txt",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Colex,
    Lex,
    /// Seeded random permutation (uses --seed).
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptArgs {
    /// Random starts on top of the uniform point and the vertices.
    #[arg(long, default_value_t = 50)]
    pub starts: usize,
    /// Iteration cap per start.
    #[arg(long = "max-iter", default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OptArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            max_iterations: self.max_iter,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Lower bound (and, for m <= 6, a grid upper bound) on a pattern's Lagrangian.
    Lagrangian {
        /// Pattern JSON: {"r": 3, "m": 3, "multisets": [[1,1,2],[1,2,3]]}.
        #[arg(long)]
        pattern: PathBuf,
        /// Grid resolution for the upper bound; 0 disables it.
        #[arg(long, default_value_t = 48)]
        grid: usize,
        #[command(flatten)]
        #[serde(flatten)]
        opt: OptArgs,
    },
    /// Lagrangians along the edge-by-edge chain of r-graphs on [m].
    Chain {
        #[arg(long, default_value_t = 3)]
        r: u32,
        /// Ground set size [default: 6].
        #[arg(long, conflicts_with = "slow")]
        m: Option<usize>,
        #[arg(long, value_enum, default_value_t = Order::Colex)]
        order: Order,
        /// Use the smallest m whose complete graph clears 1 - r!/r^r.
        #[arg(long)]
        slow: bool,
        #[command(flatten)]
        #[serde(flatten)]
        opt: OptArgs,
    },
    /// Exact density ladder of down-closed prefixes.
    Ladder {
        #[arg(long)]
        r: u32,
        /// Compare each step with a seeded balls-in-urns simulation.
        #[arg(long = "mc-trials")]
        mc_trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Largest step of the exact ladder.
    MaxStep {
        #[arg(long)]
        r: u32,
    },
    /// Compare optimizer and exact uniform values on down-closed sets.
    LemmaCheck {
        #[arg(long, required_unless_present = "downset")]
        r: Option<u32>,
        #[arg(long, required_unless_present = "downset")]
        s: Option<usize>,
        /// Check every down-closed subset of P_{r,s} (the default with --r/--s).
        #[arg(long, conflicts_with = "downset")]
        all_downsets: bool,
        /// Down-set JSON: {"r": 3, "s": 3, "members": [[1,1,1],[2,1,0]]}.
        #[arg(long, conflicts_with_all = ["r", "s"])]
        downset: Option<PathBuf>,
        #[command(flatten)]
        #[serde(flatten)]
        opt: OptArgs,
    },
    /// Verify the two-variable bunching inequality for uniformity r and threshold h.
    Bunching {
        #[arg(long)]
        r: u32,
        /// Integer or half-integer, e.g. 2, 1.5 or 3/2.
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Edge list of a blow-up.
    BlowUp {
        #[arg(long)]
        pattern: PathBuf,
        /// Part sizes, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// Smallest m with r! C(m, r) / m^r > 1 - r!/r^r.
    MinimalM {
        #[arg(long)]
        r: u32,
    },
    /// Re-run the command recorded in a manifest and compare outputs.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lagrangian { .. } => "lagrangian",
            Command::Chain { .. } => "chain",
            Command::Ladder { .. } => "ladder",
            Command::MaxStep { .. } => "max-step",
            Command::LemmaCheck { .. } => "lemma-check",
            Command::Bunching { .. } => "bunching",
            Command::BlowUp { .. } => "blow-up",
            Command::MinimalM { .. } => "minimal-m",
            Command::Replay { .. } => "replay",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Chain { .. } | Command::Ladder { .. } => Format::Csv,
            _ => Format::Table,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Lagrangian { opt, .. } | Command::Chain { opt, .. } | Command::LemmaCheck { opt, .. } => {
                Some(opt.seed)
            }
            Command::Ladder { seed, .. } | Command::Bunching { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}
