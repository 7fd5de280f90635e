use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cltdioph::distkit::DEFAULT_ATOM_CAP;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "cltdioph",
    version,
    about = "Exact CLT rates for sums with Diophantine support"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Directory for the JSON (and CSV) outputs.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Record wall-clock seconds in sweep outputs (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,
    /// Maximum support size of any constructed distribution.
    #[arg(long, global = true, default_value_t = DEFAULT_ATOM_CAP)]
    pub atom_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Phi,
    Phi3,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Exact distance of one normalized sum to Phi or Phi_3.
    Delta {
        /// Base law, e.g. `prod:surd:0,1,1,2` or `mix:0.5:surd:0,1,1,2=0.5`.
        #[arg(long)]
        base: String,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = Target::Phi)]
        target: Target,
    },
    /// Distances over a list of n (default 2^4..2^11).
    Sweep {
        #[arg(long)]
        base: String,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
    /// Rate fit of a sweep CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Irrationality type for the constrained fit.
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Average distance over alpha in (0, 1) for +-1 (+) +-alpha.
    Avg {
        #[arg(long, value_delimiter = ',', default_values_t = [64u64, 128, 256, 512])]
        n: Vec<u64>,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Star discrepancy of {k alpha}.
    Disc {
        #[arg(long)]
        alpha: String,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        /// Also fit distance and discrepancy rates side by side.
        #[arg(long)]
        compare: bool,
    },
    /// Growth of 1/(1 - |f|) along the peaks and the cosine inequality suite.
    Cf {
        #[arg(long)]
        base: String,
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
        #[arg(long, default_value_t = 8)]
        peaks: usize,
        /// Points of the inequality grid on [-10, 10].
        #[arg(long, default_value_t = 10_001)]
        grid: usize,
    },
    /// Explicit smoothing bound against the exact distance over a sweep.
    Bounds {
        #[arg(long)]
        base: String,
        #[arg(long, value_delimiter = ',', default_values_t = [16u64, 64, 256, 1024])]
        n: Vec<u64>,
        /// Growth power of 1/(1 - |f|).
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Growth log-power of 1/(1 - |f|).
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        /// Growth constant of 1/(1 - |f|).
        #[arg(long, default_value_t = 1.0)]
        a_const: f64,
        /// Also run the reverse-inequality check on s in [1, 4].
        #[arg(long)]
        reverse: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Delta { .. } => "delta",
            Command::Sweep { .. } => "sweep",
            Command::Fit { .. } => "fit",
            Command::Avg { .. } => "avg",
            Command::Disc { .. } => "disc",
            Command::Cf { .. } => "cf",
            Command::Bounds { .. } => "bounds",
        }
    }
}
