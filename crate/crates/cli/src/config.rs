//! Run configurations. Every subcommand resolves its flags into one of these
//! before doing any work; the resolved value is what the manifest records.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spinscramble_core::analysis::FixedTimeMode;
use spinscramble_core::dynamics::KrylovOptions;
use spinscramble_core::{EngineKind, ModelParams, RStatsOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Nn,
    Nnn,
}

impl Preset {
    pub fn params(self, n_sites: usize) -> ModelParams {
        match self {
            Preset::Nn => ModelParams::nn(n_sites),
            Preset::Nnn => ModelParams::nnn(n_sites),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Preset::Nn => "nn",
            Preset::Nnn => "nnn",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Couplings without a chain length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub lambda: f64,
    pub f: f64,
    pub g: f64,
}

impl Couplings {
    pub fn at(self, n_sites: usize) -> ModelParams {
        ModelParams { lambda: self.lambda, f: self.f, g: self.g, n_sites }
    }
}

impl From<ModelParams> for Couplings {
    fn from(p: ModelParams) -> Self {
        Self { lambda: p.lambda, f: p.f, g: p.g }
    }
}

/// Uniform time grid `0, step, 2·step, …, ≤ max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub tmax: f64,
    pub tstep: f64,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        let count = (self.tmax / self.tstep + 1e-9).floor() as usize;
        (0..=count).map(|i| i as f64 * self.tstep).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Common {
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub parallelism: usize,
}

impl Common {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RstatsConfig {
    pub label: String,
    pub params: ModelParams,
    pub options: RStatsOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub kind: EngineKind,
    pub krylov: KrylovOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocConfig {
    pub label: String,
    pub params: ModelParams,
    pub r: usize,
    pub samples: usize,
    pub seed: u64,
    pub grid: TimeGrid,
    pub threshold: f64,
    /// Early-growth fit window.
    pub fit_window: (f64, f64),
    pub log_scale: bool,
    pub engine: EngineConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScalingSource {
    /// Simulate OTOC curves for each chain length.
    Simulate {
        couplings: Couplings,
        sizes: Vec<usize>,
        /// Explicit sample count; `None` uses the per-size default.
        samples: Option<usize>,
        seed: u64,
        grid: TimeGrid,
        engine: EngineConfig,
    },
    /// Fit `(N, C)` points read from a CSV file.
    Points { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub label: String,
    pub source: ScalingSource,
    pub threshold: f64,
    pub fixed_time: FixedTimeMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRun {
    pub label: String,
    pub params: ModelParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub runs: Vec<EntropyRun>,
    pub cut: Option<usize>,
    pub grid: TimeGrid,
    /// Entropy level whose first arrival is reported.
    pub reach_level: f64,
    pub bits: bool,
    pub engine: EngineConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lambda_axis: Vec<f64>,
    pub f_axis: Vec<f64>,
    pub g: f64,
    pub n_sites: usize,
    pub options: RStatsOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Job {
    Rstats(RstatsConfig),
    Otoc(OtocConfig),
    Scaling(ScalingConfig),
    Entropy(EntropyConfig),
    Sweep(SweepConfig),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Rstats(_) => "rstats",
            Job::Otoc(_) => "otoc",
            Job::Scaling(_) => "scaling",
            Job::Entropy(_) => "entropy",
            Job::Sweep(_) => "sweep",
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub common: Common,
    pub job: Job,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}
