use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use spinscramble_core::analysis::{FixedTimeMode, DEFAULT_THRESHOLD};
use spinscramble_core::basis::{DEFAULT_SITE_CAP, MIN_SITES};
use spinscramble_core::dynamics::{default_samples, KrylovOptions};
use spinscramble_core::sweep::linspace;
use spinscramble_core::{EngineKind, ModelParams, RStatsOptions};

use crate::config::*;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "SPINSCRAMBLE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "spinscramble", version, about = "Chaos and scrambling diagnostics for the NN+NNN mixed-field Ising chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sector spectrum, r-parameter statistics and spacing histogram.
    Rstats(RstatsArgs),
    /// Haar-averaged OTOC C(t, r) = 1 - Re<X_1(t) X_r X_1(t) X_r>.
    Otoc(OtocArgs),
    /// C(t*, r = N) against N: power-law fit and t* against ln N.
    Scaling(ScalingArgs),
    /// Half-chain entanglement growth from the paramagnetic state.
    Entropy(EntropyArgs),
    /// Mean r over a (lambda, f) grid at fixed g.
    Sweep(SweepArgs),
    /// Re-run a job from a manifest.json written by a previous run.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Start from a named coupling set (default nnn); --lambda/--f/--g override it.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
}

impl ModelArgs {
    fn resolve(&self) -> (String, Couplings) {
        let preset = self.preset.unwrap_or(Preset::Nnn);
        let base = Couplings::from(preset.params(0));
        let overridden = self.lambda.is_some() || self.f.is_some() || self.g.is_some();
        let couplings = Couplings {
            lambda: self.lambda.unwrap_or(base.lambda),
            f: self.f.unwrap_or(base.f),
            g: self.g.unwrap_or(base.g),
        };
        let label = if overridden { "custom".to_string() } else { preset.label().to_string() };
        (label, couplings)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Artifacts to write (manifest.json is always written).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,json")]
    pub format: Vec<Format>,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, env = THREADS_ENV, default_value_t = 0)]
    pub parallelism: usize,
}

impl OutputArgs {
    fn common(&self) -> Common {
        let mut formats = self.format.clone();
        formats.sort_by_key(|f| *f as u8);
        formats.dedup();
        Common { out: self.out.clone(), formats, parallelism: self.parallelism }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub engine: EngineChoice,
    /// Krylov per-substep error bound.
    #[arg(long, default_value_t = KrylovOptions::default().tolerance)]
    pub krylov_tol: f64,
    /// Largest Krylov subspace.
    #[arg(long, default_value_t = KrylovOptions::default().max_krylov_dim)]
    pub krylov_dim: usize,
    /// Krylov substep.
    #[arg(long, default_value_t = KrylovOptions::default().step)]
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum EngineChoice {
    Auto,
    Eigen,
    Krylov,
}

impl EngineArgs {
    fn resolve(&self) -> EngineConfig {
        let kind = match self.engine {
            EngineChoice::Auto => EngineKind::Auto,
            EngineChoice::Eigen => EngineKind::Eigen,
            EngineChoice::Krylov => EngineKind::Krylov,
        };
        EngineConfig {
            kind,
            krylov: KrylovOptions {
                tolerance: self.krylov_tol,
                max_krylov_dim: self.krylov_dim,
                step: self.dt,
                ..KrylovOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TimeArgs {
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 0.25)]
    pub tstep: f64,
}

impl TimeArgs {
    fn resolve(&self) -> Result<TimeGrid, String> {
        if !(self.tstep > 0.0 && self.tmax >= self.tstep && self.tmax.is_finite()) {
            return Err(format!("need 0 < tstep <= tmax (got tstep {}, tmax {})", self.tstep, self.tmax));
        }
        Ok(TimeGrid { tmax: self.tmax, tstep: self.tstep })
    }
}

#[derive(Debug, Clone, Args)]
pub struct RstatsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 14)]
    pub n: usize,
    /// Relative degeneracy tolerance (times the spectral width).
    #[arg(long, default_value_t = RStatsOptions::default().degeneracy_tol)]
    pub degeneracy_tol: f64,
    /// Fraction of levels dropped at each spectral edge.
    #[arg(long, default_value_t = 0.0)]
    pub trim: f64,
    #[arg(long, default_value_t = RStatsOptions::default().histogram_bins)]
    pub bins: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OtocArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Probe site (default N).
    #[arg(long)]
    pub r: Option<usize>,
    /// Haar samples (default 8 for N <= 12, else 1).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub time: TimeArgs,
    /// OTOC level defining t*.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Early-growth fit window as start,end.
    #[arg(long, value_delimiter = ',', default_value = "0.5,2.0")]
    pub fit_window: Vec<f64>,
    /// Logarithmic C axis in the SVG.
    #[arg(long)]
    pub log_scale: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 9)]
    pub n_min: usize,
    #[arg(long, default_value_t = 15)]
    pub n_max: usize,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Time at which C(t, r = N) is compared across N.
    #[arg(long, value_enum, default_value = "largest-n")]
    pub fixed_time: FixedTimeChoice,
    /// Fit (N, C) points from a CSV with header `n,value` instead of simulating.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FixedTimeChoice {
    LargestN,
    PerN,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum EntropyPresets {
    Nn,
    Nnn,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct EntropyArgs {
    /// Presets to evolve; ignored when --lambda/--f/--g are given.
    #[arg(long, value_enum, default_value = "both")]
    pub preset: EntropyPresets,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Sites in subsystem A (default floor(N/2)).
    #[arg(long)]
    pub cut: Option<usize>,
    #[command(flatten)]
    pub time: TimeArgs,
    /// Entropy level whose first arrival time is reported.
    #[arg(long, default_value_t = 1.0)]
    pub reach: f64,
    /// Report entropies in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Grid points as LAMBDAxF.
    #[arg(long, default_value = "21x21")]
    pub grid: String,
    #[arg(long, value_delimiter = ',', default_value = "0,1.5")]
    pub lambda_range: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.3,1.5")]
    pub f_range: Vec<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub g: f64,
    #[arg(long, default_value_t = 14)]
    pub n: usize,
    #[arg(long, default_value_t = RStatsOptions::default().degeneracy_tol)]
    pub degeneracy_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    pub trim: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn check_sites(n: usize) -> Result<(), String> {
    if !(MIN_SITES..=DEFAULT_SITE_CAP).contains(&n) {
        return Err(format!("--n must be in {MIN_SITES}..={DEFAULT_SITE_CAP} (got {n})"));
    }
    Ok(())
}

fn check_params(params: &ModelParams) -> Result<(), String> {
    params.validate().map_err(|e| e.to_string())?;
    check_sites(params.n_sites)
}

fn rstats_options(degeneracy_tol: f64, trim: f64, bins: usize) -> Result<RStatsOptions, String> {
    if !(0.0..0.5).contains(&trim) {
        return Err(format!("--trim must be in [0, 0.5) (got {trim})"));
    }
    if bins == 0 || degeneracy_tol.is_nan() || degeneracy_tol < 0.0 {
        return Err("--bins must be positive and --degeneracy-tol non-negative".into());
    }
    Ok(RStatsOptions { degeneracy_tol, trim_fraction: trim, histogram_bins: bins, ..RStatsOptions::default() })
}

fn parse_grid(spec: &str) -> Result<(usize, usize), String> {
    let (a, b) = spec.split_once(['x', 'X']).ok_or_else(|| format!("--grid expects LxF, got {spec:?}"))?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("--grid {spec:?}: {e}"));
    let (l, f) = (parse(a)?, parse(b)?);
    if l == 0 || f == 0 {
        return Err("--grid counts must be positive".into());
    }
    Ok((l, f))
}

fn pair(flag: &str, values: &[f64]) -> Result<(f64, f64), String> {
    match values {
        &[a, b] if a.is_finite() && b.is_finite() => Ok((a, b)),
        _ => Err(format!("{flag} expects two finite comma-separated numbers")),
    }
}

/// Turns parsed flags into a run configuration; `Err` is a usage error.
pub fn resolve(command: Command) -> Result<RunConfig, String> {
    let (common, job) = match command {
        Command::Rstats(a) => {
            check_sites(a.n)?;
            let (label, couplings) = a.model.resolve();
            let params = couplings.at(a.n);
            check_params(&params)?;
            let options = rstats_options(a.degeneracy_tol, a.trim, a.bins)?;
            (a.output.common(), Job::Rstats(RstatsConfig { label, params, options }))
        }
        Command::Otoc(a) => {
            check_sites(a.n)?;
            let (label, couplings) = a.model.resolve();
            let params = couplings.at(a.n);
            check_params(&params)?;
            let r = a.r.unwrap_or(a.n);
            if r == 0 || r > a.n {
                return Err(format!("--r must be in 1..={} (got {r})", a.n));
            }
            let samples = a.samples.unwrap_or_else(|| default_samples(a.n));
            if samples == 0 {
                return Err("--samples must be at least 1".into());
            }
            let fit_window = pair("--fit-window", &a.fit_window)?;
            (
                a.output.common(),
                Job::Otoc(OtocConfig {
                    label,
                    params,
                    r,
                    samples,
                    seed: a.seed,
                    grid: a.time.resolve()?,
                    threshold: a.threshold,
                    fit_window,
                    log_scale: a.log_scale,
                    engine: a.engine.resolve(),
                }),
            )
        }
        Command::Scaling(a) => {
            let (label, couplings) = a.model.resolve();
            let source = match a.points {
                Some(path) => ScalingSource::Points { path },
                None => {
                    check_sites(a.n_min)?;
                    check_sites(a.n_max)?;
                    if a.n_max < a.n_min + 2 {
                        return Err("the N range needs at least 3 sizes".into());
                    }
                    check_params(&couplings.at(a.n_min))?;
                    if a.samples == Some(0) {
                        return Err("--samples must be at least 1".into());
                    }
                    ScalingSource::Simulate {
                        couplings,
                        sizes: (a.n_min..=a.n_max).collect(),
                        samples: a.samples,
                        seed: a.seed,
                        grid: a.time.resolve()?,
                        engine: a.engine.resolve(),
                    }
                }
            };
            let fixed_time = match a.fixed_time {
                FixedTimeChoice::LargestN => FixedTimeMode::LargestN,
                FixedTimeChoice::PerN => FixedTimeMode::PerN,
            };
            (a.output.common(), Job::Scaling(ScalingConfig { label, source, threshold: a.threshold, fixed_time }))
        }
        Command::Entropy(a) => {
            check_sites(a.n)?;
            let custom = a.lambda.is_some() || a.f.is_some() || a.g.is_some();
            let runs = if custom {
                let model = ModelArgs { preset: None, lambda: a.lambda, f: a.f, g: a.g };
                let (label, couplings) = model.resolve();
                vec![EntropyRun { label, params: couplings.at(a.n) }]
            } else {
                let presets: &[Preset] = match a.preset {
                    EntropyPresets::Nn => &[Preset::Nn],
                    EntropyPresets::Nnn => &[Preset::Nnn],
                    EntropyPresets::Both => &[Preset::Nn, Preset::Nnn],
                };
                presets
                    .iter()
                    .map(|p| EntropyRun { label: p.label().to_string(), params: p.params(a.n) })
                    .collect()
            };
            for run in &runs {
                check_params(&run.params)?;
            }
            if let Some(cut) = a.cut {
                if cut == 0 || cut >= a.n {
                    return Err(format!("--cut must be in 1..{} (got {cut})", a.n));
                }
            }
            (
                a.output.common(),
                Job::Entropy(EntropyConfig {
                    runs,
                    cut: a.cut,
                    grid: a.time.resolve()?,
                    reach_level: a.reach,
                    bits: a.bits,
                    engine: a.engine.resolve(),
                }),
            )
        }
        Command::Sweep(a) => {
            check_sites(a.n)?;
            let (nl, nf) = parse_grid(&a.grid)?;
            let (l0, l1) = pair("--lambda-range", &a.lambda_range)?;
            let (f0, f1) = pair("--f-range", &a.f_range)?;
            let lambda_axis = linspace(l0, l1, nl);
            let f_axis = linspace(f0, f1, nf);
            let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
            if !increasing(&lambda_axis) || !increasing(&f_axis) {
                return Err("ranges must be increasing".into());
            }
            let options = rstats_options(a.degeneracy_tol, a.trim, RStatsOptions::default().histogram_bins)?;
            (
                a.output.common(),
                Job::Sweep(SweepConfig { lambda_axis, f_axis, g: a.g, n_sites: a.n, options }),
            )
        }
        Command::Replay(_) => unreachable!("replay is resolved from its manifest"),
    };
    Ok(RunConfig { common, job })
}
