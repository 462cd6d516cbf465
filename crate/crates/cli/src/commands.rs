use std::fs;
use std::path::Path;

use serde::Serialize;
use spinscramble_core::analysis::{
    curve_label, fit_exponential_decay, fit_exponential_window, fit_power_law, scaling_analysis, scrambling_time,
    ExponentialFit, LinearFit, PowerLawFit, ScalingRow,
};
use spinscramble_core::dynamics::{default_samples, OtocRequest};
use spinscramble_core::spectral::{poisson_spacing, wigner_surmise, ReferenceValues};
use spinscramble_core::{
    build_sector_basis, entropy_curve, goe_reference, grid_argmax, otoc_curve, r_heatmap, EntropyCurve, ModelParams,
    OtocCurve,
};

use crate::config::*;
use crate::output::{Artifacts, Csv};
use crate::svg::{heatmap, Bars, Plot, Series};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] spinscramble_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 1,
            RunError::Numeric(_) | RunError::Io(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// Runs a job, writing artifacts plus `manifest.json` into the output
/// directory. On failure everything this run wrote is removed.
pub fn execute(config: &RunConfig) -> Result<Vec<String>> {
    let mut artifacts = Artifacts::create(&config.common.out)?;
    match run_job(config, &mut artifacts) {
        Ok(()) => {
            let mut outputs = artifacts.names().to_vec();
            outputs.push("manifest.json".into());
            let manifest = Manifest {
                tool: "spinscramble".into(),
                version: spinscramble_core::VERSION.into(),
                config: config.clone(),
                outputs: outputs.clone(),
            };
            if let Err(e) = artifacts.write_json("manifest.json", &manifest) {
                artifacts.discard();
                return Err(e.into());
            }
            Ok(outputs)
        }
        Err(e) => {
            artifacts.discard();
            Err(e)
        }
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))
}

fn run_job(config: &RunConfig, out: &mut Artifacts) -> Result<()> {
    let common = &config.common;
    match &config.job {
        Job::Rstats(c) => rstats(c, common, out),
        Job::Otoc(c) => otoc(c, common, out),
        Job::Scaling(c) => scaling(c, common, out),
        Job::Entropy(c) => entropy(c, common, out),
        Job::Sweep(c) => sweep(c, common, out),
    }
}

#[derive(Serialize)]
struct RstatsSummary<'a> {
    command: &'static str,
    label: &'a str,
    params: ModelParams,
    sector_dim: usize,
    mean_r: f64,
    n_r_values: usize,
    n_spacings: usize,
    mean_spacing: f64,
    /// Fraction of normalized spacings in the first histogram bin.
    first_bin_fraction: f64,
    histogram_overflow: usize,
    trim_fraction: f64,
    references: ReferenceValues,
}

fn rstats(c: &RstatsConfig, common: &Common, out: &mut Artifacts) -> Result<()> {
    let basis = build_sector_basis(c.params.n_sites)?;
    let h = spinscramble_core::build_sector_hamiltonian(&c.params, &basis)?;
    let spectrum = spinscramble_core::diagonalize(&h)?;
    let stats = spinscramble_core::r_statistics(&spectrum, &c.options)?;
    let hist = &stats.histogram;

    if common.wants(Format::Csv) {
        let mut csv = Csv::new(&["index", "energy"]);
        for (i, e) in spectrum.energies().iter().enumerate() {
            csv.row(&[&i, e]);
        }
        out.write_text("spectrum.csv", &csv.finish())?;
        let mut csv = Csv::new(&["index", "r"]);
        for (i, r) in stats.r_values.iter().enumerate() {
            csv.row(&[&i, r]);
        }
        out.write_text("r_values.csv", &csv.finish())?;
        let mut csv = Csv::new(&["bin_lo", "bin_hi", "count", "density", "wigner", "poisson"]);
        for ((edge, count), density) in hist.edges.windows(2).zip(&hist.counts).zip(hist.density()) {
            let mid = 0.5 * (edge[0] + edge[1]);
            csv.row(&[&edge[0], &edge[1], count, &density, &wigner_surmise(mid), &poisson_spacing(mid)]);
        }
        out.write_text("histogram.csv", &csv.finish())?;
    }
    if common.wants(Format::Json) {
        let first_bin = hist.counts.first().copied().unwrap_or(0) as f64 / hist.total().max(1) as f64;
        out.write_json(
            "summary.json",
            &RstatsSummary {
                command: "rstats",
                label: &c.label,
                params: c.params,
                sector_dim: basis.dim(),
                mean_r: stats.mean_r,
                n_r_values: stats.r_values.len(),
                n_spacings: stats.spacings.len(),
                mean_spacing: stats.mean_spacing,
                first_bin_fraction: first_bin,
                histogram_overflow: hist.overflow,
                trim_fraction: c.options.trim_fraction,
                references: goe_reference(),
            },
        )?;
    }
    if common.wants(Format::Svg) {
        let bins = hist.edges.windows(2).zip(hist.density()).map(|(e, d)| (e[0], e[1], d)).collect();
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * c.options.histogram_max / 200.0).collect();
        let plot = Plot {
            title: format!("Spacing distribution, {} N={} (mean r = {:.4})", c.label, c.params.n_sites, stats.mean_r),
            x_label: "s / mean spacing".into(),
            y_label: "P(s)".into(),
            bars: Some(Bars { bins }),
            series: vec![
                Series { label: "Wigner surmise".into(), points: grid.iter().map(|&s| (s, wigner_surmise(s))).collect(), dashed: false },
                Series { label: "Poisson".into(), points: grid.iter().map(|&s| (s, poisson_spacing(s))).collect(), dashed: true },
            ],
            ..Plot::default()
        };
        out.write_text("histogram.svg", &plot.render())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct WindowFit {
    window: (f64, f64),
    #[serde(flatten)]
    fit: ExponentialFit,
}

#[derive(Serialize)]
struct OtocSummary<'a> {
    command: &'static str,
    label: &'a str,
    params: ModelParams,
    r: usize,
    n_samples: usize,
    seed: u64,
    engine: spinscramble_core::EngineKind,
    threshold: f64,
    t_star: Option<f64>,
    growth_fit: Option<WindowFit>,
    growth_fit_error: Option<String>,
    /// Mean of C over the last quarter of the time grid.
    plateau: f64,
    c_initial: f64,
}

fn otoc_request(c: &EngineConfig, r: usize, n_samples: usize, seed: u64) -> OtocRequest {
    OtocRequest { r, n_samples, seed, engine: c.kind, krylov: c.krylov }
}

fn otoc(c: &OtocConfig, common: &Common, out: &mut Artifacts) -> Result<()> {
    let times = c.grid.times();
    let request = otoc_request(&c.engine, c.r, c.samples, c.seed);
    let curve = otoc_curve(&c.params, &times, &request)?;

    if common.wants(Format::Csv) {
        let mut csv = Csv::new(&["t", "c", "std_error"]);
        for ((t, v), e) in curve.times.iter().zip(&curve.values).zip(&curve.std_errors) {
            csv.row(&[t, v, e]);
        }
        out.write_text("otoc.csv", &csv.finish())?;
    }
    if common.wants(Format::Json) {
        let t_star = scrambling_time(&curve, c.threshold).ok().map(|s| s.t_star);
        let fit = fit_exponential_window(&curve.times, &curve.values, c.fit_window);
        let tail = &curve.values[curve.values.len() * 3 / 4..];
        out.write_json(
            "summary.json",
            &OtocSummary {
                command: "otoc",
                label: &c.label,
                params: c.params,
                r: c.r,
                n_samples: c.samples,
                seed: c.seed,
                engine: c.engine.kind.resolve(c.params.n_sites),
                threshold: c.threshold,
                t_star,
                growth_fit_error: fit.as_ref().err().map(|e| e.to_string()),
                growth_fit: fit.ok().map(|fit| WindowFit { window: c.fit_window, fit }),
                plateau: tail.iter().sum::<f64>() / tail.len() as f64,
                c_initial: curve.values[0],
            },
        )?;
    }
    if common.wants(Format::Svg) {
        let plot = Plot {
            title: format!("C(t, r={}) for {} N={}", c.r, c.label, c.params.n_sites),
            x_label: "t".into(),
            y_label: "C(t, r)".into(),
            log_y: c.log_scale,
            series: vec![Series { label: curve_label(&curve), points: zip(&curve.times, &curve.values), dashed: false }],
            ..Plot::default()
        };
        out.write_text("otoc.svg", &plot.render())?;
    }
    Ok(())
}

fn zip(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().copied().zip(b.iter().copied()).collect()
}

#[derive(Serialize)]
struct ScalingSummary<'a> {
    command: &'static str,
    label: &'a str,
    threshold: f64,
    fixed_time: spinscramble_core::analysis::FixedTimeMode,
    sizes: Vec<usize>,
    power_law: PowerLawFit,
    /// ln C against N.
    exponential: LinearFit,
    /// t* against ln N; absent when fitting external points.
    log_time: Option<LinearFit>,
    t_star_increasing: Option<bool>,
}

fn read_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| RunError::Usage(format!("{} is empty", path.display())))?;
    if header.split(',').map(str::trim).collect::<Vec<_>>() != ["n", "value"] {
        return Err(RunError::Usage(format!("{}: expected header `n,value`", path.display())));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || RunError::Usage(format!("{}: bad row {}: {line:?}", path.display(), i + 2));
            let (n, v) = line.split_once(',').ok_or_else(bad)?;
            Ok((n.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn scaling(c: &ScalingConfig, common: &Common, out: &mut Artifacts) -> Result<()> {
    match &c.source {
        ScalingSource::Points { path } => {
            let points = read_points(path)?;
            let power_law = fit_power_law(&points)?;
            let exponential = fit_exponential_decay(&points)?;
            if common.wants(Format::Csv) {
                let mut csv = Csv::new(&["n", "c"]);
                for (n, v) in &points {
                    csv.row(&[n, v]);
                }
                out.write_text("scaling.csv", &csv.finish())?;
            }
            if common.wants(Format::Json) {
                out.write_json(
                    "summary.json",
                    &ScalingSummary {
                        command: "scaling",
                        label: &c.label,
                        threshold: c.threshold,
                        fixed_time: c.fixed_time,
                        sizes: points.iter().map(|p| p.0 as usize).collect(),
                        power_law: power_law.clone(),
                        exponential,
                        log_time: None,
                        t_star_increasing: None,
                    },
                )?;
            }
            if common.wants(Format::Svg) {
                out.write_text("scaling.svg", &scaling_plot(&points, &power_law))?;
            }
        }
        ScalingSource::Simulate { couplings, sizes, samples, seed, grid, engine } => {
            let times = grid.times();
            let curves: Vec<OtocCurve> = sizes
                .iter()
                .map(|&n| {
                    let n_samples = samples.unwrap_or_else(|| default_samples(n));
                    let request = otoc_request(engine, n, n_samples, *seed);
                    otoc_curve(&couplings.at(n), &times, &request)
                })
                .collect::<std::result::Result<_, _>>()?;
            let report = scaling_analysis(&curves, c.threshold, c.fixed_time)?;
            if common.wants(Format::Csv) {
                let mut csv = Csv::new(&["n", "t_star", "fixed_time", "c", "std_error"]);
                for ScalingRow { n_sites, t_star, fixed_time, value, std_error } in &report.rows {
                    csv.row(&[n_sites, t_star, fixed_time, value, std_error]);
                }
                out.write_text("scaling.csv", &csv.finish())?;
                let mut csv = Csv::new(&["n", "t", "c", "std_error"]);
                for curve in &curves {
                    for ((t, v), e) in curve.times.iter().zip(&curve.values).zip(&curve.std_errors) {
                        csv.row(&[&curve.n_sites, t, v, e]);
                    }
                }
                out.write_text("curves.csv", &csv.finish())?;
            }
            if common.wants(Format::Json) {
                out.write_json(
                    "summary.json",
                    &ScalingSummary {
                        command: "scaling",
                        label: &c.label,
                        threshold: c.threshold,
                        fixed_time: c.fixed_time,
                        sizes: sizes.clone(),
                        power_law: report.power_law.clone(),
                        exponential: report.exponential,
                        log_time: Some(report.log_time),
                        t_star_increasing: Some(report.t_star_increasing()),
                    },
                )?;
            }
            if common.wants(Format::Svg) {
                out.write_text("scaling.svg", &scaling_plot(&report.power_law.points, &report.power_law))?;
                let series = curves
                    .iter()
                    .map(|cv| Series { label: format!("N={}", cv.n_sites), points: zip(&cv.times, &cv.values), dashed: false })
                    .collect();
                let plot = Plot {
                    title: format!("C(t, r=N), {}", c.label),
                    x_label: "t".into(),
                    y_label: "C(t, r=N)".into(),
                    log_y: true,
                    series,
                    ..Plot::default()
                };
                out.write_text("curves.svg", &plot.render())?;
            }
        }
    }
    Ok(())
}

fn scaling_plot(points: &[(f64, f64)], fit: &PowerLawFit) -> String {
    let fitted = points.iter().map(|&(n, _)| (n, fit.prefactor * n.powf(-fit.exponent_alpha))).collect();
    Plot {
        title: format!("C(t*, r=N) against N: alpha = {:.3}", fit.exponent_alpha),
        x_label: "N".into(),
        y_label: "C".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series { label: "data".into(), points: points.to_vec(), dashed: false },
            Series { label: "power-law fit".into(), points: fitted, dashed: true },
        ],
        ..Plot::default()
    }
    .render()
}

#[derive(Serialize)]
struct EntropyCurveSummary {
    label: String,
    params: ModelParams,
    /// First time the entropy reaches `reach_level` (nats).
    t_reach: Option<f64>,
    max_entropy: f64,
    /// Mean over the last quarter of the time grid.
    late_mean: f64,
}

#[derive(Serialize)]
struct EntropySummary {
    command: &'static str,
    units: &'static str,
    n_sites: usize,
    cut: usize,
    reach_level: f64,
    /// `min(cut, N - cut) · ln 2` in the reported units.
    max_possible: f64,
    curves: Vec<EntropyCurveSummary>,
}

fn entropy(c: &EntropyConfig, common: &Common, out: &mut Artifacts) -> Result<()> {
    let times = c.grid.times();
    let curves: Vec<EntropyCurve> = c
        .runs
        .iter()
        .map(|run| entropy_curve(&run.params, &run.label, &times, c.cut, c.engine.kind, c.engine.krylov))
        .collect::<std::result::Result<_, _>>()?;
    let unit = if c.bits { std::f64::consts::LN_2 } else { 1.0 };
    let values = |curve: &EntropyCurve| -> Vec<f64> { curve.entropies.iter().map(|s| s / unit).collect() };

    if common.wants(Format::Csv) {
        let mut csv = Csv::new(&["label", "t", "entropy"]);
        for curve in &curves {
            for (t, s) in curve.times.iter().zip(values(curve)) {
                csv.row(&[&curve.label, t, &s]);
            }
        }
        out.write_text("entropy.csv", &csv.finish())?;
    }
    if common.wants(Format::Json) {
        let n_sites = curves[0].params.n_sites;
        let cut = curves[0].cut;
        let summaries = curves
            .iter()
            .map(|curve| {
                let tail = &curve.entropies[curve.entropies.len() * 3 / 4..];
                EntropyCurveSummary {
                    label: curve.label.clone(),
                    params: curve.params,
                    t_reach: curve.first_reach(c.reach_level),
                    max_entropy: curve.entropies.iter().copied().fold(0.0, f64::max) / unit,
                    late_mean: tail.iter().sum::<f64>() / tail.len() as f64 / unit,
                }
            })
            .collect();
        out.write_json(
            "summary.json",
            &EntropySummary {
                command: "entropy",
                units: if c.bits { "bits" } else { "nats" },
                n_sites,
                cut,
                reach_level: c.reach_level,
                max_possible: cut.min(n_sites - cut) as f64 * std::f64::consts::LN_2 / unit,
                curves: summaries,
            },
        )?;
    }
    if common.wants(Format::Svg) {
        let plot = Plot {
            title: format!("Half-chain entanglement, N={}", curves[0].params.n_sites),
            x_label: "t".into(),
            y_label: if c.bits { "S (bits)".into() } else { "S (nats)".into() },
            series: curves
                .iter()
                .map(|curve| Series { label: curve.label.clone(), points: zip(&curve.times, &values(curve)), dashed: false })
                .collect(),
            ..Plot::default()
        };
        out.write_text("entropy.svg", &plot.render())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Argmax {
    lambda: f64,
    f: f64,
    mean_r: f64,
}

#[derive(Serialize)]
struct SweepSummary {
    command: &'static str,
    g: f64,
    n_sites: usize,
    shape: (usize, usize),
    argmax: Argmax,
    failures: usize,
    references: ReferenceValues,
}

fn sweep(c: &SweepConfig, common: &Common, out: &mut Artifacts) -> Result<()> {
    let grid = r_heatmap(&c.lambda_axis, &c.f_axis, c.g, c.n_sites, common.parallelism, &c.options)?;
    let (lambda, f, mean_r) = grid_argmax(&grid)?;
    if common.wants(Format::Csv) {
        let mut csv = Csv::new(&["lambda", "f", "mean_r", "failure"]);
        for (l, fv, r) in grid.entries() {
            let failure = grid
                .failures
                .iter()
                .find(|x| x.lambda == l && x.f == fv)
                .map(|x| format!("\"{}\"", x.message.replace('"', "'")))
                .unwrap_or_default();
            csv.row(&[&l, &fv, &r, &failure]);
        }
        out.write_text("grid.csv", &csv.finish())?;
    }
    if common.wants(Format::Json) {
        out.write_json(
            "summary.json",
            &SweepSummary {
                command: "sweep",
                g: c.g,
                n_sites: c.n_sites,
                shape: (c.lambda_axis.len(), c.f_axis.len()),
                argmax: Argmax { lambda, f, mean_r },
                failures: grid.failures.len(),
                references: goe_reference(),
            },
        )?;
    }
    if common.wants(Format::Svg) {
        let svg = heatmap(
            &format!("mean r, g={} N={} (max {:.4} at lambda={:.3}, f={:.3})", c.g, c.n_sites, mean_r, lambda, f),
            "lambda",
            "f",
            &grid.lambda_axis,
            &grid.f_axis,
            &grid.mean_r,
        );
        out.write_text("heatmap.svg", &svg)?;
    }
    Ok(())
}
