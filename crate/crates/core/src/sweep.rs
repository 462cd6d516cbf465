//! Parallel (λ, f) scan of the mean r-parameter at fixed g.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{build_sector_basis, SectorBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_sector_hamiltonian, ModelParams};
use crate::spectral::{diagonalize, r_statistics, RStats, RStatsOptions};

/// Sector diagonalization and r-statistics at one parameter point.
pub fn sector_r_statistics(params: &ModelParams, basis: &SectorBasis, options: &RStatsOptions) -> Result<RStats> {
    let h = build_sector_hamiltonian(params, basis)?;
    let spectrum = diagonalize(&h)?;
    r_statistics(&spectrum, options)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFailure {
    pub lambda: f64,
    pub f: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub lambda_axis: Vec<f64>,
    pub f_axis: Vec<f64>,
    pub g: f64,
    pub n_sites: usize,
    /// Row-major in λ: entry `(i, j)` is at `i * f_axis.len() + j`. NaN marks a failed point.
    pub mean_r: Vec<f64>,
    pub failures: Vec<GridFailure>,
}

impl HeatmapGrid {
    pub fn get(&self, lambda_index: usize, f_index: usize) -> f64 {
        self.mean_r[lambda_index * self.f_axis.len() + f_index]
    }

    /// `(λ, f, mean_r)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.lambda_axis.iter().enumerate().flat_map(move |(i, &l)| {
            self.f_axis.iter().enumerate().map(move |(j, &f)| (l, f, self.get(i, j)))
        })
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} axis is empty")));
    }
    if axis.iter().any(|x| !x.is_finite()) || axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("{name} axis must be finite and increasing")));
    }
    Ok(())
}

/// Evaluates every grid point on a pool of `parallelism` threads (0 = rayon default).
/// Per-point failures are recorded rather than aborting the scan.
pub fn r_heatmap(
    lambda_axis: &[f64],
    f_axis: &[f64],
    g: f64,
    n_sites: usize,
    parallelism: usize,
    options: &RStatsOptions,
) -> Result<HeatmapGrid> {
    check_axis("lambda", lambda_axis)?;
    check_axis("f", f_axis)?;
    let basis = build_sector_basis(n_sites)?;
    let points: Vec<(f64, f64)> =
        lambda_axis.iter().flat_map(|&l| f_axis.iter().map(move |&f| (l, f))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let results: Vec<Result<f64>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(lambda, f)| {
                let params = ModelParams::new(lambda, f, g, n_sites)?;
                sector_r_statistics(&params, &basis, options).map(|s| s.mean_r)
            })
            .collect()
    });
    let mut mean_r = Vec::with_capacity(points.len());
    let mut failures = Vec::new();
    for (&(lambda, f), result) in points.iter().zip(results) {
        match result {
            Ok(value) => mean_r.push(value),
            Err(e) => {
                mean_r.push(f64::NAN);
                failures.push(GridFailure { lambda, f, message: e.to_string() });
            }
        }
    }
    Ok(HeatmapGrid {
        lambda_axis: lambda_axis.to_vec(),
        f_axis: f_axis.to_vec(),
        g,
        n_sites,
        mean_r,
        failures,
    })
}

/// Location and value of the largest finite entry; ties go to smaller λ, then smaller f.
pub fn grid_argmax(grid: &HeatmapGrid) -> Result<(f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    for (l, f, r) in grid.entries() {
        if r.is_finite() && best.is_none_or(|b| r > b.2) {
            best = Some((l, f, r));
        }
    }
    best.ok_or(Error::EmptyGrid)
}

/// `n` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (end - start) * i as f64 / (n - 1) as f64).collect(),
    }
}
