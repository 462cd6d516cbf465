//! Scrambling-time extraction and the growth/decay fits used on OTOC data.

use serde::{Deserialize, Serialize};

use crate::dynamics::OtocCurve;
use crate::error::{Error, Result};

/// Default OTOC threshold θ defining `t*`.
pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// Ordinary least-squares line `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewPoints { found: n, needed: 2 });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx <= f64::EPSILON * nf * mx.abs().max(1.0).powi(2) {
        return Err(Error::DegenerateAbscissa);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - (slope * a + intercept)).powi(2)).sum();
    // A flat response is fitted perfectly by a flat line.
    let r_squared = if syy <= f64::MIN_POSITIVE { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(LinearFit { slope, intercept, r_squared, n_points: n })
}

fn logs(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(Error::NonPositive { index, value })
            }
        })
        .collect()
}

/// `C ≈ prefactor · N^{-alpha}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent_alpha: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { found: points.len(), needed: 3 });
    }
    let sizes: Vec<f64> = points.iter().map(|p| p.0).collect();
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = linear_fit(&logs(&sizes)?, &logs(&values)?)?;
    Ok(PowerLawFit {
        exponent_alpha: -fit.slope,
        prefactor: fit.intercept.exp(),
        r_squared: fit.r_squared,
        points: points.to_vec(),
    })
}

/// `C ≈ prefactor · exp(-rate · N)`, the competing model to a power law.
pub fn fit_exponential_decay(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { found: points.len(), needed: 3 });
    }
    let sizes: Vec<f64> = points.iter().map(|p| p.0).collect();
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    linear_fit(&sizes, &logs(&values)?)
}

/// `C ≈ prefactor · exp(rate · t)` over a time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least squares on `ln C` against `t` for samples with `t` in `[start, end]`.
pub fn fit_exponential_window(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<ExponentialFit> {
    let (t, c): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| (window.0..=window.1).contains(*t))
        .map(|(t, c)| (*t, *c))
        .unzip();
    if t.len() < 3 {
        return Err(Error::TooFewPoints { found: t.len(), needed: 3 });
    }
    let fit = linear_fit(&t, &logs(&c)?)?;
    Ok(ExponentialFit {
        rate: fit.slope,
        prefactor: fit.intercept.exp(),
        r_squared: fit.r_squared,
        n_points: fit.n_points,
    })
}

/// Time of the first upward crossing of `level`, linearly interpolated.
pub fn first_upward_crossing(times: &[f64], values: &[f64], level: f64) -> Option<f64> {
    let i = values.iter().position(|&v| v >= level)?;
    if i == 0 {
        return Some(times[0]);
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let (v0, v1) = (values[i - 1], values[i]);
    Some(t0 + (level - v0) / (v1 - v0) * (t1 - t0))
}

/// Linear interpolation of a sampled curve; `None` outside the grid.
pub fn value_at(times: &[f64], values: &[f64], t: f64) -> Option<f64> {
    if times.is_empty() || t < times[0] || t > *times.last()? {
        return None;
    }
    let i = times.partition_point(|&x| x < t);
    if times[i] == t {
        return Some(values[i]);
    }
    let (t0, t1) = (times[i - 1], times[i]);
    Some(values[i - 1] + (values[i] - values[i - 1]) * (t - t0) / (t1 - t0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScramblingTime {
    pub t_star: f64,
    pub threshold: f64,
    pub curve_ref: String,
}

pub fn curve_label(curve: &OtocCurve) -> String {
    format!("N={} r={} samples={} seed={}", curve.n_sites, curve.r, curve.n_samples, curve.seed)
}

pub fn scrambling_time(curve: &OtocCurve, threshold: f64) -> Result<ScramblingTime> {
    scrambling_time_from(&curve.times, &curve.values, threshold, curve_label(curve))
}

pub fn scrambling_time_from(
    times: &[f64],
    values: &[f64],
    threshold: f64,
    curve_ref: String,
) -> Result<ScramblingTime> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidParameter(format!("threshold {threshold} must be positive")));
    }
    let t_star = first_upward_crossing(times, values, threshold).ok_or(Error::NoCrossing { threshold })?;
    Ok(ScramblingTime { t_star, threshold, curve_ref })
}

/// Which time the N-scaling of `C(t, r = N)` is read at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedTimeMode {
    /// `t*` of the largest chain, applied to every chain.
    LargestN,
    /// Each chain at its own `t*`.
    PerN,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n_sites: usize,
    pub t_star: f64,
    pub fixed_time: f64,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub threshold: f64,
    pub mode: FixedTimeMode,
    pub rows: Vec<ScalingRow>,
    pub power_law: PowerLawFit,
    /// `ln C` against `N`.
    pub exponential: LinearFit,
    /// `t*` against `ln N`.
    pub log_time: LinearFit,
}

impl ScalingReport {
    pub fn t_star_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].t_star > w[0].t_star)
    }
}

/// t* extraction, power-law fit and t*-vs-ln N fit over curves of several sizes.
pub fn scaling_analysis(curves: &[OtocCurve], threshold: f64, mode: FixedTimeMode) -> Result<ScalingReport> {
    let mut curves: Vec<&OtocCurve> = curves.iter().collect();
    curves.sort_by_key(|c| c.n_sites);
    let t_stars: Vec<f64> = curves
        .iter()
        .map(|c| scrambling_time(c, threshold).map(|s| s.t_star))
        .collect::<Result<_>>()?;
    let largest = *t_stars.last().ok_or(Error::TooFewPoints { found: 0, needed: 3 })?;
    let rows: Vec<ScalingRow> = curves
        .iter()
        .zip(&t_stars)
        .map(|(curve, &t_star)| {
            let fixed_time = match mode {
                FixedTimeMode::LargestN => largest,
                FixedTimeMode::PerN => t_star,
            };
            let value = value_at(&curve.times, &curve.values, fixed_time).ok_or_else(|| {
                Error::InvalidParameter(format!("time {fixed_time} outside the grid of N={}", curve.n_sites))
            })?;
            let std_error = value_at(&curve.times, &curve.std_errors, fixed_time).unwrap_or(f64::NAN);
            Ok(ScalingRow { n_sites: curve.n_sites, t_star, fixed_time, value, std_error })
        })
        .collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n_sites as f64, r.value)).collect();
    let power_law = fit_power_law(&points)?;
    let exponential = fit_exponential_decay(&points)?;
    let ln_n: Vec<f64> = rows.iter().map(|r| (r.n_sites as f64).ln()).collect();
    let log_time = linear_fit(&ln_n, &t_stars)?;
    Ok(ScalingReport { threshold, mode, rows, power_law, exponential, log_time })
}
