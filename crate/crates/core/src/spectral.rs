//! Diagonalization and level-spacing statistics.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::DenseSymmetricMatrix;

/// Large-matrix GOE value of ⟨r⟩.
pub const GOE_MEAN_R: f64 = 0.5307;
/// GOE value of ⟨r⟩ as commonly quoted to two digits.
pub const GOE_MEAN_R_ROUNDED: f64 = 0.54;
/// Poisson (integrable) value `2 ln 2 - 1`.
pub const POISSON_MEAN_R: f64 = 0.386_294_361_119_890_6;

const MAX_QR_ITERATIONS: usize = 10_000;

/// Reference ⟨r⟩ values for chaotic and integrable spectra.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub goe: f64,
    pub goe_rounded: f64,
    /// Three-level surmise `4 - 2√3`.
    pub goe_surmise: f64,
    pub poisson: f64,
}

pub fn goe_reference() -> ReferenceValues {
    ReferenceValues {
        goe: GOE_MEAN_R,
        goe_rounded: GOE_MEAN_R_ROUNDED,
        goe_surmise: 4.0 - 2.0 * 3f64.sqrt(),
        poisson: POISSON_MEAN_R,
    }
}

/// Wigner surmise `P(s) = (π/2) s exp(-π s² / 4)` for unit mean spacing.
pub fn wigner_surmise(s: f64) -> f64 {
    use std::f64::consts::PI;
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

/// Poisson spacing density `exp(-s)`.
pub fn poisson_spacing(s: f64) -> f64 {
    (-s).exp()
}

/// Ascending eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    energies: Vec<f64>,
}

impl Spectrum {
    /// Sorts the input; rejects non-finite values.
    pub fn from_unsorted(mut energies: Vec<f64>) -> Result<Self> {
        if let Some(bad) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite energy {bad}")));
        }
        energies.sort_by(f64::total_cmp);
        Ok(Self { energies })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn width(&self) -> f64 {
        match (self.energies.first(), self.energies.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

/// Eigenvalues only.
pub fn diagonalize(matrix: &DenseSymmetricMatrix) -> Result<Spectrum> {
    let m = matrix.as_matrix();
    let dim = m.nrows();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let values = m.symmetric_eigenvalues();
    // The QR sweep has no failure signal on this path; the trace is the cheap
    // invariant that a failed sweep breaks.
    let residual = (values.sum() - m.trace()).abs();
    let scale = m.norm().max(1.0);
    if values.iter().any(|x| !x.is_finite()) || residual > 1e-8 * scale * (dim as f64).sqrt() {
        return Err(Error::NoConvergence { dimension: dim, residual });
    }
    Spectrum::from_unsorted(values.iter().copied().collect())
}

/// Eigenvalues with orthonormal eigenvectors as columns, both in ascending order.
pub fn diagonalize_with_vectors(matrix: &DenseSymmetricMatrix) -> Result<(Spectrum, DMatrix<f64>)> {
    let m = matrix.as_matrix();
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_QR_ITERATIONS * dim.max(1))
        .ok_or(Error::NoConvergence { dimension: dim, residual: f64::NAN })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);

    let scale = m.norm().max(1.0);
    let hv = m * &vectors;
    for (c, e) in energies.iter().enumerate() {
        let residual = (hv.column(c) - vectors.column(c) * *e).norm();
        if residual > 1e-8 * scale {
            return Err(Error::NoConvergence { dimension: dim, residual });
        }
    }
    Ok((Spectrum { energies }, vectors))
}

/// Options for [`r_statistics`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RStatsOptions {
    /// Spacings at or below `degeneracy_tol · width` merge their levels.
    pub degeneracy_tol: f64,
    /// Fraction of levels dropped from each spectral edge.
    pub trim_fraction: f64,
    pub histogram_bins: usize,
    /// Upper edge of the histogram in units of the mean spacing.
    pub histogram_max: f64,
}

impl Default for RStatsOptions {
    fn default() -> Self {
        Self { degeneracy_tol: 1e-10, trim_fraction: 0.0, histogram_bins: 50, histogram_max: 4.0 }
    }
}

/// Histogram of spacings normalized to unit mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Spacings beyond the last edge.
    pub overflow: usize,
}

impl SpacingHistogram {
    fn build(normalized: &[f64], bins: usize, max: f64) -> Self {
        let width = max / bins as f64;
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0; bins];
        let mut overflow = 0;
        for &s in normalized {
            let bin = (s / width).floor() as usize;
            if bin < bins {
                counts[bin] += 1;
            } else {
                overflow += 1;
            }
        }
        Self { edges, counts, overflow }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.overflow
    }

    /// Probability density per bin (integrates to the in-range fraction).
    pub fn density(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c as f64 / (total * (e[1] - e[0])))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RStats {
    pub r_values: Vec<f64>,
    pub mean_r: f64,
    /// Retained spacings in energy units.
    pub spacings: Vec<f64>,
    pub mean_spacing: f64,
    pub histogram: SpacingHistogram,
}

impl RStats {
    /// Fraction of normalized spacings below `cutoff` mean spacings.
    pub fn small_spacing_fraction(&self, cutoff: f64) -> f64 {
        let small = self.spacings.iter().filter(|&&s| s / self.mean_spacing < cutoff).count();
        small as f64 / self.spacings.len() as f64
    }
}

pub fn r_statistics(spectrum: &Spectrum, options: &RStatsOptions) -> Result<RStats> {
    let width = spectrum.width();
    if spectrum.len() >= 2 && width <= 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    let tol = options.degeneracy_tol * width;

    let mut levels: Vec<f64> = Vec::with_capacity(spectrum.len());
    for &e in spectrum.energies() {
        match levels.last() {
            Some(&last) if e - last <= tol => {}
            _ => levels.push(e),
        }
    }
    let trim = (options.trim_fraction.clamp(0.0, 0.5) * levels.len() as f64).floor() as usize;
    let levels = &levels[trim..levels.len() - trim];
    if levels.len() < 3 {
        return Err(Error::TooFewLevels { found: levels.len(), needed: 3 });
    }

    let spacings: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let r_values: Vec<f64> = spacings
        .windows(2)
        .map(|w| w[0].min(w[1]) / w[0].max(w[1]))
        .collect();
    let mean_r = r_values.iter().sum::<f64>() / r_values.len() as f64;
    let mean_spacing = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let normalized: Vec<f64> = spacings.iter().map(|s| s / mean_spacing).collect();
    let histogram =
        SpacingHistogram::build(&normalized, options.histogram_bins.max(1), options.histogram_max);
    Ok(RStats { r_values, mean_r, spacings, mean_spacing, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spectrum(e: &[f64]) -> Spectrum {
        Spectrum::from_unsorted(e.to_vec()).unwrap()
    }

    fn dense(rows: &[&[f64]]) -> DenseSymmetricMatrix {
        let n = rows.len();
        DenseSymmetricMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn diagonal_matrix_spectrum() {
        let m = dense(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        assert_eq!(diagonalize(&m).unwrap().energies(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = dense(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = diagonalize(&m).unwrap();
        assert!((s.energies()[0] + 1.0).abs() < 1e-14);
        assert!((s.energies()[1] - 1.0).abs() < 1e-14);
        let (s2, v) = diagonalize_with_vectors(&m).unwrap();
        assert!((s2.energies()[0] + 1.0).abs() < 1e-14);
        assert!((v[(0, 0)].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn equally_spaced_levels() {
        let stats = r_statistics(&spectrum(&[0.0, 1.0, 2.0, 3.0, 4.0]), &RStatsOptions::default()).unwrap();
        assert_eq!(stats.r_values, vec![1.0, 1.0, 1.0]);
        assert_eq!(stats.mean_r, 1.0);
    }

    #[test]
    fn three_levels_single_ratio() {
        let stats = r_statistics(&spectrum(&[0.0, 1.0, 3.0]), &RStatsOptions::default()).unwrap();
        assert_eq!(stats.spacings, vec![1.0, 2.0]);
        assert_eq!(stats.r_values, vec![0.5]);
    }

    #[test]
    fn degenerate_levels_are_merged() {
        let stats = r_statistics(&spectrum(&[0.0, 1.0, 1.0, 3.0]), &RStatsOptions::default()).unwrap();
        assert_eq!(stats.r_values, vec![0.5]);
    }

    #[test]
    fn error_paths() {
        let opts = RStatsOptions::default();
        assert!(matches!(r_statistics(&spectrum(&[2.0, 2.0, 2.0]), &opts), Err(Error::DegenerateSpectrum)));
        assert!(matches!(r_statistics(&spectrum(&[0.0, 1.0]), &opts), Err(Error::TooFewLevels { .. })));
        assert!(matches!(
            r_statistics(&spectrum(&[0.0, 1.0, 1.0 + 1e-13]), &opts),
            Err(Error::TooFewLevels { .. })
        ));
    }

    #[test]
    fn references_ordered() {
        let refs = goe_reference();
        assert_eq!(refs.goe, 0.5307);
        assert_eq!(refs.goe_rounded, 0.54);
        assert!((refs.poisson - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!(refs.goe > refs.poisson);
    }

    #[test]
    fn histogram_counts_every_spacing() {
        let e: Vec<f64> = (0..200).map(|i| (i as f64).powf(1.3)).collect();
        let stats = r_statistics(&spectrum(&e), &RStatsOptions::default()).unwrap();
        assert_eq!(stats.histogram.total(), 199);
        assert_eq!(stats.histogram.edges.len(), 51);
    }

    #[test]
    fn surmise_densities_normalized() {
        let ds = 1e-3;
        let wig: f64 = (0..20_000).map(|i| wigner_surmise((i as f64 + 0.5) * ds) * ds).sum();
        let poi: f64 = (0..40_000).map(|i| poisson_spacing((i as f64 + 0.5) * ds) * ds).sum();
        assert!((wig - 1.0).abs() < 1e-6);
        assert!((poi - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn affine_invariance(
            gaps in proptest::collection::vec(0.01f64..1.0, 5..60),
            a in 0.01f64..100.0,
            b in -100.0f64..100.0,
        ) {
            let levels: Vec<f64> = gaps.iter().scan(0.0, |acc, g| { *acc += g; Some(*acc) }).collect();
            let mapped: Vec<f64> = levels.iter().map(|e| a * e + b).collect();
            let r1 = r_statistics(&spectrum(&levels), &RStatsOptions::default()).unwrap();
            let r2 = r_statistics(&spectrum(&mapped), &RStatsOptions::default()).unwrap();
            prop_assert_eq!(r1.r_values.len(), r2.r_values.len());
            // Rounding of a·E + b perturbs each spacing by ~eps·|E|.
            for (x, y) in r1.r_values.iter().zip(&r2.r_values) {
                prop_assert!((x - y).abs() < 1e-10, "{} vs {}", x, y);
            }
        }

        #[test]
        fn r_values_in_unit_interval(raw in proptest::collection::vec(-10.0f64..10.0, 4..80)) {
            if let Ok(stats) = r_statistics(&spectrum(&raw), &RStatsOptions::default()) {
                prop_assert!(stats.r_values.iter().all(|r| (0.0..=1.0).contains(r)));
                let mean = stats.r_values.iter().sum::<f64>() / stats.r_values.len() as f64;
                prop_assert!((mean - stats.mean_r).abs() < 1e-15);
            }
        }
    }
}
