//! Real-time evolution and out-of-time-order correlators.
//!
//! `C(t, r) = 1 - Re⟨X_1(t) X_r X_1(t) X_r⟩` with `X_1(t) = e^{iHt} X_1 e^{-iHt}`,
//! evaluated in Haar-random pure states on the full `2^N` space. Local `X`
//! operators break translation symmetry, so nothing here uses the sector basis.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_full_hamiltonian, pauli_x_in_place, DenseSymmetricMatrix, ModelParams, SparseHamiltonian};
use crate::spectral::diagonalize_with_vectors;
use crate::state::{inner, norm, StateVector};

/// Largest chain the dense eigenbasis engine accepts.
pub const EIGENBASIS_MAX_SITES: usize = 12;

/// Largest chain for which [`EngineKind::Auto`] picks the eigenbasis engine.
pub const AUTO_EIGENBASIS_MAX_SITES: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Haar-random state: i.i.d. standard complex Gaussians, normalized.
///
/// Generator contract: `ChaCha8Rng::seed_from_u64(seed)`; for each basis
/// index in increasing order draw the real part, then the imaginary part,
/// from `rand_distr::StandardNormal`.
pub fn haar_state(n_sites: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitudes: Vec<Complex64> = (0..1usize << n_sites)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let mut state = StateVector::from_amplitudes(n_sites, amplitudes).expect("length is 2^N");
    state.normalize();
    state
}

/// Default Haar sample count for a chain length.
pub fn default_samples(n_sites: usize) -> usize {
    if n_sites <= 12 {
        8
    } else {
        1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Auto,
    Eigen,
    Krylov,
}

impl EngineKind {
    pub fn resolve(self, n_sites: usize) -> EngineKind {
        match self {
            EngineKind::Auto if n_sites <= AUTO_EIGENBASIS_MAX_SITES => EngineKind::Eigen,
            EngineKind::Auto => EngineKind::Krylov,
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovOptions {
    /// Bound on the estimated error of each substep.
    pub tolerance: f64,
    pub max_krylov_dim: usize,
    /// Nominal substep Δt.
    pub step: f64,
    /// How many times a failing substep may be halved.
    pub max_halvings: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_krylov_dim: 30, step: 0.05, max_halvings: 10 }
    }
}

/// Short-iterate Lanczos propagator for `e^{-iHt}`.
#[derive(Clone, Debug)]
pub struct KrylovPropagator {
    h: SparseHamiltonian,
    options: KrylovOptions,
}

impl KrylovPropagator {
    pub fn new(h: SparseHamiltonian, options: KrylovOptions) -> Result<Self> {
        if !(options.tolerance > 0.0 && options.step > 0.0 && options.max_krylov_dim >= 2) {
            return Err(Error::InvalidParameter(format!("bad Krylov options {options:?}")));
        }
        Ok(Self { h, options })
    }

    pub fn hamiltonian(&self) -> &SparseHamiltonian {
        &self.h
    }

    fn evolve_in_place(&self, psi: &mut [Complex64], t: f64) -> Result<()> {
        if t == 0.0 {
            return Ok(());
        }
        let n_steps = (t.abs() / self.options.step).ceil().max(1.0) as usize;
        let dt = t / n_steps as f64;
        for _ in 0..n_steps {
            self.substep_adaptive(psi, dt, 0)?;
        }
        Ok(())
    }

    fn substep_adaptive(&self, psi: &mut [Complex64], dt: f64, halvings: usize) -> Result<()> {
        match self.lanczos_step(psi, dt) {
            Ok(next) => {
                psi.copy_from_slice(&next);
                Ok(())
            }
            Err(_) if halvings < self.options.max_halvings => {
                self.substep_adaptive(psi, 0.5 * dt, halvings + 1)?;
                self.substep_adaptive(psi, 0.5 * dt, halvings + 1)
            }
            Err(error) => Err(Error::KrylovBreakdown { halvings, error, dt }),
        }
    }

    /// One Lanczos exponential step. `Err` carries the error estimate when
    /// the Krylov space is exhausted before meeting the tolerance.
    fn lanczos_step(&self, psi: &[Complex64], dt: f64) -> std::result::Result<Vec<Complex64>, f64> {
        let dim = psi.len();
        let beta0 = norm(psi);
        if beta0 == 0.0 {
            return Ok(psi.to_vec());
        }
        let m_max = self.options.max_krylov_dim.min(dim);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max);
        basis.push(psi.iter().map(|a| a / beta0).collect());
        let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
        let mut betas: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![ZERO; dim];
        let mut last_error = f64::INFINITY;

        for j in 0..m_max {
            self.h.apply_into(&basis[j], &mut w);
            let alpha = inner(&basis[j], &w).re;
            alphas.push(alpha);
            // Full reorthogonalization against the whole basis.
            for _pass in 0..2 {
                for v in &basis {
                    let overlap = inner(v, &w);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= overlap * y);
                }
            }
            let beta = norm(&w);
            let coeffs = exp_tridiagonal(&alphas, &betas, dt);
            let happy = beta <= 1e-12 * (alpha.abs() + betas.last().copied().unwrap_or(0.0)).max(1.0);
            last_error = beta * coeffs[j].norm();
            if happy || last_error <= self.options.tolerance {
                let mut out = vec![ZERO; dim];
                for (v, c) in basis.iter().zip(&coeffs) {
                    let c = c * beta0;
                    out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
                }
                return Ok(out);
            }
            if j + 1 == m_max {
                break;
            }
            betas.push(beta);
            let next: Vec<Complex64> = w.iter().map(|x| x / beta).collect();
            basis.push(next);
        }
        Err(last_error)
    }
}

/// First column of `exp(-i T dt)` for the symmetric tridiagonal `T`.
fn exp_tridiagonal(alphas: &[f64], betas: &[f64], dt: f64) -> Vec<Complex64> {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i == j + 1 {
            betas[j]
        } else if j == i + 1 {
            betas[i]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|row| {
            (0..m)
                .map(|k| {
                    let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * dt);
                    phase * eig.eigenvectors[(row, k)] * eig.eigenvectors[(0, k)]
                })
                .sum()
        })
        .collect()
}

/// Exact propagation in the eigenbasis of a dense full-space Hamiltonian.
#[derive(Clone, Debug)]
pub struct EigenPropagator {
    n_sites: usize,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl EigenPropagator {
    pub fn from_sparse(h: &SparseHamiltonian) -> Result<Self> {
        if h.n_sites() > EIGENBASIS_MAX_SITES {
            return Err(Error::TooManySites { n_sites: h.n_sites(), cap: EIGENBASIS_MAX_SITES });
        }
        Self::from_dense(&h.to_dense(), h.n_sites())
    }

    pub fn from_dense(matrix: &DenseSymmetricMatrix, n_sites: usize) -> Result<Self> {
        let expected = 1usize << n_sites;
        if matrix.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: matrix.dim() });
        }
        let (spectrum, vectors) = diagonalize_with_vectors(matrix)?;
        Ok(Self { n_sites, energies: spectrum.energies().to_vec(), vectors })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn evolve_in_place(&self, psi: &mut [Complex64], t: f64) {
        let dim = psi.len();
        let re = nalgebra::DVector::from_iterator(dim, psi.iter().map(|a| a.re));
        let im = nalgebra::DVector::from_iterator(dim, psi.iter().map(|a| a.im));
        let cre = self.vectors.tr_mul(&re);
        let cim = self.vectors.tr_mul(&im);
        let mut rotated_re = nalgebra::DVector::zeros(dim);
        let mut rotated_im = nalgebra::DVector::zeros(dim);
        for k in 0..dim {
            let c = Complex64::new(cre[k], cim[k]) * Complex64::from_polar(1.0, -self.energies[k] * t);
            rotated_re[k] = c.re;
            rotated_im[k] = c.im;
        }
        let out_re = &self.vectors * rotated_re;
        let out_im = &self.vectors * rotated_im;
        for (k, a) in psi.iter_mut().enumerate() {
            *a = Complex64::new(out_re[k], out_im[k]);
        }
    }
}

/// Propagator for `e^{-iHt}` on full-space states.
#[derive(Clone, Debug)]
pub enum EvolutionEngine {
    Eigenbasis(EigenPropagator),
    Krylov(KrylovPropagator),
}

impl EvolutionEngine {
    pub fn krylov(h: SparseHamiltonian, options: KrylovOptions) -> Result<Self> {
        KrylovPropagator::new(h, options).map(Self::Krylov)
    }

    pub fn eigenbasis(h: &SparseHamiltonian) -> Result<Self> {
        EigenPropagator::from_sparse(h).map(Self::Eigenbasis)
    }

    pub fn from_dense(matrix: &DenseSymmetricMatrix, n_sites: usize) -> Result<Self> {
        EigenPropagator::from_dense(matrix, n_sites).map(Self::Eigenbasis)
    }

    pub fn build(kind: EngineKind, h: SparseHamiltonian, options: KrylovOptions) -> Result<Self> {
        match kind.resolve(h.n_sites()) {
            EngineKind::Eigen => Self::eigenbasis(&h),
            _ => Self::krylov(h, options),
        }
    }

    pub fn kind(&self) -> EngineKind {
        match self {
            Self::Eigenbasis(_) => EngineKind::Eigen,
            Self::Krylov(_) => EngineKind::Krylov,
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            Self::Eigenbasis(e) => e.n_sites,
            Self::Krylov(k) => k.h.n_sites(),
        }
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        let expected = 1usize << self.n_sites();
        if state.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: state.dim() });
        }
        Ok(())
    }

    /// `e^{-iHt}|ψ⟩`; `t` may be negative.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        let mut out = state.clone();
        self.evolve_in_place(&mut out, t)?;
        Ok(out)
    }

    pub fn evolve_in_place(&self, state: &mut StateVector, t: f64) -> Result<()> {
        self.check(state)?;
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite time {t}")));
        }
        match self {
            Self::Eigenbasis(e) => {
                e.evolve_in_place(state.amplitudes_mut(), t);
                Ok(())
            }
            Self::Krylov(k) => k.evolve_in_place(state.amplitudes_mut(), t),
        }
    }
}

fn check_site(r: usize, n_sites: usize) -> Result<()> {
    if r == 0 || r > n_sites {
        return Err(Error::SiteOutOfRange { site: r, n_sites });
    }
    Ok(())
}

/// `C(t, r)` in one pure state, via four propagations.
pub fn otoc(engine: &EvolutionEngine, r: usize, t: f64, state: &StateVector) -> Result<f64> {
    check_site(r, engine.n_sites())?;
    // φ = X_1(t) X_r ψ
    let mut phi = state.clone();
    pauli_x_in_place(r, &mut phi)?;
    heisenberg_x1(engine, &mut phi, t)?;
    // χ = X_r X_1(t) ψ
    let mut chi = state.clone();
    heisenberg_x1(engine, &mut chi, t)?;
    pauli_x_in_place(r, &mut chi)?;
    Ok(1.0 - chi.inner(&phi).re)
}

/// `v ← e^{iHt} X_1 e^{-iHt} v`.
fn heisenberg_x1(engine: &EvolutionEngine, v: &mut StateVector, t: f64) -> Result<()> {
    engine.evolve_in_place(v, t)?;
    pauli_x_in_place(1, v)?;
    engine.evolve_in_place(v, -t)
}

/// `C(t, r)` on an increasing time grid for one state. The forward legs are
/// carried along the grid, so each time point costs two backward propagations.
pub fn otoc_series(
    engine: &EvolutionEngine,
    r: usize,
    times: &[f64],
    state: &StateVector,
) -> Result<Vec<f64>> {
    check_site(r, engine.n_sites())?;
    check_times(times)?;
    let mut forward_psi = state.clone();
    let mut forward_xr = state.clone();
    pauli_x_in_place(r, &mut forward_xr)?;
    let mut now = 0.0;
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        engine.evolve_in_place(&mut forward_psi, t - now)?;
        engine.evolve_in_place(&mut forward_xr, t - now)?;
        now = t;
        // X_1(t)ψ and X_1(t)X_r ψ.
        let mut a = forward_psi.clone();
        pauli_x_in_place(1, &mut a)?;
        engine.evolve_in_place(&mut a, -t)?;
        let mut b = forward_xr.clone();
        pauli_x_in_place(1, &mut b)?;
        engine.evolve_in_place(&mut b, -t)?;
        // ⟨χ|φ⟩ = ⟨X_1(t)ψ| X_r |X_1(t) X_r ψ⟩
        pauli_x_in_place(r, &mut a)?;
        values.push(1.0 - a.inner(&b).re);
    }
    Ok(values)
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Haar-averaged OTOC curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocCurve {
    pub params: ModelParams,
    pub r: usize,
    pub n_sites: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Standard error of the sample mean; NaN for a single sample.
    pub std_errors: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocRequest {
    pub r: usize,
    pub n_samples: usize,
    /// Sample `k` uses the Haar state of seed `seed + k`.
    pub seed: u64,
    pub engine: EngineKind,
    pub krylov: KrylovOptions,
}

pub fn otoc_curve(params: &ModelParams, times: &[f64], request: &OtocRequest) -> Result<OtocCurve> {
    if request.n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    check_times(times)?;
    check_site(request.r, params.n_sites)?;
    let h = build_full_hamiltonian(params)?;
    let engine = EvolutionEngine::build(request.engine, h, request.krylov)?;
    let samples: Vec<Vec<f64>> = (0..request.n_samples as u64)
        .into_par_iter()
        .map(|k| {
            let psi = haar_state(params.n_sites, request.seed.wrapping_add(k));
            otoc_series(&engine, request.r, times, &psi)
        })
        .collect::<Result<_>>()?;
    let (values, std_errors) = mean_and_stderr(&samples, times.len());
    Ok(OtocCurve {
        params: *params,
        r: request.r,
        n_sites: params.n_sites,
        n_samples: request.n_samples,
        seed: request.seed,
        times: times.to_vec(),
        values,
        std_errors,
    })
}

fn mean_and_stderr(samples: &[Vec<f64>], len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    let mut means = Vec::with_capacity(len);
    let mut errors = Vec::with_capacity(len);
    for i in 0..len {
        let mean = samples.iter().map(|s| s[i]).sum::<f64>() / n;
        let error = if samples.len() > 1 {
            let var = samples.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            f64::NAN
        };
        means.push(mean);
        errors.push(error);
    }
    (means, errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::pauli_x;

    #[test]
    fn haar_state_is_deterministic_and_normalized() {
        let a = haar_state(6, 42);
        let b = haar_state(6, 42);
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert_ne!(a, haar_state(6, 43));
    }

    #[test]
    fn haar_amplitudes_have_zero_mean() {
        let n = 6;
        let seeds = 1000;
        let mut sum = vec![Complex64::new(0.0, 0.0); 1 << n];
        for seed in 0..seeds {
            for (s, a) in sum.iter_mut().zip(haar_state(n, seed).amplitudes()) {
                *s += a;
            }
        }
        // Each amplitude has variance 1/2^N per component pair.
        let stderr = ((1u64 << n) as f64 * seeds as f64).powf(-0.5);
        for s in &sum {
            let mean = s / seeds as f64;
            assert!(mean.norm() < 5.0 * stderr, "mean {mean} vs stderr {stderr}");
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let h = build_full_hamiltonian(&ModelParams::nnn(7)).unwrap();
        let engine = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(7, 1);
        assert_eq!(engine.evolve(&psi, 0.0).unwrap(), psi);
    }

    #[test]
    fn diagonal_hamiltonian_only_adds_phases() {
        let params = ModelParams::new(0.6, 0.0, 0.4, 7).unwrap();
        let h = build_full_hamiltonian(&params).unwrap();
        let diag = h.diagonal().to_vec();
        let engine = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(7, 3);
        let t = 1.7;
        let out = engine.evolve(&psi, t).unwrap();
        for (c, (a, b)) in psi.amplitudes().iter().zip(out.amplitudes()).enumerate() {
            let expected = a * Complex64::from_polar(1.0, -diag[c] * t);
            assert!((b - expected).norm() < 1e-9);
            assert!((a.norm() - b.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn krylov_matches_eigenbasis() {
        let h = build_full_hamiltonian(&ModelParams::nnn(8)).unwrap();
        let exact = EvolutionEngine::eigenbasis(&h).unwrap();
        let krylov = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(8, 11);
        let a = exact.evolve(&psi, 1.0).unwrap();
        let b = krylov.evolve(&psi, 1.0).unwrap();
        assert!(a.distance(&b) < 1e-6, "distance {}", a.distance(&b));
    }

    #[test]
    fn backward_evolution_reverses() {
        let h = build_full_hamiltonian(&ModelParams::nn(9)).unwrap();
        let engine = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(9, 5);
        let there = engine.evolve(&psi, 3.0).unwrap();
        let back = engine.evolve(&there, -3.0).unwrap();
        assert!(back.distance(&psi) < 1e-6);
    }

    #[test]
    fn otoc_vanishes_at_zero_time() {
        let h = build_full_hamiltonian(&ModelParams::nnn(8)).unwrap();
        let engine = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(8, 2);
        for r in 1..=8 {
            assert!(otoc(&engine, r, 0.0, &psi).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_light_cone() {
        let params = ModelParams::new(0.0, 0.0, 0.0, 8).unwrap();
        let h = build_full_hamiltonian(&params).unwrap();
        let engine = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(8, 9);
        for t in [0.3, 1.0, 4.0] {
            assert!(otoc(&engine, 4, t, &psi).unwrap().abs() < 1e-8);
        }
        // Inside the light cone the correlator does move.
        assert!(otoc(&engine, 2, 0.7, &psi).unwrap() > 1e-3);
    }

    #[test]
    fn series_matches_pointwise() {
        let h = build_full_hamiltonian(&ModelParams::nnn(8)).unwrap();
        let engine = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(8, 4);
        let times = [0.0, 0.5, 1.25, 2.0];
        let series = otoc_series(&engine, 8, &times, &psi).unwrap();
        for (t, c) in times.iter().zip(&series) {
            let direct = otoc(&engine, 8, *t, &psi).unwrap();
            assert!((c - direct).abs() < 1e-7, "t={t}: {c} vs {direct}");
        }
    }

    #[test]
    fn site_and_time_validation() {
        let h = build_full_hamiltonian(&ModelParams::nnn(6)).unwrap();
        let engine = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(6, 0);
        assert!(matches!(otoc(&engine, 7, 1.0, &psi), Err(Error::SiteOutOfRange { .. })));
        assert!(otoc_series(&engine, 2, &[0.0, 1.0, 0.5], &psi).is_err());
        let wrong = haar_state(7, 0);
        assert!(matches!(engine.evolve(&wrong, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn eigenbasis_rejects_large_chains() {
        let h = build_full_hamiltonian(&ModelParams::nnn(13)).unwrap();
        assert!(matches!(EvolutionEngine::eigenbasis(&h), Err(Error::TooManySites { .. })));
    }

    #[test]
    fn otoc_equals_commutator_norm() {
        // For involutions, C = ½⟨|[X_1(t), X_r]|²⟩, so C ≥ 0 up to rounding.
        let h = build_full_hamiltonian(&ModelParams::nnn(7)).unwrap();
        let engine = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(7, 8);
        let t = 1.3;
        let mut w = psi.clone();
        heisenberg_x1(&engine, &mut w, t).unwrap();
        let w = pauli_x(3, &w).unwrap();
        let mut v = pauli_x(3, &psi).unwrap();
        heisenberg_x1(&engine, &mut v, t).unwrap();
        let commutator: Vec<Complex64> =
            w.amplitudes().iter().zip(v.amplitudes()).map(|(a, b)| b - a).collect();
        let half_norm = 0.5 * norm(&commutator).powi(2);
        let c = otoc(&engine, 3, t, &psi).unwrap();
        assert!((c - half_norm).abs() < 1e-9, "{c} vs {half_norm}");
    }
}
