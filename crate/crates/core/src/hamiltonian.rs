//! The NN+NNN mixed-field Ising chain
//!
//! ```text
//! H = -1/(1+λ) (Σ Z_i Z_{i+1} + λ Σ Z_i Z_{i+2}) - f Σ X_i - g Σ Z_i
//! ```
//!
//! on a periodic ring of `N` sites, as a dense matrix in the `k = 0`,
//! reflection-even sector and as a matrix-free operator on the full space.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{check_sites, SectorBasis, DEFAULT_SITE_CAP};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Below this dimension the sparse apply runs serially.
const PARALLEL_APPLY_MIN_DIM: usize = 1 << 14;

/// Couplings and chain length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// NNN coupling λ.
    pub lambda: f64,
    /// Transverse field.
    pub f: f64,
    /// Longitudinal field.
    pub g: f64,
    pub n_sites: usize,
}

impl ModelParams {
    pub fn new(lambda: f64, f: f64, g: f64, n_sites: usize) -> Result<Self> {
        let params = Self { lambda, f, g, n_sites };
        params.validate()?;
        Ok(params)
    }

    /// Nearest-neighbour Ising preset `(λ, f, g) = (0, 1.05, 0.5)`.
    pub fn nn(n_sites: usize) -> Self {
        Self { lambda: 0.0, f: 1.05, g: 0.5, n_sites }
    }

    /// Next-nearest-neighbour preset `(λ, f, g) = (0.9, 0.84, 1.0)`.
    pub fn nnn(n_sites: usize) -> Self {
        Self { lambda: 0.9, f: 0.84, g: 1.0, n_sites }
    }

    pub fn with_sites(self, n_sites: usize) -> Self {
        Self { n_sites, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.f.is_finite() && self.g.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite couplings {self:?}")));
        }
        if 1.0 + self.lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "1 + lambda must be positive (lambda = {})",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Diagonal (Z-only) energy of a configuration.
    #[inline]
    pub fn diagonal_energy(&self, bits: u32) -> f64 {
        let n = self.n_sites as i64;
        let mask = ((1u64 << n) - 1) as u32;
        let rot = |k: usize| ((bits >> k) | (bits << (self.n_sites - k))) & mask;
        // Σ z_i z_{i+k} = N - 2·(number of anti-aligned pairs).
        let nn = n - 2 * i64::from((bits ^ rot(1)).count_ones());
        let nnn = n - 2 * i64::from((bits ^ rot(2)).count_ones());
        let mag = n - 2 * i64::from(bits.count_ones());
        -(nn as f64 + self.lambda * nnn as f64) / (1.0 + self.lambda) - self.g * mag as f64
    }

    /// Triangle-inequality bound on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        let n = self.n_sites as f64;
        n * (1.0 + self.lambda.abs()) / (1.0 + self.lambda) + n * self.f.abs() + n * self.g.abs()
    }
}

/// Real symmetric matrix, assembled so that `m[(i, j)] == m[(j, i)]` bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSymmetricMatrix(DMatrix<f64>);

impl DenseSymmetricMatrix {
    /// Fails unless `matrix` is square and exactly symmetric.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..i {
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(Error::InvalidParameter(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self(matrix))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

/// Matrix elements of H between the normalized orbit states of `basis`.
///
/// For representatives `a`, `b` with orbit sizes `O_a`, `O_b`, a single spin
/// flip contributes `-f · n(b→a) · sqrt(O_b / O_a)`, where `n(b→a)` counts the
/// sites whose flip sends `b` into the orbit of `a`.
pub fn build_sector_hamiltonian(
    params: &ModelParams,
    basis: &SectorBasis,
) -> Result<DenseSymmetricMatrix> {
    params.validate()?;
    if basis.n_sites() != params.n_sites {
        return Err(Error::DimensionMismatch { expected: params.n_sites, found: basis.n_sites() });
    }
    let n = params.n_sites;
    let dim = basis.dim();
    let reps = basis.representatives();
    let sizes = basis.orbit_sizes();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (b, &rep_b) in reps.iter().enumerate() {
        m[(b, b)] += params.diagonal_energy(rep_b);
        for site in 0..n {
            let flipped = rep_b ^ (1 << site);
            let a = basis.index_of(flipped).expect("orbit of a flipped representative is in the basis");
            // Each unordered pair is filled once, from its larger index.
            if a > b {
                continue;
            }
            let value = -params.f * (f64::from(sizes[b]) / f64::from(sizes[a])).sqrt();
            m[(a, b)] += value;
            if a != b {
                m[(b, a)] += value;
            }
        }
    }
    Ok(DenseSymmetricMatrix(m))
}

/// Matrix-free Hamiltonian on the full `2^N` space: a stored diagonal plus
/// the `-f X_i` single-bit flips.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    params: ModelParams,
    diagonal: Vec<f64>,
}

pub fn build_full_hamiltonian(params: &ModelParams) -> Result<SparseHamiltonian> {
    build_full_hamiltonian_with_cap(params, DEFAULT_SITE_CAP)
}

pub fn build_full_hamiltonian_with_cap(
    params: &ModelParams,
    site_cap: usize,
) -> Result<SparseHamiltonian> {
    params.validate()?;
    check_sites(params.n_sites, site_cap)?;
    let dim = 1u32 << params.n_sites;
    let diagonal = (0..dim).map(|c| params.diagonal_energy(c)).collect();
    Ok(SparseHamiltonian { params: *params, diagonal })
}

impl SparseHamiltonian {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `out = H · input`. Both slices must have length `2^N`.
    pub fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(input.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let n = self.params.n_sites;
        let f = self.params.f;
        let row = |c: usize| {
            let mut flips = Complex64::new(0.0, 0.0);
            for site in 0..n {
                flips += input[c ^ (1 << site)];
            }
            input[c] * self.diagonal[c] - flips * f
        };
        if self.dim() >= PARALLEL_APPLY_MIN_DIM {
            out.par_iter_mut().enumerate().for_each(|(c, o)| *o = row(c));
        } else {
            out.iter_mut().enumerate().for_each(|(c, o)| *o = row(c));
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_state(state)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(state.amplitudes(), &mut out);
        StateVector::from_amplitudes(self.n_sites(), out)
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<Complex64> {
        let h_psi = self.apply(state)?;
        Ok(state.inner(&h_psi))
    }

    pub(crate) fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        Ok(())
    }

    /// Dense `2^N × 2^N` matrix, assembled from the same element rules.
    pub fn to_dense(&self) -> DenseSymmetricMatrix {
        let dim = self.dim();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for c in 0..dim {
            m[(c, c)] = self.diagonal[c];
            for site in 0..self.params.n_sites {
                m[(c ^ (1 << site), c)] = -self.params.f;
            }
        }
        DenseSymmetricMatrix(m)
    }
}

/// Flips bit `site - 1` of every amplitude index.
pub fn pauli_x(site: usize, state: &StateVector) -> Result<StateVector> {
    let mut out = state.clone();
    pauli_x_in_place(site, &mut out)?;
    Ok(out)
}

pub fn pauli_x_in_place(site: usize, state: &mut StateVector) -> Result<()> {
    let n_sites = state.n_sites();
    if site == 0 || site > n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let bit = 1usize << (site - 1);
    let amps = state.amplitudes_mut();
    for c in 0..amps.len() {
        if c & bit == 0 {
            amps.swap(c, c | bit);
        }
    }
    Ok(())
}

/// `Z_site` applied to the state (sign flip on bit = 1).
pub fn pauli_z(site: usize, state: &StateVector) -> Result<StateVector> {
    let n_sites = state.n_sites();
    if site == 0 || site > n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let bit = 1usize << (site - 1);
    let mut out = state.clone();
    for (c, a) in out.amplitudes_mut().iter_mut().enumerate() {
        if c & bit != 0 {
            *a = -*a;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_sector_basis;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Term-by-term classical NN Ising energy with field, no NNN machinery.
    fn nn_only_energy(bits: u32, n: usize, g: f64) -> f64 {
        let z = |i: usize| if (bits >> (i % n)) & 1 == 0 { 1.0 } else { -1.0 };
        let zz: f64 = (0..n).map(|i| z(i) * z(i + 1)).sum();
        let zsum: f64 = (0..n).map(z).sum();
        -zz - g * zsum
    }

    #[test]
    fn lambda_zero_reduces_to_nn_ising() {
        let params = ModelParams::new(0.0, 0.7, 0.3, 9).unwrap();
        for bits in 0..(1u32 << 9) {
            let e = params.diagonal_energy(bits);
            assert_eq!(e, nn_only_energy(bits, 9, 0.3));
        }
    }

    #[test]
    fn classical_limit_is_diagonal() {
        let params = ModelParams::new(0.0, 0.0, 0.0, 7).unwrap();
        let basis = build_sector_basis(7).unwrap();
        let h = build_sector_hamiltonian(&params, &basis).unwrap();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if i != j {
                    assert_eq!(h.get(i, j), 0.0);
                }
            }
        }
        assert_eq!(h.get(0, 0), -7.0);
        assert_eq!(h.get(h.dim() - 1, h.dim() - 1), -7.0);
        let min = (0..h.dim()).map(|i| h.get(i, i)).fold(f64::INFINITY, f64::min);
        assert_eq!(min, -7.0);
    }

    #[test]
    fn apply_on_all_up_state() {
        let params = ModelParams::new(0.0, 1.0, 0.0, 6).unwrap();
        let h = build_full_hamiltonian(&params).unwrap();
        let out = h.apply(&StateVector::basis_state(6, 0)).unwrap();
        assert_eq!(out.amplitudes()[0], c(-6.0));
        for site in 0..6 {
            assert_eq!(out.amplitudes()[1 << site], c(-1.0));
        }
        let nonzero = out.amplitudes().iter().filter(|a| a.norm() > 0.0).count();
        assert_eq!(nonzero, 7);
    }

    #[test]
    fn full_trace_vanishes() {
        for params in [ModelParams::nn(8), ModelParams::nnn(8), ModelParams::new(0.3, 2.0, 0.0, 8).unwrap()] {
            let h = build_full_hamiltonian(&params).unwrap();
            let trace: f64 = h.diagonal().iter().sum();
            assert!(trace.abs() < 1e-10, "trace {trace}");
        }
    }

    #[test]
    fn sector_matrix_is_exactly_symmetric() {
        let basis = build_sector_basis(10).unwrap();
        let h = build_sector_hamiltonian(&ModelParams::nnn(10), &basis).unwrap();
        DenseSymmetricMatrix::new(h.into_matrix()).expect("exact symmetry");
    }

    #[test]
    fn sector_matches_projection_of_full_matrix() {
        for n in 5..=9 {
            let params = ModelParams::new(0.45, 0.8, 0.6, n).unwrap();
            let basis = build_sector_basis(n).unwrap();
            let sector = build_sector_hamiltonian(&params, &basis).unwrap();
            let full = build_full_hamiltonian(&params).unwrap().to_dense();
            let vectors: Vec<_> = (0..basis.dim()).map(|i| basis.projected_vector(i)).collect();
            for (a, va) in vectors.iter().enumerate() {
                let hva = full.as_matrix() * nalgebra::DVector::from_column_slice(va);
                for (b, vb) in vectors.iter().enumerate() {
                    let elem: f64 = vb.iter().zip(hva.iter()).map(|(x, y)| x * y).sum();
                    assert!((elem - sector.get(b, a)).abs() < 1e-12, "N={n} ({b},{a})");
                }
            }
        }
    }

    #[test]
    fn mismatched_basis_rejected() {
        let basis = build_sector_basis(6).unwrap();
        let err = build_sector_hamiltonian(&ModelParams::nnn(7), &basis).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn invalid_lambda_rejected() {
        assert!(ModelParams::new(-1.0, 1.0, 1.0, 6).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0, 6).is_err());
    }

    #[test]
    fn full_cap_enforced() {
        let err = build_full_hamiltonian_with_cap(&ModelParams::nnn(12), 10).unwrap_err();
        assert!(matches!(err, Error::TooManySites { .. }));
    }

    #[test]
    fn pauli_x_flips_lowest_bit_for_site_one() {
        let psi = StateVector::basis_state(5, 0);
        let out = pauli_x(1, &psi).unwrap();
        assert_eq!(out.amplitudes()[1], c(1.0));
        assert_eq!(pauli_x(1, &out).unwrap(), psi);
        assert!(matches!(pauli_x(0, &psi), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(pauli_x(6, &psi), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn sparse_action_has_at_most_n_plus_one_terms() {
        let h = build_full_hamiltonian(&ModelParams::nnn(8)).unwrap();
        for bits in [0u32, 0b1011_0110, 255] {
            let out = h.apply(&StateVector::basis_state(8, bits)).unwrap();
            assert!(out.amplitudes().iter().filter(|a| a.norm() > 0.0).count() <= 9);
        }
    }
}
