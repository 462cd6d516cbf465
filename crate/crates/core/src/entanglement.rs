//! Half-chain entanglement entropy after a quench from the paramagnet.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_times, EngineKind, EvolutionEngine, KrylovOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_full_hamiltonian, ModelParams};
use crate::state::StateVector;

const NORM_TOLERANCE: f64 = 1e-6;

/// `⊗_i |+⟩_i`: every amplitude equals `2^{-N/2}`.
pub fn paramagnetic_state(n_sites: usize) -> StateVector {
    let dim = 1usize << n_sites;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    StateVector::from_amplitudes(n_sites, vec![amp; dim]).expect("length is 2^N")
}

/// Schmidt values across the cut between sites `1..=cut` and the rest.
pub fn schmidt_values(state: &StateVector, cut: usize) -> Result<Vec<f64>> {
    let n = state.n_sites();
    if cut == 0 || cut >= n {
        return Err(Error::InvalidParameter(format!("cut {cut} outside 1..{n}")));
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let rows = 1usize << cut;
    let cols = 1usize << (n - cut);
    let amps = state.amplitudes();
    // Sites 1..=cut are the low bits of the index.
    let m = DMatrix::from_fn(rows, cols, |r, c| amps[r | (c << cut)]);
    Ok(m.singular_values().iter().copied().collect())
}

/// Von Neumann entropy `-Σ σ² ln σ²` in nats.
pub fn half_cut_entropy(state: &StateVector, cut: usize) -> Result<f64> {
    let sigma = schmidt_values(state, cut)?;
    Ok(sigma
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

pub fn default_cut(n_sites: usize) -> usize {
    n_sites / 2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub params: ModelParams,
    pub label: String,
    pub cut: usize,
    pub times: Vec<f64>,
    /// Entropies in nats.
    pub entropies: Vec<f64>,
}

impl EntropyCurve {
    /// Entropies in bits.
    pub fn entropies_bits(&self) -> Vec<f64> {
        self.entropies.iter().map(|s| s / std::f64::consts::LN_2).collect()
    }

    /// First time at which the entropy reaches `level`, linearly interpolated.
    pub fn first_reach(&self, level: f64) -> Option<f64> {
        crate::analysis::first_upward_crossing(&self.times, &self.entropies, level)
    }
}

pub fn entropy_curve(
    params: &ModelParams,
    label: &str,
    times: &[f64],
    cut: Option<usize>,
    engine: EngineKind,
    krylov: KrylovOptions,
) -> Result<EntropyCurve> {
    check_times(times)?;
    if times[0] != 0.0 {
        return Err(Error::InvalidParameter("entropy time grid must start at 0".into()));
    }
    let cut = cut.unwrap_or_else(|| default_cut(params.n_sites));
    let h = build_full_hamiltonian(params)?;
    let engine = EvolutionEngine::build(engine, h, krylov)?;
    let mut state = paramagnetic_state(params.n_sites);
    let mut now = 0.0;
    let mut entropies = Vec::with_capacity(times.len());
    for &t in times {
        engine.evolve_in_place(&mut state, t - now)?;
        now = t;
        entropies.push(half_cut_entropy(&state, cut)?);
    }
    Ok(EntropyCurve { params: *params, label: label.to_string(), cut, times: times.to_vec(), entropies })
}
