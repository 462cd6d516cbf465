//! Scrambling diagnostics for the periodic NN+NNN mixed-field Ising chain:
//! symmetry-resolved level statistics, out-of-time-order correlators,
//! scrambling-time scaling and half-chain entanglement growth.

pub mod analysis;
pub mod basis;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod hamiltonian;
pub mod spectral;
pub mod state;
pub mod sweep;

pub use basis::{build_sector_basis, SectorBasis, SpinConfiguration};
pub use dynamics::{haar_state, otoc, otoc_curve, EngineKind, EvolutionEngine, KrylovOptions, OtocCurve, OtocRequest};
pub use entanglement::{entropy_curve, half_cut_entropy, paramagnetic_state, EntropyCurve};
pub use error::{Error, Result};
pub use hamiltonian::{
    build_full_hamiltonian, build_sector_hamiltonian, pauli_x, DenseSymmetricMatrix, ModelParams,
    SparseHamiltonian,
};
pub use spectral::{diagonalize, goe_reference, r_statistics, RStats, RStatsOptions, Spectrum};
pub use state::StateVector;
pub use sweep::{grid_argmax, r_heatmap, HeatmapGrid};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
