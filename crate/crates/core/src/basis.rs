//! Computational basis of a periodic spin-1/2 chain and the symmetry-reduced
//! basis of the zero-momentum, reflection-even sector.
//!
//! Site `i` (1-based) is stored in bit `i - 1` of a configuration. Sites are
//! periodic, so site `N + 1` is site 1. The symmetry group is the dihedral
//! group generated by the one-site translation `T` and the spatial reflection
//! `R` (site `i` ↦ site `N + 1 - i`); it has `2N` elements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest chain for which the NN and NNN sums visit every bond exactly once.
pub const MIN_SITES: usize = 5;

/// Default cap on the chain length (2^24 amplitudes per full-space vector).
pub const DEFAULT_SITE_CAP: usize = 24;

/// Spin configuration of an `n_sites` chain; bit `i` is site `i + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinConfiguration {
    bits: u32,
    n_sites: usize,
}

impl SpinConfiguration {
    /// Panics if `bits` does not fit in `n_sites` binary digits.
    pub fn new(bits: u32, n_sites: usize) -> Self {
        assert!((1..=32).contains(&n_sites), "n_sites must be in 1..=32");
        assert!(
            u64::from(bits) < (1u64 << n_sites),
            "bits {bits:#b} do not fit in {n_sites} sites"
        );
        Self { bits, n_sites }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn n_sites(self) -> usize {
        self.n_sites
    }

    /// Z eigenvalue of a 1-based site: +1 for bit 0, -1 for bit 1.
    pub fn z(self, site: usize) -> i32 {
        let bit = (self.bits >> ((site - 1) % self.n_sites)) & 1;
        1 - 2 * bit as i32
    }

    pub fn translate(self) -> Self {
        Self { bits: translate_bits(self.bits, self.n_sites), ..self }
    }

    pub fn reflect(self) -> Self {
        Self { bits: reflect_bits(self.bits, self.n_sites), ..self }
    }
}

#[inline]
fn mask(n_sites: usize) -> u32 {
    if n_sites >= 32 {
        u32::MAX
    } else {
        (1u32 << n_sites) - 1
    }
}

/// Cyclic shift: bit `i` of the result is bit `i - 1 (mod N)` of the input.
#[inline]
pub fn translate_bits(bits: u32, n_sites: usize) -> u32 {
    ((bits << 1) | (bits >> (n_sites - 1))) & mask(n_sites)
}

/// Spatial reflection: bit `i` of the result is bit `N - 1 - i` of the input.
#[inline]
pub fn reflect_bits(bits: u32, n_sites: usize) -> u32 {
    bits.reverse_bits() >> (32 - n_sites)
}

/// Calls `visit` with the image of `bits` under each of the `2N` group
/// elements: `T^j` for `j = 0..N`, then `T^j R`.
#[inline]
pub fn for_each_image(bits: u32, n_sites: usize, mut visit: impl FnMut(u32)) {
    let mut t = bits;
    let mut r = reflect_bits(bits, n_sites);
    for _ in 0..n_sites {
        visit(t);
        visit(r);
        t = translate_bits(t, n_sites);
        r = translate_bits(r, n_sites);
    }
}

/// Smallest integer in the orbit of `bits`.
#[inline]
pub fn representative(bits: u32, n_sites: usize) -> u32 {
    let mut best = bits;
    for_each_image(bits, n_sites, |b| best = best.min(b));
    best
}

/// Number of distinct configurations in the orbit of `bits`.
pub fn orbit_size(bits: u32, n_sites: usize) -> usize {
    let mut images = Vec::with_capacity(2 * n_sites);
    for_each_image(bits, n_sites, |b| images.push(b));
    images.sort_unstable();
    images.dedup();
    images.len()
}

/// Orthonormal basis of the `k = 0`, reflection-even sector.
///
/// The basis vector for representative `a` is `(1/norm_a) Σ_g g|a⟩`, which
/// equals the uniform superposition over the orbit of `a`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectorBasis {
    n_sites: usize,
    representatives: Vec<u32>,
    orbit_sizes: Vec<u32>,
    norms: Vec<f64>,
}

pub fn build_sector_basis(n_sites: usize) -> Result<SectorBasis> {
    build_sector_basis_with_cap(n_sites, DEFAULT_SITE_CAP)
}

pub fn build_sector_basis_with_cap(n_sites: usize, site_cap: usize) -> Result<SectorBasis> {
    check_sites(n_sites, site_cap)?;
    let group_order = (2 * n_sites) as f64;
    let mut representatives = Vec::new();
    let mut orbit_sizes = Vec::new();
    let mut norms = Vec::new();
    for bits in 0..(1u32 << n_sites) {
        if representative(bits, n_sites) != bits {
            continue;
        }
        // Every group element has character +1 here, so the group sum puts
        // weight |G|/|orbit| on each orbit member.
        let size = orbit_size(bits, n_sites);
        let norm = group_order / (size as f64).sqrt();
        if norm <= f64::EPSILON {
            continue;
        }
        representatives.push(bits);
        orbit_sizes.push(size as u32);
        norms.push(norm);
    }
    Ok(SectorBasis { n_sites, representatives, orbit_sizes, norms })
}

pub(crate) fn check_sites(n_sites: usize, site_cap: usize) -> Result<()> {
    if n_sites < MIN_SITES {
        return Err(Error::TooFewSites { n_sites, min: MIN_SITES });
    }
    if n_sites > site_cap || n_sites > 31 {
        return Err(Error::TooManySites { n_sites, cap: site_cap.min(31) });
    }
    Ok(())
}

impl SectorBasis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Always 0.
    pub fn momentum_index(&self) -> usize {
        0
    }

    /// Always +1.
    pub fn parity_sign(&self) -> i32 {
        1
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    pub fn representatives(&self) -> &[u32] {
        &self.representatives
    }

    pub fn orbit_sizes(&self) -> &[u32] {
        &self.orbit_sizes
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Sector index of the orbit containing `bits`.
    pub fn index_of(&self, bits: u32) -> Option<usize> {
        let rep = representative(bits, self.n_sites);
        self.representatives.binary_search(&rep).ok()
    }

    /// Dense full-space amplitudes of basis vector `index`.
    pub fn projected_vector(&self, index: usize) -> Vec<f64> {
        let n = self.n_sites;
        let mut v = vec![0.0; 1usize << n];
        for_each_image(self.representatives[index], n, |b| v[b as usize] += 1.0);
        let norm = self.norms[index];
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}
