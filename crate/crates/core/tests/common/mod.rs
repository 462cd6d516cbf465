//! Brute-force references shared by the integration tests. Everything here is
//! built from explicit Kronecker products and dense matrices, independent of
//! the bit tricks and sector machinery in the library.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use spinscramble_core::basis::{reflect_bits, translate_bits};
use spinscramble_core::{ModelParams, StateVector};

pub type CMatrix = DMatrix<Complex64>;

fn pauli(name: char) -> DMatrix<f64> {
    match name {
        'x' => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        'z' => DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        _ => DMatrix::identity(2, 2),
    }
}

/// Single-site operator on site `site` (1-based). Site 1 is the least
/// significant tensor factor, so it is the rightmost Kronecker factor.
pub fn site_operator(name: char, site: usize, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(1, 1);
    for s in (1..=n).rev() {
        let factor = if s == site { pauli(name) } else { pauli('i') };
        out = out.kronecker(&factor);
    }
    out
}

pub fn dense_hamiltonian(p: &ModelParams) -> DMatrix<f64> {
    let n = p.n_sites;
    let z: Vec<_> = (1..=n).map(|s| site_operator('z', s, n)).collect();
    let dim = 1 << n;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n {
        let zz1 = &z[i] * &z[(i + 1) % n];
        let zz2 = &z[i] * &z[(i + 2) % n];
        h -= (zz1 + zz2 * p.lambda) / (1.0 + p.lambda);
        h -= site_operator('x', i + 1, n) * p.f;
        h -= &z[i] * p.g;
    }
    h
}

pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `e^{-iHt}` from the dense eigendecomposition.
pub fn propagator(h: &DMatrix<f64>, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = complexify(&eig.eigenvectors);
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    &v * phases * v.adjoint()
}

/// `C(t, r)` for one state from the Heisenberg-picture matrix `X_1(t)`.
pub fn otoc_dense(h: &DMatrix<f64>, n: usize, r: usize, t: f64, psi: &StateVector) -> f64 {
    let u = propagator(h, t);
    let x1t = u.adjoint() * complexify(&site_operator('x', 1, n)) * &u;
    let xr = complexify(&site_operator('x', r, n));
    let w = &x1t * &xr * &x1t * &xr;
    let v = DVector::from_column_slice(psi.amplitudes());
    1.0 - (v.adjoint() * w * &v)[(0, 0)].re
}

pub fn to_dvector(psi: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(psi.amplitudes())
}

/// Permutation matrix of a configuration map.
pub fn permutation(n: usize, map: impl Fn(u32) -> u32) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim as u32 {
        m[(map(b) as usize, b as usize)] = 1.0;
    }
    m
}

pub fn translation(n: usize) -> DMatrix<f64> {
    permutation(n, |b| translate_bits(b, n))
}

pub fn reflection(n: usize) -> DMatrix<f64> {
    permutation(n, |b| reflect_bits(b, n))
}

/// Applies a configuration map to a state: `(Pψ)[map(b)] = ψ[b]`.
pub fn permute_state(psi: &StateVector, map: impl Fn(u32) -> u32) -> StateVector {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    for (b, a) in psi.amplitudes().iter().enumerate() {
        out[map(b as u32) as usize] = *a;
    }
    StateVector::from_amplitudes(psi.n_sites(), out).unwrap()
}

/// Checks that every value in `sub` has a distinct partner in `full` within
/// `tol` (both sorted ascending). Returns the largest matched distance.
pub fn sub_multiset_distance(sub: &[f64], full: &[f64], tol: f64) -> Option<f64> {
    let mut used = vec![false; full.len()];
    let mut worst: f64 = 0.0;
    for &e in sub {
        let start = full.partition_point(|&x| x < e - tol);
        let slot = (start..full.len()).take_while(|&j| full[j] <= e + tol).find(|&j| !used[j])?;
        used[slot] = true;
        worst = worst.max((full[slot] - e).abs());
    }
    Some(worst)
}

/// Full spectrum of the dense Kronecker Hamiltonian, ascending.
pub fn full_spectrum(p: &ModelParams) -> Vec<f64> {
    let mut e: Vec<f64> = dense_hamiltonian(p).symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Trace (= rank) of every translation/reflection block projector.
///
/// Blocks: momentum `k = 0..N`, with `k = 0` and (even `N`) `k = N/2` split
/// further by reflection parity. Traces come from counting fixed points of
/// each group element, so no matrices are formed.
pub fn block_ranks(n: usize) -> Vec<((usize, i32), f64)> {
    let dim = 1u32 << n;
    let apply_t = |b: u32, j: usize| (0..j).fold(b, |x, _| translate_bits(x, n));
    let fix_t: Vec<f64> = (0..n).map(|j| (0..dim).filter(|&b| apply_t(b, j) == b).count() as f64).collect();
    let fix_tr: Vec<f64> =
        (0..n).map(|j| (0..dim).filter(|&b| apply_t(reflect_bits(b, n), j) == b).count() as f64).collect();
    let mut ranks = Vec::new();
    for k in 0..n {
        let phase = |j: usize| (2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64).cos();
        let momentum: f64 = (0..n).map(|j| phase(j) * fix_t[j]).sum::<f64>() / n as f64;
        let self_conjugate = k == 0 || 2 * k == n;
        if self_conjugate {
            for p in [1, -1] {
                let refl: f64 = (0..n).map(|j| phase(j) * fix_tr[j]).sum::<f64>() / n as f64;
                ranks.push(((k, p), 0.5 * (momentum + p as f64 * refl)));
            }
        } else {
            ranks.push(((k, 0), momentum));
        }
    }
    ranks
}
