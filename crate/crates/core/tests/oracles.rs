mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinscramble_core::basis::{reflect_bits, translate_bits};
use spinscramble_core::hamiltonian::pauli_z;
use spinscramble_core::{
    build_full_hamiltonian, build_sector_basis, build_sector_hamiltonian, diagonalize, haar_state, otoc, pauli_x,
    EngineKind, EvolutionEngine, KrylovOptions, ModelParams,
};

fn random_params(rng: &mut impl Rng, n: usize) -> ModelParams {
    ModelParams::new(rng.random_range(0.0..1.5), rng.random_range(0.2..1.6), rng.random_range(-1.0..1.5), n).unwrap()
}

#[test]
fn block_projector_ranks_sum_to_hilbert_dimension() {
    for n in 5..=10 {
        let ranks = block_ranks(n);
        let total: f64 = ranks.iter().map(|r| r.1).sum();
        assert!((total - (1u64 << n) as f64).abs() < 1e-9, "N={n}: {total}");
        for ((k, p), rank) in &ranks {
            assert!((rank - rank.round()).abs() < 1e-9 && *rank >= 0.0, "N={n} k={k} p={p}: {rank}");
        }
        let even = ranks.iter().find(|r| r.0 == (0, 1)).unwrap().1;
        assert_eq!(even.round() as usize, build_sector_basis(n).unwrap().dim(), "N={n}");
    }
}

#[test]
fn sector_basis_spans_the_symmetric_projector() {
    for n in 5..=8 {
        let dim = 1usize << n;
        let t = translation(n);
        let r = reflection(n);
        let mut sum = DMatrix::zeros(dim, dim);
        let mut tj = DMatrix::identity(dim, dim);
        for _ in 0..n {
            sum += &tj + &tj * &r;
            tj = &t * tj;
        }
        let projector = sum / (2 * n) as f64;
        assert!((&projector * &projector - &projector).amax() < 1e-12);

        let basis = build_sector_basis(n).unwrap();
        let vectors = DMatrix::from_fn(dim, basis.dim(), |row, col| basis.projected_vector(col)[row]);
        let gram = vectors.transpose() * &vectors;
        assert!((gram - DMatrix::identity(basis.dim(), basis.dim())).amax() < 1e-12, "N={n}");
        assert!((&projector * &vectors - &vectors).amax() < 1e-12, "N={n}");
        assert!((projector.trace() - basis.dim() as f64).abs() < 1e-9);
    }
}

#[test]
fn sparse_hamiltonian_matches_kronecker_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 5..=8 {
        let p = random_params(&mut rng, n);
        let sparse = build_full_hamiltonian(&p).unwrap().to_dense();
        let diff = (sparse.as_matrix() - dense_hamiltonian(&p)).amax();
        assert!(diff < 1e-12, "N={n}: {diff}");
    }
}

#[test]
fn pauli_operators_match_kronecker_factors() {
    let n = 7;
    let psi = haar_state(n, 11);
    for site in [1, 3, 7] {
        let x = complexify(&site_operator('x', site, n)) * to_dvector(&psi);
        let z = complexify(&site_operator('z', site, n)) * to_dvector(&psi);
        assert!((to_dvector(&pauli_x(site, &psi).unwrap()) - x).camax() < 1e-15);
        assert!((to_dvector(&pauli_z(site, &psi).unwrap()) - z).camax() < 1e-15);
    }
}

#[test]
fn hamiltonian_commutes_with_translation_and_reflection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 5..=11 {
        let h = build_full_hamiltonian(&random_params(&mut rng, n)).unwrap();
        let psi = haar_state(n, n as u64);
        for map in [translate_bits as fn(u32, usize) -> u32, reflect_bits] {
            let left = h.apply(&permute_state(&psi, |b| map(b, n))).unwrap();
            let right = permute_state(&h.apply(&psi).unwrap(), |b| map(b, n));
            assert!(left.distance(&right) < 1e-12, "N={n}");
        }
    }
}

#[test]
fn sector_spectrum_is_contained_in_full_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 5..=10 {
        for _ in 0..3 {
            let p = random_params(&mut rng, n);
            let basis = build_sector_basis(n).unwrap();
            let sector = diagonalize(&build_sector_hamiltonian(&p, &basis).unwrap()).unwrap();
            let full = full_spectrum(&p);
            let worst = sub_multiset_distance(sector.energies(), &full, 1e-9);
            assert!(worst.is_some(), "N={n} {p:?}");
        }
    }
}

#[test]
fn spectrum_respects_the_triangle_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 5..=10 {
        let p = random_params(&mut rng, n);
        let full = full_spectrum(&p);
        let radius = full[0].abs().max(full[full.len() - 1].abs());
        assert!(radius <= p.spectral_bound() + 1e-12, "N={n}");
    }
}

#[test]
fn otoc_matches_dense_heisenberg_operator() {
    let n = 8;
    let p = ModelParams::nnn(n);
    let dense = dense_hamiltonian(&p);
    let h = build_full_hamiltonian(&p).unwrap();
    let engines = [
        EvolutionEngine::eigenbasis(&h).unwrap(),
        EvolutionEngine::krylov(h.clone(), KrylovOptions::default()).unwrap(),
    ];
    let psi = haar_state(n, 2);
    for t in [0.5, 1.0, 2.0, 4.0] {
        for r in [2, 4, 8] {
            let reference = otoc_dense(&dense, n, r, t, &psi);
            for engine in &engines {
                let c = otoc(engine, r, t, &psi).unwrap();
                assert!((c - reference).abs() < 1e-8, "t={t} r={r} {:?}: {c} vs {reference}", engine.kind());
            }
        }
    }
}

#[test]
fn evolution_matches_dense_propagator() {
    let n = 7;
    let p = ModelParams::nn(n);
    let u = propagator(&dense_hamiltonian(&p), 3.7);
    let psi = haar_state(n, 4);
    let reference = &u * to_dvector(&psi);
    let h = build_full_hamiltonian(&p).unwrap();
    for kind in [EngineKind::Eigen, EngineKind::Krylov] {
        let engine = EvolutionEngine::build(kind, h.clone(), KrylovOptions::default()).unwrap();
        let out = to_dvector(&engine.evolve(&psi, 3.7).unwrap());
        assert!((out - &reference).camax() < 1e-9, "{kind:?}");
    }
}

#[test]
fn krylov_preserves_norm_and_energy_over_long_times() {
    let n = 11;
    let h = build_full_hamiltonian(&ModelParams::nnn(n)).unwrap();
    let engine = EvolutionEngine::krylov(h.clone(), KrylovOptions::default()).unwrap();
    let mut psi = haar_state(n, 8);
    let e0 = h.expectation(&psi).unwrap().re;
    for _ in 0..10 {
        engine.evolve_in_place(&mut psi, 5.0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-8);
        let e = h.expectation(&psi).unwrap().re;
        assert!((e - e0).abs() < 1e-8 * e0.abs().max(1.0), "{e} vs {e0}");
    }
}

#[test]
fn initial_otoc_vanishes_for_every_site() {
    let n = 9;
    let engine = EvolutionEngine::eigenbasis(&build_full_hamiltonian(&ModelParams::nnn(n)).unwrap()).unwrap();
    let psi = haar_state(n, 1);
    for r in 1..=n {
        assert!(otoc(&engine, r, 0.0, &psi).unwrap().abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn engines_agree(n in 6usize..=9, lambda in 0.0f64..1.5, f in 0.2f64..1.6, g in -1.0f64..1.5,
                     t in 0.0f64..6.0, seed in any::<u64>()) {
        let h = build_full_hamiltonian(&ModelParams::new(lambda, f, g, n).unwrap()).unwrap();
        let eigen = EvolutionEngine::eigenbasis(&h).unwrap();
        let krylov = EvolutionEngine::krylov(h, KrylovOptions::default()).unwrap();
        let psi = haar_state(n, seed);
        let a = eigen.evolve(&psi, t).unwrap();
        let b = krylov.evolve(&psi, t).unwrap();
        prop_assert!(a.distance(&b) < 1e-6);
        let r = 1 + (seed as usize % n);
        let ca = otoc(&eigen, r, t, &psi).unwrap();
        let cb = otoc(&krylov, r, t, &psi).unwrap();
        prop_assert!((ca - cb).abs() < 1e-6);
    }

    #[test]
    fn otoc_is_real_and_bounded(seed in any::<u64>(), t in 0.0f64..8.0, r in 1usize..=8) {
        // C = 1 - Re<W> with W unitary, so 0 <= C <= 2.
        let engine = EvolutionEngine::eigenbasis(&build_full_hamiltonian(&ModelParams::nnn(8)).unwrap()).unwrap();
        let c = otoc(&engine, r, t, &haar_state(8, seed)).unwrap();
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&c));
    }
}

#[test]
fn complex_identity_helper_sanity() {
    // Guards the oracle itself: e^{-iH·0} is the identity.
    let u = propagator(&dense_hamiltonian(&ModelParams::nn(5)), 0.0);
    let id = DMatrix::<Complex64>::identity(32, 32);
    assert!((u - id).camax() < 1e-12);
}
