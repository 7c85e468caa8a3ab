#![allow(dead_code)]

use ergoloc::qmat::{
    identity, partial_trace, projector, random_density, random_hermitian, random_state_vector,
    real_diagonal, tensor_product, Side,
};
use ergoloc::{BipartiteSystem, ComplexMatrix, StateVector};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random full-rank state, random local Hamiltonians and a coupling of Hilbert-Schmidt scale `coupling`.
pub fn random_system(rng: &mut ChaCha8Rng, d_s: usize, d_e: usize, coupling: f64) -> BipartiteSystem {
    let n = d_s * d_e;
    let raw = random_hermitian(n, coupling, rng);
    let tr_s = partial_trace(&raw, d_s, d_e, Side::S).unwrap();
    let v = &raw - tensor_product(&identity(d_s), &tr_s).scale(1.0 / d_s as f64);
    let rank = rng.random_range(1..=n);
    BipartiteSystem::new(
        d_s,
        d_e,
        random_density(n, rank, rng),
        random_hermitian(d_s, 1.0, rng),
        random_hermitian(d_e, 1.0, rng),
        v,
    )
    .unwrap()
}

pub fn random_distribution(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let p = DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>());
    let total = p.sum();
    p / total
}

/// Joint state and Hamiltonian diagonal in the product basis, with the classical data they encode.
pub struct DiagonalInstance {
    pub system: BipartiteSystem,
    pub p: DMatrix<f64>,
    pub e: DMatrix<f64>,
}

pub fn diagonal_instance(rng: &mut ChaCha8Rng, d_s: usize, d_e: usize) -> DiagonalInstance {
    let p = random_distribution(rng, d_s, d_e);
    let e = DMatrix::from_fn(d_s, d_e, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    let flat = |m: &DMatrix<f64>| (0..d_s).flat_map(|i| (0..d_e).map(move |j| (i, j))).map(|ij| m[ij]).collect::<Vec<_>>();
    let system = BipartiteSystem::from_total_hamiltonian(d_s, d_e, real_diagonal(&flat(&p)), real_diagonal(&flat(&e))).unwrap();
    DiagonalInstance { system, p, e }
}

/// `H' = a I - E |g><g|` with a random pure state to evaluate on.
pub struct TwoLevelInstance {
    pub h: ComplexMatrix,
    pub psi: StateVector,
    pub system: BipartiteSystem,
}

pub fn two_level_instance(rng: &mut ChaCha8Rng, d_s: usize, d_e: usize) -> TwoLevelInstance {
    let n = d_s * d_e;
    let g = random_state_vector(n, rng);
    let depth = 0.5 + rng.random::<f64>();
    let a = rng.random::<f64>() - 0.5;
    let h = identity(n).scale(a) - projector(&g).scale(depth);
    let psi = random_state_vector(n, rng);
    let system = BipartiteSystem::from_total_hamiltonian(d_s, d_e, projector(&psi), h.clone()).unwrap();
    TwoLevelInstance { h, psi, system }
}
