//! Random instances for tests and benchmarks.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use super::{compute_term_norm, Hamiltonian, LocalBlock, LocalTerm, Pauli, PauliString};
use crate::error::{Error, Result};

fn check(n: usize, m: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::param(
            "k",
            k as f64,
            format!("locality must lie in [1, {n}]"),
        ));
    }
    if m == 0 {
        return Err(Error::param("m", 0.0, "need at least one term"));
    }
    Ok(())
}

/// `m` Pauli strings, each of weight between 1 and `max_weight` on random
/// qubits, with coefficients uniform in `±[0.1, 1]`. With `normalized` the
/// coefficients are rescaled so that `Σ|c_i| = 1`.
pub fn random_pauli_hamiltonian<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    max_weight: usize,
    normalized: bool,
    rng: &mut R,
) -> Result<Hamiltonian> {
    check(n, m, max_weight)?;
    let mut strings: Vec<PauliString> = (0..m)
        .map(|_| {
            let weight = rng.random_range(1..=max_weight);
            let mut ops = vec![Pauli::I; n];
            for q in sample(rng, n, weight) {
                ops[q] = [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)];
            }
            let mag: f64 = rng.random_range(0.1..=1.0);
            let coeff = if rng.random::<bool>() { mag } else { -mag };
            PauliString::new(coeff, ops)
        })
        .collect();
    if normalized {
        let total: f64 = strings.iter().map(|p| p.coeff.abs()).sum();
        strings.iter_mut().for_each(|p| p.coeff /= total);
    }
    Hamiltonian::new(n, strings.into_iter().map(LocalTerm::from).collect())
}

/// `m` random Hermitian `2^k × 2^k` blocks on random `k`-qubit supports.
/// With `normalized` the blocks are rescaled so that `Σ‖H_i‖ = 1`.
pub fn random_local_hamiltonian<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    m: usize,
    normalized: bool,
    rng: &mut R,
) -> Result<Hamiltonian> {
    check(n, m, k)?;
    let d = 1usize << k;
    let mut blocks: Vec<LocalBlock> = (0..m)
        .map(|_| {
            let support: Vec<usize> = sample(rng, n, k).into_vec();
            let raw: Vec<Complex64> = (0..d * d)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let matrix = (0..d * d)
                .map(|idx| {
                    let (i, j) = (idx / d, idx % d);
                    (raw[i * d + j] + raw[j * d + i].conj()) * 0.5
                })
                .collect();
            LocalBlock::hermitian(support, matrix)
        })
        .collect();
    if normalized {
        let total: f64 = blocks
            .iter()
            .map(|b| compute_term_norm(&LocalTerm::block(b.clone())))
            .sum::<Result<f64>>()?;
        for b in &mut blocks {
            b.matrix.iter_mut().for_each(|z| *z /= total);
        }
    }
    Hamiltonian::new(n, blocks.into_iter().map(LocalTerm::block).collect())
}
