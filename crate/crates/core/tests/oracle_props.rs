//! Consistency of the dense reference routines.

mod common;

use common::random_vector;
use ground_energy::hamiltonian::random::random_local_hamiltonian;
use ground_energy::oracle::{
    dense_hamiltonian, exact_ground_energy, exact_overlap, exact_polynomial_sandwich,
    polynomial_of_matrix, reconstruct, sandwich, DenseOperator,
};
use ground_energy::rng::stream;
use ground_energy::state_access::{GuidingState, VectorAccessor};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// Random Hermitian matrix scaled to spectral norm at most 1.
fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = stream(seed, 0);
    let m = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let frob = h.norm();
    h / Complex64::new(frob, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn test_horner_matches_eigenbasis(
        seed in any::<u64>(),
        log_n in 0u32..=4,
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..=21),
    ) {
        let n = 1usize << log_n;
        let h = random_hermitian(n, seed);
        let op = DenseOperator::new(h.clone()).unwrap();
        let horner = polynomial_of_matrix(&h, &coeffs);
        let v = random_vector(n, &mut stream(seed, 1));
        let a = sandwich(&v, &horner, &v);
        let b = exact_polynomial_sandwich(&op, &v, &coeffs, &v);
        prop_assert!((a - b).norm() <= 1e-7);
    }

    #[test]
    fn test_shifted_ground_energy_relation(seed in any::<u64>(), n in 1usize..=3) {
        let h = random_local_hamiltonian(n, 1.max(n.min(2)), 3, false, &mut stream(seed, 0)).unwrap();
        let d = h.decomposition().unwrap();
        let e0 = exact_ground_energy(&DenseOperator::new(dense_hamiltonian(&h).unwrap()).unwrap());
        let shifted = exact_ground_energy(&reconstruct(&d.shift_rescale().unwrap()).unwrap());
        prop_assert!((shifted - (1.0 + e0 / d.kappa()) / 2.0).abs() <= 1e-10);
    }

    #[test]
    fn test_maxent_overlap_bound(seed in any::<u64>(), n in 1usize..=3) {
        let h = random_local_hamiltonian(n, 1, 2, false, &mut stream(seed, 0)).unwrap();
        let doubled = h.with_idle_copy().unwrap();
        let op = DenseOperator::new(dense_hamiltonian(&doubled).unwrap()).unwrap();
        let psi = GuidingState::max_entangled(n).unwrap();
        let amps: Vec<Complex64> = (0..psi.dim()).map(|j| psi.query(j)).collect();
        let overlap = exact_overlap(&op, &amps, 0.0);
        prop_assert!(overlap >= (-(n as f64) / 2.0).exp2() - 1e-12);
    }
}
