//! Exactness, cost and sampling accuracy of matrix-chain evaluation.

mod common;

use std::sync::Arc;

use common::{norm, random_unit_vector, random_vector};
use ground_energy::counters::Tally;
use ground_energy::hamiltonian::{term_to_sparse, LocalTerm, RowListMatrix, TermHandle};
use ground_energy::imm::{chain_entry, chain_entry_traced, estimate_chain_sandwich, MatrixChain};
use ground_energy::oracle::{chain_product, exact_chain_sandwich};
use ground_energy::rng::{stream, StreamRng};
use ground_energy::state_access::{DenseVector, GuidingState};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::Rng;

/// `dim × dim` matrix with exactly `s` nonzeros per row in distinct columns.
fn random_sparse(dim: usize, s: usize, rng: &mut StreamRng) -> TermHandle {
    let rows = (0..dim)
        .map(|_| {
            sample(rng, dim, s)
                .into_iter()
                .map(|c| {
                    let v =
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    (c, v)
                })
                .collect()
        })
        .collect();
    Arc::new(RowListMatrix::new(rows).unwrap())
}

fn random_chain(dim: usize, s: usize, r: usize, rng: &mut StreamRng) -> MatrixChain {
    let mats: Vec<TermHandle> = (0..r).map(|_| random_sparse(dim, s, rng)).collect();
    MatrixChain::new(mats, vec![1.0; r]).unwrap()
}

#[test]
fn test_empty_chain_is_identity() {
    let phi = DenseVector(random_vector(8, &mut stream(1, 0)));
    let chain = MatrixChain::identity();
    for ell in 0..8 {
        let (v, trace) = chain_entry_traced(ell, &chain, &phi);
        assert_eq!(v, phi.0[ell]);
        assert_eq!(trace.leaf_queries, 1);
        assert_eq!(trace.max_depth, 0);
    }
}

#[test]
fn test_two_sparse_depth_three_example() {
    let mut rng = stream(2, 0);
    let chain = random_chain(8, 2, 3, &mut rng);
    let phi = DenseVector(random_vector(8, &mut rng));
    let dense = chain_product(&chain, 8).unwrap() * DVector::from_column_slice(&phi.0);
    for ell in 0..8 {
        let (v, trace) = chain_entry_traced(ell, &chain, &phi);
        assert!((v - dense[ell]).norm() <= 1e-12);
        assert_eq!(trace.leaf_queries, 8);
        assert_eq!(trace.max_depth, 3);
    }
}

#[test]
fn test_pauli_chain_touches_one_leaf() {
    let terms: Vec<TermHandle> = ["XYZ", "ZZI", "IXY", "YIX", "XXX"]
        .iter()
        .map(|p| term_to_sparse(&LocalTerm::pauli(0.5, p).unwrap(), 3))
        .collect();
    let chain = MatrixChain::new(terms, vec![0.5; 5]).unwrap();
    let phi = DenseVector(random_vector(8, &mut stream(3, 0)));
    let (_, trace) = chain_entry_traced(6, &chain, &phi);
    assert_eq!(trace.leaf_queries, 1);
    assert_eq!(trace.max_depth, 5);
}

#[test]
fn test_sampled_pauli_chain_sandwich() {
    let (eps, delta) = (0.1, 0.05);
    let mut gen = stream(4, 0);
    let mut misses = 0;
    for run in 0..100u64 {
        let (terms, bounds): (Vec<TermHandle>, Vec<f64>) = (0..4)
            .map(|_| {
                let ops: String = (0..3)
                    .map(|_| ['I', 'X', 'Y', 'Z'][gen.random_range(0..4)])
                    .collect();
                let c: f64 = gen.random_range(0.2..1.0);
                (term_to_sparse(&LocalTerm::pauli(c, &ops).unwrap(), 3), c)
            })
            .unzip();
        let chain = MatrixChain::new(terms, bounds).unwrap();
        let psi_amps = random_unit_vector(8, &mut gen);
        let phi = random_unit_vector(8, &mut gen);
        let truth = exact_chain_sandwich(&psi_amps, &chain, &phi).unwrap();
        let psi = GuidingState::dense(psi_amps).unwrap();
        let est = estimate_chain_sandwich(
            &psi,
            &chain,
            &DenseVector(phi.clone()),
            eps,
            delta,
            &mut stream(5, run),
            &Tally::new(),
        )
        .unwrap();
        if (est - truth).norm() > eps * chain.norm_bound() * norm(&phi) {
            misses += 1;
        }
    }
    assert!(misses <= 5, "{misses} misses out of 100");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn test_chain_entry_matches_dense_product(
        seed in any::<u64>(),
        log_dim in 1u32..=6,
        s in 1usize..=4,
        r in 0usize..=6,
    ) {
        let dim = 1usize << log_dim;
        let s = s.min(dim);
        let mut rng = stream(seed, 0);
        let chain = random_chain(dim, s, r, &mut rng);
        let phi = DenseVector(random_vector(dim, &mut rng));
        let dense = chain_product(&chain, dim).unwrap() * DVector::from_column_slice(&phi.0);
        let scale = dense.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for ell in 0..dim {
            let (v, trace) = chain_entry_traced(ell, &chain, &phi);
            prop_assert!((v - dense[ell]).norm() <= 1e-10 * scale);
            prop_assert_eq!(trace.leaf_queries, (s as u64).pow(r as u32));
            prop_assert_eq!(v, chain_entry(ell, &chain, &phi));
        }
    }
}
