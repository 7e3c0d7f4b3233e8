//! Entries of `B_r···B_1|φ⟩` by depth-first recursion over row nonzeros, and
//! the sampled estimator of `⟨ψ|B_r···B_1|φ⟩`.
//!
//! [`chain_entry`] never builds a length-`N` vector: the recursion keeps one
//! frame per matrix, so memory is `O(r)` frames while time is `O(s^r)` entry
//! queries to `φ`.

use num_complex::Complex64;

use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::hamiltonian::TermHandle;
use crate::rng::StreamRng;
use crate::state_access::{estimate_inner_product, StateAccessor, VectorAccessor};

/// Ordered product `B_r···B_1`; `matrices[0]` is `B_1`, applied first.
#[derive(Debug, Clone)]
pub struct MatrixChain {
    matrices: Vec<TermHandle>,
    norm_bounds: Vec<f64>,
}

impl MatrixChain {
    /// `norm_bounds[i]` must bound `‖B_{i+1}‖`.
    pub fn new(matrices: Vec<TermHandle>, norm_bounds: Vec<f64>) -> Result<Self> {
        if matrices.len() != norm_bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: matrices.len(),
                found: norm_bounds.len(),
            });
        }
        if let Some(first) = matrices.first() {
            let dim = first.dim();
            if let Some(m) = matrices.iter().find(|m| m.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
        }
        if let Some(&b) = norm_bounds.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return Err(Error::param(
                "norm_bound",
                b,
                "must be finite and nonnegative",
            ));
        }
        Ok(Self {
            matrices,
            norm_bounds,
        })
    }

    /// The empty chain (identity).
    pub fn identity() -> Self {
        Self {
            matrices: Vec::new(),
            norm_bounds: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[TermHandle] {
        &self.matrices
    }

    pub fn norm_bounds(&self) -> &[f64] {
        &self.norm_bounds
    }

    /// Largest row sparsity over the chain (0 for the empty chain).
    pub fn sparsity(&self) -> usize {
        self.matrices
            .iter()
            .map(|m| m.sparsity())
            .max()
            .unwrap_or(0)
    }

    /// `∏ norm_bounds`, a bound on `‖B_r···B_1‖`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bounds.iter().product()
    }
}

/// Resource use of one [`chain_entry_traced`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainTrace {
    /// Entry queries issued to `φ`.
    pub leaf_queries: u64,
    /// Deepest recursion level reached (0 for the empty chain).
    pub max_depth: usize,
}

/// `⟨ℓ|B_r···B_1|φ⟩`.
pub fn chain_entry(ell: usize, chain: &MatrixChain, phi: &dyn VectorAccessor) -> Complex64 {
    chain_entry_traced(ell, chain, phi).0
}

/// [`chain_entry`] together with its leaf-query count and recursion depth.
pub fn chain_entry_traced(
    ell: usize,
    chain: &MatrixChain,
    phi: &dyn VectorAccessor,
) -> (Complex64, ChainTrace) {
    let mut trace = ChainTrace::default();
    let value = descend(ell, chain.len(), &chain.matrices, phi, 0, &mut trace);
    (value, trace)
}

fn descend(
    ell: usize,
    level: usize,
    matrices: &[TermHandle],
    phi: &dyn VectorAccessor,
    depth: usize,
    trace: &mut ChainTrace,
) -> Complex64 {
    trace.max_depth = trace.max_depth.max(depth);
    if level == 0 {
        trace.leaf_queries += 1;
        return phi.query(ell);
    }
    let b = &matrices[level - 1];
    let mut acc = Complex64::new(0.0, 0.0);
    for slot in 0..b.row_nnz(ell) {
        let (col, value) = b.row_entry(ell, slot);
        acc += value * descend(col, level - 1, matrices, phi, depth + 1, trace);
    }
    acc
}

/// Query access to `B_r···B_1|φ⟩` through [`chain_entry`], counting leaf
/// queries in an optional [`Tally`].
pub struct ChainVector<'a> {
    chain: &'a MatrixChain,
    phi: &'a dyn VectorAccessor,
    tally: Option<&'a Tally>,
}

impl<'a> ChainVector<'a> {
    pub fn new(chain: &'a MatrixChain, phi: &'a dyn VectorAccessor) -> Self {
        Self {
            chain,
            phi,
            tally: None,
        }
    }

    pub fn with_tally(mut self, tally: &'a Tally) -> Self {
        self.tally = Some(tally);
        self
    }
}

impl VectorAccessor for ChainVector<'_> {
    fn dim(&self) -> usize {
        self.phi.dim()
    }

    fn query(&self, j: usize) -> Complex64 {
        let (value, trace) = chain_entry_traced(j, self.chain, self.phi);
        if let Some(t) = self.tally {
            t.add_leaf_queries(trace.leaf_queries);
        }
        value
    }
}

/// Estimate `⟨ψ|B_r···B_1|φ⟩` within `ε·∏‖B_i‖` (using the chain's norm
/// bounds) with probability at least `1 − δ`.
pub fn estimate_chain_sandwich(
    psi: &dyn StateAccessor,
    chain: &MatrixChain,
    phi: &dyn VectorAccessor,
    eps: f64,
    delta: f64,
    rng: &mut StreamRng,
    tally: &Tally,
) -> Result<Complex64> {
    if let Some(m) = chain.matrices.first() {
        if m.dim() != phi.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                found: phi.dim(),
            });
        }
    }
    let w = ChainVector::new(chain, phi).with_tally(tally);
    estimate_inner_product(psi, &w, eps, delta, rng, tally)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{term_to_sparse, LocalTerm, RowListMatrix};
    use crate::rng;
    use crate::state_access::{DenseVector, GuidingState};
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pauli(s: &str) -> TermHandle {
        term_to_sparse(&LocalTerm::pauli(1.0, s).unwrap(), s.len())
    }

    fn chain(ms: Vec<TermHandle>) -> MatrixChain {
        let bounds = vec![1.0; ms.len()];
        MatrixChain::new(ms, bounds).unwrap()
    }

    #[test]
    fn test_x_on_zero() {
        let phi = DenseVector(vec![c(1.0), c(0.0)]);
        assert_eq!(chain_entry(1, &chain(vec![pauli("X")]), &phi), c(1.0));
        assert_eq!(chain_entry(0, &chain(vec![pauli("X")]), &phi), c(0.0));
    }

    #[test]
    fn test_z_squared() {
        let phi = DenseVector(vec![c(0.0), c(1.0)]);
        assert_eq!(
            chain_entry(1, &chain(vec![pauli("Z"), pauli("Z")]), &phi),
            c(1.0)
        );
    }

    #[test]
    fn test_empty_chain_is_identity() {
        let phi = DenseVector(vec![c(0.25), Complex64::new(0.5, -1.0)]);
        let (v, trace) = chain_entry_traced(1, &MatrixChain::identity(), &phi);
        assert_eq!(v, phi.0[1]);
        assert_eq!(
            trace,
            ChainTrace {
                leaf_queries: 1,
                max_depth: 0
            }
        );
    }

    #[test]
    fn test_order_of_application() {
        // B_1 = X then B_2 = diag(1, 2): B_2 B_1 |0> = 2|1>
        let diag = Arc::new(RowListMatrix::new(vec![vec![(0, c(1.0))], vec![(1, c(2.0))]]).unwrap())
            as TermHandle;
        let phi = DenseVector(vec![c(1.0), c(0.0)]);
        let ch = MatrixChain::new(vec![pauli("X"), diag], vec![1.0, 2.0]).unwrap();
        assert_eq!(chain_entry(1, &ch, &phi), c(2.0));
        assert_eq!(ch.norm_bound(), 2.0);
    }

    #[test]
    fn test_full_rows_query_count() {
        let full = Arc::new(
            RowListMatrix::new(
                (0..3)
                    .map(|_| (0..3).map(|j| (j, c(1.0))).collect())
                    .collect(),
            )
            .unwrap(),
        ) as TermHandle;
        let phi = DenseVector(vec![c(1.0); 3]);
        let ch = chain(vec![full.clone(), full.clone(), full]);
        let (v, trace) = chain_entry_traced(0, &ch, &phi);
        assert_eq!(v, c(27.0));
        assert_eq!(
            trace,
            ChainTrace {
                leaf_queries: 27,
                max_depth: 3
            }
        );
    }

    #[test]
    fn test_chain_validation() {
        assert!(MatrixChain::new(vec![pauli("X")], vec![]).is_err());
        assert!(MatrixChain::new(vec![pauli("X"), pauli("XX")], vec![1.0, 1.0]).is_err());
        assert!(MatrixChain::new(vec![pauli("X")], vec![-1.0]).is_err());
    }

    #[test]
    fn test_sandwich_basis() {
        let psi = GuidingState::basis(2, 1).unwrap();
        let phi = DenseVector(vec![c(1.0), c(0.0)]);
        let tally = Tally::new();
        let v = estimate_chain_sandwich(
            &psi,
            &chain(vec![pauli("X")]),
            &phi,
            0.1,
            0.01,
            &mut rng::stream(1, 0),
            &tally,
        )
        .unwrap();
        assert!((v - c(1.0)).norm() <= 0.1);
        let snap = tally.snapshot();
        assert_eq!(snap.leaf_queries, snap.ratio_samples);
    }

    #[test]
    fn test_sandwich_empty_chain() {
        let psi = GuidingState::basis(2, 0).unwrap();
        let phi = DenseVector(vec![c(1.0), c(0.0)]);
        let v = estimate_chain_sandwich(
            &psi,
            &MatrixChain::identity(),
            &phi,
            0.1,
            0.01,
            &mut rng::stream(2, 0),
            &Tally::new(),
        )
        .unwrap();
        assert!((v - c(1.0)).norm() <= 0.1);
    }
}
