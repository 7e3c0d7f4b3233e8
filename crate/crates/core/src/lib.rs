//! Classical estimation of the smallest eigenvalue of sparse, decomposed
//! Hermitian matrices from sample-and-query access to a guiding state.
//!
//! The pipeline, bottom up:
//!
//! - [`hamiltonian`]: local terms, sparse row access and `(s, κ)`
//!   decompositions.
//! - [`state_access`]: guiding states with entry queries and Born-rule
//!   sampling, and the sampled inner-product estimator.
//! - [`imm`]: entries of sparse matrix chains applied to a vector.
//! - [`polyfilter`]: certified rectangle polynomials.
//! - [`transform`]: sampled estimates of `⟨ψ|A^r|φ⟩` and `⟨ψ|P(A)|φ⟩`.
//! - [`eigensolve`]: the threshold scan, guided and unguided solvers and the
//!   decision problem.
//! - [`oracle`]: dense ground truth for small instances.

pub mod counters;
pub mod eigensolve;
pub mod error;
pub mod hamiltonian;
pub mod imm;
pub mod oracle;
pub mod polyfilter;
pub mod rng;
pub mod state_access;
pub mod transform;

pub use eigensolve::{
    decide, estimate_smallest_eigenvalue, solve_guided, solve_unguided, DecisionOutcome,
    EnergyEstimate, Policy, SolverConfig, Verdict,
};
pub use error::{Error, Result};
pub use hamiltonian::{load_hamiltonian, parse_hamiltonian, Decomposition, Hamiltonian};
pub use state_access::{make_state, GuidingState, StateAccessor, StateSpec, VectorAccessor};

// Runs the guide's code listings as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hamiltonians.md")]
    mod hamiltonians {}
    #[doc = include_str!("../../../book/src/state-access.md")]
    mod state_access {}
    #[doc = include_str!("../../../book/src/chains.md")]
    mod chains {}
    #[doc = include_str!("../../../book/src/rectangle-polynomials.md")]
    mod rectangle_polynomials {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/ground-energy.md")]
    mod ground_energy {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cost.md")]
    mod cost {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
