//! Query and sample-and-query access to vectors, and the sampled
//! inner-product estimator.
//!
//! A [`VectorAccessor`] answers entry queries `w_j`. A [`StateAccessor`]
//! additionally draws indices `j` with probability `|ψ_j|²/‖ψ‖²`. Given both,
//! the single-sample ratio `X = ‖ψ‖²·w_j/ψ_j` (with `j` drawn from `ψ`) is an
//! unbiased estimate of `⟨ψ|w⟩` with `E|X|² ≤ ‖w‖²`. Averaging
//! `⌈8/ε²⌉` samples lands within `ε‖w‖/√2` with probability at least 3/4,
//! and [`median_amplify`] boosts that to `1 − δ`.

mod spec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

pub use spec::{make_state, read_dense_state, write_dense_state, StateSpec};

/// Largest dense state accepted.
pub const MAX_DENSE_DIM: usize = 1 << 24;

/// Allowed deviation of a state's norm from 1.
pub const NORM_TOL: f64 = 1e-8;

/// Query access to a vector.
pub trait VectorAccessor: Send + Sync {
    fn dim(&self) -> usize;

    /// Entry `⟨j|w⟩`.
    fn query(&self, j: usize) -> Complex64;
}

/// Sample-and-query access.
pub trait StateAccessor: VectorAccessor {
    /// Euclidean norm (1 for quantum states).
    fn norm(&self) -> f64 {
        1.0
    }

    /// Draw `j` with probability `|query(j)|² / norm²`.
    fn sample(&self, rng: &mut StreamRng) -> usize;
}

/// A vector held in memory, query access only.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(pub Vec<Complex64>);

impl VectorAccessor for DenseVector {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn query(&self, j: usize) -> Complex64 {
        self.0[j]
    }
}

/// Query access backed by a closure.
pub struct FnVector<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(usize) -> Complex64 + Send + Sync> FnVector<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(usize) -> Complex64 + Send + Sync> VectorAccessor for FnVector<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&self, j: usize) -> Complex64 {
        (self.f)(j)
    }
}

/// Guiding states with exact Born-rule sampling.
#[derive(Debug, Clone)]
pub enum GuidingState {
    /// `|index⟩`.
    Basis { dim: usize, index: usize },
    /// `⊗_q (a_q|0⟩ + b_q|1⟩)`, qubit `q` on bit `q`.
    Product { qubits: Vec<[Complex64; 2]> },
    /// Explicit amplitudes with an alias table over `|ψ_j|²`.
    Dense {
        amplitudes: Vec<Complex64>,
        alias: WeightedAliasIndex<f64>,
    },
    /// `2^{-n/2} Σ_i |i⟩|i⟩` on `2n` qubits; the first register is bits
    /// `0..n`, the second bits `n..2n`.
    MaxEntangled { half_qubits: usize },
}

impl GuidingState {
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::param(
                "index",
                index as f64,
                format!("must be below {dim}"),
            ));
        }
        Ok(GuidingState::Basis { dim, index })
    }

    /// Every qubit's pair must be normalized.
    pub fn product(qubits: Vec<[Complex64; 2]>) -> Result<Self> {
        if qubits.is_empty() || qubits.len() > crate::hamiltonian::MAX_QUBITS {
            return Err(Error::param(
                "qubits",
                qubits.len() as f64,
                "unsupported qubit count",
            ));
        }
        for [a, b] in &qubits {
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { norm });
            }
        }
        Ok(GuidingState::Product { qubits })
    }

    /// Builds the alias table once; sampling is then O(1).
    pub fn dense(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() > MAX_DENSE_DIM {
            return Err(Error::DimensionTooLarge {
                dim: amplitudes.len(),
                limit: MAX_DENSE_DIM,
            });
        }
        let weights: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let norm = weights.iter().sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::Unsupported(format!("alias table: {e}")))?;
        Ok(GuidingState::Dense { amplitudes, alias })
    }

    /// Maximally entangled state of two `half_qubits`-qubit registers.
    pub fn max_entangled(half_qubits: usize) -> Result<Self> {
        if half_qubits == 0 || 2 * half_qubits > crate::hamiltonian::MAX_QUBITS {
            return Err(Error::param(
                "half_qubits",
                half_qubits as f64,
                "unsupported register size",
            ));
        }
        Ok(GuidingState::MaxEntangled { half_qubits })
    }
}

impl VectorAccessor for GuidingState {
    fn dim(&self) -> usize {
        match self {
            GuidingState::Basis { dim, .. } => *dim,
            GuidingState::Product { qubits } => 1usize << qubits.len(),
            GuidingState::Dense { amplitudes, .. } => amplitudes.len(),
            GuidingState::MaxEntangled { half_qubits } => 1usize << (2 * half_qubits),
        }
    }

    fn query(&self, j: usize) -> Complex64 {
        match self {
            GuidingState::Basis { index, .. } => {
                if j == *index {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            GuidingState::Product { qubits } => qubits
                .iter()
                .enumerate()
                .map(|(q, pair)| pair[(j >> q) & 1])
                .product(),
            GuidingState::Dense { amplitudes, .. } => amplitudes[j],
            GuidingState::MaxEntangled { half_qubits } => {
                let mask = (1usize << half_qubits) - 1;
                if j & mask == j >> half_qubits {
                    Complex64::new((-(*half_qubits as f64) / 2.0).exp2(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }
}

impl StateAccessor for GuidingState {
    fn sample(&self, rng: &mut StreamRng) -> usize {
        match self {
            GuidingState::Basis { index, .. } => *index,
            GuidingState::Product { qubits } => {
                qubits.iter().enumerate().fold(0usize, |acc, (q, [_, b])| {
                    if rng.random::<f64>() < b.norm_sqr() {
                        acc | (1 << q)
                    } else {
                        acc
                    }
                })
            }
            GuidingState::Dense { alias, .. } => alias.sample(rng),
            GuidingState::MaxEntangled { half_qubits } => {
                let i = rng.random_range(0..1usize << half_qubits);
                i | (i << half_qubits)
            }
        }
    }
}

/// Number of independent repetitions whose coordinate-wise median reaches
/// confidence `1 − δ`: `⌈18·ln(1/δ)⌉`, at least 1.
pub fn median_repetitions(delta: f64) -> usize {
    ((18.0 * (1.0 / delta).ln()).ceil() as usize).max(1)
}

/// Samples per batch of the inner-product estimator: `⌈8/ε²⌉`.
pub fn inner_product_samples(eps: f64) -> usize {
    ceil_count(8.0 / (eps * eps))
}

/// `⌈x⌉` for sample counts, at least 1, ignoring relative rounding noise
/// below `1e-12` so that e.g. `64/0.1²` gives 6400.
pub fn ceil_count(x: f64) -> usize {
    ceil_real(x) as usize
}

/// [`ceil_count`] without the conversion to `usize`, for cost predictions
/// that may exceed the integer range.
pub fn ceil_real(x: f64) -> f64 {
    (x * (1.0 - 1e-12)).ceil().max(1.0)
}

pub(crate) fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, v, "must lie in (0, 1]"))
    }
}

/// Coordinate-wise median of complex values.
pub fn complex_median(values: &[Complex64]) -> Complex64 {
    let mut re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = values.iter().map(|z| z.im).collect();
    Complex64::new(median_in_place(&mut re), median_in_place(&mut im))
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Powering lemma: run `estimator` [`median_repetitions`]`(δ)` times and take
/// the median of real parts and of imaginary parts separately.
///
/// If each run is within `ε` of `μ` with probability ≥ 3/4, the result is
/// within `√2·ε` with probability ≥ 1 − δ. Repetition `i` runs on stream `i`
/// of a sub-seed drawn from `rng`, so the output is independent of how the
/// repetitions are spread over threads.
pub fn median_amplify<F>(estimator: F, delta: f64, rng: &mut StreamRng) -> Result<Complex64>
where
    F: Fn(&mut StreamRng) -> Result<Complex64> + Sync,
{
    let reps = median_repetitions(delta);
    let base = rng::fork(rng);
    let values = (0..reps as u64)
        .into_par_iter()
        .map(|i| estimator(&mut rng::stream(base, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(complex_median(&values))
}

/// One draw of the ratio estimator: `j ~ |ψ_j|²/‖ψ‖²`, returns
/// `‖ψ‖²·w_j/ψ_j`.
pub fn ratio_sample(
    psi: &dyn StateAccessor,
    w: &dyn VectorAccessor,
    rng: &mut StreamRng,
) -> Result<Complex64> {
    let j = psi.sample(rng);
    let wj = w.query(j);
    let pj = psi.query(j);
    if pj == Complex64::new(0.0, 0.0) {
        if wj == Complex64::new(0.0, 0.0) {
            return Ok(wj);
        }
        return Err(Error::UndefinedRatio { index: j });
    }
    let n = psi.norm();
    Ok(wj / pj * (n * n))
}

/// Estimate `⟨ψ|w⟩` to within `ε‖w‖` with probability at least `1 − δ`.
pub fn estimate_inner_product(
    psi: &dyn StateAccessor,
    w: &dyn VectorAccessor,
    eps: f64,
    delta: f64,
    rng: &mut StreamRng,
    tally: &Tally,
) -> Result<Complex64> {
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta)?;
    if psi.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: w.dim(),
        });
    }
    let t = inner_product_samples(eps);
    median_amplify(
        |r| {
            let mut sum = Complex64::new(0.0, 0.0);
            for _ in 0..t {
                sum += ratio_sample(psi, w, r)?;
            }
            tally.add_ratio_samples(t as u64);
            Ok(sum / t as f64)
        },
        delta,
        rng,
    )
}
