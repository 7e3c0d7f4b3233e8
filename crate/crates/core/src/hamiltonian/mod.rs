//! Local Hamiltonians and their sparse decompositions.
//!
//! A Hamiltonian on `n` qubits is a list of [`LocalTerm`]s, each either a
//! real multiple of a Pauli string or a dense `2^k × 2^k` block on `k`
//! chosen qubits. Basis index bit `q` is the state of qubit `q`; in Pauli
//! strings the leftmost character acts on qubit 0.
//!
//! [`Hamiltonian::decomposition`] turns the terms into an
//! `(s, κ)`-decomposition with `s ≤ 2^k` and `κ = Σ ‖H_i‖`, answering row
//! queries on the full `2^n` space without materializing it.

mod format;
pub mod random;
mod sparse;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use format::{load_hamiltonian, parse_hamiltonian, parse_hamiltonian_json};
pub use sparse::{
    Decomposition, LocalBlockRows, PauliRows, RowListMatrix, ScaledIdentity, ScaledRows,
    SparseRows, TermHandle,
};

/// Largest block support for which term norms are computed densely.
pub const DENSE_NORM_QUBITS: usize = 12;

/// Largest supported qubit count (indices are machine words).
pub const MAX_QUBITS: usize = 62;

/// Tolerance for declared-Hermitian blocks, relative to the largest entry.
const HERMITIAN_TOL: f64 = 1e-12;

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `coeff · P_0 ⊗ P_1 ⊗ … ⊗ P_{n-1}` with `P_q` acting on qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coeff: f64,
    pub ops: Vec<Pauli>,
}

/// Error from parsing a Pauli string: the first offending character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadPauliChar(pub char);

impl fmt::Display for BadPauliChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid Pauli character '{}'", self.0)
    }
}

impl std::error::Error for BadPauliChar {}

impl FromStr for PauliString {
    type Err = BadPauliChar;

    /// Parses the operator part only (`"XIZ"`); the coefficient is 1.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ops = s
            .chars()
            .map(|ch| Pauli::from_char(ch).ok_or(BadPauliChar(ch)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliString { coeff: 1.0, ops })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.coeff)?;
        self.ops
            .iter()
            .try_for_each(|p| write!(f, "{}", p.as_char()))
    }
}

impl PauliString {
    pub fn new(coeff: f64, ops: Vec<Pauli>) -> Self {
        Self { coeff, ops }
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }
}

/// Dense `2^k × 2^k` matrix acting on the qubits in `support`.
///
/// Row-major; bit `a` of a local index is the state of qubit `support[a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBlock {
    pub support: Vec<usize>,
    pub matrix: Vec<Complex64>,
    pub hermitian: bool,
}

impl LocalBlock {
    /// A block declared Hermitian.
    pub fn hermitian(support: Vec<usize>, matrix: Vec<Complex64>) -> Self {
        Self {
            support,
            matrix,
            hermitian: true,
        }
    }

    pub fn local_dim(&self) -> usize {
        1usize << self.support.len()
    }

    fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let d = self.local_dim();
        DMatrix::from_row_slice(d, d, &self.matrix)
    }

    fn hermitian_deviation(&self) -> f64 {
        let d = self.local_dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let dev = (self.matrix[i * d + j] - self.matrix[j * d + i].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermOperator {
    Pauli(PauliString),
    Block(LocalBlock),
}

/// One Hamiltonian term with an optional user-supplied norm bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    pub operator: TermOperator,
    /// Replaces the computed `‖H_i‖` as `κ_i` (any upper bound is valid).
    pub kappa_override: Option<f64>,
}

impl LocalTerm {
    pub fn pauli(coeff: f64, ops: &str) -> Result<Self> {
        let mut p: PauliString = ops.parse().map_err(|e: BadPauliChar| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        p.coeff = coeff;
        Ok(Self::from(p))
    }

    pub fn block(block: LocalBlock) -> Self {
        Self {
            operator: TermOperator::Block(block),
            kappa_override: None,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa_override = Some(kappa);
        self
    }

    /// Locality: number of qubits acted on non-trivially.
    pub fn locality(&self) -> usize {
        match &self.operator {
            TermOperator::Pauli(p) => p.support().len(),
            TermOperator::Block(b) => b.support.len(),
        }
    }

    fn validate(&self, index: usize, n: usize) -> Result<()> {
        let bad = |reason: String| Error::InvalidTerm {
            term: index,
            reason,
        };
        match &self.operator {
            TermOperator::Pauli(p) => {
                if p.ops.len() != n {
                    return Err(bad(format!(
                        "Pauli string has length {}, expected {n}",
                        p.ops.len()
                    )));
                }
                if !p.coeff.is_finite() {
                    return Err(bad("non-finite coefficient".into()));
                }
            }
            TermOperator::Block(b) => {
                let k = b.support.len();
                if k > n {
                    return Err(bad(format!("support of {k} qubits exceeds n = {n}")));
                }
                let mut seen = vec![false; n];
                for &q in &b.support {
                    if q >= n {
                        return Err(bad(format!("qubit {q} out of range [0, {n})")));
                    }
                    if std::mem::replace(&mut seen[q], true) {
                        return Err(bad(format!("qubit {q} repeated in support")));
                    }
                }
                let d = 1usize << k;
                if b.matrix.len() != d * d {
                    return Err(bad(format!(
                        "block has {} entries, expected {}",
                        b.matrix.len(),
                        d * d
                    )));
                }
                if b.matrix
                    .iter()
                    .any(|z| !(z.re.is_finite() && z.im.is_finite()))
                {
                    return Err(bad("non-finite block entry".into()));
                }
                if b.hermitian {
                    let scale = b.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
                    let dev = b.hermitian_deviation();
                    if dev > HERMITIAN_TOL * scale {
                        return Err(bad(format!("block declared Hermitian deviates by {dev:e}")));
                    }
                }
            }
        }
        if let Some(k) = self.kappa_override {
            if !(k.is_finite() && k >= 0.0) {
                return Err(bad(format!(
                    "norm bound {k} must be finite and nonnegative"
                )));
            }
        }
        Ok(())
    }
}

impl From<PauliString> for LocalTerm {
    fn from(p: PauliString) -> Self {
        Self {
            operator: TermOperator::Pauli(p),
            kappa_override: None,
        }
    }
}

/// Spectral norm of a term: `|coeff|` for Pauli strings, the largest
/// singular value of the block otherwise.
pub fn compute_term_norm(term: &LocalTerm) -> Result<f64> {
    match &term.operator {
        TermOperator::Pauli(p) => Ok(p.coeff.abs()),
        TermOperator::Block(b) => {
            let k = b.support.len();
            if k > DENSE_NORM_QUBITS {
                return Err(Error::DimensionTooLarge {
                    dim: 1usize << k,
                    limit: 1usize << DENSE_NORM_QUBITS,
                });
            }
            let m = b.to_dmatrix();
            let norm = if b.hermitian {
                m.symmetric_eigenvalues()
                    .iter()
                    .fold(0.0_f64, |acc, v| acc.max(v.abs()))
            } else {
                m.singular_values()
                    .iter()
                    .fold(0.0_f64, |acc, v| acc.max(*v))
            };
            Ok(norm)
        }
    }
}

/// Row-query handle for the embedding of `term` into `n` qubits.
pub fn term_to_sparse(term: &LocalTerm, n: usize) -> TermHandle {
    match &term.operator {
        TermOperator::Pauli(p) => {
            let (mut flip, mut sign, mut ys) = (0usize, 0usize, 0usize);
            for (q, op) in p.ops.iter().enumerate() {
                match op {
                    Pauli::I => {}
                    Pauli::X => flip |= 1 << q,
                    Pauli::Y => {
                        flip |= 1 << q;
                        sign |= 1 << q;
                        ys += 1;
                    }
                    Pauli::Z => sign |= 1 << q,
                }
            }
            Arc::new(PauliRows::new(n, flip, sign, ys, p.coeff))
        }
        TermOperator::Block(b) => Arc::new(LocalBlockRows::new(n, &b.support, &b.matrix)),
    }
}

/// A Hamiltonian `H = Σ_i H_i` on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<LocalTerm>,
}

impl Hamiltonian {
    /// Validates every term against `n`.
    pub fn new(n: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::param(
                "n",
                n as f64,
                format!("qubit count must be in [1, {MAX_QUBITS}]"),
            ));
        }
        for (i, t) in terms.iter().enumerate() {
            t.validate(i, n)?;
        }
        Ok(Self { n, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    /// Maximum locality over the terms.
    pub fn locality(&self) -> usize {
        self.terms
            .iter()
            .map(LocalTerm::locality)
            .max()
            .unwrap_or(0)
    }

    /// Norm bounds `κ_i`: the override when present, the exact norm otherwise.
    pub fn kappas(&self) -> Result<Vec<f64>> {
        self.terms
            .iter()
            .map(|t| match t.kappa_override {
                Some(k) => Ok(k),
                None => compute_term_norm(t),
            })
            .collect()
    }

    /// `(s, κ)`-decomposition with one sparse handle per term.
    pub fn decomposition(&self) -> Result<Decomposition> {
        let kappas = self.kappas()?;
        let handles = self
            .terms
            .iter()
            .map(|t| term_to_sparse(t, self.n))
            .collect();
        Decomposition::new(self.dim(), handles, kappas)
    }

    /// `H ⊗ I` on `2n` qubits: the original system on qubits `0..n`, an
    /// idle copy on `n..2n`. Norm bounds are unchanged.
    pub fn with_idle_copy(&self) -> Result<Hamiltonian> {
        let n2 = 2 * self.n;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let operator = match &t.operator {
                    TermOperator::Pauli(p) => {
                        let mut ops = p.ops.clone();
                        ops.resize(n2, Pauli::I);
                        TermOperator::Pauli(PauliString::new(p.coeff, ops))
                    }
                    TermOperator::Block(b) => TermOperator::Block(b.clone()),
                };
                LocalTerm {
                    operator,
                    kappa_override: t.kappa_override,
                }
            })
            .collect();
        Hamiltonian::new(n2, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn test_pauli_norm_is_abs_coeff() {
        let t = LocalTerm::pauli(0.5, "XIZ").unwrap();
        assert_eq!(compute_term_norm(&t).unwrap(), 0.5);
        let t = LocalTerm::pauli(-2.0, "Y").unwrap();
        assert_eq!(compute_term_norm(&t).unwrap(), 2.0);
    }

    #[test]
    fn test_identity_block_norm() {
        let t = LocalTerm::block(LocalBlock::hermitian(
            vec![0],
            vec![c(1.0), c(0.0), c(0.0), c(1.0)],
        ));
        assert!((compute_term_norm(&t).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn test_symmetric_block_norm() {
        // eigenvalues 3 and -1
        let t = LocalTerm::block(LocalBlock::hermitian(
            vec![0],
            vec![c(1.0), c(2.0), c(2.0), c(1.0)],
        ));
        assert!((compute_term_norm(&t).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn test_non_hermitian_norm_uses_singular_values() {
        // [[0, 2], [0, 0]] has singular values 2, 0
        let b = LocalBlock {
            support: vec![0],
            matrix: vec![c(0.0), c(2.0), c(0.0), c(0.0)],
            hermitian: false,
        };
        assert!((compute_term_norm(&LocalTerm::block(b)).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn test_norm_dimension_limit() {
        let k = DENSE_NORM_QUBITS + 1;
        let b = LocalBlock {
            support: (0..k).collect(),
            matrix: vec![],
            hermitian: false,
        };
        assert!(matches!(
            compute_term_norm(&LocalTerm::block(b)),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn test_rejects_non_hermitian_declared_block() {
        let b = LocalBlock::hermitian(vec![0], vec![c(0.0), c(1.0), c(0.0), c(0.0)]);
        let err = Hamiltonian::new(1, vec![LocalTerm::block(b)]).unwrap_err();
        assert!(matches!(err, Error::InvalidTerm { term: 0, .. }));
    }

    #[test]
    fn test_rejects_bad_support() {
        let m = vec![c(1.0); 16];
        let dup = LocalBlock::hermitian(vec![1, 1], m.clone());
        assert!(Hamiltonian::new(2, vec![LocalTerm::block(dup)]).is_err());
        let out = LocalBlock::hermitian(vec![0, 2], m);
        assert!(Hamiltonian::new(2, vec![LocalTerm::block(out)]).is_err());
    }

    #[test]
    fn test_rejects_wrong_pauli_length() {
        let t = LocalTerm::pauli(1.0, "XX").unwrap();
        assert!(Hamiltonian::new(3, vec![t]).is_err());
    }

    #[test]
    fn test_decomposition_kappa_and_sparsity() {
        let h = Hamiltonian::new(
            2,
            vec![
                LocalTerm::pauli(1.0, "XX").unwrap(),
                LocalTerm::pauli(-0.5, "ZI").unwrap(),
                LocalTerm::pauli(0.25, "IY").unwrap().with_kappa(1.0),
            ],
        )
        .unwrap();
        let d = h.decomposition().unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.sparsity(), 1);
        assert_eq!(d.kappas(), &[1.0, 0.5, 1.0]);
        assert!((d.kappa() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn test_idle_copy_pads_pauli_strings() {
        let h = Hamiltonian::new(1, vec![LocalTerm::pauli(1.0, "Z").unwrap()]).unwrap();
        let h2 = h.with_idle_copy().unwrap();
        assert_eq!(h2.num_qubits(), 2);
        match &h2.terms()[0].operator {
            TermOperator::Pauli(p) => assert_eq!(p.ops, vec![Pauli::Z, Pauli::I]),
            _ => panic!("expected Pauli"),
        }
    }

    #[test]
    fn test_bad_pauli_char_is_reported() {
        let err = "XQ".parse::<PauliString>().unwrap_err();
        assert_eq!(err, BadPauliChar('Q'));
    }
}
