//! Row-query access to sparse terms and `(s, κ)`-decompositions.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-query access to an `s`-row-sparse `N × N` matrix.
///
/// Only rows are ever queried; nothing in the crate needs column access.
/// Implementations must be pure: the same `(row, slot)` always yields the
/// same entry.
pub trait SparseRows: Send + Sync + fmt::Debug {
    /// Dimension `N`.
    fn dim(&self) -> usize;

    /// Upper bound on the number of nonzeros in any row.
    fn sparsity(&self) -> usize;

    /// Number of stored nonzeros in `row` (at most [`sparsity`](Self::sparsity)).
    fn row_nnz(&self, row: usize) -> usize;

    /// The `slot`-th nonzero of `row` as `(column, value)`.
    fn row_entry(&self, row: usize, slot: usize) -> (usize, Complex64);
}

/// Shared handle to a sparse term.
pub type TermHandle = Arc<dyn SparseRows>;

/// Signed Pauli string `c · P_0 ⊗ … ⊗ P_{n-1}`; every row has exactly one
/// nonzero.
#[derive(Debug, Clone)]
pub struct PauliRows {
    dim: usize,
    flip_mask: usize,
    sign_mask: usize,
    // coefficient times i^{#Y}
    prefactor: Complex64,
}

impl PauliRows {
    pub(crate) fn new(
        n: usize,
        flip_mask: usize,
        sign_mask: usize,
        y_count: usize,
        coeff: f64,
    ) -> Self {
        let phase = match y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Self {
            dim: 1usize << n,
            flip_mask,
            sign_mask,
            prefactor: phase * coeff,
        }
    }
}

impl SparseRows for PauliRows {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sparsity(&self) -> usize {
        1
    }

    fn row_nnz(&self, _row: usize) -> usize {
        1
    }

    fn row_entry(&self, row: usize, _slot: usize) -> (usize, Complex64) {
        // <row|P|col> with col = row ^ flips; Z and Y contribute (-1)^{bit of col}.
        let col = row ^ self.flip_mask;
        let value = if (col & self.sign_mask).count_ones() % 2 == 1 {
            -self.prefactor
        } else {
            self.prefactor
        };
        (col, value)
    }
}

/// A dense `2^k × 2^k` block acting on `k` chosen qubits, embedded as
/// `block ⊗ I` in the `2^n`-dimensional space.
///
/// Bit `a` of the local block index corresponds to qubit `support[a]`.
#[derive(Debug, Clone)]
pub struct LocalBlockRows {
    dim: usize,
    support: Vec<usize>,
    support_mask: usize,
    // nonzeros of each local row as (local column, value)
    rows: Vec<Vec<(usize, Complex64)>>,
    sparsity: usize,
}

impl LocalBlockRows {
    pub(crate) fn new(n: usize, support: &[usize], matrix: &[Complex64]) -> Self {
        let local_dim = 1usize << support.len();
        let rows: Vec<Vec<(usize, Complex64)>> = (0..local_dim)
            .map(|r| {
                (0..local_dim)
                    .filter_map(|c| {
                        let v = matrix[r * local_dim + c];
                        (v != Complex64::new(0.0, 0.0)).then_some((c, v))
                    })
                    .collect()
            })
            .collect();
        let sparsity = rows.iter().map(Vec::len).max().unwrap_or(0);
        Self {
            dim: 1usize << n,
            support: support.to_vec(),
            support_mask: support.iter().fold(0, |m, &q| m | (1usize << q)),
            rows,
            sparsity,
        }
    }

    fn gather(&self, index: usize) -> usize {
        self.support
            .iter()
            .enumerate()
            .fold(0, |acc, (a, &q)| acc | (((index >> q) & 1) << a))
    }

    fn scatter(&self, local: usize) -> usize {
        self.support
            .iter()
            .enumerate()
            .fold(0, |acc, (a, &q)| acc | (((local >> a) & 1) << q))
    }
}

impl SparseRows for LocalBlockRows {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sparsity(&self) -> usize {
        self.sparsity
    }

    fn row_nnz(&self, row: usize) -> usize {
        self.rows[self.gather(row)].len()
    }

    fn row_entry(&self, row: usize, slot: usize) -> (usize, Complex64) {
        let (local_col, value) = self.rows[self.gather(row)][slot];
        ((row & !self.support_mask) | self.scatter(local_col), value)
    }
}

/// `scale · I`.
#[derive(Debug, Clone)]
pub struct ScaledIdentity {
    dim: usize,
    scale: f64,
}

impl ScaledIdentity {
    pub fn new(dim: usize, scale: f64) -> Self {
        Self { dim, scale }
    }
}

impl SparseRows for ScaledIdentity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sparsity(&self) -> usize {
        1
    }

    fn row_nnz(&self, _row: usize) -> usize {
        1
    }

    fn row_entry(&self, row: usize, _slot: usize) -> (usize, Complex64) {
        (row, Complex64::new(self.scale, 0.0))
    }
}

/// `factor · inner`.
#[derive(Debug, Clone)]
pub struct ScaledRows {
    inner: TermHandle,
    factor: f64,
}

impl ScaledRows {
    pub fn new(inner: TermHandle, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl SparseRows for ScaledRows {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn sparsity(&self) -> usize {
        self.inner.sparsity()
    }

    fn row_nnz(&self, row: usize) -> usize {
        self.inner.row_nnz(row)
    }

    fn row_entry(&self, row: usize, slot: usize) -> (usize, Complex64) {
        let (col, v) = self.inner.row_entry(row, slot);
        (col, v * self.factor)
    }
}

/// Explicit per-row lists of nonzeros.
#[derive(Debug, Clone)]
pub struct RowListMatrix {
    rows: Vec<Vec<(usize, Complex64)>>,
    sparsity: usize,
}

impl RowListMatrix {
    /// Build from per-row `(column, value)` lists. Columns must be `< rows.len()`.
    pub fn new(rows: Vec<Vec<(usize, Complex64)>>) -> Result<Self> {
        let dim = rows.len();
        for (r, row) in rows.iter().enumerate() {
            if let Some(&(c, _)) = row.iter().find(|(c, _)| *c >= dim) {
                return Err(Error::InvalidTerm {
                    term: r,
                    reason: format!("column {c} out of range for dimension {dim}"),
                });
            }
        }
        let sparsity = rows.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self { rows, sparsity })
    }
}

impl SparseRows for RowListMatrix {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn sparsity(&self) -> usize {
        self.sparsity
    }

    fn row_nnz(&self, row: usize) -> usize {
        self.rows[row].len()
    }

    fn row_entry(&self, row: usize, slot: usize) -> (usize, Complex64) {
        self.rows[row][slot]
    }
}

/// An `(s, κ)`-decomposition `A = Σ_i A_i` with known bounds `‖A_i‖ ≤ κ_i`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    dim: usize,
    terms: Vec<TermHandle>,
    kappas: Vec<f64>,
}

impl Decomposition {
    /// Assemble a decomposition. All terms must share `dim`; bounds must be
    /// finite and nonnegative.
    pub fn new(dim: usize, terms: Vec<TermHandle>, kappas: Vec<f64>) -> Result<Self> {
        if terms.len() != kappas.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                found: kappas.len(),
            });
        }
        for (i, (term, &k)) in terms.iter().zip(&kappas).enumerate() {
            if term.dim() != dim {
                return Err(Error::InvalidTerm {
                    term: i,
                    reason: format!("dimension {} differs from {dim}", term.dim()),
                });
            }
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::InvalidTerm {
                    term: i,
                    reason: format!("norm bound {k} must be finite and nonnegative"),
                });
            }
        }
        Ok(Self { dim, terms, kappas })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[TermHandle] {
        &self.terms
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    /// Total bound `κ = Σ κ_i`.
    pub fn kappa(&self) -> f64 {
        self.kappas.iter().sum()
    }

    /// Maximum row sparsity over all terms.
    pub fn sparsity(&self) -> usize {
        self.terms.iter().map(|t| t.sparsity()).max().unwrap_or(0)
    }

    /// Decomposition of `A' = (I + A/κ)/2`: the identity half as its own
    /// 1-sparse term, followed by each `A_i/(2κ)` with bound `κ_i/(2κ)`.
    /// The result has total bound 1 and spectrum in `[0, 1]`.
    pub fn shift_rescale(&self) -> Result<Decomposition> {
        let kappa = self.kappa();
        if kappa <= 0.0 {
            return Err(Error::ZeroKappa);
        }
        let mut terms: Vec<TermHandle> = Vec::with_capacity(self.len() + 1);
        let mut kappas = Vec::with_capacity(self.len() + 1);
        terms.push(Arc::new(ScaledIdentity::new(self.dim, 0.5)));
        kappas.push(0.5);
        for (term, &k) in self.terms.iter().zip(&self.kappas) {
            terms.push(Arc::new(ScaledRows::new(term.clone(), 0.5 / kappa)));
            kappas.push(0.5 * k / kappa);
        }
        Decomposition::new(self.dim, terms, kappas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn test_pauli_x_rows() {
        let x = PauliRows::new(1, 1, 0, 0, 1.0);
        assert_eq!(x.row_entry(0, 0), (1, c(1.0)));
        assert_eq!(x.row_entry(1, 0), (0, c(1.0)));
    }

    #[test]
    fn test_pauli_z_on_qubit_one() {
        let z = PauliRows::new(2, 0, 0b10, 0, 1.0);
        for i in 0..4 {
            let expect = if i & 0b10 == 0 { 1.0 } else { -1.0 };
            assert_eq!(z.row_entry(i, 0), (i, c(expect)));
        }
    }

    #[test]
    fn test_pauli_y_matches_matrix() {
        // Y = [[0, -i], [i, 0]]
        let y = PauliRows::new(1, 1, 1, 1, 1.0);
        assert_eq!(y.row_entry(0, 0), (1, Complex64::new(0.0, -1.0)));
        assert_eq!(y.row_entry(1, 0), (0, Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn test_block_rows_skip_zeros() {
        // [[1, 0], [2, 3]] on qubit 1 of 2
        let m = [c(1.0), c(0.0), c(2.0), c(3.0)];
        let b = LocalBlockRows::new(2, &[1], &m);
        assert_eq!(b.sparsity(), 2);
        assert_eq!(b.row_nnz(0b01), 1);
        assert_eq!(b.row_entry(0b01, 0), (0b01, c(1.0)));
        assert_eq!(b.row_nnz(0b10), 2);
        assert_eq!(b.row_entry(0b10, 0), (0b00, c(2.0)));
        assert_eq!(b.row_entry(0b11, 1), (0b11, c(3.0)));
    }

    #[test]
    fn test_shift_rescale_of_z() {
        let z: TermHandle = Arc::new(PauliRows::new(1, 0, 1, 0, 1.0));
        let d = Decomposition::new(2, vec![z], vec![1.0]).unwrap();
        let p = d.shift_rescale().unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.kappas(), &[0.5, 0.5]);
        assert!((p.kappa() - 1.0).abs() < 1e-15);
        // diagonal of A' = (1, 0)
        let diag: Vec<f64> = (0..2)
            .map(|i| {
                p.terms()
                    .iter()
                    .map(|t| {
                        (0..t.row_nnz(i))
                            .map(|s| t.row_entry(i, s))
                            .filter(|(col, _)| *col == i)
                            .map(|(_, v)| v.re)
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect();
        assert_eq!(diag, vec![1.0, 0.0]);
    }

    #[test]
    fn test_shift_rescale_rejects_zero_kappa() {
        let d = Decomposition::new(2, vec![], vec![]).unwrap();
        assert!(matches!(d.shift_rescale(), Err(Error::ZeroKappa)));
    }

    #[test]
    fn test_row_list_rejects_bad_column() {
        assert!(RowListMatrix::new(vec![vec![(3, c(1.0))]]).is_err());
    }
}
