//! Dense ground truth for small instances.
//!
//! Everything here materializes `N×N` matrices and is meant for validation
//! only: exact spectra, overlaps with low-energy eigenspaces and exact
//! sandwiches of chains, powers and polynomials.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{Decomposition, Hamiltonian, LocalTerm, Pauli, SparseRows, TermOperator};
use crate::imm::MatrixChain;
use crate::state_access::VectorAccessor;

/// Largest dimension handled densely.
pub const MAX_DENSE_DIM: usize = 1 << 12;

/// Allowed deviation in the normality and reconstruction checks, relative
/// to the largest matrix entry (at least 1).
pub const DENSE_TOL: f64 = 1e-8;

/// Eigenvalues closer than this to the window edge count as inside it.
pub const DEGENERACY_TOL: f64 = 1e-9;

type CMatrix = DMatrix<Complex64>;

/// A Hermitian matrix with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: CMatrix,
    /// Ascending eigenvalues.
    eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`.
    eigenvectors: CMatrix,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl DenseOperator {
    /// Diagonalize `matrix` after checking that it is normal with a real
    /// spectrum.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        check_dim(n)?;
        let scale = max_abs(&matrix).max(1.0);
        let adj = matrix.adjoint();
        let commutator = &matrix * &adj - &adj * &matrix;
        let deviation = max_abs(&commutator) / (scale * scale);
        if deviation > DENSE_TOL {
            return Err(Error::NotNormal { deviation });
        }
        let deviation = max_abs(&(&matrix - &adj)) / scale;
        if deviation > DENSE_TOL {
            return Err(Error::NotHermitian { deviation });
        }

        let eig = matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

        let op = Self {
            matrix,
            eigenvalues,
            eigenvectors,
        };
        let residual = max_abs(&(op.eigen_apply(|l| l) - &op.matrix)) / scale;
        if residual > DENSE_TOL {
            return Err(Error::Unsupported(format!(
                "eigendecomposition residual {residual:e} exceeds tolerance"
            )));
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Eigenvector of the smallest eigenvalue.
    pub fn ground_vector(&self) -> Vec<Complex64> {
        self.eigenvectors.column(0).iter().copied().collect()
    }

    /// `Σ_i f(λ_i)|u_i⟩⟨u_i|`.
    pub fn eigen_apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let diag = DVector::from_iterator(
            n,
            self.eigenvalues.iter().map(|&l| Complex64::new(f(l), 0.0)),
        );
        let scaled = CMatrix::from_fn(n, n, |r, c| self.eigenvectors[(r, c)] * diag[c]);
        scaled * self.eigenvectors.adjoint()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim: n,
            limit: MAX_DENSE_DIM,
        });
    }
    Ok(())
}

/// Dense matrix of one sparse term, read row by row.
pub fn dense_rows(term: &dyn SparseRows) -> Result<CMatrix> {
    let n = term.dim();
    check_dim(n)?;
    let mut m = CMatrix::zeros(n, n);
    for row in 0..n {
        for slot in 0..term.row_nnz(row) {
            let (col, v) = term.row_entry(row, slot);
            m[(row, col)] += v;
        }
    }
    Ok(m)
}

/// `Σ_i A_i` assembled from row queries.
pub fn reconstruct_matrix(decomp: &Decomposition) -> Result<CMatrix> {
    check_dim(decomp.dim())?;
    let mut m = CMatrix::zeros(decomp.dim(), decomp.dim());
    for term in decomp.terms() {
        m += dense_rows(term.as_ref())?;
    }
    Ok(m)
}

/// [`reconstruct_matrix`] followed by diagonalization.
pub fn reconstruct(decomp: &Decomposition) -> Result<DenseOperator> {
    DenseOperator::new(reconstruct_matrix(decomp)?)
}

fn single_qubit(p: Pauli) -> CMatrix {
    let (o, l, i) = (
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
    );
    let entries = match p {
        Pauli::I => [l, o, o, l],
        Pauli::X => [o, l, l, o],
        Pauli::Y => [o, -i, i, o],
        Pauli::Z => [l, o, o, -l],
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

/// `M_{n-1} ⊗ ··· ⊗ M_0`, so that qubit `q` is bit `q` of the index.
fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors.iter().rev().fold(
        CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        |acc, f| acc.kronecker(f),
    )
}

/// Dense embedding of a term on `n` qubits built from Kronecker products of
/// single-qubit factors, independent of the sparse row representation.
pub fn kron_embed(term: &LocalTerm, n: usize) -> Result<CMatrix> {
    check_dim(1usize << n)?;
    match &term.operator {
        TermOperator::Pauli(p) => {
            let factors: Vec<CMatrix> = p.ops.iter().map(|&op| single_qubit(op)).collect();
            Ok(kron_all(&factors) * Complex64::new(p.coeff, 0.0))
        }
        TermOperator::Block(b) => {
            let k = b.support.len();
            let local = 1usize << k;
            let mut total = CMatrix::zeros(1 << n, 1 << n);
            for a in 0..local {
                for c in 0..local {
                    let v = b.matrix[a * local + c];
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut factors = vec![single_qubit(Pauli::I); n];
                    for (pos, &q) in b.support.iter().enumerate() {
                        let mut e = CMatrix::zeros(2, 2);
                        e[((a >> pos) & 1, (c >> pos) & 1)] = Complex64::new(1.0, 0.0);
                        factors[q] = e;
                    }
                    total += kron_all(&factors) * v;
                }
            }
            Ok(total)
        }
    }
}

/// Dense `H = Σ_i H_i` through [`kron_embed`].
pub fn dense_hamiltonian(h: &Hamiltonian) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(h.dim(), h.dim());
    for term in h.terms() {
        m += kron_embed(term, h.num_qubits())?;
    }
    Ok(m)
}

/// Smallest eigenvalue `λ_1`.
pub fn exact_ground_energy(op: &DenseOperator) -> f64 {
    op.eigenvalues[0]
}

/// Norm of the projection of `w` onto the eigenspaces with eigenvalue at
/// most `λ_1 + σ`.
pub fn exact_overlap(op: &DenseOperator, w: &[Complex64], sigma: f64) -> f64 {
    let cutoff = op.eigenvalues[0] + sigma + DEGENERACY_TOL;
    let w = DVector::from_column_slice(w);
    op.eigenvalues
        .iter()
        .enumerate()
        .take_while(|(_, &l)| l <= cutoff)
        .map(|(i, _)| op.eigenvectors.column(i).dotc(&w).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// All entries of an accessor.
pub fn dense_vector(v: &dyn VectorAccessor) -> Vec<Complex64> {
    (0..v.dim()).map(|j| v.query(j)).collect()
}

/// `⟨ψ|M|φ⟩`.
pub fn sandwich(psi: &[Complex64], m: &CMatrix, phi: &[Complex64]) -> Complex64 {
    let psi = DVector::from_column_slice(psi);
    let phi = DVector::from_column_slice(phi);
    psi.dotc(&(m * phi))
}

/// Dense `B_r···B_1`.
pub fn chain_product(chain: &MatrixChain, dim: usize) -> Result<CMatrix> {
    check_dim(dim)?;
    chain
        .matrices()
        .iter()
        .try_fold(CMatrix::identity(dim, dim), |acc, b| {
            Ok(dense_rows(b.as_ref())? * acc)
        })
}

/// Exact `⟨ψ|B_r···B_1|φ⟩`.
pub fn exact_chain_sandwich(
    psi: &[Complex64],
    chain: &MatrixChain,
    phi: &[Complex64],
) -> Result<Complex64> {
    Ok(sandwich(psi, &chain_product(chain, phi.len())?, phi))
}

/// Exact `⟨ψ|A^r|φ⟩` by repeated multiplication.
pub fn exact_power_sandwich(
    op: &DenseOperator,
    psi: &[Complex64],
    power: usize,
    phi: &[Complex64],
) -> Complex64 {
    let mut v = DVector::from_column_slice(phi);
    for _ in 0..power {
        v = op.matrix() * v;
    }
    DVector::from_column_slice(psi).dotc(&v)
}

/// Exact `⟨ψ|f(A)|φ⟩ = Σ_i f(λ_i)⟨ψ|u_i⟩⟨u_i|φ⟩`.
pub fn exact_function_sandwich(
    op: &DenseOperator,
    psi: &[Complex64],
    f: impl Fn(f64) -> f64,
    phi: &[Complex64],
) -> Complex64 {
    let psi = DVector::from_column_slice(psi);
    let phi = DVector::from_column_slice(phi);
    op.eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let u = op.eigenvectors.column(i);
            u.dotc(&psi).conj() * u.dotc(&phi) * f(l)
        })
        .sum()
}

/// Exact `⟨ψ|P(A)|φ⟩` for monomial coefficients, evaluated in the eigenbasis.
pub fn exact_polynomial_sandwich(
    op: &DenseOperator,
    psi: &[Complex64],
    coeffs: &[f64],
    phi: &[Complex64],
) -> Complex64 {
    exact_function_sandwich(
        op,
        psi,
        |x| coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a),
        phi,
    )
}

/// `P(A)` by Horner's rule on matrices.
pub fn polynomial_of_matrix(m: &CMatrix, coeffs: &[f64]) -> CMatrix {
    let n = m.nrows();
    coeffs.iter().rev().fold(CMatrix::zeros(n, n), |acc, &a| {
        acc * m + CMatrix::identity(n, n) * Complex64::new(a, 0.0)
    })
}
