//! Complex linear algebra and validated quantum-state primitives.
//!
//! Qubit 0 is always the leftmost (most significant) tensor factor, so the
//! basis index of `|q0 q1 ... q(n-1)>` is the binary number `q0 q1 ... q(n-1)`.

mod info;
pub mod linalg;
pub mod pauli;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use info::{
    dephase, embed_operator, gibbs_state, partial_trace, reduce_operator, reduced_state,
    relative_entropy, shannon, support_defect, von_neumann_entropy, Keep,
};
pub use linalg::{eigh, kron};

pub type C64 = Complex64;
pub type CMatrix = Array2<C64>;

/// Entrywise tolerance for Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues above `-POSITIVITY_TOL` are roundoff and clipped to zero.
pub const POSITIVITY_TOL: f64 = 1e-9;
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Trace-one positive semidefinite matrix.
///
/// The spectrum is computed once at construction (it is needed for the
/// positivity check anyway) and reused by the entropy functions.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMatrix,
    spectrum: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        linalg::check_square(&mat)?;
        let deviation = linalg::hermiticity_defect(&mat);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = linalg::trace(&mat);
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        let mut spectrum = linalg::eigvalsh(&mat)?;
        if let Some(&lowest) = spectrum.first() {
            if lowest < -POSITIVITY_TOL {
                return Err(Error::NegativeEigenvalue { value: lowest });
            }
        }
        for ev in &mut spectrum {
            if *ev < 0.0 {
                *ev = 0.0;
            }
        }
        Ok(Self { mat, spectrum })
    }

    /// Projector onto a (normalised on the fly) state vector.
    pub fn pure(psi: &Array1<C64>) -> Result<Self> {
        let norm = linalg::vec_norm(psi);
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let psi = psi.mapv(|z| z / norm);
        let n = psi.len();
        let mat = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Self::new(mat)
    }

    /// `|index><index|` in the computational basis.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut mat = Array2::zeros((dim, dim));
        mat[[index, index]] = C64::new(1.0, 0.0);
        Self::new(mat)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = linalg::identity(dim).mapv(|z| z / dim as f64);
        Self {
            mat,
            spectrum: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Ascending eigenvalues with negative roundoff clipped to zero.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.mat, &self.mat).re
    }

    /// `tr(rho O)`.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        linalg::trace_product(&self.mat, op)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(kron(&self.mat, &other.mat))
    }
}

/// Hermitian matrix: Hamiltonians and observables.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    pub fn new(mat: CMatrix) -> Result<Self> {
        linalg::check_square(&mat)?;
        let deviation = linalg::hermiticity_defect(&mat);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: linalg::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            mat: kron(&self.mat, &other.mat),
        }
    }

    /// Spectral norm, i.e. the largest |eigenvalue|.
    pub fn spectral_norm(&self) -> Result<f64> {
        let vals = linalg::eigvalsh(&self.mat)?;
        Ok(vals.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }
}

impl std::ops::Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

/// Orthonormal basis stored as the columns of a unitary matrix.
#[derive(Clone, Debug)]
pub struct Basis {
    vectors: CMatrix,
    computational: bool,
}

impl Basis {
    /// Validates orthonormality (Gram matrix equal to the identity).
    pub fn new(vectors: CMatrix) -> Result<Self> {
        let dim = linalg::check_square(&vectors)?;
        let gram = linalg::dagger(&vectors).dot(&vectors);
        let deviation = linalg::max_abs_diff(&gram, &linalg::identity(dim));
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self::from_trusted(vectors))
    }

    pub(crate) fn from_trusted(vectors: CMatrix) -> Self {
        let computational = vectors == linalg::identity(vectors.nrows());
        Self {
            vectors,
            computational,
        }
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            vectors: linalg::identity(dim),
            computational: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Column matrix whose k-th column is the k-th basis vector.
    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Array1<C64> {
        self.vectors.column(k).to_owned()
    }

    pub fn is_computational(&self) -> bool {
        self.computational
    }

    /// Express an operator in this basis: `B^H A B`.
    pub fn to_basis(&self, a: &CMatrix) -> CMatrix {
        if self.computational {
            return a.clone();
        }
        linalg::dagger(&self.vectors).dot(a).dot(&self.vectors)
    }

    /// Inverse of [`Basis::to_basis`]: `B A B^H`.
    pub fn from_basis(&self, a: &CMatrix) -> CMatrix {
        if self.computational {
            return a.clone();
        }
        self.vectors.dot(a).dot(&linalg::dagger(&self.vectors))
    }

    /// Diagonal of `B^H A B` (populations in this basis).
    pub fn populations(&self, a: &CMatrix) -> Vec<C64> {
        if self.computational {
            return a.diag().to_vec();
        }
        let ab = a.dot(&self.vectors);
        (0..self.dim())
            .map(|k| {
                self.vectors
                    .column(k)
                    .iter()
                    .zip(ab.column(k).iter())
                    .map(|(b, x)| b.conj() * x)
                    .sum()
            })
            .collect()
    }
}

/// Bipartition of an `n`-qubit register into `A` and its complement `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    total_qubits: usize,
    subset_a: Vec<usize>,
}

impl Partition {
    pub fn new(total_qubits: usize, subset_a: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut subset_a: Vec<usize> = subset_a.into_iter().collect();
        subset_a.sort_unstable();
        subset_a.dedup();
        if subset_a.is_empty() {
            return Err(Error::InvalidPartition("subset A is empty".into()));
        }
        if subset_a.len() >= total_qubits {
            return Err(Error::InvalidPartition(format!(
                "subset A {subset_a:?} is not a proper subset of {total_qubits} qubits"
            )));
        }
        if let Some(&q) = subset_a.iter().find(|&&q| q >= total_qubits) {
            return Err(Error::InvalidPartition(format!(
                "qubit index {q} out of range for {total_qubits} qubits"
            )));
        }
        Ok(Self {
            total_qubits,
            subset_a,
        })
    }

    /// Qubit 0 versus the rest.
    pub fn first_qubit(total_qubits: usize) -> Result<Self> {
        Self::new(total_qubits, [0])
    }

    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn subset_a(&self) -> &[usize] {
        &self.subset_a
    }

    pub fn subset_b(&self) -> Vec<usize> {
        (0..self.total_qubits)
            .filter(|q| self.subset_a.binary_search(q).is_err())
            .collect()
    }

    pub fn dim(&self) -> usize {
        1 << self.total_qubits
    }
}
