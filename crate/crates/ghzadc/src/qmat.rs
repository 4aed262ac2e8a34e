//! Dense complex linear algebra for registers of at most five qubits.
//!
//! Qubit 1 is the most significant bit of a basis index, so for three qubits
//! `|b1 b2 b3>` has index `4*b1 + 2*b2 + b3`. Every other module inherits this
//! ordering.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::{Index, IndexMut};
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Tolerance for Hermiticity and idempotence checks on operator inputs.
pub const OPERATOR_TOL: f64 = 1e-10;
/// Maximum entrywise deviation from Hermiticity accepted for a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Maximum deviation of a density-matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a density matrix.
pub const EIGEN_FLOOR: f64 = -1e-10;
/// Outcomes with probability below this are reported as null.
pub const NULL_PROBABILITY: f64 = 1e-12;

/// Errors raised by the linear-algebra layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmatError {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("qubit index {index} out of range for a {n}-qubit register")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("state vector is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("operator is not a Hermitian idempotent (deviation {0:e})")]
    NotProjector(f64),
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self, QmatError> {
        if rows * cols != entries.len() {
            return Err(QmatError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let m = Self { rows, cols, entries };
        if !m.is_finite() {
            return Err(QmatError::NonFinite);
        }
        Ok(m)
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, QmatError> {
        Self::from_vec(rows, cols, entries.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(
            dim,
            dim,
            |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
        )
    }

    /// Diagonal matrix with the given real entries.
    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        Self::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Matrix product `self * rhs`.
    ///
    /// # Panics
    /// Panics when the inner dimensions differ.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ in matmul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.entries[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.entries[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Similarity transform `u * self * u†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// Entrywise sum.
    ///
    /// # Panics
    /// Panics when the shapes differ.
    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shapes differ in add");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus of `self - rhs`; infinite when shapes differ.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("static shape")
}

pub fn sigma_y() -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    ComplexMatrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)]).expect("static shape")
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::diag(&[1.0, -1.0])
}

/// Single-qubit operator acting on `qubit` (1-based) of an `n`-qubit register.
pub fn embed_single(op: &ComplexMatrix, qubit: usize, n: usize) -> Result<ComplexMatrix, QmatError> {
    if qubit == 0 || qubit > n {
        return Err(QmatError::IndexOutOfRange { index: qubit, n });
    }
    let factors: Vec<ComplexMatrix> = (1..=n)
        .map(|k| if k == qubit { op.clone() } else { identity2() })
        .collect();
    Ok(kron_all(&factors))
}

fn check_hermitian(m: &ComplexMatrix) -> Result<(), QmatError> {
    if !m.is_square() {
        return Err(QmatError::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            m.rows, m.cols
        )));
    }
    let dev = m.hermiticity_deviation();
    if dev > OPERATOR_TOL {
        return Err(QmatError::NotHermitian(dev));
    }
    Ok(())
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, QmatError> {
    check_hermitian(m)?;
    let eig = m.to_nalgebra().symmetric_eigenvalues();
    let mut values: Vec<f64> = eig.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues sorted descending
/// and the matching unit eigenvectors as the columns of the returned matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), QmatError> {
    check_hermitian(m)?;
    let eig = m.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.rows).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(m.rows, m.rows, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

fn qubit_count(dim: usize) -> Result<usize, QmatError> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QmatError::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Normalized state vector of a qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, QmatError> {
        qubit_count(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(QmatError::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index>` of `dim` amplitudes.
    pub fn basis(dim: usize, index: usize) -> Result<Self, QmatError> {
        let n = qubit_count(dim)?;
        if index >= dim {
            return Err(QmatError::IndexOutOfRange { index, n });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Single-qubit state with Bloch angles `(theta, phi)`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        Self {
            amplitudes: vec![
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phi),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Projector `|psi><psi|`.
    pub fn density(&self) -> DensityMatrix {
        let d = self.dim();
        let m = ComplexMatrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj());
        DensityMatrix::from_trusted(m)
    }
}

/// Unit-trace, Hermitian, positive semidefinite matrix on a qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates and wraps a matrix.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QmatError> {
        let rho = Self::checked_shape(matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    fn checked_shape(matrix: ComplexMatrix) -> Result<Self, QmatError> {
        if !matrix.is_square() {
            return Err(QmatError::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                matrix.rows, matrix.cols
            )));
        }
        let n_qubits = qubit_count(matrix.rows)?;
        if !matrix.is_finite() {
            return Err(QmatError::NonFinite);
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square() && matrix.rows.is_power_of_two());
        let n_qubits = matrix.rows.trailing_zeros() as usize;
        Self { n_qubits, matrix }
    }

    /// Checks trace, Hermiticity and positivity against the crate tolerances.
    pub fn validate(&self) -> Result<(), QmatError> {
        let dev = self.matrix.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(QmatError::NotHermitian(dev));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QmatError::InvalidTrace(tr.re));
        }
        let min = hermitian_eigenvalues(&self.matrix)?.last().copied().unwrap_or(0.0);
        if min < EIGEN_FLOOR {
            return Err(QmatError::NotPositive(min));
        }
        Ok(())
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self::from_trusted(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    /// Real diagonal (populations).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `u rho u†` for a unitary `u` of matching dimension.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self, QmatError> {
        if u.rows != self.dim() || u.cols != self.dim() {
            return Err(QmatError::DimensionMismatch(format!(
                "{}x{} operator on a {}-dimensional state",
                u.rows,
                u.cols,
                self.dim()
            )));
        }
        Ok(Self::from_trusted(self.matrix.conjugate_by(u)))
    }

    /// `Tr(rho * op)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.matrix[(i, k)] * op[(k, i)];
            }
        }
        acc
    }

    /// `<psi| rho |psi>` for a pure state of matching dimension.
    pub fn overlap(&self, psi: &PureState) -> f64 {
        let a = psi.amplitudes();
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            if a[i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..d {
                acc += a[i].conj() * self.matrix[(i, j)] * a[j];
            }
        }
        acc.re
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self::from_trusted(kron(&self.matrix, &other.matrix))
    }
}

/// Reduced state of the qubits in `keep` (1-based, any order; the result
/// orders them ascending).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize], n: usize) -> Result<DensityMatrix, QmatError> {
    if rho.dim() != 1 << n {
        return Err(QmatError::DimensionMismatch(format!(
            "{}-dimensional state is not a {n}-qubit register",
            rho.dim()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&q| q == 0 || q > n) {
        return Err(QmatError::IndexOutOfRange { index: bad, n });
    }
    let traced: Vec<usize> = (1..=n).filter(|q| !kept.contains(q)).collect();
    let bit = |q: usize| n - q;
    let assemble = |sub: usize, qubits: &[usize]| -> usize {
        qubits
            .iter()
            .enumerate()
            .map(|(pos, &q)| ((sub >> (qubits.len() - 1 - pos)) & 1) << bit(q))
            .sum()
    };
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        let bi = assemble(i, &kept);
        for j in 0..dk {
            let bj = assemble(j, &kept);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                let bt = assemble(t, &traced);
                acc += rho.matrix[(bi | bt, bj | bt)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Outcome of a projective measurement element.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `Tr(P rho P)`.
    pub probability: f64,
    /// Renormalized post-measurement state, `None` for a null outcome.
    pub state: Option<DensityMatrix>,
}

/// Applies a projector and renormalizes.
pub fn apply_projector(rho: &DensityMatrix, proj: &ComplexMatrix) -> Result<Projection, QmatError> {
    if proj.rows != rho.dim() || proj.cols != rho.dim() {
        return Err(QmatError::DimensionMismatch(format!(
            "{}x{} projector on a {}-dimensional state",
            proj.rows,
            proj.cols,
            rho.dim()
        )));
    }
    let dev = proj.hermiticity_deviation().max(proj.matmul(proj).max_abs_diff(proj));
    if dev > OPERATOR_TOL {
        return Err(QmatError::NotProjector(dev));
    }
    let post = proj.matmul(&rho.matrix).matmul(proj);
    let probability = post.trace().re;
    if probability <= NULL_PROBABILITY {
        return Ok(Projection {
            probability: probability.max(0.0),
            state: None,
        });
    }
    Ok(Projection {
        probability,
        state: Some(DensityMatrix::from_trusted(post.scale_real(1.0 / probability))),
    })
}
