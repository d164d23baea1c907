//! Ambient decision-space points.
//!
//! The meta-algorithm is generic over the vector space the sub-algorithms
//! predict in: plain vectors for mirror descent, symmetric matrices for the
//! spectral learners. `Point` is the minimal pairing/affine interface the
//! loss abstraction and the aggregation layer need.

use nalgebra::DMatrix;

/// Element of the ambient vector space; also used for dual vectors
/// (subgradients), which live in the same coordinates.
pub trait Point: Clone {
    /// The zero element, shaped like `self`.
    fn zeros_like(&self) -> Self;

    /// Canonical pairing `<self, other>` (dot product / Frobenius).
    fn pair(&self, other: &Self) -> f64;

    /// `self += coef * other`.
    fn add_scaled(&mut self, coef: f64, other: &Self);

    /// Euclidean (Frobenius) norm; used by generators and tests.
    fn norm(&self) -> f64 {
        self.pair(self).max(0.0).sqrt()
    }
}

impl Point for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }

    fn pair(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    fn add_scaled(&mut self, coef: f64, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.iter_mut().zip(other) {
            *a += coef * b;
        }
    }
}

/// Symmetric matrix point. Construction symmetrizes, so downstream code can
/// rely on `m == m^T` up to roundoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat(DMatrix<f64>);

impl SymMat {
    /// Build from any square matrix by averaging with its transpose.
    pub fn new(m: DMatrix<f64>) -> Self {
        let sym = (&m + m.transpose()) * 0.5;
        SymMat(sym)
    }

    /// Zero matrix of side `dim`.
    pub fn zeros(dim: usize) -> Self {
        SymMat(DMatrix::zeros(dim, dim))
    }

    /// Identity of side `dim`.
    pub fn identity(dim: usize) -> Self {
        SymMat(DMatrix::identity(dim, dim))
    }

    /// Rank-one matrix `v v^T`.
    pub fn outer(v: &[f64]) -> Self {
        let d = v.len();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = v[i] * v[j];
            }
        }
        SymMat(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Max absolute asymmetry `max_ij |m_ij - m_ji|` of the backing storage.
    pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl Point for SymMat {
    fn zeros_like(&self) -> Self {
        SymMat::zeros(self.dim())
    }

    fn pair(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    fn add_scaled(&mut self, coef: f64, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        self.0 += &other.0 * coef;
    }
}
