//! Hermitian operators on Eve's system.
//!
//! Blocks are kept diagonal for as long as possible: every classical-Eve
//! construction stays on the diagonal fast path, and only genuinely quantum
//! blocks pay for a dense matrix and the Jacobi eigensolver.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use crate::metrics::eigen::SpectrumResult;

pub const MAX_EVE_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Diagonal(Vec<f64>),
    Dense { dim: usize, data: Vec<Complex64> },
}

/// A Hermitian operator of dimension `1..=64`, stored row-major when dense.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBlock {
    repr: Repr,
}

impl HermitianBlock {
    pub fn zeros(dim: usize) -> Self {
        HermitianBlock { repr: Repr::Diagonal(vec![0.0; dim]) }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianBlock { repr: Repr::Diagonal(vec![1.0; dim]) }
    }

    /// The computational-basis projector `[index]`.
    pub fn projector(dim: usize, index: usize) -> Self {
        let mut d = vec![0.0; dim];
        d[index] = 1.0;
        HermitianBlock { repr: Repr::Diagonal(d) }
    }

    pub fn diagonal(entries: Vec<f64>) -> Self {
        HermitianBlock { repr: Repr::Diagonal(entries) }
    }

    /// Row-major dense matrix. Fails if `data` is not `dim × dim` or deviates
    /// from Hermitian by more than `tolerance`.
    pub fn from_dense(dim: usize, data: Vec<Complex64>, tolerance: f64) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        let block = HermitianBlock { repr: Repr::Dense { dim, data } };
        let deviation = block.hermiticity_deviation();
        if deviation > tolerance || deviation.is_nan() {
            return Err(Error::NonHermitianBlock { deviation });
        }
        Ok(block)
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Diagonal(d) => d.len(),
            Repr::Dense { dim, .. } => *dim,
        }
    }

    pub fn is_diagonal_repr(&self) -> bool {
        matches!(self.repr, Repr::Diagonal(_))
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match &self.repr {
            Repr::Diagonal(d) => {
                if row == col {
                    Complex64::new(d[row], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Repr::Dense { dim, data } => data[row * dim + col],
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(d) => d.iter().fold(0.0, |acc, x| acc + x),
            Repr::Dense { dim, data } => (0..*dim).map(|i| data[i * dim + i].re).fold(0.0, |acc, x| acc + x),
        }
    }

    /// Real parts of the diagonal.
    pub fn diagonal_entries(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Diagonal(d) => d.clone(),
            Repr::Dense { dim, data } => (0..*dim).map(|i| data[i * dim + i].re).collect(),
        }
    }

    /// Largest off-diagonal magnitude; 0 for diagonal blocks.
    pub fn max_off_diagonal(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(_) => 0.0,
            Repr::Dense { dim, data } => {
                let mut m = 0.0f64;
                for i in 0..*dim {
                    for j in 0..*dim {
                        if i != j {
                            m = m.max(data[i * dim + j].norm());
                        }
                    }
                }
                m
            }
        }
    }

    /// `max |a_ij − conj(a_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        match &self.repr {
            Repr::Diagonal(_) => 0.0,
            Repr::Dense { dim, data } => {
                let mut m = 0.0f64;
                for i in 0..*dim {
                    for j in i..*dim {
                        let d = (data[i * dim + j] - data[j * dim + i].conj()).norm();
                        m = m.max(d);
                    }
                }
                m
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Diagonal(d) => d.iter().all(|&x| x == 0.0),
            Repr::Dense { data, .. } => data.iter().all(|z| z.re == 0.0 && z.im == 0.0),
        }
    }

    /// Row-major entries, expanded to a full matrix.
    pub fn to_dense(&self) -> Vec<Complex64> {
        match &self.repr {
            Repr::Diagonal(d) => {
                let n = d.len();
                let mut out = vec![Complex64::new(0.0, 0.0); n * n];
                for (i, &x) in d.iter().enumerate() {
                    out[i * n + i] = Complex64::new(x, 0.0);
                }
                out
            }
            Repr::Dense { data, .. } => data.clone(),
        }
    }

    /// Collapses a dense block whose off-diagonal and imaginary parts are all
    /// exactly zero into the diagonal representation.
    pub fn compact(self) -> Self {
        match self.repr {
            Repr::Dense { dim, ref data } => {
                let diagonal = (0..dim).all(|i| {
                    (0..dim).all(|j| {
                        let z = data[i * dim + j];
                        z.im == 0.0 && (i == j || z.re == 0.0)
                    })
                });
                if diagonal {
                    HermitianBlock::diagonal((0..dim).map(|i| data[i * dim + i].re).collect())
                } else {
                    self
                }
            }
            Repr::Diagonal(_) => self,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        let repr = match &self.repr {
            Repr::Diagonal(d) => Repr::Diagonal(d.iter().map(|x| x * factor).collect()),
            Repr::Dense { dim, data } => {
                Repr::Dense { dim: *dim, data: data.iter().map(|z| z * factor).collect() }
            }
        };
        HermitianBlock { repr }
    }

    pub fn add(&self, other: &HermitianBlock) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, 1.0);
        out
    }

    pub fn sub(&self, other: &HermitianBlock) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, other: &HermitianBlock, factor: f64) {
        assert_eq!(self.dim(), other.dim(), "block dimension mismatch");
        match (&mut self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += factor * y;
                }
            }
            (Repr::Dense { data, .. }, _) => {
                for (x, y) in data.iter_mut().zip(other.to_dense()) {
                    *x += y * factor;
                }
            }
            (Repr::Diagonal(_), Repr::Dense { dim, data: b }) => {
                let mut data = self.to_dense();
                for (x, y) in data.iter_mut().zip(b) {
                    *x += y * factor;
                }
                self.repr = Repr::Dense { dim: *dim, data };
            }
        }
    }

    /// Entrywise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &HermitianBlock) -> f64 {
        match (&self.repr, &other.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
            _ => self
                .to_dense()
                .iter()
                .zip(other.to_dense())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max),
        }
    }

    pub(crate) fn dense_parts(&self) -> Option<(usize, &[Complex64])> {
        match &self.repr {
            Repr::Dense { dim, data } => Some((*dim, data)),
            Repr::Diagonal(_) => None,
        }
    }

    pub(crate) fn diagonal_slice(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Dense { .. } => None,
        }
    }

    /// Checks the positive-semidefinite invariant: min eigenvalue ≥ −tolerance.
    pub fn check_psd(&self, tolerance: f64) -> Result<()> {
        let min = match &self.repr {
            Repr::Diagonal(d) => d.iter().copied().fold(f64::INFINITY, f64::min),
            Repr::Dense { .. } => crate::metrics::hermitian_eigenvalues(self)?
                .eigenvalues
                .last()
                .copied()
                .unwrap_or(0.0),
        };
        if min < -tolerance || min.is_nan() {
            return Err(Error::NegativeBlock { min_eigenvalue: min });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = HermitianBlock::from_dense(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)], 1e-9)
            .unwrap_err();
        assert!(matches!(err, Error::NonHermitianBlock { .. }));
    }

    #[test]
    fn mixed_addition_promotes_to_dense() {
        let x = HermitianBlock::from_dense(2, vec![c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)], 1e-9)
            .unwrap();
        let sum = HermitianBlock::identity(2).add(&x);
        assert!(!sum.is_diagonal_repr());
        assert_eq!(sum.entry(0, 1), c(0.5, 0.0));
        assert_eq!(sum.trace(), 2.0);
    }

    #[test]
    fn compact_recovers_diagonal() {
        let b = HermitianBlock::from_dense(2, vec![c(0.25, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.75, 0.0)], 1e-9)
            .unwrap()
            .compact();
        assert_eq!(b, HermitianBlock::diagonal(vec![0.25, 0.75]));
    }

    #[test]
    fn psd_check_catches_negative_eigenvalue() {
        let pauli_x = HermitianBlock::from_dense(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1e-9)
            .unwrap();
        assert!(matches!(pauli_x.check_psd(1e-9), Err(Error::NegativeBlock { .. })));
        assert!(HermitianBlock::identity(3).check_psd(1e-9).is_ok());
    }
}
