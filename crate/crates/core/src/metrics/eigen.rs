//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first applies a diagonal phase so the pivot `a_pq` becomes
//! real and positive, then a real plane rotation zeroes it. Both steps are
//! unitary similarities, so the spectrum is preserved exactly in exact
//! arithmetic.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::block::HermitianBlock;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Largest off-diagonal magnitude left after the final sweep.
    pub residual: f64,
    pub sweeps: usize,
}

/// Eigenvalues of `(B + B†)/2`.
pub fn hermitian_eigenvalues(block: &HermitianBlock) -> Result<SpectrumResult> {
    if let Some(d) = block.diagonal_slice() {
        let mut eigenvalues = d.to_vec();
        sort_descending(&mut eigenvalues);
        return Ok(SpectrumResult { eigenvalues, residual: 0.0, sweeps: 0 });
    }
    let (n, raw) = block.dense_parts().expect("dense block");
    let mut a: Vec<Complex64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push((raw[i * n + j] + raw[j * n + i].conj()) * 0.5);
        }
    }

    let mut sweeps = 0;
    let mut residual = max_off_diagonal(&a, n);
    while residual >= OFF_DIAGONAL_TOLERANCE {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, n, p, q);
            }
        }
        sweeps += 1;
        residual = max_off_diagonal(&a, n);
    }

    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    sort_descending(&mut eigenvalues);
    Ok(SpectrumResult { eigenvalues, residual, sweeps })
}

fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let phase_conj = phase.conj();
    for r in 0..n {
        a[r * n + q] *= phase_conj;
    }
    for r in 0..n {
        a[q * n + r] *= phase;
    }

    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 { 1.0 } else { -1.0 } / (theta.abs() + libm::sqrt(theta * theta + 1.0));
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;

    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        let new_rp = arp * c - arq * s;
        let new_rq = arp * s + arq * c;
        a[r * n + p] = new_rp;
        a[r * n + q] = new_rq;
        a[p * n + r] = new_rp.conj();
        a[q * n + r] = new_rq.conj();
    }
    a[p * n + p] = Complex64::new(app - t * mag, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * mag, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
}

fn max_off_diagonal(a: &[Complex64], n: usize) -> f64 {
    let mut m = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max(a[i * n + j].norm());
        }
    }
    m
}

fn sort_descending(v: &mut [f64]) {
    v.sort_by(|x, y| y.total_cmp(x));
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_spectrum() {
        let r = hermitian_eigenvalues(&HermitianBlock::identity(2)).unwrap();
        assert_eq!(r.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = HermitianBlock::from_dense(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)], 1e-9).unwrap();
        let r = hermitian_eigenvalues(&x).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((r.eigenvalues[1] + 1.0).abs() < 1e-15);
        assert!(r.residual <= OFF_DIAGONAL_TOLERANCE);
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = HermitianBlock::from_dense(2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)], 1e-9).unwrap();
        let r = hermitian_eigenvalues(&y).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((r.eigenvalues[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_three_by_three_sum_equals_trace() {
        let data = vec![
            c(2.0, 0.0), c(1.0, 1.0), c(0.0, -0.5),
            c(1.0, -1.0), c(-1.0, 0.0), c(0.3, 0.2),
            c(0.0, 0.5), c(0.3, -0.2), c(0.5, 0.0),
        ];
        let b = HermitianBlock::from_dense(3, data, 1e-12).unwrap();
        let r = hermitian_eigenvalues(&b).unwrap();
        let sum: f64 = r.eigenvalues.iter().sum();
        assert!((sum - 1.5).abs() < 1e-12);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn deterministic_for_identical_input() {
        let data = vec![c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.7, 0.0)];
        let b = HermitianBlock::from_dense(2, data, 1e-12).unwrap();
        assert_eq!(hermitian_eigenvalues(&b).unwrap(), hermitian_eigenvalues(&b).unwrap());
    }
}
