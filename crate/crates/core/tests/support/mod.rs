//! Test-only oracles, independent of the library's numeric paths.
#![allow(dead_code)]

use num_complex::Complex64;

/// Characteristic polynomial coefficients (ascending powers, monic) of a
/// dense `n × n` matrix via Faddeev–LeVerrier.
pub fn characteristic_polynomial(n: usize, a: &[Complex64]) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut coeffs = vec![zero; n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut m = vec![zero; n * n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![zero; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = zero;
                for l in 0..n {
                    acc += a[i * n + l] * m[l * n + j];
                }
                next[i * n + j] = acc;
            }
            next[i * n + i] += coeffs[n - k + 1];
        }
        m = next;
        // c_{n-k} = −tr(A M_k) / k
        let mut tr = zero;
        for i in 0..n {
            for l in 0..n {
                tr += a[i * n + l] * m[l * n + i];
            }
        }
        coeffs[n - k] = -tr / k as f64;
    }
    coeffs
}

fn eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

fn eval_real(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Real roots (descending) of the characteristic polynomial of a Hermitian
/// matrix: Durand–Kerner on the complex polynomial, then Newton polishing on
/// its real restriction.
pub fn hermitian_eigenvalues_oracle(n: usize, a: &[Complex64]) -> Vec<f64> {
    let coeffs = characteristic_polynomial(n, a);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(&coeffs, roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    let real: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
    let mut out: Vec<f64> = roots
        .iter()
        .map(|r| {
            let mut x = r.re;
            for _ in 0..50 {
                let (p, dp) = eval_real(&real, x);
                if dp == 0.0 {
                    break;
                }
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            x
        })
        .collect();
    out.sort_by(|x, y| y.total_cmp(x));
    out
}

/// `½ Σ |p(x) − q(x)|` over the union of supports.
pub fn half_l1(p: &std::collections::BTreeMap<Vec<veriloop_core::Symbol>, f64>, q: &std::collections::BTreeMap<Vec<veriloop_core::Symbol>, f64>) -> f64 {
    let mut keys: Vec<_> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}
