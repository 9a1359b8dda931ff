mod support;

use num_complex::Complex64;
use proptest::prelude::*;
use veriloop_core::metrics::{hermitian_eigenvalues, trace_norm};
use veriloop_core::HermitianBlock;

fn hermitian(n: usize, raw: &[(f64, f64)]) -> Vec<Complex64> {
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    let mut it = raw.iter();
    for i in 0..n {
        for j in i..n {
            let &(re, im) = it.next().unwrap();
            if i == j {
                a[i * n + i] = Complex64::new(re, 0.0);
            } else {
                a[i * n + j] = Complex64::new(re, im);
                a[j * n + i] = Complex64::new(re, -im);
            }
        }
    }
    a
}

fn hermitian_strategy() -> impl Strategy<Value = (usize, Vec<Complex64>)> {
    (1usize..=5).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * (n + 1) / 2)
            .prop_map(move |raw| (n, hermitian(n, &raw)))
    })
}

#[test]
fn oracle_agrees_on_a_known_spectrum() {
    // [[2, i], [−i, 2]] has eigenvalues 3 and 1.
    let a = vec![
        Complex64::new(2.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(2.0, 0.0),
    ];
    let oracle = support::hermitian_eigenvalues_oracle(2, &a);
    assert!((oracle[0] - 3.0).abs() < 1e-12 && (oracle[1] - 1.0).abs() < 1e-12);
    let jacobi = hermitian_eigenvalues(&HermitianBlock::from_dense(2, a, 1e-12).unwrap()).unwrap();
    assert!((jacobi.eigenvalues[0] - 3.0).abs() < 1e-12 && (jacobi.eigenvalues[1] - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jacobi_matches_characteristic_polynomial((n, a) in hermitian_strategy()) {
        let block = HermitianBlock::from_dense(n, a.clone(), 1e-12).unwrap();
        let spectrum = hermitian_eigenvalues(&block).unwrap();
        prop_assert!(spectrum.residual <= 1e-12);
        let oracle = support::hermitian_eigenvalues_oracle(n, &a);
        for (x, y) in spectrum.eigenvalues.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-9, "jacobi {:?} oracle {:?}", spectrum.eigenvalues, oracle);
        }
    }

    #[test]
    fn eigenvalue_sum_is_trace((n, a) in hermitian_strategy()) {
        let block = HermitianBlock::from_dense(n, a, 1e-12).unwrap();
        let spectrum = hermitian_eigenvalues(&block).unwrap();
        let sum: f64 = spectrum.eigenvalues.iter().sum();
        prop_assert!((sum - block.trace()).abs() <= 1e-10);
    }

    #[test]
    fn permutation_similarity_keeps_spectrum((n, a) in hermitian_strategy(), shift in 0usize..5) {
        // P A Pᵀ for a cyclic permutation of the basis.
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                b[perm[i] * n + perm[j]] = a[i * n + j];
            }
        }
        let x = hermitian_eigenvalues(&HermitianBlock::from_dense(n, a, 1e-12).unwrap()).unwrap();
        let y = hermitian_eigenvalues(&HermitianBlock::from_dense(n, b, 1e-12).unwrap()).unwrap();
        for (p, q) in x.eigenvalues.iter().zip(&y.eigenvalues) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn density_operators_have_trace_norm_one_half(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)) {
        // ρ = G G† / tr(G G†) for a random 3×3 G
        let g: Vec<Complex64> = raw.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
        let mut rho = vec![Complex64::new(0.0, 0.0); 9];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    rho[i * 3 + j] += g[i * 3 + k] * g[j * 3 + k].conj();
                }
            }
        }
        let tr: f64 = (0..3).map(|i| rho[i * 4].re).sum();
        prop_assume!(tr > 1e-6);
        let rho: Vec<Complex64> = rho.into_iter().map(|z| z / tr).collect();
        let block = HermitianBlock::from_dense(3, rho, 1e-12).unwrap();
        prop_assert!((trace_norm(&block).unwrap() - 0.5).abs() <= 1e-12);
    }
}
