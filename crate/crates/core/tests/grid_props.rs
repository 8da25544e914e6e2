//! Properties of the mapped Chebyshev grid.

use proptest::prelude::*;
use ptkrein::{build_grid, cheb_diff_matrix, Complex64};

/// Values of `p(t) = sum c_k t^k` and of its derivative.
fn poly(c: &[f64], t: f64) -> (f64, f64) {
    let (mut p, mut dp) = (0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * t + p;
        p = p * t + ck;
    }
    (p, dp)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn differentiation_is_exact_on_polynomials(n in 2usize..24, coeffs in prop::collection::vec(-1.0f64..1.0, 1..24)) {
        let coeffs = &coeffs[..coeffs.len().min(n + 1)];
        let d = cheb_diff_matrix(n).unwrap();
        let t: Vec<f64> = (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
        for i in 0..=n {
            let got: f64 = (0..=n).map(|j| d[(i, j)] * poly(coeffs, t[j]).0).sum();
            let want = poly(coeffs, t[i]).1;
            prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()) * (n * n) as f64, "{} vs {}", got, want);
        }
    }

    #[test]
    fn points_are_odd_and_weights_even(n in 2usize..200, scale in 0.5f64..20.0) {
        let g = build_grid(n, scale).unwrap();
        let m = g.len();
        for j in 0..m {
            prop_assert_eq!(g.points()[j], -g.points()[m - 1 - j]);
            prop_assert!((g.weights()[j] - g.weights()[m - 1 - j]).abs() <= 1e-14 * g.weights()[j]);
            prop_assert!(g.weights()[j] > 0.0);
        }
    }

    #[test]
    fn gaussian_moments(shift in -1.0f64..1.0, width in 0.5f64..3.0) {
        let g = build_grid(200, 10.0).unwrap();
        let f = g.sample(|x| (-(x - shift).powi(2) / (width * width)).exp());
        let want = width * std::f64::consts::PI.sqrt();
        prop_assert!((g.integrate(&f) - want).abs() < 1e-10);
    }
}

#[test]
fn second_derivative_is_self_adjoint_on_smooth_fields() {
    let g = build_grid(300, 10.0).unwrap();
    let u: Vec<Complex64> = g.sample_complex(|x| Complex64::new(1.0 / x.cosh(), x / x.cosh().powi(2)));
    let v: Vec<Complex64> = g.sample_complex(|x| Complex64::new((-x * x / 4.0).exp(), 0.3 * x * (-x * x).exp()));
    let lhs = ptkrein::inner_product(&g.apply_d2(&u), &v, &g).unwrap();
    let rhs = ptkrein::inner_product(&u, &g.apply_d2(&v), &g).unwrap();
    assert!((lhs - rhs).norm() < 1e-12, "{lhs} vs {rhs}");
}
