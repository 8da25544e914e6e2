//! Chebyshev collocation on the real line through the map `x = L artanh(z)`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Chebyshev points `cos(j pi / n)` for `j = 0..=n`.
///
/// Evaluated as `sin(pi (n - 2j) / (2n))`, which makes the set exactly
/// antisymmetric in floating point.
pub fn cheb_nodes(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|j| (PI * (nf - 2.0 * j as f64) / (2.0 * nf)).sin())
        .collect()
}

/// Standard Chebyshev collocation first-derivative matrix on `cos(j pi / n)`.
///
/// Off-diagonal entries come from the barycentric formula; the diagonal is
/// set by the negative-sum trick so that constants are annihilated exactly.
/// The second-derivative matrix is the square of this one.
pub fn cheb_diff_matrix(n: usize) -> Result<Mat<f64>> {
    if n == 0 {
        return Err(Error::InvalidGrid("Chebyshev degree must be at least 1".into()));
    }
    let z = cheb_nodes(n);
    let c = |j: usize| -> f64 {
        let base = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let mut d = Mat::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let v = c(i) / c(j) / (z[i] - z[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    Ok(d)
}

/// Collocation grid mapped to the real line.
///
/// Fields live on the `n - 1` interior nodes only; the endpoints map to
/// `x = +/-inf` where every field is taken to vanish.
#[derive(Debug, Clone)]
pub struct MappedGrid {
    n: usize,
    scale: f64,
    cheb_nodes: Vec<f64>,
    interior_points: Vec<f64>,
    d1_mapped: Mat<f64>,
    d2_mapped: Mat<f64>,
    quad_weights: Vec<f64>,
}

impl MappedGrid {
    /// Polynomial degree `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Map parameter `L`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Number of interior points, `N - 1`.
    pub fn len(&self) -> usize {
        self.n - 1
    }

    pub fn is_empty(&self) -> bool {
        self.n < 2
    }

    pub fn cheb_nodes(&self) -> &[f64] {
        &self.cheb_nodes
    }

    /// Interior points in decreasing order.
    pub fn points(&self) -> &[f64] {
        &self.interior_points
    }

    pub fn d1(&self) -> &Mat<f64> {
        &self.d1_mapped
    }

    pub fn d2(&self) -> &Mat<f64> {
        &self.d2_mapped
    }

    pub fn weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Index of the mirror point `-x_j`.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        self.len() - 1 - j
    }

    /// Samples a real function on the interior points.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.interior_points.iter().map(|&x| f(x)).collect()
    }

    /// Samples a complex function on the interior points.
    pub fn sample_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.interior_points.iter().map(|&x| f(x)).collect()
    }

    /// Applies the second-derivative matrix to complex samples.
    pub fn apply_d2(&self, f: &[Complex64]) -> Vec<Complex64> {
        apply_real(&self.d2_mapped, f)
    }

    /// Applies the first-derivative matrix to complex samples.
    pub fn apply_d1(&self, f: &[Complex64]) -> Vec<Complex64> {
        apply_real(&self.d1_mapped, f)
    }

    /// Discrete `L^2` norm of one or more stacked components.
    pub fn norm(&self, parts: &[&[Complex64]]) -> f64 {
        parts
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&self.quad_weights)
                    .map(|(v, w)| w * v.norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Quadrature of real samples.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.quad_weights).map(|(v, w)| v * w).sum()
    }
}

fn apply_real(m: &Mat<f64>, f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let fj = f[j];
        if fj.re == 0.0 && fj.im == 0.0 {
            continue;
        }
        let col = m.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += fj * col[i];
        }
    }
    out
}

/// Builds the mapped grid of degree `n` with map parameter `scale`.
///
/// The second derivative uses the chain rule
/// `d2/dx2 = (dz/dx)^2 D^2 + (d2z/dx2) D` with `dz/dx = (1 - z^2)/L` and
/// `d2z/dx2 = -2 z (1 - z^2) / L^2`, restricted to the interior rows and
/// columns. Both matrices are then projected onto their exact parity
/// structure, which removes rounding asymmetries between mirror points.
///
/// The quadrature is the trapezoid rule in the angle `theta` with
/// `z = cos(theta)`, i.e. `w_j = (pi / N) L / sin(theta_j)`. Endpoint
/// contributions vanish for decaying integrands.
pub fn build_grid(n: usize, scale: f64) -> Result<MappedGrid> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("degree n = {n}, need n >= 2")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidGrid(format!("scale = {scale}, need a positive finite value")));
    }
    let z = cheb_nodes(n);
    let d = cheb_diff_matrix(n)?;
    let dd = &d * &d;
    let m = n - 1;

    // Evaluate the map on one half only so the point set is exactly odd.
    let interior_points: Vec<f64> = (1..n)
        .map(|j| if 2 * j <= n { scale * z[j].atanh() } else { -scale * z[n - j].atanh() })
        .collect();
    let dzdx: Vec<f64> = (1..n).map(|j| (1.0 - z[j] * z[j]) / scale).collect();
    let d2zdx2: Vec<f64> = (1..n)
        .map(|j| -2.0 * z[j] * (1.0 - z[j] * z[j]) / (scale * scale))
        .collect();

    let raw1 = Mat::<f64>::from_fn(m, m, |i, j| dzdx[i] * d[(i + 1, j + 1)]);
    let raw2 = Mat::<f64>::from_fn(m, m, |i, j| {
        dzdx[i] * dzdx[i] * dd[(i + 1, j + 1)] + d2zdx2[i] * d[(i + 1, j + 1)]
    });
    let r = |k: usize| m - 1 - k;
    let d1_mapped = Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (raw1[(i, j)] - raw1[(r(i), r(j))]));
    let d2_mapped = Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (raw2[(i, j)] + raw2[(r(i), r(j))]));

    let h = PI / n as f64;
    let quad_weights: Vec<f64> = (1..n)
        .map(|j| {
            let k = j.min(n - j);
            h * scale / (h * k as f64).sin()
        })
        .collect();

    Ok(MappedGrid {
        n,
        scale,
        cheb_nodes: z,
        interior_points,
        d1_mapped,
        d2_mapped,
        quad_weights,
    })
}

/// Discrete inner product `sum_j w_j f_j conj(g_j)`.
pub fn inner_product(f: &[Complex64], g: &[Complex64], grid: &MappedGrid) -> Result<Complex64> {
    let m = grid.len();
    for v in [f, g] {
        if v.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: v.len() });
        }
    }
    Ok(f.iter()
        .zip(g)
        .zip(grid.weights())
        .map(|((a, b), w)| a * b.conj() * *w)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn degree_one_matrix() {
        let d = cheb_diff_matrix(1).unwrap();
        let want = [[0.5, -0.5], [0.5, -0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((d[(i, j)] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degree_zero_rejected() {
        assert!(cheb_diff_matrix(0).is_err());
        assert!(build_grid(1, 10.0).is_err());
        assert!(build_grid(10, 0.0).is_err());
    }

    #[test]
    fn rows_annihilate_constants() {
        let d = cheb_diff_matrix(4).unwrap();
        for i in 0..5 {
            let s: f64 = (0..5).map(|j| d[(i, j)]).sum();
            assert!(s.abs() < 1e-14, "row {i} sums to {s}");
        }
    }

    #[test]
    fn differentiates_polynomials_exactly() {
        // Any polynomial of degree <= n is differentiated exactly.
        let n = 8;
        let d = cheb_diff_matrix(n).unwrap();
        let z = cheb_nodes(n);
        for deg in 0..=n as i32 {
            let f: Vec<f64> = z.iter().map(|x| x.powi(deg)).collect();
            for i in 0..=n {
                let df: f64 = (0..=n).map(|j| d[(i, j)] * f[j]).sum();
                let exact = if deg == 0 { 0.0 } else { deg as f64 * z[i].powi(deg - 1) };
                assert!((df - exact).abs() < 1e-12, "deg {deg} node {i}: {df} vs {exact}");
            }
        }
    }

    #[test]
    fn small_grid_points() {
        let g = build_grid(4, 10.0).unwrap();
        let a = 10.0 * (2f64.sqrt() / 2.0).atanh();
        let want = [a, 0.0, -a];
        for (x, w) in g.points().iter().zip(want) {
            assert!((x - w).abs() < 1e-12);
        }
        assert!((a - 8.8137).abs() < 1e-4);
    }

    #[test]
    fn points_decreasing_and_antisymmetric() {
        let g = build_grid(37, 10.0).unwrap();
        let x = g.points();
        for j in 0..x.len() {
            assert_eq!(x[j], -x[g.mirror(j)]);
            if j + 1 < x.len() {
                assert!(x[j] > x[j + 1]);
            }
        }
    }

    #[test]
    fn sech_squared_integral() {
        let g = build_grid(200, 10.0).unwrap();
        let s = g.integrate(&g.sample(|x| 1.0 / x.cosh().powi(2)));
        assert!((s - 2.0).abs() < 1e-10, "{s}");
        assert!(g.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn second_derivative_of_sech() {
        let g = build_grid(200, 10.0).unwrap();
        let f: Vec<Complex64> = g.sample(|x| 1.0 / x.cosh()).into_iter().map(c).collect();
        let d2f = g.apply_d2(&f);
        let err = g
            .points()
            .iter()
            .zip(&d2f)
            .map(|(x, v)| {
                let s = 1.0 / x.cosh();
                (v.re - (s - 2.0 * s * s * s)).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn inner_product_examples() {
        let g = build_grid(200, 10.0).unwrap();
        let s: Vec<Complex64> = g.sample(|x| 1.0 / x.cosh()).into_iter().map(c).collect();
        let is: Vec<Complex64> = s.iter().map(|v| v * Complex64::i()).collect();
        let a = inner_product(&s, &s, &g).unwrap();
        assert!((a - c(2.0)).norm() < 1e-10);
        let b = inner_product(&s, &is, &g).unwrap();
        assert!((b - Complex64::new(0.0, -2.0)).norm() < 1e-10);
        let gauss: Vec<Complex64> = g.sample(|x| (-x * x / 2.0).exp()).into_iter().map(c).collect();
        let q = inner_product(&gauss, &gauss, &g).unwrap();
        assert!((q.re - PI.sqrt()).abs() < 1e-10, "{q}");
        assert!(matches!(
            inner_product(&s[1..], &s, &g),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
