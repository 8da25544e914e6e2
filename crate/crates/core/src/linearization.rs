//! Linear stability spectrum of a stationary state and its adjoint.

use std::fmt;

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::MappedGrid;
use crate::stationary::{assemble_jacobian_with, StationaryState};

/// Classification thresholds for eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralThresholds {
    /// `|lambda|` below which an eigenvalue may be the gauge mode.
    pub tol_zero: f64,
    /// `|Re lambda|` above which an eigenvalue is off the imaginary axis.
    pub tol_re: f64,
    /// Band margin as a fraction of `|mu|`.
    pub band_margin: f64,
    /// Half-width of the localization window; `None` means the map scale.
    pub x_loc: Option<f64>,
    /// Mass fraction inside the window below which a mode counts as delocalized.
    pub loc_threshold: f64,
    /// Largest `|lambda - lambda_adj|` accepted when pairing adjoint eigenvectors.
    pub adjoint_match_tol: f64,
}

impl Default for SpectralThresholds {
    fn default() -> Self {
        SpectralThresholds {
            tol_zero: 1e-6,
            tol_re: 1e-6,
            band_margin: 0.02,
            x_loc: None,
            loc_threshold: 0.5,
            adjoint_match_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    IsolatedImaginary,
    ComplexQuadruplet,
    ContinuousBand,
    ZeroGauge,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::IsolatedImaginary => "isolated-imaginary",
            Classification::ComplexQuadruplet => "complex-quadruplet",
            Classification::ContinuousBand => "continuous-band",
            Classification::ZeroGauge => "zero-gauge",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One eigenvalue of `M = i sigma3 L` with its unit-norm eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub y: Vec<Complex64>,
    pub z: Vec<Complex64>,
    /// Unit-norm adjoint eigenvector `(Y#, Z#)` for the same eigenvalue.
    pub adjoint: Option<(Vec<Complex64>, Vec<Complex64>)>,
    pub classification: Classification,
    /// `||M v - lambda v|| / (||M|| ||v||)`.
    pub residual: f64,
    /// Fraction of `||v||^2` inside `|x| <= x_loc`.
    pub localization: f64,
}

impl EigenPair {
    pub fn is_isolated(&self) -> bool {
        matches!(
            self.classification,
            Classification::IsolatedImaginary | Classification::ComplexQuadruplet
        )
    }
}

/// Spectrum of the linearization at one state.
#[derive(Debug, Clone)]
pub struct SpectrumSnapshot {
    pub state: StationaryState,
    /// Sorted by `(Im lambda, Re lambda)`.
    pub pairs: Vec<EigenPair>,
    /// `(-|mu|, |mu|)` when the potential decays.
    pub continuous_band_edges: Option<(f64, f64)>,
    pub thresholds: SpectralThresholds,
}

impl SpectrumSnapshot {
    /// Spectral instability: some non-gauge eigenvalue off the imaginary axis.
    pub fn is_unstable(&self) -> bool {
        self.pairs.iter().any(|p| {
            p.classification != Classification::ZeroGauge && p.lambda.re.abs() > self.thresholds.tol_re
        })
    }

    pub fn max_real_part(&self) -> f64 {
        self.pairs
            .iter()
            .filter(|p| p.classification != Classification::ZeroGauge)
            .map(|p| p.lambda.re.abs())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }
}

/// `i sigma3 L`, whose eigenvalues are the stability exponents `lambda`.
pub fn assemble_stability_matrix(state: &StationaryState) -> Result<Mat<c64>> {
    let l = assemble_jacobian_with(&state.phi, &state.problem, 1.0)?;
    Ok(times_i_sigma3(l))
}

/// `i sigma3 L*`, the matrix of the adjoint spectral problem.
pub fn assemble_adjoint_matrix(state: &StationaryState) -> Result<Mat<c64>> {
    let l = assemble_jacobian_with(&state.phi, &state.problem, -1.0)?;
    Ok(times_i_sigma3(l))
}

fn times_i_sigma3(mut l: Mat<c64>) -> Mat<c64> {
    let m = l.nrows() / 2;
    let i = c64::new(0.0, 1.0);
    for c in 0..l.ncols() {
        for r in 0..l.nrows() {
            let s = if r < m { i } else { -i };
            l[(r, c)] *= s;
        }
    }
    l
}

fn inf_norm(a: &Mat<c64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues and unit-norm eigenvectors, sorted by `(Im, Re)`.
pub(crate) fn decompose(
    a: &Mat<c64>,
    grid: &MappedGrid,
) -> Result<Vec<(Complex64, Vec<Complex64>, Vec<Complex64>, f64)>> {
    let m = grid.len();
    let evd = a.eigen().map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let scale = inf_norm(a);
    let au = a * u;
    let mut out = Vec::with_capacity(a.nrows());
    for k in 0..a.nrows() {
        let lambda = s[k];
        let col = u.col(k);
        let mut y: Vec<Complex64> = (0..m).map(|i| col[i]).collect();
        let mut z: Vec<Complex64> = (0..m).map(|i| col[m + i]).collect();
        let nrm = grid.norm(&[&y, &z]);
        if nrm > 0.0 {
            y.iter_mut().chain(z.iter_mut()).for_each(|v| *v /= nrm);
        }
        // Residual in the Euclidean norm, independent of the quadrature.
        let mut res2 = 0.0;
        let mut v2 = 0.0;
        for r in 0..a.nrows() {
            res2 += (au[(r, k)] - lambda * col[r]).norm_sqr();
            v2 += col[r].norm_sqr();
        }
        let residual = res2.sqrt() / (scale.max(f64::MIN_POSITIVE) * v2.sqrt());
        out.push((lambda, y, z, residual));
    }
    out.sort_by(|a, b| a.0.im.total_cmp(&b.0.im).then(a.0.re.total_cmp(&b.0.re)));
    Ok(out)
}

/// Eigenvalues of `i sigma3 L` only, sorted by `(Im, Re)`.
pub fn stability_eigenvalues(state: &StationaryState) -> Result<Vec<Complex64>> {
    let a = assemble_stability_matrix(state)?;
    let mut ev = a.eigenvalues().map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    ev.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Ok(ev)
}

/// Everything [`classify_eigenvalue`] needs besides the eigenpair.
#[derive(Debug, Clone)]
pub struct ClassifyContext<'a> {
    pub grid: &'a MappedGrid,
    pub mu: f64,
    pub decaying: bool,
    /// Unit-norm gauge vector `(i Phi, -i conj Phi)`, absent when `Phi = 0`.
    pub gauge: Option<(Vec<Complex64>, Vec<Complex64>)>,
    pub thresholds: SpectralThresholds,
}

impl<'a> ClassifyContext<'a> {
    pub fn for_state(state: &'a StationaryState, thresholds: SpectralThresholds) -> Self {
        let grid = state.grid().as_ref();
        let gy: Vec<Complex64> = state.phi.iter().map(|p| Complex64::i() * p).collect();
        let gz: Vec<Complex64> = state.phi.iter().map(|p| -Complex64::i() * p.conj()).collect();
        let nrm = grid.norm(&[&gy, &gz]);
        let gauge = (nrm > 1e-12).then(|| {
            (
                gy.iter().map(|v| v / nrm).collect(),
                gz.iter().map(|v| v / nrm).collect(),
            )
        });
        ClassifyContext {
            grid,
            mu: state.params().mu,
            decaying: state.params().potential.is_decaying(),
            gauge,
            thresholds,
        }
    }

    fn x_loc(&self) -> f64 {
        self.thresholds.x_loc.unwrap_or(self.grid.scale())
    }
}

/// Fraction of the mass of `(y, z)` inside `|x| <= x_loc`.
pub fn localization(y: &[Complex64], z: &[Complex64], grid: &MappedGrid, x_loc: f64) -> f64 {
    let (mut inside, mut total) = (0.0, 0.0);
    for (j, (&x, &w)) in grid.points().iter().zip(grid.weights()).enumerate() {
        let m = w * (y[j].norm_sqr() + z[j].norm_sqr());
        total += m;
        if x.abs() <= x_loc {
            inside += m;
        }
    }
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}

/// Classifies one eigenpair; returns the class and the localization fraction.
pub fn classify_eigenvalue(
    lambda: Complex64,
    y: &[Complex64],
    z: &[Complex64],
    ctx: &ClassifyContext<'_>,
) -> (Classification, f64) {
    let t = &ctx.thresholds;
    let loc = localization(y, z, ctx.grid, ctx.x_loc());
    // The gauge eigenvalue is a 2x2 Jordan block, so a perturbation of
    // size tol_zero moves it by up to sqrt(tol_zero); the eigenvector
    // overlap decides.
    if lambda.norm() < t.tol_zero.sqrt() {
        if let Some((gy, gz)) = &ctx.gauge {
            let ov = overlap(y, z, gy, gz, ctx.grid);
            let nrm = ctx.grid.norm(&[y, z]);
            if ov.norm() > 0.5 * nrm {
                return (Classification::ZeroGauge, loc);
            }
        }
    }
    if ctx.decaying {
        let edge = ctx.mu.abs() - t.band_margin * ctx.mu.abs();
        // Short-wavelength band modes cannot spread over the stretched outer
        // grid, so their localization says little. On the axis, anything
        // past |mu| is taken as band and localization only decides inside
        // the margin. Off the axis it separates radiation with a
        // rounding-level real part from an embedded quadruplet.
        let on_axis = lambda.re.abs() <= t.tol_re;
        let inside = lambda.im.abs() >= ctx.mu.abs();
        if lambda.im.abs() >= edge && ((on_axis && inside) || loc < t.loc_threshold) {
            return (Classification::ContinuousBand, loc);
        }
    }
    if lambda.re.abs() > t.tol_re {
        return (Classification::ComplexQuadruplet, loc);
    }
    (Classification::IsolatedImaginary, loc)
}

/// `<(y1, z1), (y2, z2)>` on the grid.
pub fn overlap(
    y1: &[Complex64],
    z1: &[Complex64],
    y2: &[Complex64],
    z2: &[Complex64],
    grid: &MappedGrid,
) -> Complex64 {
    let w = grid.weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..w.len() {
        acc += w[j] * (y1[j] * y2[j].conj() + z1[j] * z2[j].conj());
    }
    acc
}

/// Full spectrum of the linearization with adjoint eigenvectors and
/// classification.
pub fn solve_spectrum(state: &StationaryState, thresholds: SpectralThresholds) -> Result<SpectrumSnapshot> {
    let grid = state.grid().clone();
    let m_mat = assemble_stability_matrix(state)?;
    let primal = decompose(&m_mat, &grid)?;
    drop(m_mat);
    let adj_mat = assemble_adjoint_matrix(state)?;
    let adjoint = decompose(&adj_mat, &grid)?;
    drop(adj_mat);

    let ctx = ClassifyContext::for_state(state, thresholds);
    let mut pairs = Vec::with_capacity(primal.len());
    for (lambda, y, z, residual) in primal {
        let (classification, localization) = classify_eigenvalue(lambda, &y, &z, &ctx);
        let mut pair = EigenPair { lambda, y, z, adjoint: None, classification, residual, localization };
        if pair.is_isolated() {
            let best = adjoint
                .iter()
                .min_by(|a, b| (a.0 - lambda).norm().total_cmp(&(b.0 - lambda).norm()));
            if let Some(b) = best {
                if (b.0 - lambda).norm() <= thresholds.adjoint_match_tol {
                    pair.adjoint = Some((b.1.clone(), b.2.clone()));
                }
            }
        }
        pairs.push(pair);
    }
    let decaying = state.params().potential.is_decaying();
    let mu = state.params().mu.abs();
    Ok(SpectrumSnapshot {
        state: state.clone(),
        pairs,
        continuous_band_edges: decaying.then_some((-mu, mu)),
        thresholds,
    })
}

/// Largest distance from a point of `a` to the nearest point of `b`.
pub fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::model::{PotentialSpec, ProblemParams};
    use crate::stationary::Problem;
    use std::sync::Arc;

    #[test]
    fn harmonic_oscillator_linear_spectrum() {
        let grid = Arc::new(build_grid(120, 10.0).unwrap());
        let params = ProblemParams::new(0.0, 0.0, 1.0, PotentialSpec::Confining { omega: 1.0 }).unwrap();
        let st = StationaryState::zero(Problem::new(grid, params).unwrap());
        let ev = stability_eigenvalues(&st).unwrap();
        for k in 0..4 {
            let target = Complex64::new(0.0, (2 * k + 1) as f64);
            let hits = ev.iter().filter(|l| (*l - target).norm() < 1e-8).count();
            assert_eq!(hits, 1, "level {k}");
            let hits = ev.iter().filter(|l| (*l + target).norm() < 1e-8).count();
            assert_eq!(hits, 1, "mirror level {k}");
        }
    }

    #[test]
    fn classification_examples() {
        let grid = build_grid(60, 10.0).unwrap();
        let ctx = ClassifyContext {
            grid: &grid,
            mu: -1.0,
            decaying: true,
            gauge: None,
            thresholds: SpectralThresholds::default(),
        };
        let m = grid.len();
        let local: Vec<Complex64> = grid.sample_complex(|x| Complex64::new((-x * x).exp(), 0.0));
        let flat: Vec<Complex64> = grid.sample_complex(|x| Complex64::new(1.0 / (1.0 + (x / 200.0).powi(2)), 0.0));
        let zero = vec![Complex64::new(0.0, 0.0); m];
        let (c, _) = classify_eigenvalue(Complex64::new(0.0, 1.5), &flat, &zero, &ctx);
        assert_eq!(c, Classification::ContinuousBand);
        let (c, _) = classify_eigenvalue(Complex64::new(0.1, 0.5), &local, &zero, &ctx);
        assert_eq!(c, Classification::ComplexQuadruplet);
        let (c, _) = classify_eigenvalue(Complex64::new(0.0, 0.5), &local, &zero, &ctx);
        assert_eq!(c, Classification::IsolatedImaginary);
    }
}
