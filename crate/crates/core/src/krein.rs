//! PT normalization of eigenvectors and Krein quantities.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::MappedGrid;
use crate::stationary::StationaryState;

/// Tuning of the PT phase extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    /// Points with `|Y| <= amp_floor * max |Y|` are ignored.
    pub amp_floor: f64,
    /// Outlier cut in circular standard deviations.
    pub outlier_sigmas: f64,
    /// Largest accepted circular variance of the pointwise estimates.
    pub max_variance: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions { amp_floor: 1e-4, outlier_sigmas: 3.0, max_variance: 1e-3 }
    }
}

/// Krein quantity of one eigenvalue along a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinRecord {
    pub lambda: Complex64,
    pub krein: Complex64,
    /// `sign(Re K)`, or `None` when undefined.
    pub signature: Option<i8>,
    pub branch_id: usize,
    /// Rotation applied by [`pt_phase_fix`], in `[0, 2 pi)`.
    pub phase_theta: f64,
    /// Orientation applied to the adjoint eigenvector.
    pub adjoint_sign: i8,
}

/// Rotates `(y, z)` by `e^{i theta}` so that `Y(x) = conj Y(-x)` and
/// `Z(x) = conj Z(-x)`.
///
/// Each grid point `x_j` with a significant amplitude gives an estimate of
/// `e^{2 i theta}` through `conj(Y(-x_j)) / Y(x_j)`. The estimates are
/// averaged on the unit circle, outliers beyond a few circular standard
/// deviations are dropped, and a large remaining spread is reported as
/// [`Error::PhaseIncoherent`]. The phase is read from whichever component
/// carries more mass, which is `Y` except for modes living in the `Z` block.
pub fn pt_phase_fix(
    y: &[Complex64],
    z: &[Complex64],
    opts: &PhaseOptions,
) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
    if y.len() != z.len() {
        return Err(Error::LengthMismatch { expected: y.len(), got: z.len() });
    }
    let mass = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let f = if mass(y) >= mass(z) { y } else { z };
    let m = f.len();
    let peak = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::PhaseIncoherent { variance: 1.0 });
    }
    let floor = opts.amp_floor * peak;
    let units: Vec<Complex64> = (0..m)
        .filter(|&j| f[j].norm() > floor && f[m - 1 - j].norm() > floor)
        .map(|j| {
            let r = f[m - 1 - j].conj() / f[j];
            r / r.norm()
        })
        .collect();
    let (mean, variance) = circular_mean(&units, opts.outlier_sigmas);
    if variance > opts.max_variance {
        return Err(Error::PhaseIncoherent { variance });
    }
    let theta = 0.5 * mean.arg();
    let rot = Complex64::from_polar(1.0, theta);
    let y2 = y.iter().map(|v| v * rot).collect();
    let z2 = z.iter().map(|v| v * rot).collect();
    Ok((y2, z2, theta.rem_euclid(2.0 * PI)))
}

/// Mean direction and circular variance of unit vectors, after discarding
/// points farther than `sigmas` circular standard deviations from the mean.
fn circular_mean(units: &[Complex64], sigmas: f64) -> (Complex64, f64) {
    let stats = |pts: &[Complex64]| -> (Complex64, f64) {
        let n = pts.len().max(1) as f64;
        let s: Complex64 = pts.iter().sum::<Complex64>() / n;
        let r = s.norm();
        (s, 1.0 - r)
    };
    let (s, var) = stats(units);
    if units.is_empty() {
        return (Complex64::new(1.0, 0.0), 1.0);
    }
    let r = s.norm().clamp(1e-300, 1.0);
    let sd = (-2.0 * r.ln()).sqrt();
    let centre = s / r;
    let cut = sigmas * sd;
    let kept: Vec<Complex64> = units
        .iter()
        .copied()
        .filter(|u| (u / centre).arg().abs() <= cut.max(1e-12))
        .collect();
    if kept.is_empty() || kept.len() == units.len() {
        return (centre, var);
    }
    let (s2, var2) = stats(&kept);
    (s2 / s2.norm(), var2)
}

/// `K = <(Y, Z), sigma3 (Y#, Z#)> = int (Y conj Y# - Z conj Z#) dx`.
pub fn krein_quantity(
    y: &[Complex64],
    z: &[Complex64],
    adjoint: Option<(&[Complex64], &[Complex64])>,
    grid: &MappedGrid,
) -> Result<Complex64> {
    let (ya, za) = adjoint.ok_or(Error::AdjointUnavailable)?;
    let w = grid.weights();
    for v in [y, z, ya, za] {
        if v.len() != w.len() {
            return Err(Error::LengthMismatch { expected: w.len(), got: v.len() });
        }
    }
    Ok((0..w.len())
        .map(|j| w[j] * (y[j] * ya[j].conj() - z[j] * za[j].conj()))
        .sum())
}

/// Hamiltonian Krein quantity `-i lambda int (|Y|^2 - |Z|^2) dx`.
pub fn hamiltonian_krein(
    lambda: Complex64,
    y: &[Complex64],
    z: &[Complex64],
    state: &StationaryState,
) -> Result<f64> {
    let gamma = state.params().gamma;
    if gamma != 0.0 {
        return Err(Error::NotHamiltonian(gamma));
    }
    let grid = state.grid();
    let w = grid.weights();
    let q: f64 = (0..w.len()).map(|j| w[j] * (y[j].norm_sqr() - z[j].norm_sqr())).sum();
    Ok((-Complex64::i() * lambda * q).re)
}

/// Component of the linear-limit spectral problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Y,
    Z,
}

/// PT-Krein quantity of a scalar eigenfunction at `Phi = 0`:
/// `int f(x) conj f(-x) dx`.
///
/// For the `Y` block the adjoint is `Y#(x) = Y(-x)`; for the `Z` block it is
/// `Z#(x) = -Z(-x)`, and the minus sign of `sigma3` makes both cases the
/// same integral.
pub fn linear_limit_krein(f: &[Complex64], block: Block, state: &StationaryState) -> Result<f64> {
    if state.power > 0.0 {
        return Err(Error::NotLinearLimit(state.power));
    }
    let grid = state.grid();
    let m = grid.len();
    if f.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: f.len() });
    }
    let mirrored = mirror_conj_free(f);
    let zero = vec![Complex64::new(0.0, 0.0); m];
    let k = match block {
        Block::Y => krein_quantity(f, &zero, Some((&mirrored, &zero)), grid)?,
        Block::Z => {
            let neg: Vec<Complex64> = mirrored.iter().map(|v| -v).collect();
            krein_quantity(&zero, f, Some((&zero, &neg)), grid)?
        }
    };
    Ok(k.re)
}

/// `f(-x)` on the symmetric grid.
fn mirror_conj_free(f: &[Complex64]) -> Vec<Complex64> {
    f.iter().rev().copied().collect()
}

/// Reference direction used to orient an adjoint eigenvector that has no
/// predecessor on its track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjointAnchor {
    /// `(Y#, Z#)` aligned with `(Y, Z)`; exact at `gamma = 0`.
    Hamiltonian,
    /// `(Y#, Z#)` aligned with `(Y(-x), -Z(-x))`; exact at `Phi = 0`.
    LinearLimit,
}

impl AdjointAnchor {
    /// Sign `s` such that `Re <s v#, r(v)> > 0` for the anchor's reference `r(v)`.
    pub fn orient(
        &self,
        y: &[Complex64],
        z: &[Complex64],
        ya: &[Complex64],
        za: &[Complex64],
        grid: &MappedGrid,
    ) -> i8 {
        let (ry, rz): (Vec<Complex64>, Vec<Complex64>) = match self {
            AdjointAnchor::Hamiltonian => (y.to_vec(), z.to_vec()),
            AdjointAnchor::LinearLimit => (
                mirror_conj_free(y),
                mirror_conj_free(z).into_iter().map(|v| -v).collect(),
            ),
        };
        let ov = crate::linearization::overlap(ya, za, &ry, &rz, grid);
        if ov.re >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Orientation of the current adjoint eigenvector relative to its
/// predecessor on the same track: `+1` keeps it, `-1` flips it.
pub fn continue_adjoint_sign(
    prev: (&[Complex64], &[Complex64]),
    cur: (&[Complex64], &[Complex64]),
    grid: &MappedGrid,
) -> Result<i8> {
    let diff = |s: f64| -> f64 {
        let w = grid.weights();
        (0..w.len())
            .map(|j| w[j] * ((cur.0[j] - s * prev.0[j]).norm_sqr() + (cur.1[j] - s * prev.1[j]).norm_sqr()))
            .sum::<f64>()
            .sqrt()
    };
    let minus = diff(1.0);
    let plus = diff(-1.0);
    if (minus - plus).abs() <= 0.1 * minus.max(plus) {
        return Err(Error::AmbiguousSign { minus, plus });
    }
    Ok(if minus < plus { 1 } else { -1 })
}

/// `sign(Re K)` when `K` is clearly nonzero.
pub fn signature(k: Complex64, floor: f64) -> Option<i8> {
    if k.re.abs() <= floor || !k.re.is_finite() {
        None
    } else if k.re > 0.0 {
        Some(1)
    } else {
        Some(-1)
    }
}
