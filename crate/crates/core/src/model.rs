//! Complex potentials and problem parameters.

use crate::error::{Error, Result};

/// Tolerance for the parity check on sampled potentials.
const PARITY_TOL: f64 = 1e-12;

/// Complex potential `V(x) + i gamma W(x)` with `V` even and `W` odd.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V = -v0 sech^2 x`, `W = sech x tanh x`.
    ScarfII { v0: f64 },
    /// `V = omega^2 x^2`, `W = x exp(-x^2 / 2)`.
    Confining { omega: f64 },
    /// `V = x^2`, `W = 2 omega^(-3/2) x exp(-x^2 / (2 omega))`.
    ScaledConfining { omega: f64 },
    /// Samples on a symmetric grid, ordered like the grid points.
    Custom { v: Vec<f64>, w: Vec<f64> },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::ScarfII { v0 } => positive("v0", *v0),
            PotentialSpec::Confining { omega } | PotentialSpec::ScaledConfining { omega } => {
                positive("omega", *omega)
            }
            PotentialSpec::Custom { v, w } => {
                if v.len() != w.len() {
                    return Err(Error::InvalidPotential(format!(
                        "V has {} samples but W has {}",
                        v.len(),
                        w.len()
                    )));
                }
                check_parity(v, w)
            }
        }
    }

    /// Whether `V` tends to zero at infinity, so that the linearization has a
    /// continuous band on `|Im lambda| >= |mu|`.
    pub fn is_decaying(&self) -> bool {
        match self {
            PotentialSpec::ScarfII { .. } => true,
            PotentialSpec::Confining { .. } | PotentialSpec::ScaledConfining { .. } => false,
            PotentialSpec::Custom { v, .. } => {
                let edge = v.first().copied().unwrap_or(0.0).abs();
                edge < 1e-8
            }
        }
    }

    /// Short tag used in configuration files and reports.
    pub fn tag(&self) -> &'static str {
        match self {
            PotentialSpec::ScarfII { .. } => "scarf2",
            PotentialSpec::Confining { .. } => "confining",
            PotentialSpec::ScaledConfining { .. } => "confining_scaled",
            PotentialSpec::Custom { .. } => "custom",
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPotential(format!("{name} must be positive, got {v}")))
    }
}

fn check_parity(v: &[f64], w: &[f64]) -> Result<()> {
    let m = v.len();
    for j in 0..m {
        let k = m - 1 - j;
        let scale_v = 1.0f64.max(v[j].abs());
        let scale_w = 1.0f64.max(w[j].abs());
        if (v[j] - v[k]).abs() > PARITY_TOL * scale_v {
            return Err(Error::InvalidPotential(format!(
                "V is not even: V[{j}] = {} but V[{k}] = {}",
                v[j], v[k]
            )));
        }
        if (w[j] + w[k]).abs() > PARITY_TOL * scale_w {
            return Err(Error::InvalidPotential(format!(
                "W is not odd: W[{j}] = {} but W[{k}] = {}",
                w[j], w[k]
            )));
        }
    }
    Ok(())
}

/// Samples `V` and `W` at the points `x`.
///
/// Custom potentials ignore `x` apart from its length, which must match the
/// stored samples.
pub fn eval_potential(spec: &PotentialSpec, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidPotential("non-finite sample point".into()));
    }
    let pair = match *spec {
        PotentialSpec::ScarfII { v0 } => x
            .iter()
            .map(|&x| {
                let s = 1.0 / x.cosh();
                (-v0 * s * s, s * x.tanh())
            })
            .unzip(),
        PotentialSpec::Confining { omega } => x
            .iter()
            .map(|&x| (omega * omega * x * x, x * (-x * x / 2.0).exp()))
            .unzip(),
        PotentialSpec::ScaledConfining { omega } => {
            let amp = 2.0 * omega.powf(-1.5);
            x.iter()
                .map(|&x| (x * x, amp * x * (-x * x / (2.0 * omega)).exp()))
                .unzip()
        }
        PotentialSpec::Custom { ref v, ref w } => {
            if v.len() != x.len() {
                return Err(Error::LengthMismatch { expected: x.len(), got: v.len() });
            }
            (v.clone(), w.clone())
        }
    };
    Ok(pair)
}

/// Physical parameters of one stationary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    /// Chemical potential (propagation constant).
    pub mu: f64,
    /// Gain-loss strength.
    pub gamma: f64,
    /// Nonlinearity coefficient; positive is focusing.
    pub g: f64,
    pub potential: PotentialSpec,
}

impl ProblemParams {
    pub fn new(mu: f64, gamma: f64, g: f64, potential: PotentialSpec) -> Result<Self> {
        let p = ProblemParams { mu, gamma, g, potential };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.g == 0.0 || !self.g.is_finite() {
            return Err(Error::InvalidParameters(format!("g must be nonzero, got {}", self.g)));
        }
        if !self.mu.is_finite() || !self.gamma.is_finite() {
            return Err(Error::InvalidParameters("mu and gamma must be finite".into()));
        }
        self.potential.validate()
    }
}

/// Closed-form stationary state of the Scarf II problem,
/// `Phi = A sech(x) exp(i beta arctan(sinh x))` with `mu = -1`,
/// `beta = -gamma / 3` and `A^2 = (2 + beta^2 - v0) / g`.
///
/// Returns `None` when `A^2` is not positive.
pub fn exact_scarf_solution(v0: f64, gamma: f64, g: f64, x: &[f64]) -> Option<Vec<num_complex::Complex64>> {
    let beta = -gamma / 3.0;
    let a2 = (2.0 + beta * beta - v0) / g;
    if !(a2 > 0.0) {
        return None;
    }
    let a = a2.sqrt();
    Some(
        x.iter()
            .map(|&x| num_complex::Complex64::from_polar(a / x.cosh(), beta * x.sinh().atan()))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scarf_values() {
        let (v, w) = eval_potential(&PotentialSpec::ScarfII { v0: 2.0 }, &[0.0]).unwrap();
        assert_eq!((v[0], w[0]), (-2.0, 0.0));
        let x0 = 1f64.asinh();
        let (_, w) = eval_potential(&PotentialSpec::ScarfII { v0: 1.0 }, &[x0 - 1e-3, x0, x0 + 1e-3]).unwrap();
        assert!((w[1] - 0.5).abs() < 1e-14);
        assert!(w[0] < w[1] && w[2] < w[1]);
    }

    #[test]
    fn scaled_confining_value() {
        let (v, w) = eval_potential(&PotentialSpec::ScaledConfining { omega: 0.1 }, &[1.0]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        let want = 2.0 * 0.1f64.powf(-1.5) * (-5.0f64).exp();
        assert!((w[0] - want).abs() < 1e-14);
        assert!((w[0] - 0.4262).abs() < 1e-4);
    }

    #[test]
    fn custom_parity_checked() {
        let ok = PotentialSpec::Custom { v: vec![1.0, 2.0, 1.0], w: vec![0.5, 0.0, -0.5] };
        assert!(eval_potential(&ok, &[1.0, 0.0, -1.0]).is_ok());
        let bad_v = PotentialSpec::Custom { v: vec![1.0, 2.0, 1.1], w: vec![0.5, 0.0, -0.5] };
        assert!(matches!(bad_v.validate(), Err(Error::InvalidPotential(_))));
        let bad_w = PotentialSpec::Custom { v: vec![1.0, 2.0, 1.0], w: vec![0.5, 0.0, 0.5] };
        assert!(matches!(bad_w.validate(), Err(Error::InvalidPotential(_))));
    }

    #[test]
    fn zero_g_rejected() {
        assert!(ProblemParams::new(-1.0, 0.0, 0.0, PotentialSpec::ScarfII { v0: 1.0 }).is_err());
        assert!(ProblemParams::new(-1.0, 0.0, 1.0, PotentialSpec::ScarfII { v0: -1.0 }).is_err());
    }

    #[test]
    fn exact_solution_amplitude() {
        // v0 = 1, gamma = -1, g = 1: A^2 = 10/9.
        let phi = exact_scarf_solution(1.0, -1.0, 1.0, &[0.0]).unwrap();
        assert!((phi[0].norm_sqr() - 10.0 / 9.0).abs() < 1e-14);
        assert!(exact_scarf_solution(3.0, 0.0, 1.0, &[0.0]).is_none());
    }
}
