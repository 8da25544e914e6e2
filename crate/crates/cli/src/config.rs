//! Run configuration files (TOML).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ptkrein::continuation::{SweepAxis, SweepConfig, TrackingOptions};
use ptkrein::{
    build_grid, AdjointAnchor, NewtonOptions, PhaseOptions, PotentialSpec, Problem, ProblemParams,
    SpectralThresholds,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { field: field.to_string(), message: message.into() }
}

pub const POTENTIAL_TAGS: [&str; 4] = ["scarf2", "confining", "confining_scaled", "custom"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub potential: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Samples of `V` on the grid points, for `potential = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    /// Samples of `W` on the grid points, for `potential = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_n() -> usize {
    500
}

fn default_scale() -> f64 {
    10.0
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: default_n(), scale: default_scale() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Parameters at which a full spectrum file is written; the nearest
    /// accepted step is used. Defaults to the first and last step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Vec<f64>>,
    /// `hamiltonian` or `linear-limit`; chosen from the start point if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
}

/// Every numerical threshold, with its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub max_iter: usize,
    pub tol_zero: f64,
    pub tol_re: f64,
    pub band_margin: f64,
    pub x_loc: Option<f64>,
    pub loc_threshold: f64,
    pub adjoint_match_tol: f64,
    pub amp_floor: f64,
    pub outlier_sigmas: f64,
    pub phase_variance: f64,
    pub radius: f64,
    pub proximity: f64,
    pub d_defective: f64,
    pub d_distinct: f64,
    pub refine_depth: usize,
    pub delta_coal: f64,
    pub track_max: f64,
    pub fit_samples: usize,
    pub krein_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let n = NewtonOptions::default();
        let s = SpectralThresholds::default();
        let p = PhaseOptions::default();
        let t = TrackingOptions::default();
        Tolerances {
            newton_tol: n.tol,
            max_iter: n.max_iter,
            tol_zero: s.tol_zero,
            tol_re: s.tol_re,
            band_margin: s.band_margin,
            x_loc: s.x_loc,
            loc_threshold: s.loc_threshold,
            adjoint_match_tol: s.adjoint_match_tol,
            amp_floor: p.amp_floor,
            outlier_sigmas: p.outlier_sigmas,
            phase_variance: p.max_variance,
            radius: t.radius,
            proximity: t.proximity,
            d_defective: t.d_defective,
            d_distinct: t.d_distinct,
            refine_depth: t.refine_depth,
            delta_coal: t.delta_coal,
            track_max: t.track_max,
            fit_samples: t.fit_samples,
            krein_floor: t.krein_floor,
        }
    }
}

impl Tolerances {
    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions { tol: self.newton_tol, max_iter: self.max_iter }
    }

    pub fn spectral(&self) -> SpectralThresholds {
        SpectralThresholds {
            tol_zero: self.tol_zero,
            tol_re: self.tol_re,
            band_margin: self.band_margin,
            x_loc: self.x_loc,
            loc_threshold: self.loc_threshold,
            adjoint_match_tol: self.adjoint_match_tol,
        }
    }

    pub fn phase(&self) -> PhaseOptions {
        PhaseOptions { amp_floor: self.amp_floor, outlier_sigmas: self.outlier_sigmas, max_variance: self.phase_variance }
    }

    pub fn tracking(&self) -> TrackingOptions {
        TrackingOptions {
            radius: self.radius,
            proximity: self.proximity,
            d_defective: self.d_defective,
            d_distinct: self.d_distinct,
            refine_depth: self.refine_depth,
            delta_coal: self.delta_coal,
            track_max: self.track_max,
            fit_samples: self.fit_samples,
            krein_floor: self.krein_floor,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("tolerances.newton_tol", self.newton_tol),
            ("tolerances.tol_zero", self.tol_zero),
            ("tolerances.tol_re", self.tol_re),
            ("tolerances.loc_threshold", self.loc_threshold),
            ("tolerances.adjoint_match_tol", self.adjoint_match_tol),
            ("tolerances.amp_floor", self.amp_floor),
            ("tolerances.outlier_sigmas", self.outlier_sigmas),
            ("tolerances.phase_variance", self.phase_variance),
            ("tolerances.radius", self.radius),
            ("tolerances.proximity", self.proximity),
            ("tolerances.d_defective", self.d_defective),
            ("tolerances.d_distinct", self.d_distinct),
            ("tolerances.track_max", self.track_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.band_margin < 0.0 {
            return Err(invalid("tolerances.band_margin", "must not be negative"));
        }
        if self.d_defective >= self.d_distinct {
            return Err(invalid("tolerances.d_defective", "must be below tolerances.d_distinct"));
        }
        if self.max_iter == 0 {
            return Err(invalid("tolerances.max_iter", "must be at least 1"));
        }
        if self.fit_samples < 5 {
            return Err(invalid("tolerances.fit_samples", "must be at least 5"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("ptkrein-out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_verify_ns")]
    pub ns: Vec<usize>,
}

fn default_verify_ns() -> Vec<usize> {
    vec![50, 100, 500]
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { ns: default_verify_ns() }
    }
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default = "default_branch")]
    pub branch: String,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub verify: VerifySection,
    /// Free-form label copied into the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
}

fn default_branch() -> String {
    "scarf-1".into()
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, path)
}

/// Parses and validates configuration text; `origin` is used in messages.
pub fn parse_config(text: &str, origin: &Path) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text)
        .map_err(|e| ConfigError::Parse { path: origin.to_path_buf(), message: e.to_string() })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.problem;
        if !POTENTIAL_TAGS.contains(&p.potential.as_str()) {
            return Err(invalid(
                "problem.potential",
                format!("unknown tag `{}`; expected one of {}", p.potential, POTENTIAL_TAGS.join(", ")),
            ));
        }
        self.potential_spec()?;
        if p.g == 0.0 || !p.g.is_finite() {
            return Err(invalid("problem.g", "must be nonzero"));
        }
        if self.grid.n < 2 {
            return Err(invalid("grid.n", "must be at least 2"));
        }
        if !(self.grid.scale > 0.0 && self.grid.scale.is_finite()) {
            return Err(invalid("grid.scale", "must be positive"));
        }
        ptkrein::stationary::BranchLabel::parse(&self.branch).map_err(|e| invalid("branch", e.to_string()))?;
        self.tolerances.validate()?;
        if let Some(s) = &self.sweep {
            let axis = parse_axis(&s.axis)?;
            if !(s.step > 0.0 && s.step.is_finite()) {
                return Err(invalid("sweep.step", format!("must be positive, got {}", s.step)));
            }
            if !(s.start.is_finite() && s.stop.is_finite()) || s.start == s.stop {
                return Err(invalid("sweep.stop", "sweep range is empty"));
            }
            if self.grid.n < 50 {
                return Err(invalid("grid.n", "sweeps need n >= 50"));
            }
            match axis {
                SweepAxis::Gamma if p.mu.is_none() => return Err(invalid("problem.mu", "required for a gamma sweep")),
                SweepAxis::Mu if p.gamma.is_none() => return Err(invalid("problem.gamma", "required for a mu sweep")),
                _ => {}
            }
            if let Some(a) = &s.anchor {
                parse_anchor(a)?;
            }
        }
        if self.verify.ns.iter().any(|&n| n < 2) {
            return Err(invalid("verify.ns", "every entry must be at least 2"));
        }
        Ok(())
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec, ConfigError> {
        let p = &self.problem;
        let need = |name: &str, v: Option<f64>| -> Result<f64, ConfigError> {
            match v {
                Some(x) if x > 0.0 && x.is_finite() => Ok(x),
                Some(x) => Err(invalid(&format!("problem.{name}"), format!("must be positive, got {x}"))),
                None => Err(invalid(&format!("problem.{name}"), format!("required for potential `{}`", p.potential))),
            }
        };
        let spec = match p.potential.as_str() {
            "scarf2" => PotentialSpec::ScarfII { v0: need("v0", p.v0)? },
            "confining" => PotentialSpec::Confining { omega: need("omega", p.omega)? },
            "confining_scaled" => PotentialSpec::ScaledConfining { omega: need("omega", p.omega)? },
            _ => {
                let v = p.v.clone().ok_or_else(|| invalid("problem.v", "required for potential `custom`"))?;
                let w = p.w.clone().ok_or_else(|| invalid("problem.w", "required for potential `custom`"))?;
                if v.len() + 1 != self.grid.n {
                    return Err(invalid("problem.v", format!("expected {} samples (grid.n - 1), got {}", self.grid.n - 1, v.len())));
                }
                let spec = PotentialSpec::Custom { v, w };
                spec.validate().map_err(|e| invalid("problem.v", e.to_string()))?;
                spec
            }
        };
        Ok(spec)
    }

    /// The problem at the configured point (or the sweep start).
    pub fn problem(&self) -> Result<Problem, ConfigError> {
        let grid = Arc::new(build_grid(self.grid.n, self.grid.scale).map_err(|e| invalid("grid.n", e.to_string()))?);
        let (mut mu, mut gamma) = (self.problem.mu, self.problem.gamma);
        if let Some(s) = &self.sweep {
            match parse_axis(&s.axis)? {
                SweepAxis::Gamma => gamma = Some(s.start),
                SweepAxis::Mu => mu = Some(s.start),
            }
        }
        let mu = mu.ok_or_else(|| invalid("problem.mu", "required"))?;
        let gamma = gamma.ok_or_else(|| invalid("problem.gamma", "required"))?;
        let params = ProblemParams::new(mu, gamma, self.problem.g, self.potential_spec()?)
            .map_err(|e| invalid("problem", e.to_string()))?;
        Problem::new(grid, params).map_err(|e| invalid("problem", e.to_string()))
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, ConfigError> {
        let s = self.sweep.as_ref().ok_or_else(|| invalid("sweep", "a [sweep] section is required for `run`"))?;
        Ok(SweepConfig {
            problem: self.problem()?,
            axis: parse_axis(&s.axis)?,
            start: s.start,
            stop: s.stop,
            step: s.step,
            branch: self.branch.clone(),
            newton: self.tolerances.newton(),
            spectral: self.tolerances.spectral(),
            phase: self.tolerances.phase(),
            tracking: self.tolerances.tracking(),
            anchor: s.anchor.as_deref().map(parse_anchor).transpose()?,
        })
    }
}

fn parse_axis(s: &str) -> Result<SweepAxis, ConfigError> {
    match s {
        "gamma" => Ok(SweepAxis::Gamma),
        "mu" => Ok(SweepAxis::Mu),
        other => Err(invalid("sweep.axis", format!("unknown axis `{other}`; expected gamma or mu"))),
    }
}

fn parse_anchor(s: &str) -> Result<AdjointAnchor, ConfigError> {
    match s {
        "hamiltonian" => Ok(AdjointAnchor::Hamiltonian),
        "linear-limit" => Ok(AdjointAnchor::LinearLimit),
        other => Err(invalid("sweep.anchor", format!("unknown anchor `{other}`; expected hamiltonian or linear-limit"))),
    }
}
