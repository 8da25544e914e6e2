//! CSV artifacts and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use ptkrein::continuation::{ContinuationRun, StepRecord};
use ptkrein::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "nan".into())
}

fn sig(s: Option<i8>) -> String {
    s.map(|v| v.to_string()).unwrap_or_else(|| "0".into())
}

/// A CSV document assembled in memory.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, &self.text)
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Per-step stability summary.
pub fn branch_csv(run: &ContinuationRun) -> Csv {
    let mut csv = Csv::new(&["param", "mu", "gamma", "power", "stable", "max_re", "residual", "iterations"]);
    for s in &run.steps {
        csv.row(&[
            num(s.param),
            num(s.mu),
            num(s.gamma),
            num(s.power),
            (!s.unstable as u8).to_string(),
            num(s.max_re),
            num(s.residual),
            s.iterations.to_string(),
        ]);
    }
    if let Some(t) = &run.truncated {
        csv.comment(&format!("truncated at {}: {}", num(t.param), t.reason));
    }
    csv
}

/// Full spectrum at one step.
pub fn spectrum_csv(spectrum: &[(Complex64, ptkrein::Classification)]) -> Csv {
    let mut csv = Csv::new(&["re", "im", "classification"]);
    for (l, c) in spectrum {
        csv.row(&[num(l.re), num(l.im), c.as_str().to_string()]);
    }
    csv
}

/// Every tracked sample.
pub fn tracks_csv(run: &ContinuationRun) -> Csv {
    let mut csv = Csv::new(&[
        "branch_id",
        "param",
        "re",
        "im",
        "re_k",
        "im_k",
        "signature",
        "classification",
        "frozen",
    ]);
    for t in &run.tracks {
        for s in &t.samples {
            csv.row(&[
                t.branch_id.to_string(),
                num(s.param),
                num(s.lambda.re),
                num(s.lambda.im),
                opt_num(s.krein.map(|k| k.re)),
                opt_num(s.krein.map(|k| k.im)),
                sig(s.signature),
                s.classification.as_str().to_string(),
                (s.frozen as u8).to_string(),
            ]);
        }
    }
    csv
}

/// One row per classified collision.
pub fn events_csv(run: &ContinuationRun) -> Csv {
    let mut csv = Csv::new(&[
        "kind",
        "param_at",
        "bracket_lo",
        "bracket_hi",
        "branch_a",
        "branch_b",
        "signature_a",
        "signature_b",
        "exponent",
        "fit_param0",
        "min_d_vec",
        "min_d_adj",
        "im_lambda",
        "theory_violation",
    ]);
    for e in &run.events {
        csv.row(&[
            e.kind.as_str().to_string(),
            num(e.param_at),
            num(e.bracket.0),
            num(e.bracket.1),
            e.branch_ids.0.to_string(),
            e.branch_ids.1.map(|b| b.to_string()).unwrap_or_else(|| "-1".into()),
            sig(e.pre_signatures.0),
            sig(e.pre_signatures.1),
            opt_num(e.fit.map(|f| f.exponent)),
            opt_num(e.fit.map(|f| f.param0)),
            opt_num(e.evidence.as_ref().map(|v| v.min_d_vec)),
            opt_num(e.evidence.as_ref().and_then(|v| v.min_d_adj)),
            num(e.lambda_at.im),
            (e.theory_violation as u8).to_string(),
        ]);
    }
    if let Some(t) = &run.truncated {
        csv.comment(&format!("truncated at {}: {}", num(t.param), t.reason));
    }
    csv
}

/// Eigenvector-difference norms around one event.
pub fn coalescence_csv(event: &ptkrein::continuation::BifurcationEvent) -> Option<Csv> {
    let ev = event.evidence.as_ref()?;
    let mut csv = Csv::new(&["param", "gap", "d_vec", "d_adj", "re_a", "im_a", "re_b", "im_b"]);
    for p in &ev.samples {
        csv.row(&[
            num(p.param),
            num(p.gap()),
            num(p.d_vec),
            opt_num(p.d_adj),
            num(p.lambda_a.re),
            num(p.lambda_a.im),
            num(p.lambda_b.re),
            num(p.lambda_b.im),
        ]);
    }
    Some(csv)
}

/// Convergence summary of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub param: f64,
    pub iterations: usize,
    pub residual: f64,
    pub power: f64,
}

impl From<&StepRecord> for StepSummary {
    fn from(s: &StepRecord) -> Self {
        StepSummary { param: s.param, iterations: s.iterations, residual: s.residual, power: s.power }
    }
}

/// Resolved configuration and provenance of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub artifact_version: String,
    pub wall_clock_seconds: f64,
    pub anchor: String,
    pub truncated: Option<String>,
    pub steps: Vec<StepSummary>,
    pub diagnostics: Vec<String>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest is always serializable")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// File-name friendly rendering of a parameter value.
pub fn param_tag(p: f64) -> String {
    format!("{p:.6}")
}
