//! The `run`, `verify` and `spectrum` commands.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use ptkrein::continuation::{sweep, ContinuationRun};
use ptkrein::{build_grid, exact_scarf_solution, newton_solve, solve_spectrum, Complex64, PotentialSpec, Problem, ProblemParams};

use crate::config::{ConfigError, RunConfig};
use crate::output::{
    branch_csv, coalescence_csv, events_csv, param_tag, spectrum_csv, tracks_csv, RunManifest, StepSummary,
};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    ConfigError = 1,
    Truncated = 2,
    VerifyFailed = 3,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ConfigError {
    ConfigError::Validation { field: "output.dir".into(), message: format!("{}: {e}", path.display()) }
}

/// Result of a `run` invocation.
pub struct RunOutcome {
    pub exit: ExitCode,
    pub run: Option<ContinuationRun>,
    pub manifest: RunManifest,
}

/// Executes the configured sweep and writes all artifacts.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, ConfigError> {
    let sweep_cfg = cfg.sweep_config()?;
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let t0 = Instant::now();
    let result = sweep(&sweep_cfg);
    let mut files = Vec::new();
    let mut write = |name: String, csv: crate::output::Csv| -> Result<(), ConfigError> {
        let path = dir.join(&name);
        csv.write(&path).map_err(|e| io_err(&path, e))?;
        files.push(name);
        Ok(())
    };
    let (exit, run, truncated, anchor) = match result {
        Ok(run) => {
            write("branch.csv".into(), branch_csv(&run))?;
            write("tracks.csv".into(), tracks_csv(&run))?;
            write("events.csv".into(), events_csv(&run))?;
            for (k, e) in run.events.iter().enumerate() {
                if let Some(csv) = coalescence_csv(e) {
                    write(format!("coalescence_{k}.csv"), csv)?;
                }
            }
            let wanted = cfg
                .sweep
                .as_ref()
                .and_then(|s| s.snapshots.clone())
                .unwrap_or_else(|| {
                    let mut v = Vec::new();
                    if let Some(f) = run.steps.first() {
                        v.push(f.param);
                    }
                    if let Some(l) = run.steps.last() {
                        v.push(l.param);
                    }
                    v
                });
            let mut written: Vec<usize> = Vec::new();
            for p in wanted {
                let idx = run
                    .steps
                    .iter()
                    .enumerate()
                    .min_by(|a, b| (a.1.param - p).abs().total_cmp(&(b.1.param - p).abs()))
                    .map(|(i, _)| i);
                if let Some(i) = idx {
                    if !written.contains(&i) {
                        written.push(i);
                        let s = &run.steps[i];
                        write(format!("spectrum_{}.csv", param_tag(s.param)), spectrum_csv(&s.spectrum))?;
                    }
                }
            }
            let truncated = run.truncated.as_ref().map(|t| format!("{}: {}", t.param, t.reason));
            let exit = if truncated.is_some() { ExitCode::Truncated } else { ExitCode::Success };
            let anchor = format!("{:?}", run.anchor);
            (exit, Some(run), truncated, anchor)
        }
        Err(e) => (ExitCode::Truncated, None, Some(format!("no step completed: {e}")), String::new()),
    };
    let manifest = RunManifest {
        config: cfg.clone(),
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: t0.elapsed().as_secs_f64(),
        anchor,
        truncated,
        steps: run.as_ref().map(|r| r.steps.iter().map(StepSummary::from).collect()).unwrap_or_default(),
        diagnostics: run.as_ref().map(|r| r.diagnostics.clone()).unwrap_or_default(),
        files,
    };
    let mpath = dir.join("manifest.json");
    fs::write(&mpath, manifest.to_json()).map_err(|e| io_err(&mpath, e))?;
    Ok(RunOutcome { exit, run, manifest })
}

/// One line of the exact-solution comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub n: usize,
    /// `||Phi - Phi_exact||^2`, or `None` if Newton failed.
    pub error: Option<f64>,
    /// Published error at this resolution, when there is one.
    pub reference: Option<f64>,
    pub passed: bool,
}

/// Published errors of the exact-solution test.
pub const REFERENCE_ERRORS: [(usize, f64); 3] = [(50, 1.5e-6), (100, 2.4e-13), (500, 2.2e-13)];

/// Allowed ratio between the computed and the published error.
pub const REFERENCE_SLACK: f64 = 100.0;

/// Solves the Scarf II problem with a closed-form solution at each
/// configured resolution and compares.
pub fn verify(cfg: &RunConfig) -> Result<Vec<VerifyRow>, ConfigError> {
    let p = &cfg.problem;
    let spec = cfg.potential_spec()?;
    let ok = matches!(spec, PotentialSpec::ScarfII { v0 } if v0 == 1.0)
        && p.mu == Some(-1.0)
        && p.gamma == Some(-1.0)
        && p.g == 1.0;
    if !ok {
        return Err(ConfigError::Validation {
            field: "problem".into(),
            message: "verify needs potential = scarf2, v0 = 1, mu = -1, gamma = -1, g = 1".into(),
        });
    }
    let mut rows = Vec::new();
    for &n in &cfg.verify.ns {
        let grid = Arc::new(build_grid(n, cfg.grid.scale).map_err(|e| ConfigError::Validation {
            field: "verify.ns".into(),
            message: e.to_string(),
        })?);
        let params = ProblemParams::new(-1.0, -1.0, 1.0, spec.clone()).expect("validated above");
        let problem = Problem::new(grid.clone(), params).expect("validated above");
        let exact = exact_scarf_solution(1.0, -1.0, 1.0, grid.points()).expect("positive amplitude");
        let guess: Vec<Complex64> = grid.sample_complex(|x| Complex64::new(0.9 / x.cosh(), 0.0));
        let error = newton_solve(&guess, &problem, &cfg.tolerances.newton()).ok().map(|st| {
            let d: Vec<Complex64> = st.phi.iter().zip(&exact).map(|(a, b)| a - b).collect();
            grid.norm(&[&d]).powi(2)
        });
        let reference = REFERENCE_ERRORS.iter().find(|r| r.0 == n).map(|r| r.1);
        let passed = match (error, reference) {
            (Some(e), Some(r)) => e <= REFERENCE_SLACK * r,
            (Some(_), None) => true,
            (None, _) => false,
        };
        rows.push(VerifyRow { n, error, reference, passed });
    }
    Ok(rows)
}

/// Formats the verification table.
pub fn verify_report(rows: &[VerifyRow]) -> String {
    let mut s = String::from("     N   error ||Phi - Phi_exact||^2   published    bound        status\n");
    for r in rows {
        let e = r.error.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "no convergence".into());
        let (rf, b) = match r.reference {
            Some(v) => (format!("{v:.1e}"), format!("{:.1e}", REFERENCE_SLACK * v)),
            None => ("-".into(), "-".into()),
        };
        s.push_str(&format!(
            "{:>6}   {:<28}  {:<11}  {:<11}  {}\n",
            r.n,
            e,
            rf,
            b,
            if r.passed { "ok" } else { "FAIL" }
        ));
    }
    s
}

/// Single-point spectrum: solves the configured state and writes its
/// spectrum file.
pub fn spectrum(cfg: &RunConfig) -> Result<(ExitCode, std::path::PathBuf), ConfigError> {
    let problem = cfg.problem()?;
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let state = match ptkrein::seed_state(&cfg.branch, &problem, &cfg.tolerances.newton()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("stationary solve failed: {e}");
            return Ok((ExitCode::Truncated, dir));
        }
    };
    let snap = match solve_spectrum(&state, cfg.tolerances.spectral()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("spectrum failed: {e}");
            return Ok((ExitCode::Truncated, dir));
        }
    };
    let spec: Vec<_> = snap.pairs.iter().map(|p| (p.lambda, p.classification)).collect();
    let path = dir.join(format!("spectrum_{}.csv", param_tag(problem.params().mu)));
    spectrum_csv(&spec).write(&path).map_err(|e| io_err(&path, e))?;
    Ok((ExitCode::Success, path))
}
