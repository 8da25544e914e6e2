//! PT-symmetric stationary states by Newton's method.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::MappedGrid;
use crate::model::{eval_potential, ProblemParams};

/// Power below which a converged state counts as the trivial solution.
pub const ZERO_POWER: f64 = 1e-10;

/// A discretized stationary problem: grid, parameters and sampled potential.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: Arc<MappedGrid>,
    params: ProblemParams,
    v: Vec<f64>,
    w: Vec<f64>,
}

impl Problem {
    pub fn new(grid: Arc<MappedGrid>, params: ProblemParams) -> Result<Self> {
        params.validate()?;
        let (v, w) = eval_potential(&params.potential, grid.points())?;
        Ok(Problem { grid, params, v, w })
    }

    /// Same grid and potential with a different `(mu, gamma)`.
    pub fn with_mu_gamma(&self, mu: f64, gamma: f64) -> Result<Self> {
        let mut params = self.params.clone();
        params.mu = mu;
        params.gamma = gamma;
        params.validate()?;
        Ok(Problem { grid: self.grid.clone(), params, v: self.v.clone(), w: self.w.clone() })
    }

    pub fn grid(&self) -> &Arc<MappedGrid> {
        &self.grid
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    /// Sampled real potential `V`.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Sampled gain-loss profile `W`.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    fn check_len(&self, phi: &[Complex64]) -> Result<()> {
        if phi.len() != self.grid.len() {
            return Err(Error::LengthMismatch { expected: self.grid.len(), got: phi.len() });
        }
        Ok(())
    }
}

/// Residual `F(Phi) = (-d2 + V + i gamma W - mu - g |Phi|^2) Phi`.
pub fn residual(phi: &[Complex64], problem: &Problem) -> Result<Vec<Complex64>> {
    problem.check_len(phi)?;
    let p = &problem.params;
    let mut out = problem.grid.apply_d2(phi);
    for (j, o) in out.iter_mut().enumerate() {
        let pot = Complex64::new(problem.v[j] - p.mu - p.g * phi[j].norm_sqr(), p.gamma * problem.w[j]);
        *o = pot * phi[j] - *o;
    }
    Ok(out)
}

/// Jacobian of `(F, conj F)` with respect to `(u, conj u)` at `Phi`.
///
/// The diagonal blocks are `-d2 + V -/+ i gamma W - mu - 2 g |Phi|^2`, the
/// off-diagonal blocks `-g Phi^2` and `-g conj(Phi)^2`.
pub fn assemble_jacobian(phi: &[Complex64], problem: &Problem) -> Result<Mat<c64>> {
    assemble_jacobian_with(phi, problem, 1.0)
}

/// Jacobian with the sign of the gain-loss term multiplied by `gain_sign`.
/// `gain_sign = -1` gives the operator of the adjoint spectral problem.
pub(crate) fn assemble_jacobian_with(phi: &[Complex64], problem: &Problem, gain_sign: f64) -> Result<Mat<c64>> {
    problem.check_len(phi)?;
    let m = phi.len();
    let p = &problem.params;
    let d2 = problem.grid.d2();
    let mut jac = Mat::<c64>::zeros(2 * m, 2 * m);
    for j in 0..m {
        for i in 0..m {
            let v = c64::new(-d2[(i, j)], 0.0);
            jac[(i, j)] = v;
            jac[(m + i, m + j)] = v;
        }
    }
    for j in 0..m {
        let base = problem.v[j] - p.mu - 2.0 * p.g * phi[j].norm_sqr();
        let gw = gain_sign * p.gamma * problem.w[j];
        jac[(j, j)] += c64::new(base, gw);
        jac[(m + j, m + j)] += c64::new(base, -gw);
        jac[(j, m + j)] = -p.g * phi[j] * phi[j];
        jac[(m + j, j)] = -p.g * (phi[j] * phi[j]).conj();
    }
    Ok(jac)
}

/// Closest PT-symmetric field, `(Phi(x) + conj Phi(-x)) / 2`.
///
/// On the symmetric collocation grid this is the same projection as keeping
/// the real part of even Chebyshev coefficients and the imaginary part of
/// odd ones.
pub fn pt_project(phi: &[Complex64]) -> Vec<Complex64> {
    let m = phi.len();
    (0..m).map(|j| 0.5 * (phi[j] + phi[m - 1 - j].conj())).collect()
}

/// Largest deviation from `Phi(x) = conj Phi(-x)`.
pub fn pt_defect(phi: &[Complex64]) -> f64 {
    let m = phi.len();
    (0..m).map(|j| (phi[j] - phi[m - 1 - j].conj()).norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Target for `max |F|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-12, max_iter: 50 }
    }
}

/// A converged PT-symmetric stationary state.
#[derive(Debug, Clone)]
pub struct StationaryState {
    pub phi: Vec<Complex64>,
    pub problem: Problem,
    pub residual_inf: f64,
    pub power: f64,
    pub branch_label: String,
    pub iterations: usize,
    /// `max |F|` before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
    /// Convergence threshold actually applied (see [`newton_solve`]).
    pub tolerance: f64,
}

impl StationaryState {
    pub fn params(&self) -> &ProblemParams {
        self.problem.params()
    }

    pub fn grid(&self) -> &Arc<MappedGrid> {
        self.problem.grid()
    }

    /// The trivial state `Phi = 0`, used for linear-limit spectra.
    pub fn zero(problem: Problem) -> Self {
        let m = problem.grid().len();
        StationaryState {
            phi: vec![Complex64::new(0.0, 0.0); m],
            problem,
            residual_inf: 0.0,
            power: 0.0,
            branch_label: "zero".into(),
            iterations: 0,
            residual_history: vec![0.0],
            tolerance: 0.0,
        }
    }
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rounding floor of `max |F|` for a field of size `phi_max`.
///
/// The product `d2 * Phi` is evaluated with an absolute error of order
/// `eps * ||d2||_inf * max|Phi|`, which exceeds `1e-12` on the finest grids.
fn roundoff_floor(grid: &MappedGrid, phi_max: f64) -> f64 {
    let d2 = grid.d2();
    let m = grid.len();
    let row_max = (0..m)
        .map(|i| (0..m).map(|j| d2[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    16.0 * f64::EPSILON * row_max * phi_max
}

/// Newton's method in the PT-symmetric subspace.
///
/// The field is written as `Phi = a + i b` with `a` even and `b` odd, and the
/// real and imaginary parts of `F` are solved for on one half of the grid.
/// This removes the gauge kernel `i Phi` from the linear solves.
///
/// Convergence is declared once `max |F|` drops below `tol`, or below the
/// rounding floor of the discrete second derivative if that is larger.
pub fn newton_solve(initial: &[Complex64], problem: &Problem, opts: &NewtonOptions) -> Result<StationaryState> {
    problem.check_len(initial)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameters(format!("Newton tolerance must be positive, got {}", opts.tol)));
    }
    let grid = problem.grid.clone();
    let m = grid.len();
    let half_even = m.div_ceil(2);
    let half_odd = m / 2;
    let mirror = |j: usize| m - 1 - j;
    let p = problem.params.clone();
    let d2 = grid.d2();

    let mut phi = pt_project(initial);
    let mut history = Vec::new();
    let mut tol_eff = opts.tol;

    for iter in 0..=opts.max_iter {
        let f = residual(&phi, problem)?;
        let r = inf_norm(&f);
        history.push(r);
        if !r.is_finite() {
            return Err(Error::NoConvergence { iterations: iter, residual: r });
        }
        let phi_max = inf_norm(&phi);
        tol_eff = opts.tol.max(roundoff_floor(&grid, phi_max));
        if r <= tol_eff {
            let power = grid.norm(&[&phi]).powi(2);
            if power < ZERO_POWER {
                return Err(Error::ConvergedToZero { power });
            }
            return Ok(StationaryState {
                phi,
                problem: problem.clone(),
                residual_inf: r,
                power,
                branch_label: String::new(),
                iterations: iter,
                residual_history: history,
                tolerance: tol_eff,
            });
        }
        if iter == opts.max_iter || r > 1e12 {
            return Err(Error::NoConvergence { iterations: iter, residual: r });
        }

        // Restricted real Jacobian. Unknowns: a_k (k < half_even), b_k (k < half_odd).
        // Equations: Re F_i (i < half_even), Im F_i (i < half_odd).
        let n_unk = half_even + half_odd;
        let mut jr = Mat::<f64>::zeros(n_unk, n_unk);
        let mut rhs = Mat::<f64>::zeros(n_unk, 1);
        for i in 0..half_even {
            let (a, b) = (phi[i].re, phi[i].im);
            for k in 0..half_even {
                let mk = mirror(k);
                let mut v = -d2[(i, k)];
                if mk != k {
                    v -= d2[(i, mk)];
                }
                jr[(i, k)] = v;
            }
            jr[(i, i)] += problem.v[i] - p.mu - p.g * (3.0 * a * a + b * b);
            if i < half_odd {
                jr[(i, half_even + i)] = -2.0 * p.g * a * b - p.gamma * problem.w[i];
            }
            rhs[(i, 0)] = -f[i].re;
        }
        for i in 0..half_odd {
            let (a, b) = (phi[i].re, phi[i].im);
            let row = half_even + i;
            for k in 0..half_odd {
                jr[(row, half_even + k)] = -d2[(i, k)] + d2[(i, mirror(k))];
            }
            jr[(row, half_even + i)] += problem.v[i] - p.mu - p.g * (a * a + 3.0 * b * b);
            jr[(row, i)] = -2.0 * p.g * a * b + p.gamma * problem.w[i];
            rhs[(row, 0)] = -f[i].im;
        }

        let lu = jr.partial_piv_lu();
        let u = lu.U();
        let (mut umin, mut umax) = (f64::INFINITY, 0.0f64);
        for k in 0..n_unk {
            let d = u[(k, k)].abs();
            umin = umin.min(d);
            umax = umax.max(d);
        }
        if !(umin > 1e-14 * umax) {
            return Err(Error::SingularJacobian);
        }
        let step = lu.solve(&rhs);
        for k in 0..half_even {
            let da = step[(k, 0)];
            phi[k].re += da;
            if mirror(k) != k {
                phi[mirror(k)].re += da;
            }
        }
        for k in 0..half_odd {
            let db = step[(half_even + k, 0)];
            phi[k].im += db;
            phi[mirror(k)].im -= db;
        }
    }
    let _ = tol_eff;
    unreachable!("loop returns on its last iteration")
}

/// Branch labels understood by [`initial_guess`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLabel {
    /// `scarf-1`: sech profile.
    Scarf1,
    /// `scarf-2`: sech tanh profile.
    Scarf2,
    /// `confining-k`: `(k-1)`-th Hermite function.
    Confining(usize),
}

impl BranchLabel {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "scarf-1" => Ok(BranchLabel::Scarf1),
            "scarf-2" => Ok(BranchLabel::Scarf2),
            _ => {
                let k = s
                    .strip_prefix("confining-")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|k| (1..=4).contains(k));
                k.map(BranchLabel::Confining).ok_or_else(|| Error::UnknownBranch(s.to_string()))
            }
        }
    }

    /// Position of the branch in the linear spectrum, counting from the
    /// lowest level.
    pub fn level(&self) -> usize {
        match self {
            BranchLabel::Scarf1 => 0,
            BranchLabel::Scarf2 => 1,
            BranchLabel::Confining(k) => k - 1,
        }
    }

    pub fn as_string(&self) -> String {
        match self {
            BranchLabel::Scarf1 => "scarf-1".into(),
            BranchLabel::Scarf2 => "scarf-2".into(),
            BranchLabel::Confining(k) => format!("confining-{k}"),
        }
    }

    /// Unscaled guess profile.
    pub fn profile(&self, x: f64, potential_width: f64) -> f64 {
        match self {
            BranchLabel::Scarf1 => 1.0 / x.cosh(),
            BranchLabel::Scarf2 => x.tanh() / x.cosh(),
            BranchLabel::Confining(k) => {
                let y = x / potential_width;
                hermite(k - 1, y) * (-y * y / 2.0).exp()
            }
        }
    }
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Length scale of the harmonic ground state for the potential, so that
/// Hermite guesses match the linear modes.
fn oscillator_width(problem: &Problem) -> f64 {
    match problem.params.potential {
        crate::model::PotentialSpec::Confining { omega } => 1.0 / omega.sqrt(),
        _ => 1.0,
    }
}

/// Linear eigenvalue `mu_lin` of `-d2 + V + i gamma W` at the branch level,
/// counting levels by increasing real part.
pub fn linear_level(problem: &Problem, level: usize) -> Result<Complex64> {
    let m = problem.grid.len();
    let d2 = problem.grid.d2();
    let p = &problem.params;
    let h = Mat::<c64>::from_fn(m, m, |i, j| {
        let mut v = c64::new(-d2[(i, j)], 0.0);
        if i == j {
            v += c64::new(problem.v[i], p.gamma * problem.w[i]);
        }
        v
    });
    let mut ev = h.eigenvalues().map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev.get(level)
        .copied()
        .ok_or_else(|| Error::InvalidParameters(format!("linear level {level} out of range")))
}

/// Initial Newton guess for a named branch.
///
/// The amplitude comes from the small-amplitude balance
/// `a^2 = (mu_lin - mu) / (g <|s|^4> / <|s|^2>)` with `s` the guess profile;
/// when that is not positive the amplitude is 1.
pub fn initial_guess(branch: &str, problem: &Problem) -> Result<Vec<Complex64>> {
    let label = BranchLabel::parse(branch)?;
    let width = oscillator_width(problem);
    let s = problem.grid.sample(|x| label.profile(x, width));
    let amp = match linear_level(problem, label.level()) {
        Ok(mu_lin) => linear_limit_amplitude(&s, mu_lin.re, problem),
        Err(_) => 1.0,
    };
    // PT symmetry forces odd profiles into the imaginary part.
    let unit = if label.level() % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::i() };
    Ok(s.into_iter().map(|v| unit * (amp * v)).collect())
}

fn linear_limit_amplitude(s: &[f64], mu_lin: f64, problem: &Problem) -> f64 {
    let grid = &problem.grid;
    let s2: Vec<f64> = s.iter().map(|v| v * v).collect();
    let s4: Vec<f64> = s2.iter().map(|v| v * v).collect();
    let ratio = grid.integrate(&s4) / grid.integrate(&s2);
    let a2 = (mu_lin - problem.params.mu) / (problem.params.g * ratio);
    if a2 > 0.0 && a2.is_finite() {
        a2.sqrt()
    } else {
        1.0
    }
}

/// Solves for a branch from scratch.
///
/// Tries the linear-limit amplitude and the fallbacks `0.5` and `2` times it.
/// If all fail, the branch is continued in `mu` from just beyond its linear
/// limit at `gamma = 0`, then in `gamma` to the requested value.
pub fn seed_state(branch: &str, problem: &Problem, opts: &NewtonOptions) -> Result<StationaryState> {
    let label = BranchLabel::parse(branch)?;
    let guess = initial_guess(branch, problem)?;
    let mut last_err = Error::NoConvergence { iterations: 0, residual: f64::NAN };
    for factor in [1.0, 0.5, 2.0] {
        let g: Vec<Complex64> = guess.iter().map(|v| v * factor).collect();
        match newton_solve(&g, problem, opts) {
            Ok(mut st) if profile_matches(&st, label) => {
                st.branch_label = label.as_string();
                return Ok(st);
            }
            Ok(_) => {}
            Err(e) => last_err = e,
        }
    }
    match homotopy_seed(label, problem, opts) {
        Ok(st) => Ok(st),
        Err(_) => Err(last_err),
    }
}

/// Number of sign changes of the dominant component, a proxy for the branch level.
fn profile_matches(st: &StationaryState, label: BranchLabel) -> bool {
    let odd = label.level() % 2 == 1;
    let re: Vec<f64> = st.phi.iter().map(|v| if odd { v.im } else { v.re }).collect();
    let peak = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sig: Vec<f64> = re.into_iter().filter(|v| v.abs() > 1e-3 * peak).collect();
    let changes = sig.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    if st.params().gamma == 0.0 {
        changes == label.level()
    } else {
        // With gain and loss the profile can pick up extra nodes; only
        // reject clearly wrong parity.
        changes % 2 == label.level() % 2
    }
}

fn homotopy_seed(label: BranchLabel, problem: &Problem, opts: &NewtonOptions) -> Result<StationaryState> {
    let p = problem.params();
    let target_mu = p.mu;
    let target_gamma = p.gamma;
    let base = problem.with_mu_gamma(target_mu, 0.0)?;
    let mu_lin = linear_level(&base, label.level())?.re;
    let dir = (target_mu - mu_lin).signum();
    let max_step = 0.05f64.max(0.01 * mu_lin.abs());
    let mut mu = mu_lin + dir * 0.5 * max_step;
    let start = base.with_mu_gamma(mu, 0.0)?;
    let guess = initial_guess(&label.as_string(), &start)?;
    let mut prev = newton_solve(&guess, &start, opts)?;
    let mut prev_phi: Option<Vec<Complex64>> = None;
    let total = (target_mu - mu).abs();
    let n_mu = (total / max_step).ceil().max(1.0) as usize;
    let dmu = (target_mu - mu) / n_mu as f64;
    for _ in 0..n_mu {
        mu += dmu;
        let pr = base.with_mu_gamma(mu, 0.0)?;
        let guess = secant(&prev.phi, prev_phi.as_deref());
        let next = newton_solve(&guess, &pr, opts)?;
        prev_phi = Some(std::mem::replace(&mut prev, next).phi);
    }
    let n_g = ((target_gamma.abs() / 0.01).ceil() as usize).max(1);
    let mut prev_phi: Option<Vec<Complex64>> = None;
    for k in 1..=n_g {
        let gamma = target_gamma * k as f64 / n_g as f64;
        let pr = base.with_mu_gamma(target_mu, gamma)?;
        let guess = secant(&prev.phi, prev_phi.as_deref());
        let next = newton_solve(&guess, &pr, opts)?;
        prev_phi = Some(std::mem::replace(&mut prev, next).phi);
    }
    prev.branch_label = label.as_string();
    Ok(prev)
}

/// Linear extrapolation `2 cur - prev` for equally spaced steps.
pub fn secant(cur: &[Complex64], prev: Option<&[Complex64]>) -> Vec<Complex64> {
    match prev {
        Some(p) => cur.iter().zip(p).map(|(c, p)| 2.0 * c - p).collect(),
        None => cur.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::model::{exact_scarf_solution, PotentialSpec};

    fn scarf_problem(n: usize) -> Problem {
        let grid = Arc::new(build_grid(n, 10.0).unwrap());
        let params = ProblemParams::new(-1.0, -1.0, 1.0, PotentialSpec::ScarfII { v0: 1.0 }).unwrap();
        Problem::new(grid, params).unwrap()
    }

    #[test]
    fn residual_of_zero_is_zero() {
        let pr = scarf_problem(40);
        let r = residual(&vec![Complex64::new(0.0, 0.0); 39], &pr).unwrap();
        assert!(r.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn exact_solution_has_small_residual() {
        let pr = scarf_problem(200);
        let phi = exact_scarf_solution(1.0, -1.0, 1.0, pr.grid().points()).unwrap();
        let r = inf_norm(&residual(&phi, &pr).unwrap());
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn projection_examples() {
        let grid = build_grid(30, 10.0).unwrap();
        let s = grid.sample(|x| 1.0 / x.cosh());
        let is: Vec<Complex64> = s.iter().map(|v| Complex64::new(0.0, *v)).collect();
        assert!(inf_norm(&pt_project(&is)) < 1e-15);
        let both: Vec<Complex64> = s.iter().map(|v| Complex64::new(*v, *v)).collect();
        let out = pt_project(&both);
        for (o, v) in out.iter().zip(&s) {
            assert!((o - Complex64::new(*v, 0.0)).norm() < 1e-15);
        }
        let again = pt_project(&out);
        assert_eq!(again, out);
    }

    #[test]
    fn hermite_recurrence() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_eq!(hermite(1, 0.3), 0.6);
        assert!((hermite(2, 0.3) - (4.0 * 0.09 - 2.0)).abs() < 1e-15);
        assert!((hermite(3, 0.3) - (8.0 * 0.027 - 12.0 * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn branch_labels() {
        assert_eq!(BranchLabel::parse("confining-3").unwrap(), BranchLabel::Confining(3));
        assert!(BranchLabel::parse("confining-5").is_err());
        assert!(BranchLabel::parse("scarf-3").is_err());
    }

    #[test]
    fn newton_finds_exact_solution() {
        let pr = scarf_problem(100);
        let x = pr.grid().points().to_vec();
        let guess: Vec<Complex64> = x.iter().map(|x| Complex64::new(0.9 / x.cosh(), 0.0)).collect();
        let st = newton_solve(&guess, &pr, &NewtonOptions::default()).unwrap();
        let exact = exact_scarf_solution(1.0, -1.0, 1.0, &x).unwrap();
        let diff: Vec<Complex64> = st.phi.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let err = pr.grid().norm(&[&diff]).powi(2);
        assert!(err < 1e-10, "{err}");
        assert!(pt_defect(&st.phi) < 1e-12);
    }
}
