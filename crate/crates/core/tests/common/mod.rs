//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::sync::Arc;

use ptkrein::krein::signature;
use ptkrein::{
    build_grid, exact_scarf_solution, krein_quantity, newton_solve, pt_phase_fix, seed_state, AdjointAnchor,
    Complex64, EigenPair, MappedGrid, NewtonOptions, PhaseOptions, PotentialSpec, Problem, ProblemParams,
    StationaryState,
};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn problem(n: usize, spec: PotentialSpec, mu: f64, gamma: f64, g: f64) -> Problem {
    let grid = Arc::new(build_grid(n, 10.0).unwrap());
    Problem::new(grid, ProblemParams::new(mu, gamma, g, spec).unwrap()).unwrap()
}

/// Newton-converged state on the Scarf II branch with a closed form.
pub fn exact_scarf_state(n: usize) -> StationaryState {
    let pr = problem(n, PotentialSpec::ScarfII { v0: 1.0 }, -1.0, -1.0, 1.0);
    let exact = exact_scarf_solution(1.0, -1.0, 1.0, pr.grid().points()).unwrap();
    newton_solve(&exact, &pr, &NewtonOptions::default()).unwrap()
}

/// A labelled test state.
pub struct Case {
    pub name: String,
    pub state: StationaryState,
}

fn solved(name: &str, branch: &str, pr: Problem) -> Case {
    let state = seed_state(branch, &pr, &NewtonOptions::default())
        .unwrap_or_else(|e| panic!("{name}: no stationary state: {e}"));
    Case { name: name.to_string(), state }
}

/// Ten states spread over both potential families, with and without gain
/// and loss, stable and unstable.
pub fn sampled_states(n: usize) -> Vec<Case> {
    let scarf = |v0| PotentialSpec::ScarfII { v0 };
    let trap = PotentialSpec::ScaledConfining { omega: 0.1 };
    let mut cases = vec![Case { name: "scarf v0=1 exact".into(), state: exact_scarf_state(n) }];
    cases.push(solved("scarf v0=1 mu=-1 gamma=0", "scarf-1", problem(n, scarf(1.0), -1.0, 0.0, 1.0)));
    cases.push(solved("scarf v0=1 mu=-1.5 gamma=-0.5", "scarf-1", problem(n, scarf(1.0), -1.5, -0.5, 1.0)));
    cases.push(solved("scarf v0=2 mu=-0.6 gamma=-2.21", "scarf-1", problem(n, scarf(2.0), -0.6, -2.21, 1.0)));
    cases.push(solved("scarf v0=2 mu=-1.2 gamma=-2.21", "scarf-1", problem(n, scarf(2.0), -1.2, -2.21, 1.0)));
    cases.push(solved("scarf v0=3 mu=-1.2 gamma=0", "scarf-2", problem(n, scarf(3.0), -1.2, 0.0, 1.0)));
    cases.push(solved("trap branch 1 mu=3 gamma=0", "confining-1", problem(n, trap.clone(), 3.0, 0.0, -2.0)));
    cases.push(solved("trap branch 1 mu=3 gamma=0.05", "confining-1", problem(n, trap.clone(), 3.0, 0.05, -2.0)));
    cases.push(solved("trap branch 2 mu=6 gamma=0.1", "confining-2", problem(n, trap.clone(), 6.0, 0.1, -2.0)));
    cases.push(solved("trap branch 3 mu=7 gamma=0.02", "confining-3", problem(n, trap, 7.0, 0.02, -2.0)));
    cases
}

/// PT-normalized eigenvector and adjoint of an isolated pair, with the
/// adjoint oriented by `anchor`, and the resulting Krein quantity.
pub fn pair_krein(pair: &EigenPair, grid: &MappedGrid, anchor: AdjointAnchor) -> Option<Complex64> {
    let opts = PhaseOptions::default();
    let (ya, za) = pair.adjoint.as_ref()?;
    let (y, z, _) = pt_phase_fix(&pair.y, &pair.z, &opts).ok()?;
    let (ya, za, _) = pt_phase_fix(ya, za, &opts).ok()?;
    let s = anchor.orient(&y, &z, &ya, &za, grid) as f64;
    let k = krein_quantity(&y, &z, Some((&ya, &za)), grid).ok()?;
    Some(k * s)
}

pub fn krein_signature(k: Complex64) -> Option<i8> {
    signature(k, 1e-8)
}

/// `max_i |a_i - b_i|`.
pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
