//! Spectrum and Krein quantities of the trivial state.

mod common;

use common::*;
use faer::{c64, Mat};
use ptkrein::linearization::set_distance;
use ptkrein::{
    linear_limit_krein, solve_spectrum, AdjointAnchor, Block, Complex64, PotentialSpec, SpectralThresholds,
    StationaryState,
};

fn scalar_eigenvalues(state: &StationaryState) -> Vec<Complex64> {
    let pr = &state.problem;
    let d2 = pr.grid().d2();
    let gamma = pr.params().gamma;
    let m = pr.grid().len();
    let h = Mat::<c64>::from_fn(m, m, |i, j| {
        let mut v = c64::new(-d2[(i, j)], 0.0);
        if i == j {
            v += c64::new(pr.v()[i], gamma * pr.w()[i]);
        }
        v
    });
    h.eigenvalues().unwrap().into_iter().map(|e| Complex64::new(e.re, e.im)).collect()
}

#[test]
fn zero_state_spectrum_decouples() {
    for (spec, mu, gamma) in [
        (PotentialSpec::ScarfII { v0: 2.0 }, -1.0, -1.0),
        (PotentialSpec::ScaledConfining { omega: 0.1 }, 4.0, 0.08),
    ] {
        let pr = problem(100, spec, mu, gamma, 1.0);
        let zero = StationaryState::zero(pr);
        let snap = solve_spectrum(&zero, SpectralThresholds::default()).unwrap();
        let e = scalar_eigenvalues(&zero);
        let mut expect: Vec<Complex64> = e.iter().map(|e| c(0.0, 1.0) * (e - mu)).collect();
        expect.extend(e.iter().map(|e| c(0.0, -1.0) * (e.conj() - mu)));
        let got = snap.eigenvalues();
        let small = |v: &[Complex64]| v.iter().copied().filter(|l| l.norm() < 50.0).collect::<Vec<_>>();
        assert!(set_distance(&small(&expect), &got) < 1e-8);
        assert!(set_distance(&small(&got), &expect) < 1e-8);
    }
}

#[test]
fn pt_krein_agrees_with_scalar_formula() {
    let pr = problem(120, PotentialSpec::ScaledConfining { omega: 0.1 }, 4.0, 0.08, -2.0);
    let zero = StationaryState::zero(pr);
    let grid = zero.grid().clone();
    let snap = solve_spectrum(&zero, SpectralThresholds::default()).unwrap();
    let mut checked = 0;
    for p in snap.pairs.iter().filter(|p| p.is_isolated() && p.lambda.norm() < 30.0) {
        let Some(k) = pair_krein(p, &grid, AdjointAnchor::LinearLimit) else {
            panic!("no adjoint at {}", p.lambda);
        };
        let (y, z, _) = ptkrein::pt_phase_fix(&p.y, &p.z, &Default::default()).unwrap();
        let ny = grid.norm(&[&y]);
        let nz = grid.norm(&[&z]);
        let kl = if ny > nz {
            linear_limit_krein(&y, Block::Y, &zero).unwrap()
        } else {
            linear_limit_krein(&z, Block::Z, &zero).unwrap()
        };
        assert!((k.re - kl).abs() <= 1e-8 && k.im.abs() <= 1e-8, "{}: {k} vs {kl}", p.lambda);
        checked += 1;
    }
    assert!(checked >= 6);
}
