//! Stationary states, linear stability and Krein signatures for the
//! nonlinear Schrodinger equation with a PT-symmetric complex potential,
//!
//! ```text
//! -Phi'' + (V(x) + i gamma W(x)) Phi - g |Phi|^2 Phi = mu Phi,
//! ```
//!
//! discretized by Chebyshev collocation on the real line, together with a
//! parameter continuation driver that tracks eigenvalues and classifies the
//! bifurcations at which they collide.

pub mod continuation;
pub mod error;
pub mod grid;
pub mod krein;
pub mod linearization;
pub mod model;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::{build_grid, cheb_diff_matrix, inner_product, MappedGrid};
pub use krein::{
    continue_adjoint_sign, hamiltonian_krein, krein_quantity, linear_limit_krein, pt_phase_fix, AdjointAnchor,
    Block, KreinRecord, PhaseOptions,
};
pub use linearization::{
    assemble_adjoint_matrix, assemble_stability_matrix, classify_eigenvalue, solve_spectrum, Classification,
    EigenPair, SpectralThresholds, SpectrumSnapshot,
};
pub use model::{eval_potential, exact_scarf_solution, PotentialSpec, ProblemParams};
pub use stationary::{
    assemble_jacobian, initial_guess, newton_solve, pt_project, residual, seed_state, NewtonOptions, Problem,
    StationaryState,
};

pub use num_complex::Complex64;
