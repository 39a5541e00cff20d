//! Solitary waves of the one-dimensional Euler-Poisson system in the
//! Gardner-Morikawa stretched frame, and their comparison with the KdV
//! soliton.
//!
//! * [`model`]: parameters, the scalar functions `H, h, g, l`, admissibility
//!   and the critical densities.
//! * [`dynamics`]: the `(n, E)` phase plane and the RK4 homoclinic orbit.
//! * [`kdv`]: the `sech²` reference and the remainder fields.
//! * [`analysis`]: peak checks, convergence campaigns, tail rates.
//! * [`acceptance`]: the verification suite shared by tests and the CLI.
//! * [`io`]: CSV profiles and JSON reports.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kdv;
pub mod model;
pub mod roots;

pub use dynamics::{
    integrate_half_profile, mirror_to_full_line, solve_profile, PhaseState, SolverConfig,
    WaveProfile,
};
pub use error::{Error, Result};
pub use kdv::{compute_remainders, KdvReference, RemainderField};
pub use model::{check_admissible, solve_critical_densities, solve_zeta, ModelParams};
