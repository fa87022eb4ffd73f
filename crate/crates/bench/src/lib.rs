//! Benchmark fixtures.

use std::f64::consts::PI;
use std::sync::Arc;

use cfheat::bvp::{solve_bvp, BvProblem, ProblemKind, SeriesSolution};
use cfheat::ivp::IvProblem;
use cfheat::operators::{field_fn, smooth_fn, CfParams, Forcing};

/// `D^α u + u = t e^{−t}` on `[0, 1]`.
pub fn ivp_fixture(alpha: f64) -> IvProblem {
    let f = smooth_fn(|t| t * (-t).exp(), |t| (1.0 - t) * (-t).exp());
    IvProblem::new(CfParams::with_lambda(alpha, -1.0).unwrap(), f, 1.0).unwrap()
}

/// Forcing that excites every slot of the non-local basis.
pub fn nonlocal_forcing() -> Arc<dyn Forcing> {
    field_fn(|x, t| t * ((2.0 * PI * x).sin() + x * (2.0 * PI * x).sin() + (4.0 * PI * x).cos()))
}

pub fn nonlocal_problem(n_modes: u32) -> BvProblem {
    BvProblem::new(ProblemKind::P4NonLocal, 0.5, nonlocal_forcing(), 1.0, n_modes).unwrap()
}

pub fn nonlocal_solution(n_modes: u32) -> SeriesSolution {
    solve_bvp(&nonlocal_problem(n_modes)).unwrap()
}
