//! Solvers for initial- and boundary-value problems of the time-fractional
//! heat equation with the Caputo–Fabrizio derivative.
//!
//! * [`operators`]: the CF derivative, the Losada–Nieto integral and the
//!   exponential-kernel quadrature everything else builds on.
//! * [`ivp`]: closed-form solutions of `D^α u − λu = f`, with a Picard
//!   iteration of the equivalent Volterra equation as an independent check.
//! * [`bases`]: the sine, cosine, periodic and bi-orthogonal root-function
//!   systems used for separation of variables.
//! * [`bvp`]: series solutions of the four boundary-value problems.
//! * [`verify`]: PDE and modal residuals, hypothesis checks.
//! * [`dsl`]: a small expression language for forcings.

// `!(a < b)` is used on purpose to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bases;
pub mod bvp;
pub mod dsl;
pub mod error;
pub mod ivp;
pub mod operators;
pub mod verify;

pub use bases::{BasisFamily, ModeIndex, Slot};
pub use bvp::{solve_bvp, BvProblem, ProblemKind, SeriesSolution, SolverConfig};
pub use dsl::{DslError, EvalMode, Expr, ExprForcing};
pub use error::{Error, Result};
pub use ivp::{solve_ivp, volterra_oracle, IvProblem, Regime, TimeFunction};
pub use operators::{CfParams, Forcing, Quadrature, SampledFunction, TimeDomain, TimeForcing};
pub use verify::{GridSpec, HypothesisReport, ResidualReport};
