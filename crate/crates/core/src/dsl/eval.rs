//! Evaluation, and forcings backed by expressions.

use std::f64::consts::PI;
use std::sync::{Mutex, PoisonError};

use super::{differentiate_t, BinOp, DslError, Expr, Func};
use crate::operators::{Forcing, TimeForcing};

/// How domain errors are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvalMode {
    /// `log(≤0)`, `sqrt(<0)`, division by zero, `0^negative` and any non-finite
    /// intermediate value are errors.
    #[default]
    Strict,
    /// Plain IEEE arithmetic.
    Lenient,
}

struct Env {
    x: Option<f64>,
    t: f64,
    strict: bool,
}

fn domain(what: String) -> DslError {
    DslError::MathDomain(what)
}

impl Env {
    fn finite(&self, v: f64, what: impl FnOnce() -> String) -> Result<f64, DslError> {
        if self.strict && !v.is_finite() {
            Err(domain(format!("{} is not finite", what())))
        } else {
            Ok(v)
        }
    }

    fn go(&self, e: &Expr) -> Result<f64, DslError> {
        match e {
            Expr::Num(v) => Ok(*v),
            Expr::Pi => Ok(PI),
            Expr::T => Ok(self.t),
            Expr::X => self.x.ok_or(DslError::UnboundVariable('x')),
            Expr::Neg(a) => Ok(-self.go(a)?),
            Expr::Bin(op, a, b) => {
                let l = self.go(a)?;
                let r = self.go(b)?;
                let v = match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if self.strict && r == 0.0 {
                            return Err(domain(format!("division by zero in {e}")));
                        }
                        l / r
                    }
                    BinOp::Pow => {
                        if self.strict && l == 0.0 && r < 0.0 {
                            return Err(domain(format!("0 raised to {r} in {e}")));
                        }
                        l.powf(r)
                    }
                };
                self.finite(v, || e.to_string())
            }
            Expr::Call(f, a) => {
                let v = self.go(a)?;
                if self.strict {
                    match f {
                        Func::Log if v <= 0.0 => return Err(domain(format!("log of {v}"))),
                        Func::Sqrt if v < 0.0 => return Err(domain(format!("sqrt of {v}"))),
                        _ => {}
                    }
                }
                let out = match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                };
                self.finite(out, || e.to_string())
            }
        }
    }
}

/// Evaluates `e` at `(x, t)`; `x = None` leaves `x` unbound.
pub fn eval(e: &Expr, x: Option<f64>, t: f64, mode: EvalMode) -> Result<f64, DslError> {
    Env { x, t, strict: mode == EvalMode::Strict }.go(e)
}

/// An expression used as `f(t)` or `g(x, t)`, with its symbolic `t`-derivative.
///
/// The solver traits cannot return errors, so a failed evaluation yields NaN
/// and the first error is kept; check [`ExprForcing::error`] after a run.
#[derive(Debug)]
pub struct ExprForcing {
    expr: Expr,
    dt: Expr,
    mode: EvalMode,
    error: Mutex<Option<DslError>>,
}

impl ExprForcing {
    pub fn new(expr: Expr, mode: EvalMode) -> Self {
        let dt = differentiate_t(&expr);
        Self { expr, dt, mode, error: Mutex::new(None) }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn derivative_expr(&self) -> &Expr {
        &self.dt
    }

    /// First evaluation error seen so far.
    pub fn error(&self) -> Option<DslError> {
        self.error.lock().unwrap_or_else(PoisonError::into_inner).clone()
    }

    fn record(&self, r: Result<f64, DslError>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.error.lock().unwrap_or_else(PoisonError::into_inner);
                slot.get_or_insert(e);
                f64::NAN
            }
        }
    }
}

impl TimeForcing for ExprForcing {
    fn value(&self, t: f64) -> f64 {
        self.record(eval(&self.expr, None, t, self.mode))
    }

    fn derivative(&self, t: f64) -> Option<f64> {
        Some(self.record(eval(&self.dt, None, t, self.mode)))
    }

    fn is_constant(&self) -> bool {
        !self.expr.uses_t()
    }
}

impl Forcing for ExprForcing {
    fn value(&self, x: f64, t: f64) -> f64 {
        self.record(eval(&self.expr, Some(x), t, self.mode))
    }
}
