//! Evaluable scalar functions of `t` and of `(x, t)`.

use std::sync::Arc;

use crate::error::{Error, Result};

/// A scalar function of time, optionally with an analytic derivative.
pub trait TimeForcing: Send + Sync {
    fn value(&self, t: f64) -> f64;

    /// Analytic derivative when the implementor knows one.
    fn derivative(&self, _t: f64) -> Option<f64> {
        None
    }

    /// `true` only when the function is known to be constant in `t`.
    fn is_constant(&self) -> bool {
        false
    }

    /// Access to the piecewise-linear representation, if this is one.
    fn as_sampled(&self) -> Option<&SampledFunction> {
        None
    }
}

/// A scalar function of `(x, t)` on the unit interval in space.
pub trait Forcing: Send + Sync {
    fn value(&self, x: f64, t: f64) -> f64;
}

impl<T: TimeForcing + ?Sized> TimeForcing for Arc<T> {
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        (**self).derivative(t)
    }
    fn is_constant(&self) -> bool {
        (**self).is_constant()
    }
    fn as_sampled(&self) -> Option<&SampledFunction> {
        (**self).as_sampled()
    }
}

impl<T: TimeForcing + ?Sized> TimeForcing for &T {
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        (**self).derivative(t)
    }
    fn is_constant(&self) -> bool {
        (**self).is_constant()
    }
    fn as_sampled(&self) -> Option<&SampledFunction> {
        (**self).as_sampled()
    }
}

impl<T: Forcing + ?Sized> Forcing for Arc<T> {
    fn value(&self, x: f64, t: f64) -> f64 {
        (**self).value(x, t)
    }
}

impl<T: Forcing + ?Sized> Forcing for &T {
    fn value(&self, x: f64, t: f64) -> f64 {
        (**self).value(x, t)
    }
}

/// Closure-backed [`TimeForcing`] without a known derivative.
#[derive(Clone)]
pub struct FnForcing<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> TimeForcing for FnForcing<F> {
    fn value(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

/// Closure-backed [`TimeForcing`] carrying its analytic derivative.
#[derive(Clone)]
pub struct SmoothForcing<F, D> {
    pub f: F,
    pub df: D,
}

impl<F, D> TimeForcing for SmoothForcing<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        Some((self.df)(t))
    }
}

/// `f(t) = c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub f64);

impl TimeForcing for Constant {
    fn value(&self, _t: f64) -> f64 {
        self.0
    }
    fn derivative(&self, _t: f64) -> Option<f64> {
        Some(0.0)
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// Closure-backed [`Forcing`].
#[derive(Clone)]
pub struct FnField<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Forcing for FnField<F> {
    fn value(&self, x: f64, t: f64) -> f64 {
        (self.0)(x, t)
    }
}

pub fn time_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Arc<dyn TimeForcing> {
    Arc::new(FnForcing(f))
}

pub fn smooth_fn<F, D>(f: F, df: D) -> Arc<dyn TimeForcing>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
{
    Arc::new(SmoothForcing { f, df })
}

pub fn field_fn<F: Fn(f64, f64) -> f64 + Send + Sync + 'static>(f: F) -> Arc<dyn Forcing> {
    Arc::new(FnField(f))
}

/// Piecewise-linear function through `(knots[i], values[i])`, starting at `t = 0`.
///
/// When `derivative_values` is present the derivative is the linear
/// interpolant of those values; otherwise it is the segment slope.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    derivative_values: Option<Vec<f64>>,
}

impl SampledFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::build(knots, values, None)
    }

    pub fn with_derivatives(knots: Vec<f64>, values: Vec<f64>, derivatives: Vec<f64>) -> Result<Self> {
        Self::build(knots, values, Some(derivatives))
    }

    /// Samples `f` on `n + 1` uniform knots over `[0, horizon]`.
    pub fn uniform(horizon: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "uniform sampling needs n >= 1 and horizon > 0 (got n = {n}, horizon = {horizon})"
            )));
        }
        let knots = uniform_knots(horizon, n);
        let values = knots.iter().map(|&t| f(t)).collect();
        Self::new(knots, values)
    }

    fn build(knots: Vec<f64>, values: Vec<f64>, derivative_values: Option<Vec<f64>>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument("a sampled function needs at least two knots".into()));
        }
        if knots.len() != values.len() || derivative_values.as_ref().is_some_and(|d| d.len() != knots.len()) {
            return Err(Error::InvalidArgument("knots and values differ in length".into()));
        }
        if knots[0] != 0.0 {
            return Err(Error::InvalidArgument(format!("first knot must be 0, got {}", knots[0])));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knots must be strictly increasing".into()));
        }
        if values.iter().chain(derivative_values.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sampled function values".into()));
        }
        Ok(Self { knots, values, derivative_values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivative_values(&self) -> Option<&[f64]> {
        self.derivative_values.as_deref()
    }

    pub fn horizon(&self) -> f64 {
        *self.knots.last().expect("at least two knots")
    }

    /// Index `j` of the segment `[knots[j], knots[j + 1]]` containing `t` (clamped).
    pub fn segment(&self, t: f64) -> usize {
        let last = self.knots.len() - 2;
        self.knots.partition_point(|&k| k <= t).saturating_sub(1).min(last)
    }

    pub fn slope(&self, j: usize) -> f64 {
        (self.values[j + 1] - self.values[j]) / (self.knots[j + 1] - self.knots[j])
    }
}

impl TimeForcing for SampledFunction {
    fn value(&self, t: f64) -> f64 {
        let j = self.segment(t);
        self.values[j] + self.slope(j) * (t - self.knots[j])
    }

    fn derivative(&self, t: f64) -> Option<f64> {
        let j = self.segment(t);
        Some(match &self.derivative_values {
            Some(d) => {
                let w = (t - self.knots[j]) / (self.knots[j + 1] - self.knots[j]);
                d[j] + w * (d[j + 1] - d[j])
            }
            None => self.slope(j),
        })
    }

    fn as_sampled(&self) -> Option<&SampledFunction> {
        Some(self)
    }
}

/// `n + 1` uniform knots on `[0, horizon]`, with the last one exactly `horizon`.
pub fn uniform_knots(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { horizon } else { horizon * i as f64 / n as f64 }).collect()
}
