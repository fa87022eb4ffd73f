//! Caputo–Fabrizio derivative, the Losada–Nieto integral, and the shared
//! exponential-kernel quadrature.
//!
//! All integrals over `[0, t]` use composite Simpson with a panel count that
//! depends only on the horizon `T` of the [`TimeDomain`], never on `t`. That
//! keeps every quadrature-defined function smooth in `t`, which matters when
//! such functions are themselves differentiated numerically.

mod convolution;
mod quadrature;
mod signal;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use convolution::ExpConvolution;
pub use quadrature::{even_panels, simpson, simpson_nodes};
pub use signal::{
    field_fn, smooth_fn, time_fn, uniform_knots, Constant, FnField, FnForcing, Forcing, SampledFunction, SmoothForcing,
    TimeForcing,
};

/// Distance from `alpha = 1` below which operators dividing by `1 − alpha` refuse.
pub const ALPHA_SINGULAR_TOL: f64 = 1e-12;

/// Fractional order `alpha` in `(0, 1]` and, for initial-value problems, the coefficient `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CfParams {
    alpha: f64,
    lambda: Option<f64>,
}

impl CfParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidAlpha { alpha });
        }
        Ok(Self { alpha, lambda: None })
    }

    pub fn with_lambda(alpha: f64, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
        }
        Ok(Self { lambda: Some(lambda), ..Self::new(alpha)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn is_singular(&self) -> bool {
        (1.0 - self.alpha).abs() < ALPHA_SINGULAR_TOL
    }

    pub fn check_nonsingular(&self) -> Result<()> {
        if self.is_singular() {
            Err(Error::AlphaSingular { alpha: self.alpha, tol: ALPHA_SINGULAR_TOL })
        } else {
            Ok(())
        }
    }

    /// Decay rate `σ = α/(1−α)` of the derivative kernel.
    pub fn kernel_rate(&self) -> Result<f64> {
        self.check_nonsingular()?;
        Ok(self.alpha / (1.0 - self.alpha))
    }
}

/// Quadrature knobs for time integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    /// Simpson panels per unit of the horizon (at least this many on `[0, t]`).
    pub panels_per_unit: usize,
    /// Finite-difference step relative to `max(1, T)`.
    pub fd_step_scale: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { panels_per_unit: 512, fd_step_scale: 1e-6 }
    }
}

impl Quadrature {
    /// Twice the panels and half the finite-difference step.
    pub fn refined(&self) -> Self {
        Self { panels_per_unit: self.panels_per_unit * 2, fd_step_scale: self.fd_step_scale * 0.5 }
    }
}

/// The time interval `[0, T]` together with its quadrature settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeDomain {
    horizon: f64,
    quad: Quadrature,
}

/// Linear functional `f ↦ Σ wᵢ f(pᵢ)` reproducing the numeric CF derivative at one time.
#[derive(Clone, Debug, Default)]
pub struct CfStencil {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CfStencil {
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TimeDomain {
    pub fn new(horizon: f64, quad: Quadrature) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if quad.panels_per_unit < 2 || !(quad.fd_step_scale > 0.0) {
            return Err(Error::InvalidArgument("quadrature needs >= 2 panels and a positive step".into()));
        }
        let d = Self { horizon, quad };
        if horizon < 8.0 * d.fd_step() {
            return Err(Error::InvalidArgument(format!("horizon {horizon} is too short for the difference step")));
        }
        Ok(d)
    }

    pub fn with_horizon(horizon: f64) -> Result<Self> {
        Self::new(horizon, Quadrature::default())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quad
    }

    pub fn refined(&self) -> Self {
        Self { horizon: self.horizon, quad: self.quad.refined() }
    }

    /// Panel count used for every integral over `[0, t]`, `t ≤ T`.
    pub fn panels(&self) -> usize {
        let n = (self.quad.panels_per_unit as f64 * self.horizon.max(1.0)).ceil() as usize;
        even_panels(n)
    }

    pub fn fd_step(&self) -> f64 {
        self.quad.fd_step_scale * self.horizon.max(1.0)
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.horizon {
            Ok(())
        } else {
            Err(Error::domain("t", t, 0.0, self.horizon))
        }
    }

    /// Second-order finite-difference stencil for `f′(s)`: central in the
    /// interior of `[0, T]`, one-sided within one step of either end.
    fn difference_stencil(&self, s: f64) -> [(f64, f64); 3] {
        let h = self.fd_step();
        let inv = 1.0 / (2.0 * h);
        if s - h >= 0.0 && s + h <= self.horizon {
            [(s + h, inv), (s - h, -inv), (s, 0.0)]
        } else if s - h < 0.0 {
            [(s, -3.0 * inv), (s + h, 4.0 * inv), (s + 2.0 * h, -inv)]
        } else {
            [(s, 3.0 * inv), (s - h, -4.0 * inv), (s - 2.0 * h, inv)]
        }
    }

    /// `f′(s)`, analytic when `f` provides it.
    pub fn derivative_of(&self, f: &dyn TimeForcing, s: f64) -> f64 {
        match f.derivative(s) {
            Some(d) => d,
            None => self.difference_stencil(s).iter().map(|&(p, w)| if w == 0.0 { 0.0 } else { w * f.value(p) }).sum(),
        }
    }

    /// Stencil for `(1/(1−α)) ∫₀ᵗ f′(s) e^{−σ(t−s)} ds` with `f′` by finite differences.
    pub fn cf_stencil(&self, params: &CfParams, t: f64) -> Result<CfStencil> {
        let sigma = params.kernel_rate()?;
        self.check_time(t)?;
        if t == 0.0 {
            return Ok(CfStencil::default());
        }
        let scale = 1.0 / (1.0 - params.alpha());
        let (nodes, weights) = simpson_nodes(0.0, t, self.panels());
        let mut stencil = CfStencil {
            points: Vec::with_capacity(2 * nodes.len() + 4),
            weights: Vec::with_capacity(2 * nodes.len() + 4),
        };
        for (&s, &w) in nodes.iter().zip(&weights) {
            let c = w * scale * (-sigma * (t - s)).exp();
            for (p, d) in self.difference_stencil(s) {
                if d != 0.0 {
                    stencil.points.push(p);
                    stencil.weights.push(c * d);
                }
            }
        }
        Ok(stencil)
    }

    /// Caputo–Fabrizio derivative `(1/(1−α)) ∫₀ᵗ f′(s) e^{−(α/(1−α))(t−s)} ds`.
    ///
    /// Constants short-circuit to exactly zero; piecewise-linear inputs are
    /// integrated exactly; otherwise Simpson on the analytic `f′` if known, or
    /// on central differences.
    pub fn cf_derivative(&self, f: &dyn TimeForcing, params: &CfParams, t: f64) -> Result<f64> {
        let sigma = params.kernel_rate()?;
        self.check_time(t)?;
        if f.is_constant() || t == 0.0 {
            return Ok(0.0);
        }
        let value = if let Some(s) = f.as_sampled() {
            convolution::sampled_cf_derivative(s, sigma, 1.0 - params.alpha(), t)
        } else if f.derivative(0.0).is_some() {
            let scale = 1.0 / (1.0 - params.alpha());
            scale * simpson(|s| self.derivative_of(f, s) * (-sigma * (t - s)).exp(), 0.0, t, self.panels())
        } else {
            self.cf_stencil(params, t)?.apply(|s| f.value(s))
        };
        finite(value, "CF derivative")
    }

    /// Losada–Nieto integral `(1−α)u(t) + α ∫₀ᵗ u(s) ds`.
    pub fn cf_integral(&self, u: &dyn TimeForcing, alpha: f64, t: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidAlpha { alpha });
        }
        self.check_time(t)?;
        let running = match u.as_sampled() {
            Some(s) => convolution::sampled_integral(s, t),
            None => simpson(|s| u.value(s), 0.0, t, self.panels()),
        };
        finite((1.0 - alpha) * u.value(t) + alpha * running, "CF integral")
    }

    /// `∫₀ᵗ g(ξ) e^{rate·(t−ξ)} dξ`.
    pub fn exp_kernel_integral(&self, g: &dyn TimeForcing, rate: f64, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::domain("t", t, 0.0, f64::INFINITY));
        }
        let v = simpson(|s| g.value(s) * (rate * (t - s)).exp(), 0.0, t, self.panels());
        finite(v, "exponential-kernel integral")
    }

    /// `∫₀ᵗ g(ξ) (t−ξ) e^{rate·(t−ξ)} dξ`.
    pub fn exp_moment_integral(&self, g: &dyn TimeForcing, rate: f64, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::domain("t", t, 0.0, f64::INFINITY));
        }
        let v = simpson(|s| g.value(s) * (t - s) * (rate * (t - s)).exp(), 0.0, t, self.panels());
        finite(v, "exponential-moment integral")
    }
}

/// `t ↦ ∫₀ᵗ g(ξ) e^{r(t−ξ)} dξ` (and its `(t−ξ)`-weighted companion) for a
/// fixed `g` and rate: exact for piecewise-linear `g`, Simpson otherwise.
#[derive(Clone)]
pub enum KernelConvolution {
    Exact(ExpConvolution),
    Quadrature { g: Arc<dyn TimeForcing>, rate: f64, domain: TimeDomain },
}

impl KernelConvolution {
    pub fn new(g: &Arc<dyn TimeForcing>, rate: f64, domain: &TimeDomain) -> Self {
        match g.as_sampled() {
            Some(s) => KernelConvolution::Exact(ExpConvolution::new(s, rate)),
            None => KernelConvolution::Quadrature { g: Arc::clone(g), rate, domain: *domain },
        }
    }

    /// `∫₀ᵗ g(ξ) e^{r(t−ξ)} dξ`; NaN if the quadrature produced a non-finite value.
    pub fn plain(&self, t: f64) -> f64 {
        match self {
            KernelConvolution::Exact(c) => c.j(t),
            KernelConvolution::Quadrature { g, rate, domain } => {
                domain.exp_kernel_integral(g.as_ref(), *rate, t).unwrap_or(f64::NAN)
            }
        }
    }

    /// `(∫₀ᵗ g e^{r(t−ξ)} dξ, ∫₀ᵗ g (t−ξ) e^{r(t−ξ)} dξ)`.
    pub fn with_moment(&self, t: f64) -> (f64, f64) {
        match self {
            KernelConvolution::Exact(c) => c.eval(t),
            KernelConvolution::Quadrature { g, rate, domain } => (
                domain.exp_kernel_integral(g.as_ref(), *rate, t).unwrap_or(f64::NAN),
                domain.exp_moment_integral(g.as_ref(), *rate, t).unwrap_or(f64::NAN),
            ),
        }
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain() -> TimeDomain {
        TimeDomain::with_horizon(2.0).unwrap()
    }

    #[test]
    fn alpha_outside_range_is_rejected() {
        assert!(matches!(CfParams::new(0.0), Err(Error::InvalidAlpha { .. })));
        assert!(matches!(CfParams::new(1.2), Err(Error::InvalidAlpha { .. })));
        assert!(matches!(CfParams::new(f64::NAN), Err(Error::InvalidAlpha { .. })));
        assert!(CfParams::new(1.0).is_ok());
    }

    #[test]
    fn derivative_refuses_alpha_one() {
        let p = CfParams::new(1.0).unwrap();
        let r = domain().cf_derivative(&time_fn(|t| t), &p, 0.5);
        assert!(matches!(r, Err(Error::AlphaSingular { .. })));
    }

    #[test]
    fn derivative_rejects_times_outside_horizon() {
        let p = CfParams::new(0.5).unwrap();
        assert!(matches!(domain().cf_derivative(&time_fn(|t| t), &p, -0.1), Err(Error::Domain { .. })));
        assert!(matches!(domain().cf_derivative(&time_fn(|t| t), &p, 2.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn derivative_of_constant_is_exactly_zero() {
        let p = CfParams::new(0.3).unwrap();
        let d = domain();
        assert_eq!(d.cf_derivative(&Constant(4.2), &p, 1.3).unwrap(), 0.0);
        // numeric path without the constant flag: differences cancel exactly
        assert_eq!(d.cf_derivative(&time_fn(|_| 4.2), &p, 1.3).unwrap(), 0.0);
    }

    #[test]
    fn derivative_of_identity_matches_closed_form() {
        let p = CfParams::new(0.5).unwrap();
        let expected = 2.0 * (1.0 - (-1.0f64).exp());
        let analytic = smooth_fn(|t| t, |_| 1.0);
        let d = domain();
        assert!((d.cf_derivative(&analytic, &p, 1.0).unwrap() - expected).abs() < 1e-12);
        assert!((d.cf_derivative(&time_fn(|t| t), &p, 1.0).unwrap() - expected).abs() < 1e-8);
        assert_eq!(d.cf_derivative(&time_fn(|t| t * t), &p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sampled_derivative_is_exact_for_linear_data() {
        let p = CfParams::new(0.5).unwrap();
        let s = SampledFunction::uniform(2.0, 7, |t| 3.0 * t).unwrap();
        let v = domain().cf_derivative(&s, &p, 1.0).unwrap();
        assert!((v - 6.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn integral_examples() {
        let d = domain();
        assert_eq!(d.cf_integral(&Constant(0.0), 0.4, 1.7).unwrap(), 0.0);
        assert!((d.cf_integral(&Constant(1.0), 0.5, 2.0).unwrap() - 1.5).abs() < 1e-14);
        assert!((d.cf_integral(&time_fn(|t| t), 1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(d.cf_integral(&Constant(1.0), 0.5, 3.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn exp_kernel_examples() {
        let d = TimeDomain::with_horizon(3.0).unwrap();
        assert_eq!(d.exp_kernel_integral(&Constant(0.0), -2.0, 1.0).unwrap(), 0.0);
        assert!((d.exp_kernel_integral(&Constant(1.0), 0.0, 3.0).unwrap() - 3.0).abs() < 1e-14);
        let v = d.exp_kernel_integral(&Constant(1.0), -1.0, 1.0).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-13);
        assert!(d.exp_kernel_integral(&Constant(1.0), -1.0, -0.5).is_err());
    }

    #[test]
    fn stencil_reproduces_direct_evaluation() {
        let p = CfParams::new(0.7).unwrap();
        let d = domain();
        let f = |t: f64| (2.0 * t).sin();
        let st = d.cf_stencil(&p, 2.0).unwrap();
        let direct = d.cf_derivative(&time_fn(f), &p, 2.0).unwrap();
        assert_eq!(st.apply(f), direct);
    }
}
