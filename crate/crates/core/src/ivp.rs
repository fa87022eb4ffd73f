//! The fractional initial-value problem
//!
//! ```text
//! D^α u(t) − λ u(t) = f(t),   0 ≤ t ≤ T,   u(0) = u₀
//! ```
//!
//! solved in closed form in every parameter regime, plus an independent
//! Picard iteration of the equivalent second-kind Volterra equation.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{CfParams, KernelConvolution, Quadrature, SampledFunction, TimeDomain, TimeForcing};

/// Relative width of the band around `λ = 1/(1−α)` treated as resonant.
pub const RESONANCE_TOL: f64 = 1e-9;
/// Tolerance for compatibility conditions such as `f(0) = 0`.
pub const COMPAT_TOL: f64 = 1e-9;
pub const PICARD_TOL: f64 = 1e-12;
pub const PICARD_MAX_ITER: usize = 200;

/// Which closed form applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `λ ≠ 1/(1−α)`, `λ ≠ 0`.
    Generic,
    /// `λ = 1/(1−α)`: the solution is local in `f` and `f′`.
    Resonant,
    /// `λ = 0`.
    LambdaZero,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Generic => "Generic",
            Regime::Resonant => "Resonant",
            Regime::LambdaZero => "LambdaZero",
        })
    }
}

fn require_lambda(params: &CfParams) -> Result<f64> {
    params.lambda().ok_or_else(|| Error::InvalidArgument("lambda is required for the initial-value problem".into()))
}

/// Classifies `(α, λ)`. Resonance is checked first; at `α = 1` it cannot occur.
pub fn classify_regime(params: &CfParams) -> Result<Regime> {
    let lambda = require_lambda(params)?;
    let alpha = params.alpha();
    if !params.is_singular() {
        let critical = 1.0 / (1.0 - alpha);
        if (lambda - critical).abs() < RESONANCE_TOL * critical.max(1.0) {
            return Ok(Regime::Resonant);
        }
    }
    if lambda.abs() < RESONANCE_TOL {
        return Ok(Regime::LambdaZero);
    }
    Ok(Regime::Generic)
}

/// `D^α u − λu = f` on `[0, T]` with `u(0) = u₀`.
#[derive(Clone)]
pub struct IvProblem {
    pub params: CfParams,
    pub f: Arc<dyn TimeForcing>,
    pub u0: f64,
    pub horizon: f64,
    pub quadrature: Quadrature,
}

impl IvProblem {
    pub fn new(params: CfParams, f: Arc<dyn TimeForcing>, horizon: f64) -> Result<Self> {
        require_lambda(&params)?;
        Ok(Self { params, f, u0: 0.0, horizon, quadrature: Quadrature::default() })
    }

    pub fn with_initial_value(mut self, u0: f64) -> Self {
        self.u0 = u0;
        self
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn domain(&self) -> Result<TimeDomain> {
        TimeDomain::new(self.horizon, self.quadrature)
    }

    fn lambda(&self) -> f64 {
        self.params.lambda().expect("checked at construction")
    }
}

impl fmt::Debug for IvProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IvProblem")
            .field("params", &self.params)
            .field("u0", &self.u0)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

/// An evaluable `u(t)` together with the closed form that produced it.
#[derive(Clone)]
pub struct TimeFunction {
    branch: Regime,
    params: CfParams,
    u0: f64,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TimeFunction {
    pub fn new(branch: Regime, params: CfParams, u0: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { branch, params, u0, eval: Arc::new(eval) }
    }

    /// `u ≡ 0`.
    pub fn zero(branch: Regime, params: CfParams) -> Self {
        Self::new(branch, params, 0.0, |_| 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn branch(&self) -> Regime {
        self.branch
    }

    pub fn params(&self) -> &CfParams {
        &self.params
    }

    pub fn initial_value(&self) -> f64 {
        self.u0
    }

    pub fn sample(&self, knots: &[f64]) -> Vec<f64> {
        knots.iter().map(|&t| self.eval(t)).collect()
    }
}

impl fmt::Debug for TimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeFunction")
            .field("branch", &self.branch)
            .field("params", &self.params)
            .field("u0", &self.u0)
            .finish_non_exhaustive()
    }
}

impl TimeForcing for TimeFunction {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
}

fn check_compat(condition: &str, measured: f64) -> Result<()> {
    if measured.abs() < COMPAT_TOL {
        Ok(())
    } else {
        Err(Error::Compatibility { condition: condition.to_string(), measured, tol: COMPAT_TOL })
    }
}

/// Closed-form solution.
///
/// * Generic: `u = (1−α)/D·f(t) + α/D² ∫₀ᵗ f(ξ) e^{λα(t−ξ)/D} dξ` with `D = 1 − λ(1−α)`,
///   plus `u₀/D·e^{λαt/D}` for a non-zero initial value.
/// * Resonant: `u = −(1−α)f(t) − ((1−α)²/α) f′(t)` (with the `f(0)`, `u₀` terms when `u₀ ≠ 0`).
/// * `λ = 0`: `u = (1−α)f(t) + α ∫₀ᵗ f + u₀`.
///
/// `α = 1` is accepted and gives the classical `u′ = λu + f`.
pub fn solve_ivp(p: &IvProblem) -> Result<TimeFunction> {
    let regime = classify_regime(&p.params)?;
    let domain = p.domain()?;
    let alpha = p.params.alpha();
    let lambda = p.lambda();
    let u0 = p.u0;
    let f = Arc::clone(&p.f);
    let f0 = f.value(0.0);
    if !f0.is_finite() {
        return Err(Error::NonFinite("f(0)".into()));
    }

    if u0 == 0.0 {
        check_compat("f(0)=0", f0)?;
    } else {
        check_compat("f(0)=-lambda*u0", f0 + lambda * u0)?;
    }

    let tf = match regime {
        Regime::Resonant => {
            check_compat("f'(0)=0", domain.derivative_of(f.as_ref(), 0.0))?;
            let a = 1.0 - alpha;
            let b = a * a / alpha;
            if u0 == 0.0 {
                TimeFunction::new(regime, p.params, u0, move |t| {
                    -a * f.value(t) - b * domain.derivative_of(f.as_ref(), t)
                })
            } else {
                TimeFunction::new(regime, p.params, u0, move |t| {
                    -b * domain.derivative_of(f.as_ref(), t) - a * (f.value(t) - f0) + u0
                })
            }
        }
        Regime::LambdaZero => {
            let conv = KernelConvolution::new(&f, 0.0, &domain);
            TimeFunction::new(regime, p.params, u0, move |t| (1.0 - alpha) * f.value(t) + alpha * conv.plain(t) + u0)
        }
        Regime::Generic => {
            let d = 1.0 - lambda * (1.0 - alpha);
            let rate = lambda * alpha / d;
            let lead = (1.0 - alpha) / d;
            let tail = alpha / (d * d);
            let conv = KernelConvolution::new(&f, rate, &domain);
            if u0 == 0.0 {
                TimeFunction::new(regime, p.params, u0, move |t| lead * f.value(t) + tail * conv.plain(t))
            } else {
                TimeFunction::new(regime, p.params, u0, move |t| {
                    lead * f.value(t) + tail * conv.plain(t) + u0 / d * (rate * t).exp()
                })
            }
        }
    };
    Ok(tf)
}

/// Settings for [`volterra_oracle_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: PICARD_TOL, max_iter: PICARD_MAX_ITER }
    }
}

pub fn volterra_oracle(p: &IvProblem, n_steps: usize) -> Result<SampledFunction> {
    volterra_oracle_with(p, n_steps, PicardOptions::default())
}

/// Solves `u(t) − ∫₀ᵗ u(s) K(t−s) ds = F(t)` by successive approximation on a
/// uniform grid of `n_steps` points, never touching the closed forms.
///
/// Generic (and `λ = 0`): `K = α/((1−α)D)·e^{−σ(t−s)}`, `F = (1−α)/D·f`.
/// Resonant: `K = σ e^{−σ(t−s)}`, `F = −((1−α)²/α) f′`.
/// A non-zero `u₀` adds the `e^{−σt}` boundary term from integrating by parts.
pub fn volterra_oracle_with(p: &IvProblem, n_steps: usize, opts: PicardOptions) -> Result<SampledFunction> {
    if n_steps < 3 {
        return Err(Error::InvalidArgument(format!("the oracle needs at least 3 grid points, got {n_steps}")));
    }
    let regime = classify_regime(&p.params)?;
    let sigma = p.params.kernel_rate()?;
    let domain = p.domain()?;
    let alpha = p.params.alpha();
    let lambda = p.lambda();
    let u0 = p.u0;
    let h = p.horizon / (n_steps - 1) as f64;
    let knots: Vec<f64> = (0..n_steps).map(|i| if i == n_steps - 1 { p.horizon } else { h * i as f64 }).collect();

    let (kernel_scale, rhs): (f64, Vec<f64>) = match regime {
        Regime::Resonant => {
            let kappa = -(1.0 - alpha) * (1.0 - alpha) / alpha;
            let rhs = knots
                .iter()
                .map(|&t| {
                    let boundary = sigma * u0 * (-sigma * t).exp() / (1.0 - alpha);
                    kappa * (domain.derivative_of(p.f.as_ref(), t) - boundary)
                })
                .collect();
            (sigma, rhs)
        }
        Regime::Generic | Regime::LambdaZero => {
            let d = 1.0 - lambda * (1.0 - alpha);
            let rhs = knots.iter().map(|&t| ((1.0 - alpha) * p.f.value(t) + u0 * (-sigma * t).exp()) / d).collect();
            (alpha / ((1.0 - alpha) * d), rhs)
        }
    };
    if rhs.iter().any(|v: &f64| !v.is_finite()) {
        return Err(Error::NonFinite("Volterra right-hand side".into()));
    }

    // K depends on the lag only.
    let kernel: Vec<f64> = (0..n_steps).map(|lag| kernel_scale * (-sigma * h * lag as f64).exp()).collect();

    let mut u = rhs.clone();
    let mut next = vec![0.0; n_steps];
    let mut last_update = f64::INFINITY;
    for _ in 0..opts.max_iter {
        for i in 0..n_steps {
            next[i] = rhs[i] + grid_integral(i, h, |j| kernel[i - j] * u[j]);
        }
        let scale = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        last_update = next.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        std::mem::swap(&mut u, &mut next);
        if last_update < opts.tol * scale {
            return SampledFunction::new(knots, u);
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, last_update })
}

/// `∫₀^{t_i} φ` from grid values `φ(j)`, `j = 0..=i`: Simpson for even `i`,
/// Simpson plus a closing 3/8 panel for odd `i ≥ 3`, trapezoid for `i = 1`.
fn grid_integral(i: usize, h: f64, phi: impl Fn(usize) -> f64) -> f64 {
    match i {
        0 => 0.0,
        1 => 0.5 * h * (phi(0) + phi(1)),
        _ => {
            let (simpson_end, tail) = if i % 2 == 0 {
                (i, 0.0)
            } else {
                let a = i - 3;
                (a, 3.0 * h / 8.0 * (phi(a) + 3.0 * phi(a + 1) + 3.0 * phi(a + 2) + phi(i)))
            };
            let mut acc = 0.0;
            if simpson_end > 0 {
                acc = phi(0) + phi(simpson_end);
                for j in 1..simpson_end {
                    acc += if j % 2 == 1 { 4.0 } else { 2.0 } * phi(j);
                }
                acc *= h / 3.0;
            }
            acc + tail
        }
    }
}

fn generic_constants(params: &CfParams) -> Result<(f64, f64, f64)> {
    let regime = classify_regime(params)?;
    if regime == Regime::Resonant {
        return Err(Error::InvalidArgument("iterated kernels are defined off resonance only".into()));
    }
    let sigma = params.kernel_rate()?;
    let alpha = params.alpha();
    let lambda = require_lambda(params)?;
    let d = 1.0 - lambda * (1.0 - alpha);
    Ok((alpha / ((1.0 - alpha) * d), sigma, lambda * alpha / d))
}

fn check_lag(t: f64, xi: f64) -> Result<f64> {
    if xi > t || xi < 0.0 {
        return Err(Error::domain("xi", xi, 0.0, t));
    }
    Ok(t - xi)
}

/// `K_i(t, ξ) = cⁱ (t−ξ)^{i−1}/(i−1)! · e^{−(α/(1−α))(t−ξ)}`, `c = α/((1−α)(1−λ(1−α)))`.
pub fn iterated_kernel(i: usize, t: f64, xi: f64, params: &CfParams) -> Result<f64> {
    if i == 0 {
        return Err(Error::InvalidArgument("kernel index starts at 1".into()));
    }
    let lag = check_lag(t, xi)?;
    let (c, sigma, _) = generic_constants(params)?;
    let mut term = c;
    for j in 1..i {
        term *= c * lag / j as f64;
    }
    Ok(term * (-sigma * lag).exp())
}

/// `R(t, ξ) = c · e^{λα(t−ξ)/(1−λ(1−α))}`, the sum of all iterated kernels.
pub fn resolvent_kernel(t: f64, xi: f64, params: &CfParams) -> Result<f64> {
    let lag = check_lag(t, xi)?;
    let (c, _, rate) = generic_constants(params)?;
    Ok(c * (rate * lag).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{simpson, smooth_fn, time_fn, Constant};

    fn params(alpha: f64, lambda: f64) -> CfParams {
        CfParams::with_lambda(alpha, lambda).unwrap()
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&params(0.5, 2.0)).unwrap(), Regime::Resonant);
        assert_eq!(classify_regime(&params(0.5, 0.0)).unwrap(), Regime::LambdaZero);
        assert_eq!(classify_regime(&params(0.5, 1.0)).unwrap(), Regime::Generic);
        assert_eq!(classify_regime(&params(0.5, 2.0 + 1e-12)).unwrap(), Regime::Resonant);
        assert_eq!(classify_regime(&params(1.0, 5.0)).unwrap(), Regime::Generic);
        assert!(classify_regime(&CfParams::new(0.5).unwrap()).is_err());
    }

    #[test]
    fn lambda_zero_example() {
        let p = IvProblem::new(params(0.5, 0.0), time_fn(|t| t), 1.0).unwrap();
        let u = solve_ivp(&p).unwrap();
        assert_eq!(u.branch(), Regime::LambdaZero);
        assert!((u.eval(1.0) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn resonant_example() {
        let p = IvProblem::new(params(0.5, 2.0), smooth_fn(|t| t * t, |t| 2.0 * t), 1.0).unwrap();
        let u = solve_ivp(&p).unwrap();
        assert_eq!(u.branch(), Regime::Resonant);
        assert!((u.eval(1.0) + 1.5).abs() < 1e-14);
        // numeric f′ path
        let p = IvProblem::new(params(0.5, 2.0), time_fn(|t| t * t), 1.0).unwrap();
        assert!((solve_ivp(&p).unwrap().eval(1.0) + 1.5).abs() < 1e-8);
    }

    #[test]
    fn zero_forcing_gives_zero_in_every_regime() {
        for lambda in [2.0, 0.0, 1.0, -3.0] {
            let p = IvProblem::new(params(0.5, lambda), Arc::new(Constant(0.0)), 1.0).unwrap();
            let u = solve_ivp(&p).unwrap();
            for t in [0.0, 0.3, 1.0] {
                assert_eq!(u.eval(t), 0.0);
            }
        }
    }

    #[test]
    fn compatibility_failures_name_the_condition() {
        let p = IvProblem::new(params(0.5, 1.0), time_fn(|_| 1.0), 1.0).unwrap();
        match solve_ivp(&p) {
            Err(Error::Compatibility { condition, .. }) => assert_eq!(condition, "f(0)=0"),
            other => panic!("unexpected {other:?}"),
        }
        let p = IvProblem::new(params(0.5, 2.0), smooth_fn(|t| t, |_| 1.0), 1.0).unwrap();
        match solve_ivp(&p) {
            Err(Error::Compatibility { condition, .. }) => assert_eq!(condition, "f'(0)=0"),
            other => panic!("unexpected {other:?}"),
        }
        let p = IvProblem::new(params(0.5, 1.0), time_fn(|_| 0.0), 1.0).unwrap().with_initial_value(2.0);
        match solve_ivp(&p) {
            Err(Error::Compatibility { condition, .. }) => assert_eq!(condition, "f(0)=-lambda*u0"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn initial_value_is_reproduced() {
        let u0 = 0.7;
        for (lambda, deriv) in [(1.0, 0.0), (-2.0, 0.0), (0.0, 0.0), (4.0, 0.0)] {
            let c = -lambda * u0;
            let f = smooth_fn(move |t| c + t * t * deriv + t * t, move |t| 2.0 * t);
            let p = IvProblem::new(params(0.75, lambda), f, 1.0).unwrap().with_initial_value(u0);
            let u = solve_ivp(&p).unwrap();
            assert!((u.eval(0.0) - u0).abs() < 1e-10, "lambda={lambda}: {}", u.eval(0.0));
        }
    }

    #[test]
    fn classical_limit_alpha_one() {
        // u′ = λu + t, u(0) = 0 → u = (e^{λt} − 1 − λt)/λ²
        let p = IvProblem::new(params(1.0, 2.0), time_fn(|t| t), 1.0).unwrap();
        let u = solve_ivp(&p).unwrap();
        let exact = ((2.0f64).exp() - 1.0 - 2.0) / 4.0;
        assert!((u.eval(1.0) - exact).abs() < 1e-11);
    }

    #[test]
    fn oracle_on_zero_forcing_is_zero() {
        let p = IvProblem::new(params(0.5, 1.0), Arc::new(Constant(0.0)), 1.0).unwrap();
        let grid = volterra_oracle(&p, 64).unwrap();
        assert!(grid.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn oracle_reports_non_convergence() {
        let p = IvProblem::new(params(0.5, 1.0), time_fn(|t| t), 1.0).unwrap();
        let r = volterra_oracle_with(&p, 64, PicardOptions { tol: 1e-12, max_iter: 3 });
        assert!(matches!(r, Err(Error::NoConvergence { iterations: 3, .. })));
    }

    #[test]
    fn oracle_matches_generic_and_resonant_closed_forms() {
        for (lambda, f) in [(1.0, smooth_fn(|t| t, |_| 1.0)), (2.0, smooth_fn(|t| t * t, |t| 2.0 * t))] {
            let p = IvProblem::new(params(0.5, lambda), f, 1.0).unwrap();
            let closed = solve_ivp(&p).unwrap();
            let grid = volterra_oracle(&p, 2048).unwrap();
            let dev =
                grid.knots().iter().zip(grid.values()).fold(0.0f64, |m, (&t, &v)| m.max((closed.eval(t) - v).abs()));
            assert!(dev < 1e-6, "lambda={lambda}: {dev}");
        }
    }

    #[test]
    fn grid_integral_is_fourth_order_for_all_parities() {
        let h = 0.01;
        for i in 2..12 {
            let exact = ((i as f64) * h).powi(4) / 4.0;
            let v = grid_integral(i, h, |j| (j as f64 * h).powi(3));
            assert!((v - exact).abs() < 1e-15, "i={i}");
        }
    }

    #[test]
    fn iterated_kernel_examples() {
        let p = params(0.5, 1.0);
        let k1 = iterated_kernel(1, 0.8, 0.3, &p).unwrap();
        assert!((k1 - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(iterated_kernel(2, 0.4, 0.4, &p).unwrap(), 0.0);
        let k3 = iterated_kernel(3, 1.5, 0.5, &p).unwrap();
        assert!((k3 - 4.0 * (-1.0f64).exp()).abs() < 1e-14);
        assert!(matches!(iterated_kernel(1, 0.2, 0.5, &p), Err(Error::Domain { .. })));
        assert!(iterated_kernel(1, 0.5, 0.2, &params(0.5, 2.0)).is_err());
    }

    #[test]
    fn third_kernel_matches_nested_convolution() {
        // K_3(t, ξ) = ∫_ξ^t K(t, s) K_2(s, ξ) ds
        let p = params(0.5, 1.0);
        let (t, xi) = (1.5, 0.5);
        let nested =
            simpson(|s| iterated_kernel(1, t, s, &p).unwrap() * iterated_kernel(2, s, xi, &p).unwrap(), xi, t, 400);
        assert!((nested - 4.0 * (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn resolvent_examples() {
        let p = params(0.5, 1.0);
        assert!((resolvent_kernel(0.3, 0.3, &p).unwrap() - 2.0).abs() < 1e-15);
        assert!((resolvent_kernel(1.0, 0.0, &p).unwrap() - 2.0 * 1f64.exp()).abs() < 1e-14);
        assert!((resolvent_kernel(1.0, 0.0, &params(0.5, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    }
}
