//! Series solutions of `D^α u − u_xx = g(x, t)` on `(0, 1) × (0, T]`, `u(x, 0) = 0`,
//! under four kinds of boundary conditions:
//!
//! | kind | conditions                              | basis                      |
//! |------|-----------------------------------------|----------------------------|
//! | P1   | `u(0,t) = u(1,t) = 0`                   | `sin kπx`                  |
//! | P2   | `u_x(0,t) = u_x(1,t) = 0`               | `cos nπx`                  |
//! | P3   | `u(0,t) = u(1,t)`, `u_x(0,t) = u_x(1,t)`| `1, cos 2nπx, sin 2nπx`    |
//! | P4   | `u(0,t) = u(1,t)`, `u_x(0,t) = 0`       | `1, cos 2kπx, x sin 2kπx`  |
//!
//! Each mode solves a scalar IVP `D^α u_k + μ u_k = g_k`. In P4 the
//! associate function couples the cosine amplitude to the `x sin` one:
//! `D^α u_{1k} + λ² u_{1k} = g_{1k} + 2λ u_{2k}`, `λ = 2kπ`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bases::{eigenvalue, BasisFamily, ModeIndex, Projector, Slot, SpatialQuadrature, N_QUAD_X};
use crate::error::{Error, Result};
use crate::ivp::{solve_ivp, IvProblem, Regime, TimeFunction, COMPAT_TOL};
use crate::operators::{
    uniform_knots, CfParams, Forcing, KernelConvolution, Quadrature, SampledFunction, TimeDomain, TimeForcing,
};
use crate::verify::check_hypotheses;

/// Default number of modes (highest wavenumber).
pub const DEFAULT_MODES: u32 = 32;
/// Default number of cache times for the modal forcings.
pub const N_T_CACHE: usize = 513;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ProblemKind {
    P1Dirichlet,
    P2Neumann,
    P3Periodic,
    P4NonLocal,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] =
        [ProblemKind::P1Dirichlet, ProblemKind::P2Neumann, ProblemKind::P3Periodic, ProblemKind::P4NonLocal];

    pub fn from_number(n: u32) -> Option<Self> {
        Self::ALL.get((n as usize).checked_sub(1)?).copied()
    }

    pub fn number(&self) -> u32 {
        match self {
            ProblemKind::P1Dirichlet => 1,
            ProblemKind::P2Neumann => 2,
            ProblemKind::P3Periodic => 3,
            ProblemKind::P4NonLocal => 4,
        }
    }

    pub fn family(&self) -> BasisFamily {
        match self {
            ProblemKind::P1Dirichlet => BasisFamily::DirichletSine,
            ProblemKind::P2Neumann => BasisFamily::NeumannCosine,
            ProblemKind::P3Periodic => BasisFamily::PeriodicFourier,
            ProblemKind::P4NonLocal => BasisFamily::RootSystemX,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.number())
    }
}

#[derive(Clone)]
pub struct BvProblem {
    pub kind: ProblemKind,
    pub alpha: f64,
    pub g: Arc<dyn Forcing>,
    pub horizon: f64,
    pub n_modes: u32,
}

impl BvProblem {
    pub fn new(kind: ProblemKind, alpha: f64, g: Arc<dyn Forcing>, horizon: f64, n_modes: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha { alpha });
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
        }
        Ok(Self { kind, alpha, g, horizon, n_modes })
    }
}

impl fmt::Debug for BvProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BvProblem")
            .field("kind", &self.kind)
            .field("alpha", &self.alpha)
            .field("horizon", &self.horizon)
            .field("n_modes", &self.n_modes)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub time: Quadrature,
    /// Simpson panels for the spatial inner products.
    pub n_quad_x: usize,
    /// Uniform cache times for each modal forcing, linearly interpolated in between.
    pub n_t_cache: usize,
    /// Refuse data that violates the existence hypotheses.
    pub check_hypotheses: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { time: Quadrature::default(), n_quad_x: N_QUAD_X, n_t_cache: N_T_CACHE, check_hypotheses: true }
    }
}

fn rename_compat(e: Error, name: &str) -> Error {
    match e {
        Error::Compatibility { measured, tol, .. } => {
            Error::Compatibility { condition: name.to_string(), measured, tol }
        }
        other => other,
    }
}

fn check_modal_start(g: &dyn TimeForcing, name: &str) -> Result<()> {
    let v = g.value(0.0);
    if v.abs() < COMPAT_TOL {
        Ok(())
    } else {
        Err(Error::Compatibility { condition: name.to_string(), measured: v, tol: COMPAT_TOL })
    }
}

/// `D^α u + μu = g_k`, `u(0) = 0`:
///
/// ```text
/// u(t) = (1−α)/D·g_k(t) + α/D² ∫₀ᵗ g_k(ξ) e^{−αμ(t−ξ)/D} dξ,   D = 1 + μ(1−α)
/// ```
///
/// `μ = 0` gives `(1−α)g_k + α∫g_k`. Since `λ = −μ ≤ 0` the resonant form never applies.
pub fn solve_modal_selfadjoint(
    gk: Arc<dyn TimeForcing>,
    mu: f64,
    alpha: f64,
    domain: &TimeDomain,
) -> Result<TimeFunction> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::domain("mu", mu, 0.0, f64::INFINITY));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha { alpha });
    }
    check_modal_start(gk.as_ref(), "g_k(0)=0")?;
    let params = CfParams::with_lambda(alpha, -mu)?;
    let p = IvProblem::new(params, gk, domain.horizon())?.with_quadrature(domain.quadrature());
    solve_ivp(&p).map_err(|e| rename_compat(e, "g_k(0)=0"))
}

/// Cosine and associate amplitudes `(u_{1k}, u_{2k})` of the non-local problem.
///
/// `u_{2k}` is the self-adjoint solution for `g_{2k}` with `μ = λ²`, `λ = 2kπ`.
/// Substituting it into the `u_{1k}` equation and swapping the order of integration:
///
/// ```text
/// u_{1k} = (1−α)/D [g_{1k} + 2λ(1−α)/D g_{2k}]
///        + α/D² ∫₀ᵗ [g_{1k} + 4λ(1−α)/D g_{2k} + 2λα/D² g_{2k}·(t−z)] e^{r(t−z)} dz
/// ```
///
/// with `D = 1 + λ²(1−α)`, `r = −αλ²/D`.
pub fn solve_modal_coupled(
    g1k: Arc<dyn TimeForcing>,
    g2k: Arc<dyn TimeForcing>,
    k: u32,
    alpha: f64,
    domain: &TimeDomain,
) -> Result<(TimeFunction, TimeFunction)> {
    if k == 0 {
        return Err(Error::InvalidArgument("coupled modes start at k = 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha { alpha });
    }
    check_modal_start(g1k.as_ref(), "g_1k(0)=0")?;
    check_modal_start(g2k.as_ref(), "g_2k(0)=0")?;
    let lam = 2.0 * k as f64 * std::f64::consts::PI;
    let mu = lam * lam;
    let u2 = solve_modal_selfadjoint(Arc::clone(&g2k), mu, alpha, domain).map_err(|e| rename_compat(e, "g_2k(0)=0"))?;
    let u1_plain =
        solve_modal_selfadjoint(Arc::clone(&g1k), mu, alpha, domain).map_err(|e| rename_compat(e, "g_1k(0)=0"))?;
    if g2k.is_constant() && g2k.value(0.0) == 0.0 {
        return Ok((u1_plain, u2));
    }

    // same expressions as the generic IVP form with λ_ivp = −μ, so the g₂ ≡ 0 case agrees bit for bit
    let lambda = -mu;
    let d = 1.0 - lambda * (1.0 - alpha);
    let rate = lambda * alpha / d;
    let lead = (1.0 - alpha) / d;
    let tail = alpha / (d * d);
    let a = 2.0 * lam * (1.0 - alpha) / d;
    let b = 4.0 * lam * (1.0 - alpha) / d;
    let c = 2.0 * lam * alpha / (d * d);
    let conv1 = KernelConvolution::new(&g1k, rate, domain);
    let conv2 = KernelConvolution::new(&g2k, rate, domain);
    let params = *u1_plain.params();
    let u1 = TimeFunction::new(Regime::Generic, params, 0.0, move |t| {
        let (j2, m2) = conv2.with_moment(t);
        lead * (g1k.value(t) + a * g2k.value(t)) + tail * (conv1.plain(t) + b * j2 + c * m2)
    });
    Ok((u1, u2))
}

/// A truncated series `u(x, t) = Σ u_m(t) X_m(x)` over the canonical modes of a family.
#[derive(Clone)]
pub struct SeriesSolution {
    kind: ProblemKind,
    alpha: f64,
    horizon: f64,
    n_modes: u32,
    modes: Vec<ModeIndex>,
    modal: Vec<TimeFunction>,
}

impl fmt::Debug for SeriesSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesSolution")
            .field("kind", &self.kind)
            .field("alpha", &self.alpha)
            .field("horizon", &self.horizon)
            .field("n_modes", &self.n_modes)
            .finish_non_exhaustive()
    }
}

impl SeriesSolution {
    /// Identically zero solution over the modes of `kind` up to `n_modes`.
    pub fn zero(kind: ProblemKind, alpha: f64, horizon: f64, n_modes: u32) -> Result<Self> {
        let params = CfParams::new(alpha)?;
        let modes = kind.family().modes(n_modes);
        let modal = modes.iter().map(|_| TimeFunction::zero(Regime::Generic, params)).collect();
        Ok(Self { kind, alpha, horizon, n_modes, modes, modal })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn family(&self) -> BasisFamily {
        self.kind.family()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_modes(&self) -> u32 {
        self.n_modes
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn modal(&self) -> &[TimeFunction] {
        &self.modal
    }

    pub fn mode(&self, m: &ModeIndex) -> Option<&TimeFunction> {
        self.modes.iter().position(|x| x == m).map(|i| &self.modal[i])
    }

    /// Copy with one amplitude swapped out; used to build deliberately wrong solutions.
    pub fn replace_mode(&self, m: &ModeIndex, u: TimeFunction) -> Result<Self> {
        let i = self
            .modes
            .iter()
            .position(|x| x == m)
            .ok_or_else(|| Error::InvalidArgument(format!("{m} is not part of this solution")))?;
        let mut out = self.clone();
        out.modal[i] = u;
        Ok(out)
    }

    fn check(&self, x: f64, t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain("x", x, 0.0, 1.0));
        }
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::domain("t", t, 0.0, self.horizon));
        }
        Ok(())
    }

    /// `[u_m(t)]` in canonical order.
    pub fn modal_values(&self, t: f64) -> Vec<f64> {
        self.modal.iter().map(|u| u.eval(t)).collect()
    }

    /// `[X_m(x)]` in canonical order.
    pub fn basis_row(&self, x: f64) -> Vec<f64> {
        self.modes.iter().map(|m| m.value(x)).collect()
    }

    pub fn basis_row_d1(&self, x: f64) -> Vec<f64> {
        self.modes.iter().map(|m| m.d1(x)).collect()
    }

    pub fn basis_row_d2(&self, x: f64) -> Vec<f64> {
        self.modes.iter().map(|m| m.d2(x)).collect()
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        self.check(x, t)?;
        Ok(dot(&self.basis_row(x), &self.modal_values(t)))
    }

    pub fn ux(&self, x: f64, t: f64) -> Result<f64> {
        self.check(x, t)?;
        Ok(dot(&self.basis_row_d1(x), &self.modal_values(t)))
    }

    /// Term-wise `u_xx`: `Σ −μ_m u_m X_m`, plus `2λ u_{2k} cos λx` from each associate function.
    pub fn uxx(&self, x: f64, t: f64) -> Result<f64> {
        self.check(x, t)?;
        Ok(dot(&self.basis_row_d2(x), &self.modal_values(t)))
    }

    /// Values on a grid, rows indexed by `t`, columns by `x`.
    pub fn grid(&self, xs: &[f64], ts: &[f64]) -> Result<Vec<Vec<f64>>> {
        for &x in xs {
            self.check(x, 0.0)?;
        }
        for &t in ts {
            self.check(0.0, t)?;
        }
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| self.basis_row(x)).collect();
        Ok(ts
            .par_iter()
            .map(|&t| {
                let amps = self.modal_values(t);
                rows.iter().map(|r| dot(r, &amps)).collect()
            })
            .collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn eval_solution(s: &SeriesSolution, x: f64, t: f64) -> Result<f64> {
    s.eval(x, t)
}

pub fn uxx_series(s: &SeriesSolution, x: f64, t: f64) -> Result<f64> {
    s.uxx(x, t)
}

/// Modal forcings of `g` sampled at `n_t_cache` uniform times, one [`SampledFunction`] per mode.
pub fn modal_forcings(p: &BvProblem, config: &SolverConfig) -> Result<Vec<SampledFunction>> {
    if config.n_t_cache < 2 {
        return Err(Error::InvalidArgument("n_t_cache must be at least 2".into()));
    }
    let modes = p.kind.family().modes(p.n_modes);
    let projector = Projector::new(modes, &SpatialQuadrature::new(config.n_quad_x));
    let knots = uniform_knots(p.horizon, config.n_t_cache - 1);
    let columns: Vec<Vec<f64>> = knots.par_iter().map(|&t| projector.project(p.g.as_ref(), t)).collect();
    (0..projector.modes().len())
        .map(|m| {
            let values = columns.iter().map(|c| c[m]).collect();
            SampledFunction::new(knots.clone(), values)
        })
        .collect()
}

/// Series solution with the default [`SolverConfig`].
pub fn solve_bvp(p: &BvProblem) -> Result<SeriesSolution> {
    solve_bvp_with(p, &SolverConfig::default())
}

pub fn solve_bvp_with(p: &BvProblem, config: &SolverConfig) -> Result<SeriesSolution> {
    if config.check_hypotheses {
        let report = check_hypotheses(p);
        let failed = report.failures();
        if !failed.is_empty() {
            return Err(Error::HypothesisViolation(failed));
        }
    }
    let domain = TimeDomain::new(p.horizon, config.time)?;
    let modes = p.kind.family().modes(p.n_modes);
    let forcings: Vec<Arc<dyn TimeForcing>> =
        modal_forcings(p, config)?.into_iter().map(|s| Arc::new(s) as Arc<dyn TimeForcing>).collect();

    let modal: Vec<TimeFunction> = if p.kind == ProblemKind::P4NonLocal {
        // [u0, (u_1k, u_2k) for k = 1..]
        let mut out = vec![solve_modal_selfadjoint(Arc::clone(&forcings[0]), 0.0, p.alpha, &domain)?];
        let pairs: Result<Vec<(TimeFunction, TimeFunction)>> = (1..=p.n_modes)
            .into_par_iter()
            .map(|k| {
                let i = 2 * k as usize - 1;
                debug_assert_eq!(modes[i].slot, Slot::Cos);
                solve_modal_coupled(Arc::clone(&forcings[i]), Arc::clone(&forcings[i + 1]), k, p.alpha, &domain)
            })
            .collect();
        for (u1, u2) in pairs? {
            out.push(u1);
            out.push(u2);
        }
        out
    } else {
        modes
            .par_iter()
            .zip(forcings.par_iter())
            .map(|(m, g)| solve_modal_selfadjoint(Arc::clone(g), eigenvalue(m), p.alpha, &domain))
            .collect::<Result<_>>()?
    };

    Ok(SeriesSolution { kind: p.kind, alpha: p.alpha, horizon: p.horizon, n_modes: p.n_modes, modes, modal })
}
