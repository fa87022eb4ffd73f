//! Exact exponential convolutions of piecewise-linear functions.
//!
//! For a piecewise-linear `g` these evaluate
//!
//! ```text
//! J(t) = ∫₀ᵗ g(ξ) e^{r(t−ξ)} dξ        M(t) = ∫₀ᵗ g(ξ) (t−ξ) e^{r(t−ξ)} dξ
//! ```
//!
//! in O(log n) after an O(n) setup, using the recurrences across knots.

use super::signal::{SampledFunction, TimeForcing};

/// `[E0, E1, E2]` with `E_m = ∫₀^δ τ^m e^{rτ} dτ`.
pub(crate) fn exp_moments(rate: f64, delta: f64) -> [f64; 3] {
    let z = rate * delta;
    let phi = phi_moments(z);
    [delta * phi[0], delta * delta * phi[1], delta * delta * delta * phi[2]]
}

/// `φ_m(z) = ∫₀¹ u^m e^{zu} du` for `m = 0, 1, 2`.
fn phi_moments(z: f64) -> [f64; 3] {
    if z.abs() <= 0.5 {
        // Σ zⁿ / (n! (n + m + 1))
        let mut out = [0.0; 3];
        let mut term = 1.0;
        for n in 0..40 {
            let nf = n as f64;
            out[0] += term / (nf + 1.0);
            out[1] += term / (nf + 2.0);
            out[2] += term / (nf + 3.0);
            term *= z / (nf + 1.0);
            if term.abs() < 1e-20 {
                break;
            }
        }
        out
    } else {
        let ez = z.exp();
        let p0 = z.exp_m1() / z;
        let p1 = (ez - p0) / z;
        let p2 = (ez - 2.0 * p1) / z;
        [p0, p1, p2]
    }
}

/// Cumulative tables of `J` and `M` at the knots of a [`SampledFunction`].
#[derive(Clone, Debug)]
pub struct ExpConvolution {
    rate: f64,
    g: SampledFunction,
    j: Vec<f64>,
    m: Vec<f64>,
}

impl ExpConvolution {
    pub fn new(g: &SampledFunction, rate: f64) -> Self {
        let knots = g.knots();
        let mut j = Vec::with_capacity(knots.len());
        let mut m = Vec::with_capacity(knots.len());
        j.push(0.0);
        m.push(0.0);
        for seg in 0..knots.len() - 1 {
            let delta = knots[seg + 1] - knots[seg];
            let (jn, mn) = step(rate, delta, j[seg], m[seg], g.values()[seg + 1], g.slope(seg));
            j.push(jn);
            m.push(mn);
        }
        Self { rate, g: g.clone(), j, m }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `(J(t), M(t))`; `t` beyond the last knot extrapolates the last segment.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0);
        }
        let seg = self.g.segment(t);
        let delta = t - self.g.knots()[seg];
        step(self.rate, delta, self.j[seg], self.m[seg], self.g.value(t), self.g.slope(seg))
    }

    pub fn j(&self, t: f64) -> f64 {
        self.eval(t).0
    }
}

/// Advances `(J, M)` from a knot by `delta`, where `g_end` is `g` at the new
/// point and `slope` the slope of `g` across the step.
fn step(rate: f64, delta: f64, j0: f64, m0: f64, g_end: f64, slope: f64) -> (f64, f64) {
    let [e0, e1, e2] = exp_moments(rate, delta);
    let decay = (rate * delta).exp();
    let j = decay * j0 + g_end * e0 - slope * e1;
    let m = decay * (delta * j0 + m0) + g_end * e1 - slope * e2;
    (j, m)
}

/// Exact `(1/(1−α)) ∫₀ᵗ g′(s) e^{−σ(t−s)} ds` for piecewise-linear `g`
/// (or piecewise-linear `g′` when derivative values are attached).
pub(crate) fn sampled_cf_derivative(g: &SampledFunction, sigma: f64, one_minus_alpha: f64, t: f64) -> f64 {
    let knots = g.knots();
    let mut acc = 0.0;
    for seg in 0..knots.len() - 1 {
        let a = knots[seg];
        if a >= t {
            break;
        }
        let b = knots[seg + 1].min(t);
        let len = b - a;
        let (d_end, q) = match g.derivative_values() {
            Some(d) => {
                let q = (d[seg + 1] - d[seg]) / (knots[seg + 1] - knots[seg]);
                (d[seg] + q * len, q)
            }
            None => (g.slope(seg), 0.0),
        };
        let [e0, e1, _] = exp_moments(-sigma, len);
        acc += (-sigma * (t - b)).exp() * (d_end * e0 - q * e1);
    }
    acc / one_minus_alpha
}

/// Exact `∫₀ᵗ g` for piecewise-linear `g`.
pub(crate) fn sampled_integral(g: &SampledFunction, t: f64) -> f64 {
    let knots = g.knots();
    let mut acc = 0.0;
    for seg in 0..knots.len() - 1 {
        let a = knots[seg];
        if a >= t {
            break;
        }
        let b = knots[seg + 1].min(t);
        acc += 0.5 * (b - a) * (g.values()[seg] + g.value(b));
    }
    acc
}
