//! Eigen- and root-function systems on `[0, 1]`.
//!
//! Three self-adjoint families (sine, cosine, periodic Fourier) and the
//! bi-orthogonal pair for the non-local condition `X(0) = X(1), X′(0) = 0`:
//!
//! ```text
//! X: 1,        cos 2kπx,            x sin 2kπx
//! Y: 2(1−x),   4(1−x) cos 2kπx,     4 sin 2kπx
//! ```
//!
//! Coefficients follow the raw inner products `∫ g·w`; the self-adjoint
//! families need the usual factor 2 on non-constant modes to synthesize back
//! (see [`synthesis_factor`]). The root system's dual weights are already
//! normalized.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{simpson_nodes, Forcing};

/// Default Simpson panel count for spatial inner products.
pub const N_QUAD_X: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BasisFamily {
    /// `sin kπx`, `k ≥ 1`.
    DirichletSine,
    /// `cos nπx`, `n ≥ 0`.
    NeumannCosine,
    /// `1, cos 2kπx, sin 2kπx`.
    PeriodicFourier,
    /// `1, cos 2kπx, x sin 2kπx`.
    RootSystemX,
    /// `2(1−x), 4(1−x) cos 2kπx, 4 sin 2kπx`.
    AdjointSystemY,
}

impl BasisFamily {
    pub const ALL: [BasisFamily; 5] = [
        BasisFamily::DirichletSine,
        BasisFamily::NeumannCosine,
        BasisFamily::PeriodicFourier,
        BasisFamily::RootSystemX,
        BasisFamily::AdjointSystemY,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BasisFamily::DirichletSine => "sine",
            BasisFamily::NeumannCosine => "cosine",
            BasisFamily::PeriodicFourier => "periodic",
            BasisFamily::RootSystemX => "rootsystem",
            BasisFamily::AdjointSystemY => "adjoint",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// The family whose members serve as analysis weights.
    pub fn dual(&self) -> BasisFamily {
        match self {
            BasisFamily::RootSystemX => BasisFamily::AdjointSystemY,
            BasisFamily::AdjointSystemY => BasisFamily::RootSystemX,
            other => *other,
        }
    }

    /// Modes up to wavenumber `k_max` in canonical order:
    /// `[0-mode,] (first, second) for k = 1..=k_max`.
    pub fn modes(&self, k_max: u32) -> Vec<ModeIndex> {
        let mut out = Vec::new();
        let mk = |slot, k| ModeIndex { family: *self, slot, k };
        match self {
            BasisFamily::DirichletSine => out.extend((1..=k_max).map(|k| mk(Slot::Sin, k))),
            BasisFamily::NeumannCosine => {
                out.push(mk(Slot::Primary0, 0));
                out.extend((1..=k_max).map(|k| mk(Slot::Cos, k)));
            }
            BasisFamily::PeriodicFourier | BasisFamily::AdjointSystemY => {
                out.push(mk(Slot::Primary0, 0));
                for k in 1..=k_max {
                    out.push(mk(Slot::Cos, k));
                    out.push(mk(Slot::Sin, k));
                }
            }
            BasisFamily::RootSystemX => {
                out.push(mk(Slot::Primary0, 0));
                for k in 1..=k_max {
                    out.push(mk(Slot::Cos, k));
                    out.push(mk(Slot::AssocXSin, k));
                }
            }
        }
        out
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Slot {
    Primary0,
    Cos,
    Sin,
    AssocXSin,
}

/// Address of one member of a [`BasisFamily`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ModeIndex {
    pub family: BasisFamily,
    pub slot: Slot,
    pub k: u32,
}

impl ModeIndex {
    pub fn new(family: BasisFamily, slot: Slot, k: u32) -> Result<Self> {
        use BasisFamily::*;
        let legal = match slot {
            Slot::Primary0 => k == 0 && !matches!(family, DirichletSine),
            Slot::Cos => k >= 1 && !matches!(family, DirichletSine),
            Slot::Sin => k >= 1 && matches!(family, DirichletSine | PeriodicFourier | AdjointSystemY),
            Slot::AssocXSin => k >= 1 && family == RootSystemX,
        };
        if legal {
            Ok(Self { family, slot, k })
        } else {
            Err(Error::InvalidArgument(format!("{slot:?} with k = {k} is not a member of the {family} family")))
        }
    }

    /// Angular frequency `kπ` (sine/cosine) or `2kπ` (periodic, root systems).
    pub fn frequency(&self) -> f64 {
        match self.family {
            BasisFamily::DirichletSine | BasisFamily::NeumannCosine => self.k as f64 * PI,
            _ => 2.0 * self.k as f64 * PI,
        }
    }

    /// Short label such as `sin1`, `cos2`, `xsin3`, `one`.
    pub fn label(&self) -> String {
        match self.slot {
            Slot::Primary0 => "0".to_string(),
            Slot::Cos => format!("cos{}", self.k),
            Slot::Sin => format!("sin{}", self.k),
            Slot::AssocXSin => format!("xsin{}", self.k),
        }
    }

    /// The weight function whose inner product with `g` gives this mode's coefficient.
    pub fn analysis_weight(&self) -> ModeIndex {
        let family = self.family.dual();
        let slot = match (self.family, self.slot) {
            (BasisFamily::RootSystemX, Slot::AssocXSin) => Slot::Sin,
            (BasisFamily::AdjointSystemY, Slot::Sin) => Slot::AssocXSin,
            (_, s) => s,
        };
        ModeIndex { family, slot, k: self.k }
    }

    /// Pointwise value, without range checks.
    pub fn value(&self, x: f64) -> f64 {
        let w = self.frequency();
        match (self.family, self.slot) {
            (BasisFamily::AdjointSystemY, Slot::Primary0) => 2.0 * (1.0 - x),
            (BasisFamily::AdjointSystemY, Slot::Cos) => 4.0 * (1.0 - x) * (w * x).cos(),
            (BasisFamily::AdjointSystemY, Slot::Sin) => 4.0 * (w * x).sin(),
            (_, Slot::Primary0) => 1.0,
            (_, Slot::Cos) => (w * x).cos(),
            (_, Slot::Sin) => (w * x).sin(),
            (_, Slot::AssocXSin) => x * (w * x).sin(),
        }
    }

    /// First derivative in `x`.
    pub fn d1(&self, x: f64) -> f64 {
        let w = self.frequency();
        let (s, c) = (w * x).sin_cos();
        match (self.family, self.slot) {
            (BasisFamily::AdjointSystemY, Slot::Primary0) => -2.0,
            (BasisFamily::AdjointSystemY, Slot::Cos) => -4.0 * c - 4.0 * (1.0 - x) * w * s,
            (BasisFamily::AdjointSystemY, Slot::Sin) => 4.0 * w * c,
            (_, Slot::Primary0) => 0.0,
            (_, Slot::Cos) => -w * s,
            (_, Slot::Sin) => w * c,
            (_, Slot::AssocXSin) => s + w * x * c,
        }
    }

    /// Second derivative in `x`; for the associate function
    /// `(x sin ωx)″ = 2ω cos ωx − ω² x sin ωx`.
    pub fn d2(&self, x: f64) -> f64 {
        let w = self.frequency();
        let (s, c) = (w * x).sin_cos();
        match (self.family, self.slot) {
            (BasisFamily::AdjointSystemY, Slot::Primary0) => 0.0,
            (BasisFamily::AdjointSystemY, Slot::Cos) => 8.0 * w * s - 4.0 * (1.0 - x) * w * w * c,
            (BasisFamily::AdjointSystemY, Slot::Sin) => -4.0 * w * w * s,
            (_, Slot::Primary0) => 0.0,
            (_, Slot::Cos) => -w * w * c,
            (_, Slot::Sin) => -w * w * s,
            (_, Slot::AssocXSin) => 2.0 * w * c - w * w * x * s,
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.label())
    }
}

fn check_x(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain("x", x, 0.0, 1.0))
    }
}

pub fn eval_basis(m: &ModeIndex, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(m.value(x))
}

/// Positive eigenvalue `μ` entering the modal equation `D^α u + μ u = g`.
pub fn eigenvalue(m: &ModeIndex) -> f64 {
    let w = m.frequency();
    w * w
}

/// Factor turning a raw coefficient into the synthesis coefficient.
pub fn synthesis_factor(m: &ModeIndex) -> f64 {
    match (m.family, m.slot) {
        (BasisFamily::RootSystemX | BasisFamily::AdjointSystemY, _) => 1.0,
        (_, Slot::Primary0) => 1.0,
        _ => 2.0,
    }
}

/// Precomputed Simpson nodes and weights for spatial inner products.
#[derive(Clone, Debug)]
pub struct SpatialQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SpatialQuadrature {
    pub fn new(panels: usize) -> Self {
        let (nodes, weights) = simpson_nodes(0.0, 1.0, panels);
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

impl Default for SpatialQuadrature {
    fn default() -> Self {
        Self::new(N_QUAD_X)
    }
}

/// Raw coefficient `∫₀¹ g(x, t) w_m(x) dx` with `w_m` the analysis weight of `m`.
pub fn coefficient(g: &dyn Forcing, m: &ModeIndex, t: f64, quad: &SpatialQuadrature) -> f64 {
    let w = m.analysis_weight();
    quad.integrate(|x| g.value(x, t) * w.value(x))
}

/// Expansion of a forcing into a fixed list of modes, sharing the samples of
/// `g(·, t)` across all of them.
#[derive(Clone, Debug)]
pub struct Projector {
    modes: Vec<ModeIndex>,
    nodes: Vec<f64>,
    /// `table[m][i] = synthesis_factor(m) · weight_i · w_m(x_i)`
    table: Vec<Vec<f64>>,
}

impl Projector {
    pub fn new(modes: Vec<ModeIndex>, quad: &SpatialQuadrature) -> Self {
        let table = modes
            .iter()
            .map(|m| {
                let w = m.analysis_weight();
                let f = synthesis_factor(m);
                quad.nodes.iter().zip(&quad.weights).map(|(&x, &q)| f * q * w.value(x)).collect()
            })
            .collect();
        Self { modes, nodes: quad.nodes.clone(), table }
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    /// Synthesis coefficients of `g(·, t)` for every mode.
    pub fn project(&self, g: &dyn Forcing, t: f64) -> Vec<f64> {
        let samples: Vec<f64> = self.nodes.iter().map(|&x| g.value(x, t)).collect();
        self.table.iter().map(|row| row.iter().zip(&samples).map(|(a, b)| a * b).sum()).collect()
    }
}

/// `⟨X_i, w_j⟩` over the modes of `family` up to `k_max`, with `w_j` the
/// (synthesis-scaled) analysis weights. Identity for every family.
pub fn pairing_matrix(family: BasisFamily, k_max: u32, quad: &SpatialQuadrature) -> Vec<Vec<f64>> {
    let modes = family.modes(k_max);
    modes
        .iter()
        .map(|xi| {
            modes
                .iter()
                .map(|mj| {
                    let w = mj.analysis_weight();
                    synthesis_factor(mj) * quad.integrate(|x| xi.value(x) * w.value(x))
                })
                .collect()
        })
        .collect()
}

/// `⟨X_i, Y_j⟩` for the root system and its adjoint, `(2k_max+1)²`, canonical order.
pub fn biorthogonality_matrix(k_max: u32) -> Result<Vec<Vec<f64>>> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    Ok(pairing_matrix(BasisFamily::RootSystemX, k_max, &SpatialQuadrature::default()))
}

/// `max |M − I|`.
pub fn max_off_identity(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (v - if i == j { 1.0 } else { 0.0 }).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::field_fn;

    fn mode(family: BasisFamily, slot: Slot, k: u32) -> ModeIndex {
        ModeIndex::new(family, slot, k).unwrap()
    }

    #[test]
    fn basis_examples() {
        let m = mode(BasisFamily::DirichletSine, Slot::Sin, 1);
        assert!((eval_basis(&m, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let m = mode(BasisFamily::RootSystemX, Slot::AssocXSin, 1);
        assert!((eval_basis(&m, 0.25).unwrap() - 0.25).abs() < 1e-15);
        let m = mode(BasisFamily::AdjointSystemY, Slot::Primary0, 0);
        assert_eq!(eval_basis(&m, 0.0).unwrap(), 2.0);
        assert!(matches!(eval_basis(&m, 1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn illegal_modes_are_rejected() {
        assert!(ModeIndex::new(BasisFamily::DirichletSine, Slot::Primary0, 0).is_err());
        assert!(ModeIndex::new(BasisFamily::DirichletSine, Slot::Sin, 0).is_err());
        assert!(ModeIndex::new(BasisFamily::NeumannCosine, Slot::Primary0, 1).is_err());
        assert!(ModeIndex::new(BasisFamily::RootSystemX, Slot::Sin, 1).is_err());
        assert!(ModeIndex::new(BasisFamily::PeriodicFourier, Slot::AssocXSin, 1).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        assert!((eigenvalue(&mode(BasisFamily::DirichletSine, Slot::Sin, 1)) - PI * PI).abs() < 1e-14);
        assert_eq!(eigenvalue(&mode(BasisFamily::NeumannCosine, Slot::Primary0, 0)), 0.0);
        let m = mode(BasisFamily::RootSystemX, Slot::Cos, 2);
        assert!((eigenvalue(&m) - 16.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn coefficient_examples() {
        let q = SpatialQuadrature::default();
        let g = field_fn(|x, _| (PI * x).sin());
        let c = coefficient(g.as_ref(), &mode(BasisFamily::DirichletSine, Slot::Sin, 1), 0.7, &q);
        assert!((c - 0.5).abs() < 1e-14);
        let one = field_fn(|_, _| 1.0);
        let c = coefficient(one.as_ref(), &mode(BasisFamily::RootSystemX, Slot::Primary0, 0), 0.0, &q);
        assert!((c - 1.0).abs() < 1e-14);
        let zero = field_fn(|_, _| 0.0);
        for m in BasisFamily::RootSystemX.modes(3) {
            assert_eq!(coefficient(zero.as_ref(), &m, 1.0, &q), 0.0);
        }
    }

    #[test]
    fn single_sine_reconstructs_with_normalization() {
        let q = SpatialQuadrature::default();
        let g = field_fn(|x, _| (PI * x).sin());
        let p = Projector::new(BasisFamily::DirichletSine.modes(1), &q);
        let c = p.project(g.as_ref(), 0.0);
        let rebuilt = c[0] * p.modes()[0].value(0.5);
        assert!((rebuilt - 1.0).abs() < 1e-10);
    }

    #[test]
    fn biorthogonality_entries() {
        let b = biorthogonality_matrix(2).unwrap();
        assert_eq!(b.len(), 5);
        assert!((b[0][0] - 1.0).abs() < 1e-14);
        // ⟨cos 2πx, 4 sin 2πx⟩ and ⟨x sin 2πx, 4 sin 2πx⟩
        assert!(b[1][2].abs() < 1e-14);
        assert!((b[2][2] - 1.0).abs() < 1e-14);
        assert!(max_off_identity(&b) < 1e-12);
        assert!(biorthogonality_matrix(0).is_err());
    }

    #[test]
    fn self_adjoint_families_are_orthogonal() {
        let q = SpatialQuadrature::default();
        for fam in [BasisFamily::DirichletSine, BasisFamily::NeumannCosine, BasisFamily::PeriodicFourier] {
            assert!(max_off_identity(&pairing_matrix(fam, 8, &q)) < 1e-10, "{fam}");
        }
        // raw ⟨sin kπx, sin mπx⟩ = δ/2 and ⟨1, 1⟩ = 1
        let s1 = mode(BasisFamily::DirichletSine, Slot::Sin, 3);
        assert!((q.integrate(|x| s1.value(x) * s1.value(x)) - 0.5).abs() < 1e-12);
        let c0 = mode(BasisFamily::NeumannCosine, Slot::Primary0, 0);
        assert!((q.integrate(|x| c0.value(x) * c0.value(x)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-5;
        for fam in BasisFamily::ALL {
            for m in fam.modes(3) {
                for x in [0.1, 0.37, 0.8] {
                    let d1 = (m.value(x + h) - m.value(x - h)) / (2.0 * h);
                    let d2 = (m.value(x + h) - 2.0 * m.value(x) + m.value(x - h)) / (h * h);
                    assert!((d1 - m.d1(x)).abs() < 1e-6 * (1.0 + m.d1(x).abs()), "{m} d1");
                    assert!((d2 - m.d2(x)).abs() < 1e-3 * (1.0 + m.d2(x).abs()), "{m} d2");
                }
            }
        }
    }

    #[test]
    fn root_functions_satisfy_their_ode() {
        // X″ + λ²X = 0 for cos, X″ + λ²X = 2λ cos λx for the associate function
        let k = 2;
        let lam = 2.0 * k as f64 * PI;
        let c = mode(BasisFamily::RootSystemX, Slot::Cos, k);
        let a = mode(BasisFamily::RootSystemX, Slot::AssocXSin, k);
        let mut prev = f64::INFINITY;
        for n in [64, 128, 256, 512] {
            let h = 1.0 / n as f64;
            let mut worst_cos = 0.0f64;
            let mut worst_assoc = 0.0f64;
            for i in 1..n {
                let x = i as f64 * h;
                let dd = |m: &ModeIndex| (m.value(x + h) - 2.0 * m.value(x) + m.value(x - h)) / (h * h);
                worst_cos = worst_cos.max((dd(&c) + lam * lam * c.value(x)).abs());
                worst_assoc = worst_assoc.max((dd(&a) + lam * lam * a.value(x) - 2.0 * lam * (lam * x).cos()).abs());
            }
            assert!(worst_assoc < prev, "associate residual should shrink");
            prev = worst_assoc;
            if n == 512 {
                assert!(worst_cos < 1e-1 && worst_assoc < 1e-1);
            }
        }
    }
}
