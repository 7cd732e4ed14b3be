//! Functions `F : ℂ^d → ℝ_{≥0}` whose epigraphs `{Im z₀ > F(z₁,…,z_d)}`
//! make up the unbounded families, together with their scaling weights.

use crate::error::{GeomError, Result};
use crate::point::{self, CPoint, C64};
use crate::rng::substream;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `coeff · Π z_j^{a_j} conj(z_j)^{b_j}`; the real part of the sum of
/// monomials is taken, so conjugate pairs need not both be listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coeff: f64,
    /// `[a_j, b_j]` per coordinate.
    pub powers: Vec<[u32; 2]>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|[a, b]| a + b).sum()
    }

    fn eval(&self, z: &[C64]) -> C64 {
        let mut acc = C64::new(self.coeff, 0.0);
        for (zj, [a, b]) in z.iter().zip(&self.powers) {
            acc *= zj.powu(*a) * zj.conj().powu(*b);
        }
        acc
    }

    /// `(∂m/∂z_j, ∂m/∂z̄_j)`.
    fn partials(&self, z: &[C64], j: usize) -> (C64, C64) {
        let mut rest = C64::new(self.coeff, 0.0);
        for (k, (zk, [a, b])) in z.iter().zip(&self.powers).enumerate() {
            if k != j {
                rest *= zk.powu(*a) * zk.conj().powu(*b);
            }
        }
        let [a, b] = self.powers[j];
        let zj = z[j];
        let dz = if a == 0 {
            C64::new(0.0, 0.0)
        } else {
            zj.powu(a - 1) * zj.conj().powu(b) * a as f64
        };
        let dzbar = if b == 0 {
            C64::new(0.0, 0.0)
        } else {
            zj.powu(a) * zj.conj().powu(b - 1) * b as f64
        };
        (rest * dz, rest * dzbar)
    }
}

/// `coeff · |z_j|^exponent` for coordinate `j` (position in the list).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FSpec {
    /// `‖z‖_p`.
    Pnorm { p: f64 },
    /// `Re Σ monomials`.
    Polynomial { monomials: Vec<Monomial> },
    /// `Σ_j c_j |z_j|^{e_j}`.
    PowerSum { terms: Vec<PowerTerm> },
    /// `base + quad·‖z‖²`.
    Perturbed { base: Box<FSpec>, quad: f64 },
}

impl FSpec {
    pub fn eval(&self, z: &[C64]) -> f64 {
        match self {
            FSpec::Pnorm { p } => pnorm(z, *p),
            FSpec::Polynomial { monomials } => monomials.iter().map(|m| m.eval(z)).sum::<C64>().re,
            FSpec::PowerSum { terms } => terms
                .iter()
                .zip(z)
                .map(|(t, zj)| t.coeff * zj.norm().powf(t.exponent))
                .sum(),
            FSpec::Perturbed { base, quad } => base.eval(z) + quad * point::norm_sqr(z),
        }
    }

    /// Real gradient packed as `∂F/∂x_j + i ∂F/∂y_j`.
    pub fn gradient(&self, z: &[C64]) -> CPoint {
        let zero = C64::new(0.0, 0.0);
        match self {
            FSpec::Pnorm { p } => {
                let f = pnorm(z, *p);
                if f == 0.0 {
                    return vec![zero; z.len()];
                }
                z.iter()
                    .map(|zj| {
                        let a = zj.norm();
                        if a == 0.0 {
                            zero
                        } else {
                            zj * (f.powf(1.0 - p) * a.powf(p - 2.0))
                        }
                    })
                    .collect()
            }
            FSpec::Polynomial { monomials } => (0..z.len())
                .map(|j| {
                    monomials
                        .iter()
                        .map(|m| {
                            let (dz, dzbar) = m.partials(z, j);
                            dzbar + dz.conj()
                        })
                        .sum()
                })
                .collect(),
            FSpec::PowerSum { terms } => terms
                .iter()
                .zip(z)
                .map(|(t, zj)| {
                    let a = zj.norm();
                    if a == 0.0 {
                        zero
                    } else {
                        zj * (t.coeff * t.exponent * a.powf(t.exponent - 2.0))
                    }
                })
                .collect(),
            FSpec::Perturbed { base, quad } => base
                .gradient(z)
                .into_iter()
                .zip(z)
                .map(|(g, zj)| g + zj * (2.0 * quad))
                .collect(),
        }
    }

    /// Whether `F` fails to be differentiable at the origin.
    pub fn kinked_at_origin(&self) -> bool {
        match self {
            FSpec::Pnorm { .. } => true,
            FSpec::Polynomial { .. } => false,
            FSpec::PowerSum { terms } => terms.iter().any(|t| t.exponent <= 1.0),
            FSpec::Perturbed { base, .. } => base.kinked_at_origin(),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            FSpec::Pnorm { p } if !(*p >= 1.0) => Err(GeomError::InvalidParameter(format!("p-norm needs p >= 1, got {p}"))),
            FSpec::Pnorm { .. } => Ok(()),
            FSpec::Polynomial { monomials } => {
                if monomials.is_empty() {
                    return Err(GeomError::InvalidParameter("polynomial has no monomials".into()));
                }
                for m in monomials {
                    if m.powers.len() != d {
                        return Err(GeomError::DimensionMismatch { expected: d, found: m.powers.len() });
                    }
                }
                Ok(())
            }
            FSpec::PowerSum { terms } => {
                if terms.len() != d {
                    return Err(GeomError::DimensionMismatch { expected: d, found: terms.len() });
                }
                if terms.iter().any(|t| !(t.exponent > 0.0) || t.coeff < 0.0) {
                    return Err(GeomError::InvalidParameter("power-sum terms need positive exponents and non-negative coefficients".into()));
                }
                Ok(())
            }
            FSpec::Perturbed { base, quad } => {
                if *quad < 0.0 {
                    return Err(GeomError::InvalidParameter("perturbation must be non-negative".into()));
                }
                base.validate(d)
            }
        }
    }
}

fn pnorm(z: &[C64], p: f64) -> f64 {
    if p == 2.0 {
        return point::norm(z);
    }
    let m = z.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * z.iter().map(|w| (w.norm() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Positive scaling weight, written in configs as a number or `"a/b"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weight(pub f64);

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Weight(x)),
            Raw::Text(s) => parse_ratio(&s).map(Weight).ok_or_else(|| serde::de::Error::custom(format!("bad weight {s:?}"))),
        }
    }
}

fn parse_ratio(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().ok()?;
            let b: f64 = b.trim().parse().ok()?;
            (b != 0.0).then_some(a / b)
        }
        None => s.trim().parse().ok(),
    }
}

/// `Ω_F = {(z₀, z) : Im z₀ > F(z)} ⊂ ℂ^{d+1}` with scaling weights
/// `(δ₁,…,δ_d)`; the group `diag(t, t^{δ₁},…,t^{δ_d})` acts on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Epigraph {
    pub d: usize,
    pub f: FSpec,
    pub weights: Vec<f64>,
}

impl Epigraph {
    pub fn new(d: usize, f: FSpec, weights: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(GeomError::InvalidParameter("epigraph needs d >= 1".into()));
        }
        if weights.len() != d {
            return Err(GeomError::DimensionMismatch { expected: d, found: weights.len() });
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(GeomError::InvalidParameter("weights must be strictly positive".into()));
        }
        f.validate(d)?;
        Ok(Epigraph { d, f, weights })
    }

    /// The cone `𝒞_p = {Im z₀ > ‖z‖_p}`.
    pub fn pnorm_cone(d: usize, p: f64) -> Result<Self> {
        Epigraph::new(d, FSpec::Pnorm { p }, vec![1.0; d])
    }

    /// Epigraph of a homogeneous polynomial of degree m, weights 1/m.
    pub fn homogeneous_polynomial(d: usize, monomials: Vec<Monomial>) -> Result<Self> {
        let deg = monomials.first().map(Monomial::degree).unwrap_or(0);
        if deg == 0 || monomials.iter().any(|m| m.degree() != deg) {
            return Err(GeomError::InvalidParameter("polynomial must be homogeneous of positive degree".into()));
        }
        Epigraph::new(d, FSpec::Polynomial { monomials }, vec![1.0 / deg as f64; d])
    }

    pub fn dim(&self) -> usize {
        self.d + 1
    }

    pub fn defining_value(&self, z: &[C64]) -> f64 {
        self.f.eval(&z[1..]) - z[0].im
    }

    /// `(t z₀, t^{δ₁} z₁, …, t^{δ_d} z_d)`.
    pub fn scale_point(&self, t: f64, z: &[C64]) -> CPoint {
        let mut out = Vec::with_capacity(z.len());
        out.push(z[0] * t);
        out.extend(z[1..].iter().zip(&self.weights).map(|(w, dw)| w * t.powf(*dw)));
        out
    }

    /// `|(1/t) F(t^{δ₁} z₁, …) − F(z)|` for `z ∈ ℂ^d`.
    pub fn homogeneity_residual(&self, t: f64, z: &[C64]) -> f64 {
        let scaled: CPoint = z.iter().zip(&self.weights).map(|(w, dw)| w * t.powf(*dw)).collect();
        (self.f.eval(&scaled) / t - self.f.eval(z)).abs()
    }

    /// Worst midpoint-convexity defect `F((a+b)/2) − (F(a)+F(b))/2` over
    /// seeded pairs in the box `[-1, 1]^{2d}`; ≤ 0 (up to rounding) for convex F.
    pub fn sampled_convexity_defect(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = substream(seed, 0);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let a: CPoint = (0..self.d).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let b: CPoint = (0..self.d).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let m = point::lerp(&a, &b, 0.5);
            worst = worst.max(self.f.eval(&m) - 0.5 * (self.f.eval(&a) + self.f.eval(&b)));
        }
        worst
    }

    pub(crate) fn is_pnorm2(&self) -> bool {
        matches!(self.f, FSpec::Pnorm { p } if p == 2.0)
    }
}
