//! Infinitesimal sandwich `k̂/4 ≤ k_Ω ≤ k̂`, curve lengths, certified
//! distance intervals and closed-form oracles for the model domains.

use crate::domains::{check_dim, Domain, DomainOracle, SLICE_RAYS};
use crate::error::{GeomError, Result};
use crate::numeric::{brent_min, romberg};
use crate::paths::{optimize_geodesic, GeodesicSettings, PolyCurve};
use crate::point::{self, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Relative tolerance of per-segment length quadrature.
pub const LENGTH_REL_TOL: f64 = 1e-8;
const ROMBERG_MAX_LEVEL: usize = 22;

/// Which estimator produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Log-ratio bound over boundary points of the joining complex line.
    LogRatioLine,
    /// `¼ log(1 + ‖p−q‖/min δ)`.
    SharpLine,
    /// Length of an optimized curve under `k̂`.
    CurveLength,
    /// Closed-form model distance.
    Exact,
    /// Coincident points.
    Trivial,
}

impl Estimator {
    pub fn tag(self) -> &'static str {
        match self {
            Estimator::LogRatioLine => "log_ratio_line",
            Estimator::SharpLine => "sharp_line",
            Estimator::CurveLength => "curve_length",
            Estimator::Exact => "exact",
            Estimator::Trivial => "trivial",
        }
    }
}

/// Certified interval `[lower, upper]` with the estimators behind each side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_by: Estimator,
    pub upper_by: Estimator,
}

impl MetricBounds {
    pub fn zero() -> Self {
        MetricBounds { lower: 0.0, upper: 0.0, lower_by: Estimator::Trivial, upper_by: Estimator::Trivial }
    }

    pub fn exact(value: f64) -> Self {
        MetricBounds { lower: value, upper: value, lower_by: Estimator::Exact, upper_by: Estimator::Exact }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn require_interior<D: DomainOracle + ?Sized>(dom: &D, p: &[C64]) -> Result<()> {
    check_dim(dom, p)?;
    if !dom.contains(p) {
        return Err(GeomError::NotInterior);
    }
    Ok(())
}

/// `k̂(p;v) = ‖v‖/δ_Ω(p;v) = 1/min{|ζ| : p + ζv ∈ ∂Ω}`.
pub fn khat<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], v: &[C64]) -> Result<f64> {
    require_interior(dom, p)?;
    check_dim(dom, v)?;
    Ok(khat_unchecked(dom, p, v))
}

#[inline]
pub(crate) fn khat_unchecked<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], v: &[C64]) -> f64 {
    if point::is_zero(v) {
        return 0.0;
    }
    1.0 / dom.slice_radius(p, v)
}

/// `‖v‖/(4δ_Ω(p;v))`, a lower bound for `k_Ω` on C-convex domains.
pub fn k_lower<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], v: &[C64]) -> Result<f64> {
    if !dom.is_c_convex() {
        return Err(GeomError::NotCConvex);
    }
    Ok(0.25 * khat(dom, p, v)?)
}

/// Length of one straight segment under `k̂`, by Romberg quadrature.
/// `None` when a quadrature node leaves the domain.
pub(crate) fn segment_length<D: DomainOracle + ?Sized>(dom: &D, a: &[C64], b: &[C64]) -> Option<f64> {
    let v = point::sub(b, a);
    if point::is_zero(&v) {
        return Some(0.0);
    }
    let mut buf = a.to_vec();
    let mut escaped = false;
    let len = romberg(
        |s| {
            point::axpy_into(&mut buf, a, C64::new(s, 0.0), &v);
            if !dom.contains(&buf) {
                escaped = true;
                return 0.0;
            }
            khat_unchecked(dom, &buf, &v)
        },
        LENGTH_REL_TOL,
        ROMBERG_MAX_LEVEL,
    );
    (!escaped).then_some(len)
}

/// `∫ k̂(σ; σ′)` along a polyline.
pub fn curve_length_upper<D: DomainOracle + ?Sized>(dom: &D, curve: &PolyCurve) -> Result<f64> {
    for (index, node) in curve.nodes().iter().enumerate() {
        if node.len() != dom.dim() || !dom.contains(node) {
            return Err(GeomError::NodeOutsideDomain { index });
        }
    }
    let mut total = 0.0;
    for w in curve.nodes().windows(2) {
        total += segment_length(dom, &w[0], &w[1]).ok_or(GeomError::SegmentExitsDomain)?;
    }
    Ok(total)
}

/// Upper bound on `K_Ω(p, q)`: the `k̂`-length of an optimized curve.
pub fn distance_upper<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], q: &[C64], settings: &GeodesicSettings) -> Result<f64> {
    Ok(optimize_geodesic(dom, p, q, settings)?.1.length)
}

/// Mesh maximum of `f(θ)` over the ray angles, refined by Brent iteration.
fn max_over_angles<F: FnMut(f64) -> f64>(mut f: F) -> f64 {
    let cell = TAU / SLICE_RAYS as f64;
    let mut best = f64::NEG_INFINITY;
    let mut best_k = 0;
    for k in 0..SLICE_RAYS {
        let val = f(k as f64 * cell);
        if val > best {
            best = val;
            best_k = k;
        }
    }
    if !best.is_finite() {
        return best.max(0.0);
    }
    let th0 = best_k as f64 * cell;
    let (_, neg) = brent_min(
        |th| {
            let v = f(th);
            if v.is_finite() {
                -v
            } else {
                0.0
            }
        },
        th0 - cell,
        th0 + cell,
        th0,
        -best,
        1e-10,
        60,
    );
    best.max(-neg)
}

/// `max_ξ ¼|log(‖q−ξ‖/‖p−ξ‖)|` over boundary points `ξ` of the complex
/// line through `p` and `q`, found as ray exits from both points.
pub fn distance_lower_line<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], q: &[C64]) -> Result<f64> {
    if !dom.is_c_convex() {
        return Err(GeomError::NotCConvex);
    }
    require_interior(dom, p)?;
    require_interior(dom, q)?;
    let v = point::sub(q, p);
    if point::is_zero(&v) {
        return Ok(0.0);
    }
    let max_s = crate::domains::horizon(p).max(crate::domains::horizon(q)) / point::norm(&v);
    let mut u = v.clone();
    let mut best = 0.0f64;
    // ξ = p + ζ v, so ‖q−ξ‖/‖p−ξ‖ = |1−ζ|/|ζ|
    for (origin, shift) in [(p, 0.0), (q, 1.0)] {
        let val = max_over_angles(|th| {
            let rot = C64::from_polar(1.0, th);
            for (uj, vj) in u.iter_mut().zip(&v) {
                *uj = rot * vj;
            }
            match dom.ray_exit(origin, &u, max_s) {
                Some(s) => {
                    let zeta = C64::new(shift, 0.0) + rot * s;
                    0.25 * ((C64::new(1.0, 0.0) - zeta).norm() / zeta.norm()).ln().abs()
                }
                None => f64::NEG_INFINITY,
            }
        });
        if val.is_finite() {
            best = best.max(val);
        }
    }
    Ok(best)
}

/// `¼ log(1 + ‖p−q‖/min{δ_Ω(p;q−p), δ_Ω(q;p−q)})`.
pub fn distance_lower_sharp<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], q: &[C64]) -> Result<f64> {
    if !dom.is_c_convex() {
        return Err(GeomError::NotCConvex);
    }
    require_interior(dom, p)?;
    require_interior(dom, q)?;
    let v = point::sub(q, p);
    if point::is_zero(&v) {
        return Ok(0.0);
    }
    let w = point::scale(&v, -1.0);
    let vn = point::norm(&v);
    let delta = (vn * dom.slice_radius(p, &v)).min(vn * dom.slice_radius(q, &w));
    Ok(0.25 * (vn / delta).ln_1p())
}

/// Certified lower bound `max(line, sharp)` with its provenance.
pub fn distance_lower<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], q: &[C64]) -> Result<(f64, Estimator)> {
    let line = distance_lower_line(dom, p, q)?;
    let sharp = distance_lower_sharp(dom, p, q)?;
    Ok(if line >= sharp { (line, Estimator::LogRatioLine) } else { (sharp, Estimator::SharpLine) })
}

/// Certified interval for `K_Ω(p, q)`.
pub fn distance_interval<D: DomainOracle + ?Sized>(
    dom: &D,
    p: &[C64],
    q: &[C64],
    settings: &GeodesicSettings,
) -> Result<MetricBounds> {
    require_interior(dom, p)?;
    require_interior(dom, q)?;
    if point::dist(p, q) == 0.0 {
        return Ok(MetricBounds::zero());
    }
    let (lower, lower_by) = distance_lower(dom, p, q)?;
    let upper = distance_upper(dom, p, q, settings)?;
    Ok(MetricBounds { lower: lower.min(upper), upper, lower_by, upper_by: Estimator::CurveLength })
}

fn model_interior(model: &Domain, p: &[C64]) -> Result<()> {
    check_dim(model, p)?;
    if !model.contains(p) {
        return Err(GeomError::NotInterior);
    }
    Ok(())
}

/// `arctanh` of the pseudo-hyperbolic distance on the unit ball, written to
/// stay accurate near the boundary.
fn unit_ball_distance(z: &[C64], w: &[C64]) -> f64 {
    let inner: C64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
    let den2 = (C64::new(1.0, 0.0) - inner).norm_sqr();
    let mut cross = 0.0;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            cross += (z[i] * w[j] - z[j] * w[i]).norm_sqr();
        }
    }
    let num2 = (point::dist(z, w).powi(2) - cross).max(0.0);
    let s = (num2 / den2).sqrt().min(1.0);
    let one_minus_s2 = (1.0 - point::norm_sqr(z)) * (1.0 - point::norm_sqr(w)) / den2;
    s.ln_1p() - 0.5 * one_minus_s2.ln()
}

fn disk_distance(a: C64, b: C64) -> f64 {
    unit_ball_distance(&[a], &[b])
}

fn cayley(z: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    (z - i) / (z + i)
}

/// Closed-form Kobayashi distance on the model domains, normalised so that
/// `K(0, z) = arctanh‖z‖` on the unit ball.
pub fn exact_distance(model: &Domain, p: &[C64], q: &[C64]) -> Result<f64> {
    model_interior(model, p)?;
    model_interior(model, q)?;
    match model {
        Domain::Ball { radius, .. } => {
            Ok(unit_ball_distance(&point::scale(p, 1.0 / radius), &point::scale(q, 1.0 / radius)))
        }
        Domain::Polydisc { radii } => Ok(p
            .iter()
            .zip(q)
            .zip(radii)
            .map(|((a, b), r)| disk_distance(a / r, b / r))
            .fold(0.0, f64::max)),
        Domain::HalfPlane { .. } => Ok(disk_distance(cayley(p[0]), cayley(q[0]))),
        _ => Err(GeomError::ModelOnly),
    }
}

/// Closed-form Kobayashi infinitesimal metric on the model domains.
pub fn exact_infinitesimal(model: &Domain, p: &[C64], v: &[C64]) -> Result<f64> {
    model_interior(model, p)?;
    check_dim(model, v)?;
    match model {
        Domain::Ball { radius, .. } => {
            let z = point::scale(p, 1.0 / radius);
            let w = point::scale(v, 1.0 / radius);
            let a = 1.0 - point::norm_sqr(&z);
            let zv = point::hermitian(&z, &w).norm_sqr();
            Ok((point::norm_sqr(&w) / a + zv / (a * a)).sqrt())
        }
        Domain::Polydisc { radii } => Ok(p
            .iter()
            .zip(v)
            .zip(radii)
            .map(|((z, w), r)| w.norm() * r / (r * r - z.norm_sqr()))
            .fold(0.0, f64::max)),
        Domain::HalfPlane { .. } => Ok(v[0].norm() / (2.0 * p[0].im)),
        _ => Err(GeomError::ModelOnly),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn r(x: f64) -> Vec<C64> {
        vec![c(x, 0.0)]
    }

    #[test]
    fn khat_examples() {
        let disk = Domain::disk();
        assert!((khat(&disk, &r(0.0), &r(1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((khat(&disk, &r(0.5), &r(1.0)).unwrap() - 2.0).abs() < 1e-12);
        let kh = khat(&disk, &r(0.5), &r(1.0)).unwrap();
        let k = exact_infinitesimal(&disk, &r(0.5), &r(1.0)).unwrap();
        assert!((k - 4.0 / 3.0).abs() < 1e-12);
        assert!(kh / 4.0 <= k && k <= kh);
        assert_eq!(khat(&disk, &r(0.5), &r(0.0)).unwrap(), 0.0);
        assert_eq!(khat(&disk, &r(1.5), &r(1.0)), Err(GeomError::NotInterior));
    }

    #[test]
    fn k_lower_examples() {
        let disk = Domain::disk();
        assert!((k_lower(&disk, &r(0.0), &r(1.0)).unwrap() - 0.25).abs() < 1e-12);
        let ball = Domain::unit_ball(2);
        let v = k_lower(&ball, &[c(0.5, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((v - 1.0 / (4.0 * 0.75f64.sqrt())).abs() < 1e-12);
        assert_eq!(k_lower(&disk, &r(0.3), &r(0.0)).unwrap(), 0.0);
        assert!(k_lower(&crate::domains::Domain::projective_cone(1), &[c(0.0, -0.5), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]).is_ok());
    }

    #[test]
    fn k_lower_needs_c_convexity() {
        struct Annulus;
        impl DomainOracle for Annulus {
            fn dim(&self) -> usize {
                1
            }
            fn defining_value(&self, z: &[C64]) -> f64 {
                let n = z[0].norm();
                (n - 1.0).max(0.5 - n)
            }
            fn is_bounded(&self) -> bool {
                true
            }
            fn is_convex(&self) -> bool {
                false
            }
            fn is_c_convex(&self) -> bool {
                false
            }
        }
        assert_eq!(k_lower(&Annulus, &r(0.75), &r(1.0)), Err(GeomError::NotCConvex));
    }

    #[test]
    fn curve_length_examples() {
        let disk = Domain::disk();
        let seg = PolyCurve::straight(&r(0.0), &r(0.5), 2);
        let len = curve_length_upper(&disk, &seg).unwrap();
        assert!((len - 2f64.ln()).abs() < 1e-8, "{len}");
        let rev = PolyCurve::straight(&r(0.5), &r(0.0), 2);
        assert!((curve_length_upper(&disk, &rev).unwrap() - len).abs() < 1e-10);
        let deg = PolyCurve::straight(&r(0.3), &r(0.3), 2);
        assert_eq!(curve_length_upper(&disk, &deg).unwrap(), 0.0);
        let bad = PolyCurve::new(vec![r(0.0), r(1.5)], vec![0.0, 1.0]).unwrap();
        assert_eq!(curve_length_upper(&disk, &bad), Err(GeomError::NodeOutsideDomain { index: 1 }));
    }

    #[test]
    fn lower_bound_examples() {
        let disk = Domain::disk();
        let line = distance_lower_line(&disk, &r(0.0), &r(0.9)).unwrap();
        assert!((line - 0.25 * 10f64.ln()).abs() < 1e-9, "{line}");
        assert!(line <= 0.9f64.atanh());
        let sharp = distance_lower_sharp(&disk, &r(0.0), &r(0.9)).unwrap();
        assert!((sharp - 0.25 * 10f64.ln()).abs() < 1e-9);
        let sharp = distance_lower_sharp(&disk, &r(0.0), &r(0.5)).unwrap();
        assert!((sharp - 0.25 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(distance_lower_line(&disk, &r(0.2), &r(0.2)).unwrap(), 0.0);
        assert_eq!(distance_lower_sharp(&disk, &r(0.2), &r(0.2)).unwrap(), 0.0);
    }

    #[test]
    fn exact_examples() {
        let disk = Domain::disk();
        assert!((exact_distance(&disk, &r(0.0), &r(0.5)).unwrap() - 0.5f64.atanh()).abs() < 1e-14);
        let bidisc = Domain::bidisc();
        let v = exact_distance(&bidisc, &[c(0.0, 0.0), c(0.0, 0.0)], &[c(0.5, 0.0), c(0.8, 0.0)]).unwrap();
        assert!((v - 0.8f64.atanh()).abs() < 1e-14);
        let hp = Domain::halfplane(1).unwrap();
        let v = exact_distance(&hp, &[c(0.0, 1.0)], &[c(0.0, 4.0)]).unwrap();
        assert!((v - 0.5 * 4f64.ln()).abs() < 1e-14);
        assert_eq!(exact_distance(&Domain::pcone(1, 2.0).unwrap(), &[c(0.0, 1.0), c(0.0, 0.0)], &[c(0.0, 2.0), c(0.0, 0.0)]), Err(GeomError::ModelOnly));
    }

    #[test]
    fn ball_distance_matches_disk_on_a_line_and_is_invariant_under_rotation() {
        let ball = Domain::unit_ball(2);
        let a = [c(0.3, 0.1), c(0.0, 0.0)];
        let b = [c(-0.5, 0.2), c(0.0, 0.0)];
        let d2 = exact_distance(&ball, &a, &b).unwrap();
        let d1 = exact_distance(&Domain::disk(), &[a[0]], &[b[0]]).unwrap();
        assert!((d1 - d2).abs() < 1e-14);
        let u = [[c(0.6, 0.0), c(0.0, 0.8)], [c(0.0, 0.8), c(0.6, 0.0)]];
        let rot = |z: &[C64; 2]| [u[0][0] * z[0] + u[0][1] * z[1], u[1][0] * z[0] + u[1][1] * z[1]];
        assert!((exact_distance(&ball, &rot(&a), &rot(&b)).unwrap() - d2).abs() < 1e-13);
    }

    #[test]
    fn interval_examples() {
        let disk = Domain::disk();
        let s = GeodesicSettings::default();
        let iv = distance_interval(&disk, &r(0.0), &r(0.9), &s).unwrap();
        assert!((iv.lower - 0.25 * 10f64.ln()).abs() < 1e-9);
        assert!(iv.contains(0.9f64.atanh(), 0.0));
        assert!(iv.upper <= 10f64.ln() + 1e-6);
        assert_eq!(distance_interval(&disk, &r(0.4), &r(0.4), &s).unwrap(), MetricBounds::zero());
        let bidisc = Domain::bidisc();
        let iv = distance_interval(&bidisc, &[c(0.0, 0.0), c(0.0, 0.0)], &[c(0.5, 0.0), c(0.0, 0.0)], &s).unwrap();
        assert!(iv.contains(0.5f64.atanh(), 0.0), "{iv:?}");
    }

    #[test]
    fn upper_examples() {
        let s = GeodesicSettings::default();
        let disk = Domain::disk();
        let up = distance_upper(&disk, &r(0.0), &r(0.5), &s).unwrap();
        assert!(up >= 0.5f64.atanh() && up <= 2f64.ln() + 1e-6, "{up}");
        assert_eq!(distance_upper(&disk, &r(0.2), &r(0.2), &s).unwrap(), 0.0);
        let big = Domain::ball(1, 2.0).unwrap();
        assert!(distance_upper(&big, &r(0.0), &r(0.5), &s).unwrap() <= up);
    }
}
