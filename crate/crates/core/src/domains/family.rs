use super::fspec::{Epigraph, FSpec, Monomial, Weight};
use super::{bisection_ray_exit, mesh_boundary_distance, mesh_slice_radius, min_over_angles, nudge_out, DomainOracle};
use crate::error::{GeomError, Result};
use crate::point::{self, CPoint, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

fn unit() -> f64 {
    1.0
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectiveTransformId {
    /// `(z₀, z) ↦ (1/(z₀+i), z/(z₀+i))`.
    #[default]
    ConeCompactify,
}

/// Serializable description of a domain, as it appears in configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum DomainFamily {
    #[serde(rename = "ball")]
    Ball {
        #[serde(default = "unit")]
        radius: f64,
        #[serde(default = "one")]
        dim: usize,
    },
    #[serde(rename = "polydisc")]
    Polydisc { radii: Vec<f64> },
    #[serde(rename = "halfplane")]
    HalfPlane {
        #[serde(default = "one")]
        dim: usize,
    },
    #[serde(rename = "pcone")]
    PNormCone { d: usize, p: f64 },
    #[serde(rename = "homogeneous_epigraph")]
    HomogeneousEpigraph { d: usize, f: FSpec, weights: Vec<Weight> },
    #[serde(rename = "poly_epigraph")]
    ConvexPolynomialEpigraph { d: usize, monomials: Vec<Monomial> },
    #[serde(rename = "projective")]
    ProjectiveImage {
        inner: Box<DomainFamily>,
        #[serde(default)]
        transform: ProjectiveTransformId,
    },
}

impl DomainFamily {
    pub const SUPPORTED: &'static [&'static str] =
        &["ball", "polydisc", "halfplane", "pcone", "homogeneous_epigraph", "poly_epigraph", "projective"];

    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainFamily::Ball { radius, dim } => Domain::ball(*dim, *radius),
            DomainFamily::Polydisc { radii } => Domain::polydisc(radii.clone()),
            DomainFamily::HalfPlane { dim } => Domain::halfplane(*dim),
            DomainFamily::PNormCone { d, p } => Domain::pcone(*d, *p),
            DomainFamily::HomogeneousEpigraph { d, f, weights } => {
                Ok(Domain::Epigraph(Epigraph::new(*d, f.clone(), weights.iter().map(|w| w.0).collect())?))
            }
            DomainFamily::ConvexPolynomialEpigraph { d, monomials } => {
                let e = Epigraph::homogeneous_polynomial(*d, monomials.clone())?;
                if e.sampled_convexity_defect(2000, 0) > 1e-9 {
                    return Err(GeomError::InvalidParameter("polynomial fails the sampled convexity check".into()));
                }
                Ok(Domain::Epigraph(e))
            }
            DomainFamily::ProjectiveImage { inner, transform: ProjectiveTransformId::ConeCompactify } => match inner.as_ref() {
                DomainFamily::PNormCone { d, p } if *p == 2.0 && *d >= 1 => Ok(Domain::Projective { d: *d }),
                _ => Err(GeomError::InvalidParameter("projective image is available for the 2-norm cone only".into())),
            },
        }
    }
}

/// Runtime domain oracle.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// `{‖z‖ < radius} ⊂ ℂ^dim`.
    Ball { radius: f64, dim: usize },
    /// Product of discs.
    Polydisc { radii: Vec<f64> },
    /// `{Im z₀ > 0} ⊂ ℂ^dim`.
    HalfPlane { dim: usize },
    Epigraph(Epigraph),
    /// Image of the 2-norm cone in `ℂ^{d+1}` under the compactifying
    /// projective map; bounded and C-convex but not convex.
    Projective { d: usize },
    /// `g_t(inner)` for `g_t = diag(t, t^{δ₁}, …)`.
    Scaled { inner: Box<Domain>, t: f64, weights: Vec<f64> },
}

impl Domain {
    pub fn disk() -> Domain {
        Domain::Ball { radius: 1.0, dim: 1 }
    }

    pub fn unit_ball(dim: usize) -> Domain {
        Domain::Ball { radius: 1.0, dim }
    }

    pub fn bidisc() -> Domain {
        Domain::Polydisc { radii: vec![1.0, 1.0] }
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Domain> {
        if dim == 0 || !(radius > 0.0) {
            return Err(GeomError::InvalidParameter("ball needs dim >= 1 and radius > 0".into()));
        }
        Ok(Domain::Ball { radius, dim })
    }

    pub fn polydisc(radii: Vec<f64>) -> Result<Domain> {
        if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
            return Err(GeomError::InvalidParameter("polydisc needs positive radii".into()));
        }
        Ok(Domain::Polydisc { radii })
    }

    pub fn halfplane(dim: usize) -> Result<Domain> {
        if dim == 0 {
            return Err(GeomError::InvalidParameter("half-plane needs dim >= 1".into()));
        }
        Ok(Domain::HalfPlane { dim })
    }

    pub fn pcone(d: usize, p: f64) -> Result<Domain> {
        Ok(Domain::Epigraph(Epigraph::pnorm_cone(d, p)?))
    }

    /// Image of the 2-norm cone `𝒞₂ ⊂ ℂ^{d+1}` under the projective map.
    pub fn projective_cone(d: usize) -> Domain {
        Domain::Projective { d }
    }

    pub fn epigraph(&self) -> Option<&Epigraph> {
        match self {
            Domain::Epigraph(e) => Some(e),
            _ => None,
        }
    }

    /// Scaling weights when the family carries the scaling group.
    pub fn scaling_weights(&self) -> Option<&[f64]> {
        self.epigraph().map(|e| e.weights.as_slice())
    }

    pub fn label(&self) -> String {
        match self {
            Domain::Ball { radius, dim } => format!("ball(dim={dim},r={radius})"),
            Domain::Polydisc { radii } => format!("polydisc({radii:?})"),
            Domain::HalfPlane { dim } => format!("halfplane(dim={dim})"),
            Domain::Epigraph(e) => match &e.f {
                FSpec::Pnorm { p } => format!("pcone(d={},p={p})", e.d),
                _ => format!("epigraph(d={})", e.d),
            },
            Domain::Projective { d } => format!("projective_cone(d={d})"),
            Domain::Scaled { inner, t, .. } => format!("scaled({},t={t})", inner.label()),
        }
    }

    fn unscale(t: f64, weights: &[f64], w: &[C64]) -> CPoint {
        let mut out = Vec::with_capacity(w.len());
        out.push(w[0] / t);
        out.extend(w[1..].iter().zip(weights).map(|(x, dw)| x * t.powf(-dw)));
        out
    }

    fn rescale(t: f64, weights: &[f64], z: &[C64]) -> CPoint {
        let mut out = Vec::with_capacity(z.len());
        out.push(z[0] * t);
        out.extend(z[1..].iter().zip(weights).map(|(x, dw)| x * t.powf(*dw)));
        out
    }
}

/// `(t z₀, t^{δ₁} z₁, …, t^{δ_d} z_d)` for families carrying the scaling group.
pub fn scaling_group_apply(dom: &Domain, t: f64, p: &[C64]) -> Result<CPoint> {
    let e = dom.epigraph().ok_or(GeomError::NonHomogeneousFamily)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(GeomError::InvalidParameter("scaling parameter must be positive".into()));
    }
    super::check_dim(dom, p)?;
    Ok(e.scale_point(t, p))
}

/// Positive root of `|p + s u|² = R²` for scalar or vector data summarised
/// by `a = ‖u‖²`, `b = Re⟨p,u⟩`, `c = ‖p‖² − R² < 0`.
fn sphere_exit(a: f64, b: f64, c: f64) -> f64 {
    let disc = (b * b - a * c).max(0.0);
    let sq = disc.sqrt();
    if b > 0.0 {
        -c / (b + sq)
    } else {
        (sq - b) / a
    }
}

/// First positive zero of `‖a + s b‖ − (γ + s η)` given
/// `A = ‖b‖² − η²`, `B = Re⟨a,b⟩ − γη`, `C = ‖a‖² − γ²`.
fn cone_exit(qa: f64, qb: f64, qc: f64, gamma: f64, eta: f64, scale: f64) -> Option<f64> {
    let valid = |s: f64| s > 0.0 && s.is_finite() && gamma + s * eta >= -1e-12 * (gamma.abs() + (s * eta).abs());
    if qa.abs() <= 1e-14 * scale {
        if qb > 0.0 {
            let s = -qc / (2.0 * qb);
            return valid(s).then_some(s);
        }
        return None;
    }
    let disc = qb * qb - qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let q = -(qb + sq.copysign(qb));
    let mut best: Option<f64> = None;
    for s in [q / qa, if q != 0.0 { qc / q } else { f64::NAN }] {
        if valid(s) {
            best = Some(best.map_or(s, |b: f64| b.min(s)));
        }
    }
    best
}

/// Directions from `ζ = 0` to the nearest points of the conic
/// `(γ + Im(ζ v₀))² = ‖a‖² + 2 Re(ζ h) + |ζ|² n_b` bounding a 2-norm cone
/// slice, with `k = γ² − ‖a‖² > 0`. In the eigenbasis of the quadratic
/// part the nearest point is `ζᵢ = −gᵢ/(mᵢ + σ)` for the unique root
/// `σ > n_b` of the increasing constraint function; the degenerate case
/// `σ = n_b` is returned as extra candidates.
fn conic_foot_angles(gamma: f64, v0: C64, h: C64, nb: f64, k: f64) -> Vec<f64> {
    let c = [v0.im, v0.re];
    let c2 = v0.norm_sqr();
    let g = [gamma * c[0] - h.re, gamma * c[1] + h.im];
    let u1 = if c2 > 0.0 { [c[0] / c2.sqrt(), c[1] / c2.sqrt()] } else { [1.0, 0.0] };
    let u2 = [-u1[1], u1[0]];
    let g1 = g[0] * u1[0] + g[1] * u1[1];
    let g2 = g[0] * u2[0] + g[1] * u2[1];
    let to_angle = |z1: f64, z2: f64| (z1 * u1[1] + z2 * u2[1]).atan2(z1 * u1[0] + z2 * u2[0]);
    // constraint value and slope at σ = n_b + w
    let phi = |w: f64| {
        let (d1, d2) = (c2 + w, w);
        let sigma = nb + w;
        let val = k - g1 * g1 * (c2 - nb + 2.0 * sigma) / (d1 * d1) - g2 * g2 * (2.0 * sigma - nb) / (d2 * d2);
        let slope = 2.0 * sigma * (g1 * g1 / (d1 * d1 * d1) + g2 * g2 / (d2 * d2 * d2));
        (val, slope)
    };
    let mut out = Vec::with_capacity(3);
    let scale = 1.0 + c2 + nb;
    let mut hi = scale;
    let mut ok = false;
    for _ in 0..200 {
        if phi(hi).0 > 0.0 {
            ok = true;
            break;
        }
        hi *= 2.0;
    }
    if ok {
        let mut lo = 0.0;
        let mut w = hi;
        for _ in 0..200 {
            let (val, slope) = phi(w);
            if val > 0.0 {
                hi = w;
            } else {
                lo = w;
            }
            let newton = w - val / slope;
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - w).abs() <= 1e-15 * w || hi - lo <= 1e-15 * hi {
                w = next;
                break;
            }
            w = next;
        }
        out.push(to_angle(-g1 / (c2 + w), -g2 / w));
    }
    if c2 > 0.0 && nb > 0.0 {
        let z1 = -g1 / c2;
        let z2sq = ((c2 - nb) * z1 * z1 + 2.0 * g1 * z1 + k) / nb;
        if z2sq >= 0.0 {
            out.push(to_angle(z1, z2sq.sqrt()));
            out.push(to_angle(z1, -z2sq.sqrt()));
        }
    }
    out
}

impl DomainOracle for Domain {
    fn dim(&self) -> usize {
        match self {
            Domain::Ball { dim, .. } | Domain::HalfPlane { dim } => *dim,
            Domain::Polydisc { radii } => radii.len(),
            Domain::Epigraph(e) => e.dim(),
            Domain::Projective { d } => d + 1,
            Domain::Scaled { inner, .. } => inner.dim(),
        }
    }

    fn defining_value(&self, z: &[C64]) -> f64 {
        match self {
            Domain::Ball { radius, .. } => point::norm_sqr(z) - radius * radius,
            Domain::Polydisc { radii } => z
                .iter()
                .zip(radii)
                .map(|(w, r)| w.norm() - r)
                .fold(f64::NEG_INFINITY, f64::max),
            Domain::HalfPlane { .. } => -z[0].im,
            Domain::Epigraph(e) => e.defining_value(z),
            Domain::Projective { .. } => {
                let a = z[0].norm();
                a * point::norm(&z[1..]) + z[0].im + a * a
            }
            Domain::Scaled { inner, t, weights } => t * inner.defining_value(&Domain::unscale(*t, weights, z)),
        }
    }

    fn gradient(&self, z: &[C64]) -> CPoint {
        let zero = C64::new(0.0, 0.0);
        match self {
            Domain::Ball { .. } => point::scale(z, 2.0),
            Domain::Polydisc { radii } => {
                let (j, _) = z
                    .iter()
                    .zip(radii)
                    .map(|(w, r)| w.norm() - r)
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
                let mut g = vec![zero; z.len()];
                let n = z[j].norm();
                g[j] = if n > 0.0 { z[j] / n } else { zero };
                g
            }
            Domain::HalfPlane { dim } => {
                let mut g = vec![zero; *dim];
                g[0] = C64::new(0.0, -1.0);
                g
            }
            Domain::Epigraph(e) => {
                let mut g = Vec::with_capacity(z.len());
                g.push(C64::new(0.0, -1.0));
                g.extend(e.f.gradient(&z[1..]));
                g
            }
            Domain::Projective { .. } => super::numerical_gradient(self, z),
            Domain::Scaled { inner, t, weights } => {
                let g = inner.gradient(&Domain::unscale(*t, weights, z));
                let mut out = Vec::with_capacity(g.len());
                out.push(g[0]);
                out.extend(g[1..].iter().zip(weights).map(|(gj, dw)| gj * t * t.powf(-dw)));
                out
            }
        }
    }

    fn is_bounded(&self) -> bool {
        match self {
            Domain::Ball { .. } | Domain::Polydisc { .. } | Domain::Projective { .. } => true,
            Domain::HalfPlane { .. } | Domain::Epigraph(_) => false,
            Domain::Scaled { inner, .. } => inner.is_bounded(),
        }
    }

    fn bounding_radius(&self) -> Option<f64> {
        match self {
            Domain::Ball { radius, .. } => Some(*radius),
            Domain::Polydisc { radii } => Some(radii.iter().map(|r| r * r).sum::<f64>().sqrt()),
            Domain::Projective { .. } => Some(std::f64::consts::SQRT_2),
            Domain::Scaled { inner, t, weights } => {
                let stretch = weights.iter().map(|dw| t.powf(*dw)).fold(*t, f64::max);
                inner.bounding_radius().map(|r| r * stretch)
            }
            _ => None,
        }
    }

    fn singular_points(&self) -> Vec<CPoint> {
        match self {
            Domain::Epigraph(e) if e.f.kinked_at_origin() => vec![vec![C64::new(0.0, 0.0); e.dim()]],
            Domain::Projective { d } => {
                let mut tip = vec![C64::new(0.0, 0.0); d + 1];
                tip[0] = C64::new(0.0, -1.0);
                vec![tip]
            }
            Domain::Scaled { inner, t, weights } => inner
                .singular_points()
                .iter()
                .map(|s| Domain::rescale(*t, weights, s))
                .collect(),
            _ => Vec::new(),
        }
    }

    fn singular_at(&self, x: &[C64]) -> bool {
        if let Domain::Polydisc { radii } = self {
            let active = x.iter().zip(radii).filter(|(w, r)| w.norm() - *r > -1e-12 * *r).count();
            return active >= 2;
        }
        self.singular_points()
            .iter()
            .any(|s| point::dist(s, x) <= 1e-9 * (1.0 + point::norm(x)))
    }

    fn is_convex(&self) -> bool {
        match self {
            Domain::Projective { .. } => false,
            Domain::Scaled { inner, .. } => inner.is_convex(),
            _ => true,
        }
    }

    fn is_c_convex(&self) -> bool {
        match self {
            Domain::Scaled { inner, .. } => inner.is_c_convex(),
            _ => true,
        }
    }

    fn non_smooth_boundary(&self) -> bool {
        match self {
            Domain::Epigraph(e) => matches!(e.f, FSpec::Pnorm { p } if p <= 1.0),
            Domain::Scaled { inner, .. } => inner.non_smooth_boundary(),
            _ => false,
        }
    }

    fn ray_exit(&self, p: &[C64], u: &[C64], max_s: f64) -> Option<f64> {
        let s = match self {
            Domain::Ball { radius, .. } => Some(sphere_exit(
                point::norm_sqr(u),
                point::hermitian(p, u).re,
                point::norm_sqr(p) - radius * radius,
            )),
            Domain::Polydisc { radii } => p
                .iter()
                .zip(u)
                .zip(radii)
                .filter(|((_, uj), _)| uj.norm_sqr() > 0.0)
                .map(|((pj, uj), r)| sphere_exit(uj.norm_sqr(), (pj.conj() * uj).re, pj.norm_sqr() - r * r))
                .reduce(f64::min),
            Domain::HalfPlane { .. } => (u[0].im < 0.0).then(|| p[0].im / -u[0].im),
            Domain::Epigraph(e) if e.is_pnorm2() => {
                let (a, b) = (&p[1..], &u[1..]);
                let (gamma, eta) = (p[0].im, u[0].im);
                let nb = point::norm_sqr(b);
                cone_exit(
                    nb - eta * eta,
                    point::hermitian(a, b).re - gamma * eta,
                    point::norm_sqr(a) - gamma * gamma,
                    gamma,
                    eta,
                    nb + eta * eta,
                )
            }
            _ => return bisection_ray_exit(self, p, u, max_s),
        }?;
        if s > max_s {
            return None;
        }
        Some(nudge_out(self, p, u, s))
    }

    fn slice_radius(&self, p: &[C64], v: &[C64]) -> f64 {
        match self {
            Domain::Ball { radius, .. } => {
                let nv = point::norm_sqr(v);
                if nv == 0.0 {
                    return f64::INFINITY;
                }
                let zc = -point::hermitian(v, p) / nv;
                let m = point::axpy(p, zc, v);
                let rho = ((radius * radius - point::norm_sqr(&m)) / nv).max(0.0).sqrt();
                (rho - zc.norm()).max(0.0)
            }
            Domain::Polydisc { radii } => p
                .iter()
                .zip(v)
                .zip(radii)
                .filter(|((_, vj), _)| vj.norm_sqr() > 0.0)
                .map(|((pj, vj), r)| (r - pj.norm()) / vj.norm())
                .fold(f64::INFINITY, f64::min),
            Domain::HalfPlane { .. } => {
                if v[0].norm_sqr() > 0.0 {
                    p[0].im / v[0].norm()
                } else {
                    f64::INFINITY
                }
            }
            Domain::Epigraph(e) if e.is_pnorm2() => {
                let vn = point::norm(v);
                if vn == 0.0 {
                    return f64::INFINITY;
                }
                let max_s = super::horizon(p) / vn;
                let (a, vp) = (&p[1..], &v[1..]);
                let gamma = p[0].im;
                let h = point::hermitian(a, vp);
                let nb = point::norm_sqr(vp);
                let qc = point::norm_sqr(a) - gamma * gamma;
                let v0 = v[0];
                let exit = |th: f64| {
                    let rot = C64::from_polar(1.0, th);
                    let eta = (rot * v0).im;
                    let s = cone_exit(nb - eta * eta, (rot * h).re - gamma * eta, qc, gamma, eta, nb + eta * eta)?;
                    (s <= max_s).then_some(s)
                };
                let foot = conic_foot_angles(gamma, v0, h, nb, -qc)
                    .into_iter()
                    .filter_map(exit)
                    .fold(f64::INFINITY, f64::min);
                let coarse = (0..16).filter_map(|k| exit(k as f64 * TAU / 16.0)).fold(f64::INFINITY, f64::min);
                if foot <= coarse {
                    foot
                } else {
                    min_over_angles(exit)
                }
            }
            _ => mesh_slice_radius(self, p, v),
        }
    }

    fn boundary_distance(&self, p: &[C64]) -> f64 {
        match self {
            Domain::Ball { radius, .. } => radius - point::norm(p),
            Domain::Polydisc { radii } => p
                .iter()
                .zip(radii)
                .map(|(w, r)| r - w.norm())
                .fold(f64::INFINITY, f64::min),
            Domain::HalfPlane { .. } => p[0].im,
            Domain::Epigraph(e) if e.is_pnorm2() => (p[0].im - point::norm(&p[1..])) / std::f64::consts::SQRT_2,
            _ => mesh_boundary_distance(self, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{euclidean_boundary_distance, line_boundary_distance, GenericView};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn containment_examples() {
        let disk = Domain::disk();
        assert!(disk.contains(&[c(0.0, 0.0)]));
        assert!(!disk.contains(&[c(1.0, 0.0)]));
        let cone = Domain::pcone(1, 2.0).unwrap();
        assert!(cone.contains(&[c(0.0, 2.0), c(0.0, 0.0)]));
    }

    #[test]
    fn line_distance_examples() {
        let disk = Domain::disk();
        let d = line_boundary_distance(&disk, &[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let cone = Domain::pcone(1, 2.0).unwrap();
        let p = [c(0.0, 2.0), c(0.0, 0.0)];
        let d = line_boundary_distance(&cone, &p, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((d - 2.0).abs() < 1e-9, "{d}");
        let ball = Domain::unit_ball(2);
        let d = line_boundary_distance(&ball, &[c(0.5, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((d - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn line_distance_errors() {
        let disk = Domain::disk();
        assert_eq!(line_boundary_distance(&disk, &[c(2.0, 0.0)], &[c(1.0, 0.0)]), Err(GeomError::NotInterior));
        assert_eq!(line_boundary_distance(&disk, &[c(0.0, 0.0)], &[c(0.0, 0.0)]), Err(GeomError::ZeroVector));
    }

    #[test]
    fn euclidean_distance_examples() {
        assert!((euclidean_boundary_distance(&Domain::disk(), &[c(0.0, 0.0)]).unwrap() - 1.0).abs() < 1e-15);
        let bidisc = Domain::bidisc();
        assert!((euclidean_boundary_distance(&bidisc, &[c(0.5, 0.0), c(0.0, 0.0)]).unwrap() - 0.5).abs() < 1e-15);
        let cone = Domain::pcone(1, 2.0).unwrap();
        let p = [c(0.0, 2.0), c(0.0, 0.0)];
        assert!((euclidean_boundary_distance(&cone, &p).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        // calculus cross-check: min_s sqrt((s-2)^2 + s^2) at s = 1
        let brute = (0..=20000)
            .map(|k| {
                let s = k as f64 * 1e-4;
                ((s - 2.0).powi(2) + s * s).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((brute - 2f64.sqrt()).abs() < 1e-7);
        let generic = euclidean_boundary_distance(&GenericView(&cone), &p).unwrap();
        assert!((generic - 2f64.sqrt()).abs() < 1e-6, "{generic}");
    }

    #[test]
    fn closed_forms_agree_with_generic_paths() {
        let cases: Vec<(Domain, Vec<C64>, Vec<C64>)> = vec![
            (Domain::unit_ball(2), vec![c(0.3, -0.2), c(0.1, 0.4)], vec![c(0.5, 1.0), c(-0.3, 0.2)]),
            (Domain::bidisc(), vec![c(0.3, -0.2), c(0.1, 0.4)], vec![c(0.5, 1.0), c(-0.3, 0.2)]),
            (Domain::halfplane(1).unwrap(), vec![c(0.3, 0.7)], vec![c(0.2, -1.0)]),
            (Domain::pcone(1, 2.0).unwrap(), vec![c(0.4, 1.5), c(0.3, -0.5)], vec![c(1.0, 0.3), c(-0.2, 0.6)]),
            (Domain::pcone(2, 2.0).unwrap(), vec![c(-0.4, 2.5), c(0.3, -0.5), c(0.9, 0.1)], vec![c(0.1, 0.3), c(-0.2, 0.6), c(0.4, 0.4)]),
        ];
        for (dom, p, v) in &cases {
            let fast = dom.slice_radius(p, v);
            let slow = GenericView(dom).slice_radius(p, v);
            assert!((fast - slow).abs() <= 1e-8 * fast, "{}: {fast} vs {slow}", dom.label());
            let fast = dom.boundary_distance(p);
            let slow = GenericView(dom).boundary_distance(p);
            assert!(slow >= fast - 1e-9 && slow - fast <= 1e-4 * fast, "{}: {fast} vs {slow}", dom.label());
        }
    }

    #[test]
    fn cone_foot_points_match_full_mesh() {
        use crate::rng::substream;
        use rand::Rng;
        let mut rng = substream(21, 0);
        for d in [1usize, 2, 3] {
            let cone = Domain::pcone(d, 2.0).unwrap();
            for _ in 0..300 {
                let zp = point::scale(&point::random_unit(&mut rng, d), rng.random_range(0.0..3.0));
                let mut p = vec![c(rng.random_range(-2.0..2.0), point::norm(&zp) + rng.random_range(-5.0..1.0f64).exp())];
                p.extend(zp);
                let v = point::random_unit(&mut rng, d + 1);
                let fast = cone.slice_radius(&p, &v);
                let slow = GenericView(&cone).slice_radius(&p, &v);
                if slow.is_finite() {
                    assert!((fast - slow).abs() <= 1e-8 * slow, "{p:?} {v:?}: {fast} vs {slow}");
                } else {
                    assert!(fast.is_infinite() || fast > 1e6);
                }
            }
        }
    }

    #[test]
    fn family_json_round_trip_and_rejection() {
        let fam: DomainFamily = serde_json::from_str(r#"{"family":"pcone","d":2,"p":2}"#).unwrap();
        assert_eq!(fam, DomainFamily::PNormCone { d: 2, p: 2.0 });
        assert_eq!(fam.build().unwrap().dim(), 3);
        let poly: DomainFamily = serde_json::from_str(
            r#"{"family":"poly_epigraph","d":1,"monomials":[{"coeff":1,"powers":[[2,2]]}]}"#,
        )
        .unwrap();
        assert_eq!(poly.build().unwrap().scaling_weights(), Some(&[0.25][..]));
        assert!(serde_json::from_str::<DomainFamily>(r#"{"family":"torus"}"#).is_err());
        assert!(serde_json::from_str::<DomainFamily>(r#"{"family":"ball","radius":1,"colour":3}"#).is_err());
        let bad = DomainFamily::ConvexPolynomialEpigraph {
            d: 1,
            monomials: vec![Monomial { coeff: 1.0, powers: vec![[2, 0]] }],
        };
        assert!(bad.build().is_err());
    }

    #[test]
    fn p_one_cone_is_flagged() {
        assert!(Domain::pcone(2, 1.0).unwrap().non_smooth_boundary());
        assert!(!Domain::pcone(2, 2.0).unwrap().non_smooth_boundary());
    }

    #[test]
    fn scaled_domain_matches_pushforward() {
        let e = Epigraph::homogeneous_polynomial(1, vec![Monomial { coeff: 1.0, powers: vec![[2, 2]] }]).unwrap();
        let base = Domain::Epigraph(e.clone());
        let scaled = Domain::Scaled { inner: Box::new(base.clone()), t: 3.0, weights: e.weights.clone() };
        let p = vec![c(0.2, 1.3), c(0.4, -0.6)];
        let gp = e.scale_point(3.0, &p);
        assert_eq!(base.contains(&p), scaled.contains(&gp));
        // exactly homogeneous F: the image is the same set
        assert!((scaled.defining_value(&gp) - base.defining_value(&gp)).abs() < 1e-12);
    }
}
