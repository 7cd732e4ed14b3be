use super::normal::boundary_residual_ok;
use super::{check_dim, horizon, DomainOracle};
use crate::error::{GeomError, Result};
use crate::numeric::linear_fit;
use crate::point::{self, CPoint, C64};
use crate::rng::substream;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::collections::VecDeque;
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiniteType {
    /// Least total order `|α|+|β|` with a nonvanishing coefficient.
    Order(u32),
    NoTypeUpToCap,
}

/// Sampling radius of the ζ-polydisc.
pub const TYPE_STEP: f64 = 1e-2;
/// Coefficient magnitude treated as nonzero.
pub const TYPE_TOL: f64 = 1e-6;

/// Smallest mixed order of the Taylor expansion of `ζ ↦ r(base + ζv)`.
///
/// The coefficient of `ζ^a ζ̄^b` contributes `ρ^{a+b} e^{i(a−b)φ}` in polar
/// coordinates, so each angular frequency is fitted separately as a
/// polynomial in the radius. Orders a few beyond the cap are included in the
/// fit to absorb truncation.
pub fn finite_type_probe<D: DomainOracle + ?Sized>(
    dom: &D,
    base: &[C64],
    line_dir: &[C64],
    order_cap: u32,
) -> Result<FiniteType> {
    check_dim(dom, base)?;
    check_dim(dom, line_dir)?;
    if point::is_zero(line_dir) {
        return Err(GeomError::ZeroVector);
    }
    if dom.singular_at(base) {
        return Err(GeomError::SingularBoundaryPoint);
    }
    boundary_residual_ok(dom, base).map_err(|residual| GeomError::BasePointNotOnBoundary { residual })?;

    let top = order_cap as usize + 4;
    let n_rad = top + 3;
    let n_ang = 4 * (top + 1);
    let radii: Vec<f64> = (1..=n_rad).map(|m| m as f64 / n_rad as f64).collect();
    let mut buf = base.to_vec();
    let r0 = dom.defining_value(base);
    // samples[m][j] = g(h u_m e^{iφ_j}) − g(0)
    let samples: Vec<Vec<f64>> = radii
        .iter()
        .map(|u| {
            (0..n_ang)
                .map(|j| {
                    let zeta = C64::from_polar(TYPE_STEP * u, TAU * j as f64 / n_ang as f64);
                    point::axpy_into(&mut buf, base, zeta, line_dir);
                    dom.defining_value(&buf) - r0
                })
                .collect()
        })
        .collect();
    let gmax = samples.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));

    let mut least: Option<u32> = None;
    for k in -(top as i64)..=(top as i64) {
        let orders: Vec<usize> = (k.unsigned_abs() as usize..=top).step_by(2).filter(|n| *n >= 1).collect();
        if orders.is_empty() {
            continue;
        }
        let rhs: Vec<C64> = samples
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, g)| C64::from_polar(*g, -(k as f64) * TAU * j as f64 / n_ang as f64))
                    .sum::<C64>()
                    / n_ang as f64
            })
            .collect();
        let a = DMatrix::from_fn(n_rad, orders.len(), |m, j| radii[m].powi(orders[j] as i32));
        let svd = a.svd(true, true);
        let re = svd.solve(&DVector::from_iterator(n_rad, rhs.iter().map(|z| z.re)), 1e-14);
        let im = svd.solve(&DVector::from_iterator(n_rad, rhs.iter().map(|z| z.im)), 1e-14);
        let (Ok(re), Ok(im)) = (re, im) else { continue };
        for (j, &n) in orders.iter().enumerate() {
            if n > order_cap as usize {
                break;
            }
            let hn = TYPE_STEP.powi(n as i32);
            let coeff = C64::new(re[j], im[j]).norm() / hn;
            let noise = 1e4 * f64::EPSILON * gmax / hn;
            if coeff > TYPE_TOL.max(noise) {
                least = Some(least.map_or(n as u32, |l| l.min(n as u32)));
                break;
            }
        }
    }
    Ok(least.map_or(FiniteType::NoTypeUpToCap, FiniteType::Order))
}

/// Fitted inequality `δ_Ω(p;v) ≤ C δ_Ω(p)^{1/L}` over an annulus.
#[derive(Clone, Debug, PartialEq)]
pub struct LConvexityEstimate {
    pub c: f64,
    pub l: f64,
    /// Slope of the log-log fit fell below [`L_UNBOUNDED_SLOPE`].
    pub l_unbounded: bool,
    pub sample_region: (f64, f64),
    pub residual: f64,
    pub samples_used: usize,
}

pub const L_UNBOUNDED_SLOPE: f64 = 0.05;
const MIN_L_SAMPLES: usize = 10;
const L_RANDOM_DIRECTIONS: usize = 16;

/// Log-log fit of `max_v δ_Ω(p;v)` against `δ_Ω(p)` over seeded samples in
/// the annulus `r ≤ ‖p‖ ≤ R` about the origin.
pub fn l_convexity_fit<D: DomainOracle + ?Sized>(
    dom: &D,
    annulus: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<LConvexityEstimate> {
    let centre = vec![C64::new(0.0, 0.0); dom.dim()];
    l_convexity_fit_about(dom, &centre, annulus, samples, seed)
}

/// As [`l_convexity_fit`] with the annulus centred at `centre`. Radii are
/// drawn log-uniformly in the distance to the outer sphere.
pub fn l_convexity_fit_about<D: DomainOracle + ?Sized>(
    dom: &D,
    centre: &[C64],
    annulus: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<LConvexityEstimate> {
    check_dim(dom, centre)?;
    let (r_in, r_out) = annulus;
    if !(0.0 <= r_in && r_in < r_out) {
        return Err(GeomError::InvalidParameter("annulus needs 0 <= r < R".into()));
    }
    let d = dom.dim();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..samples {
        let mut rng = substream(seed, i as u64);
        let u: f64 = rng.random();
        let rho = r_out - (r_out - r_in) * 10f64.powf(-3.0 * u);
        let dir = point::random_unit(&mut rng, d);
        let p = point::axpy(centre, C64::new(rho, 0.0), &dir);
        if !dom.contains(&p) {
            continue;
        }
        let dp = dom.boundary_distance(&p);
        if !(dp > 0.0) || !dp.is_finite() {
            continue;
        }
        let mut dirs: Vec<CPoint> = (0..L_RANDOM_DIRECTIONS).map(|_| point::random_unit(&mut rng, d)).collect();
        dirs.extend(complex_tangent_basis(&dom.gradient(&p)));
        let best = dirs
            .iter()
            .map(|v| dom.slice_radius(&p, v) * point::norm(v))
            .fold(0.0f64, f64::max);
        if !best.is_finite() || best > horizon(&p) {
            continue;
        }
        xs.push(dp.ln());
        ys.push(best.ln());
    }
    if xs.len() < MIN_L_SAMPLES {
        return Err(GeomError::InsufficientInteriorSamples { found: xs.len(), needed: MIN_L_SAMPLES });
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    let c = intercept.exp();
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).exp() - 1.0)
        .fold(0.0f64, f64::max);
    let l_unbounded = slope < L_UNBOUNDED_SLOPE;
    Ok(LConvexityEstimate {
        c,
        l: if l_unbounded { f64::INFINITY } else { 1.0 / slope },
        l_unbounded,
        sample_region: annulus,
        residual,
        samples_used: xs.len(),
    })
}

/// Orthonormal basis of `{v : Σ conj(g_j) v_j = 0}`, the complex tangent space for
/// the packed real gradient `g`.
fn complex_tangent_basis(g: &[C64]) -> Vec<CPoint> {
    let d = g.len();
    let gn = point::norm(g);
    if d < 2 || gn == 0.0 {
        return Vec::new();
    }
    // ∂r/∂z_j = conj(g_j)/2, so the tangent condition is ⟨g, v⟩ = 0
    let unit = point::scale(g, 1.0 / gn);
    let mut basis: Vec<CPoint> = vec![unit];
    for axis in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[axis] = C64::new(1.0, 0.0);
        for b in &basis {
            let h = point::hermitian(b, &e);
            e = point::axpy(&e, -h, b);
        }
        let n = point::norm(&e);
        if n > 1e-8 {
            basis.push(point::scale(&e, 1.0 / n));
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceTopology {
    Empty,
    Connected,
    Disconnected,
}

/// Rasterizes `Ω ∩ (p + ℂv)` on a `samples × samples` grid and counts
/// 4-connected components.
pub fn c_convex_slice_check<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], v: &[C64], samples: usize) -> SliceTopology {
    let vn = point::norm(v);
    if vn == 0.0 || samples == 0 || p.len() != dom.dim() || v.len() != dom.dim() {
        return SliceTopology::Empty;
    }
    let window = match dom.bounding_radius() {
        Some(b) => (b + point::norm(p)) / vn,
        None => 10.0 * (1.0 + point::norm(p)) / vn,
    };
    let n = samples;
    let mut buf = p.to_vec();
    let cell = |i: usize| -window + 2.0 * window * (i as f64 + 0.5) / n as f64;
    let mut inside = vec![false; n * n];
    for a in 0..n {
        for b in 0..n {
            point::axpy_into(&mut buf, p, C64::new(cell(a), cell(b)), v);
            inside[a * n + b] = dom.contains(&buf);
        }
    }
    let mut seen = vec![false; n * n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n * n {
        if !inside[start] || seen[start] {
            continue;
        }
        components += 1;
        if components > 1 {
            return SliceTopology::Disconnected;
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let (a, b) = (idx / n, idx % n);
            let mut visit = |na: usize, nb: usize| {
                let j = na * n + nb;
                if inside[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if a > 0 {
                visit(a - 1, b);
            }
            if a + 1 < n {
                visit(a + 1, b);
            }
            if b > 0 {
                visit(a, b - 1);
            }
            if b + 1 < n {
                visit(a, b + 1);
            }
        }
    }
    if components == 0 {
        SliceTopology::Empty
    } else {
        SliceTopology::Connected
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{projective_transform, Direction, Domain, Epigraph, Monomial};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn poly(a: u32) -> Domain {
        Domain::Epigraph(Epigraph::homogeneous_polynomial(1, vec![Monomial { coeff: 1.0, powers: vec![[a, a]] }]).unwrap())
    }

    #[test]
    fn finite_type_examples() {
        let base = [c(0.0, 1.0), c(1.0, 0.0)];
        let t = finite_type_probe(&poly(1), &base, &[c(0.0, 0.0), c(1.0, 0.0)], 8).unwrap();
        assert_eq!(t, FiniteType::Order(1));
        // complex tangent line of |z₁|⁴ − Im z₀ at (i, 1)
        let t = finite_type_probe(&poly(2), &base, &[c(0.0, 4.0), c(1.0, 0.0)], 8).unwrap();
        assert!(matches!(t, FiniteType::Order(n) if n <= 4), "{t:?}");
        let t = finite_type_probe(&Domain::bidisc(), &[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)], 8).unwrap();
        assert_eq!(t, FiniteType::NoTypeUpToCap);
    }

    #[test]
    fn finite_type_rejects_interior_base() {
        assert!(matches!(
            finite_type_probe(&poly(1), &[c(0.0, 2.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)], 8),
            Err(GeomError::BasePointNotOnBoundary { .. })
        ));
    }

    #[test]
    fn even_cone_has_finite_type_off_tip() {
        let cone = Domain::pcone(2, 4.0).unwrap();
        let z1 = c(0.6, 0.2);
        let z2 = c(-0.3, 0.5);
        let f = (z1.norm().powi(4) + z2.norm().powi(4)).powf(0.25);
        let base = [c(0.3, f), z1, z2];
        let tangent = [c(0.0, 0.0), z2.conj() * z2.norm_sqr(), -z1.conj() * z1.norm_sqr()];
        assert!(matches!(finite_type_probe(&cone, &base, &tangent, 8).unwrap(), FiniteType::Order(_)));
    }

    #[test]
    fn l_convexity_examples() {
        let est = l_convexity_fit(&Domain::unit_ball(2), (0.5, 1.0), 500, 3).unwrap();
        assert!((est.l - 2.0).abs() <= 0.3, "{est:?}");
        let est = l_convexity_fit(&Domain::halfplane(1).unwrap(), (0.5, 1.0), 200, 3).unwrap();
        assert!((est.l - 1.0).abs() <= 0.1, "{est:?}");
        let est = l_convexity_fit(&Domain::bidisc(), (0.5, 2f64.sqrt()), 300, 3).unwrap();
        assert!(est.l_unbounded || est.residual > 1.0, "{est:?}");
    }

    #[test]
    fn l_convexity_needs_samples() {
        let err = l_convexity_fit(&Domain::unit_ball(2), (2.0, 3.0), 50, 1).unwrap_err();
        assert_eq!(err, GeomError::InsufficientInteriorSamples { found: 0, needed: 10 });
    }

    #[test]
    fn slice_examples() {
        let ball = Domain::unit_ball(2);
        let v = [c(0.3, 0.1), c(-0.2, 0.7)];
        assert_eq!(c_convex_slice_check(&ball, &[c(0.2, 0.0), c(0.1, 0.1)], &v, 64), SliceTopology::Connected);
        assert_eq!(c_convex_slice_check(&ball, &[c(3.0, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)], 64), SliceTopology::Empty);
    }

    #[test]
    fn projective_image_slices_are_never_disconnected() {
        let img = Domain::projective_cone(1);
        let mut rng = substream(21, 0);
        let mut nonempty = 0;
        for _ in 0..200 {
            let z0 = c(rng.random_range(-2.0..2.0), rng.random_range(1.5..4.0));
            let z1 = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let w = projective_transform(&[z0, z1], Direction::Forward).unwrap();
            let v = point::random_unit(&mut rng, 2);
            let topo = c_convex_slice_check(&img, &w, &v, 48);
            assert_ne!(topo, SliceTopology::Disconnected);
            nonempty += usize::from(topo == SliceTopology::Connected);
        }
        assert!(nonempty > 150);
    }
}
