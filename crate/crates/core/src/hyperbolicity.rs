//! Gromov products, four-point δ over scale schedules, thin triangles and
//! the flat-boundary probes, with a threshold-based trend verdict.

use crate::domains::{normal_reach, scaling_group_apply, Domain, DomainOracle};
use crate::error::{GeomError, Result};
use crate::metric::{distance_lower, distance_upper, MetricBounds};
use crate::numeric::{gauss_legendre, linear_fit};
use crate::paths::{optimize_geodesic, GeodesicSettings, PolyCurve};
use crate::point::{self, CPoint, C64};
use crate::rng::{substream, TaskRng};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `(p|q)_o = ½(D(p,o) + D(o,q) − D(p,q))`.
pub fn gromov_product<P: ?Sized, F: Fn(&P, &P) -> f64>(dist: F, o: &P, p: &P, q: &P) -> f64 {
    0.5 * (dist(p, o) + dist(o, q) - dist(p, q))
}

/// Worst-case bracket of the Gromov product from interval distances.
pub fn gromov_product_interval<P: ?Sized, F: Fn(&P, &P) -> MetricBounds>(dist: F, o: &P, p: &P, q: &P) -> (f64, f64) {
    let (po, oq, pq) = (dist(p, o), dist(o, q), dist(p, q));
    (0.5 * (po.lower + oq.lower - pq.upper), 0.5 * (po.upper + oq.upper - pq.lower))
}

/// `min((x|z)_w, (z|y)_w) − (x|y)_w` for one labelling.
pub fn labelled_defect<P: ?Sized, F: Fn(&P, &P) -> f64>(dist: F, x: &P, y: &P, z: &P, w: &P) -> f64 {
    let xz = gromov_product(&dist, w, x, z);
    let zy = gromov_product(&dist, w, z, y);
    let xy = gromov_product(&dist, w, x, y);
    xz.min(zy) - xy
}

/// Four-point defect of one quadruple: half the gap between the two
/// largest of the pair sums `xy+zw`, `xz+yw`, `xw+yz`. Equals the maximum
/// of [`labelled_defect`] over all 24 labellings.
pub fn quadruple_delta<P, F: Fn(&P, &P) -> f64>(dist: F, q: &[P; 4]) -> f64 {
    let d = |i: usize, j: usize| dist(&q[i], &q[j]);
    let mut sums = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
    sums.sort_by(|a, b| b.total_cmp(a));
    (0.5 * (sums[0] - sums[1])).max(0.0)
}

/// Maximum four-point defect over quadruples, floored at 0.
pub fn four_point_delta<P, F: Fn(&P, &P) -> f64>(dist: F, quadruples: &[[P; 4]]) -> f64 {
    quadruples.iter().map(|q| quadruple_delta(&dist, q)).fold(0.0, f64::max)
}

/// Quadruple generator for scans. The same `index` and generator state are
/// used at every scale, so geometry is comparable across the schedule.
pub trait QuadrupleSampler: Sync {
    type Point: Clone + Send + Sync;
    fn sample(&self, scale: f64, index: usize, rng: &mut TaskRng) -> Result<[Self::Point; 4]>;
    /// Real coordinates for reports.
    fn coords(&self, p: &Self::Point) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourPointReport {
    pub scale_schedule: Vec<f64>,
    pub delta_per_scale: Vec<f64>,
    /// Real coordinates of the maximizing quadruple at each scale.
    pub witness: Vec<[Vec<f64>; 4]>,
    pub metric_used: String,
    pub seed: u64,
    pub quadruples_per_scale: usize,
}

pub(crate) fn check_schedule(scales: &[f64]) -> Result<()> {
    if scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) || scales.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(GeomError::InvalidParameter("schedule strictly increasing and positive".into()));
    }
    if scales.is_empty() {
        return Err(GeomError::InvalidParameter("empty schedule".into()));
    }
    Ok(())
}

/// Per-scale maximum four-point defect over `n` seeded quadruples.
pub fn four_point_scan<S, F>(dist: F, sampler: &S, scales: &[f64], n: usize, seed: u64, metric_used: &str) -> Result<FourPointReport>
where
    S: QuadrupleSampler,
    F: Fn(&S::Point, &S::Point) -> f64 + Sync,
{
    try_four_point_scan(|a, b| Ok(dist(a, b)), sampler, scales, n, seed, metric_used)
}

/// [`four_point_scan`] with a fallible distance; the first error aborts.
pub fn try_four_point_scan<S, F>(dist: F, sampler: &S, scales: &[f64], n: usize, seed: u64, metric_used: &str) -> Result<FourPointReport>
where
    S: QuadrupleSampler,
    F: Fn(&S::Point, &S::Point) -> Result<f64> + Sync,
{
    check_schedule(scales)?;
    if n == 0 {
        return Err(GeomError::InvalidParameter("need at least one quadruple".into()));
    }
    let mut delta_per_scale = Vec::with_capacity(scales.len());
    let mut witness = Vec::with_capacity(scales.len());
    for &scale in scales {
        let results: Vec<(f64, [S::Point; 4])> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut rng = substream(seed, k as u64);
                let quad = sampler.sample(scale, k, &mut rng)?;
                let mut d = [[0.0; 4]; 4];
                for i in 0..4 {
                    for j in i + 1..4 {
                        d[i][j] = dist(&quad[i], &quad[j])?;
                        d[j][i] = d[i][j];
                    }
                }
                let idx = [0usize, 1, 2, 3];
                Ok((quadruple_delta(|a: &usize, b: &usize| d[*a][*b], &idx), quad))
            })
            .collect::<Result<_>>()?;
        let mut best = 0;
        for (k, r) in results.iter().enumerate() {
            if r.0 > results[best].0 {
                best = k;
            }
        }
        let (delta, quad) = &results[best];
        delta_per_scale.push(delta.max(0.0));
        witness.push([sampler.coords(&quad[0]), sampler.coords(&quad[1]), sampler.coords(&quad[2]), sampler.coords(&quad[3])]);
    }
    Ok(FourPointReport {
        scale_schedule: scales.to_vec(),
        delta_per_scale,
        witness,
        metric_used: metric_used.into(),
        seed,
        quadruples_per_scale: n,
    })
}

/// Three points on the sphere `K(0, ·) = scale` of a unit ball, plus the
/// centre.
#[derive(Clone, Debug)]
pub struct BallSphereSampler {
    pub dim: usize,
}

impl QuadrupleSampler for BallSphereSampler {
    type Point = CPoint;

    fn sample(&self, scale: f64, _index: usize, rng: &mut TaskRng) -> Result<[CPoint; 4]> {
        let r = scale.tanh();
        let mut on_sphere = || point::scale(&point::random_unit(rng, self.dim), r);
        Ok([on_sphere(), on_sphere(), on_sphere(), vec![C64::new(0.0, 0.0); self.dim]])
    }

    fn coords(&self, p: &CPoint) -> Vec<f64> {
        point::to_real(p)
    }
}

/// Quadruples in the unit polydisc at product-distance `scale` from 0.
/// Index 0 is the planted flat witness
/// `(0,0), (tanh 2R, 0), (tanh R, tanh R), (tanh R, −tanh R)` with `R = scale`.
#[derive(Clone, Debug)]
pub struct PolydiscSampler {
    pub dim: usize,
    pub planted: bool,
}

pub fn bidisc_witness(r: f64) -> [CPoint; 4] {
    let (a, b) = (r.tanh(), (2.0 * r).tanh());
    let c = |x: f64| C64::new(x, 0.0);
    [vec![c(0.0), c(0.0)], vec![c(b), c(0.0)], vec![c(a), c(a)], vec![c(a), c(-a)]]
}

impl QuadrupleSampler for PolydiscSampler {
    type Point = CPoint;

    fn sample(&self, scale: f64, index: usize, rng: &mut TaskRng) -> Result<[CPoint; 4]> {
        if self.planted && index == 0 && self.dim >= 2 {
            let mut w = bidisc_witness(scale);
            for p in w.iter_mut() {
                p.resize(self.dim, C64::new(0.0, 0.0));
            }
            return Ok(w);
        }
        let mut one = || -> CPoint {
            let lead = rng.random_range(0..self.dim);
            (0..self.dim)
                .map(|j| {
                    let s = if j == lead { scale } else { scale * rng.random::<f64>() };
                    C64::from_polar(s.tanh(), rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect()
        };
        Ok([one(), one(), one(), vec![C64::new(0.0, 0.0); self.dim]])
    }

    fn coords(&self, p: &CPoint) -> Vec<f64> {
        point::to_real(p)
    }
}

/// Seeded template quadruple inside an epigraph, pushed by `g_t` with
/// `t = scale`.
#[derive(Clone, Debug)]
pub struct HomogeneousTemplateSampler {
    pub domain: Domain,
}

impl HomogeneousTemplateSampler {
    pub fn new(domain: Domain) -> Result<Self> {
        if domain.epigraph().is_none() {
            return Err(GeomError::NonHomogeneousFamily);
        }
        Ok(HomogeneousTemplateSampler { domain })
    }

    fn template_point(&self, rng: &mut TaskRng) -> CPoint {
        let e = self.domain.epigraph().expect("checked in constructor");
        let dir = point::random_unit(rng, e.d);
        let rad: f64 = rng.random();
        let zp = point::scale(&dir, rad);
        let height = e.f.eval(&zp) + (rng.random_range(-2.0..1.0f64)).exp();
        let mut z = Vec::with_capacity(e.d + 1);
        z.push(C64::new(rng.random_range(-1.0..1.0), height));
        z.extend(zp);
        z
    }
}

impl QuadrupleSampler for HomogeneousTemplateSampler {
    type Point = CPoint;

    fn sample(&self, scale: f64, _index: usize, rng: &mut TaskRng) -> Result<[CPoint; 4]> {
        let t: [CPoint; 4] = std::array::from_fn(|_| self.template_point(rng));
        let mut out: [CPoint; 4] = Default::default();
        for (o, p) in out.iter_mut().zip(&t) {
            *o = scaling_group_apply(&self.domain, scale, p)?;
        }
        Ok(out)
    }

    fn coords(&self, p: &CPoint) -> Vec<f64> {
        point::to_real(p)
    }
}

/// `k̂`-length of the straight segment `[a, b]` by 8-point Gauss rule.
pub fn chord_khat_length<D: DomainOracle + ?Sized>(dom: &D, a: &[C64], b: &[C64]) -> f64 {
    let v = point::sub(b, a);
    if point::is_zero(&v) {
        return 0.0;
    }
    gauss_legendre(8)
        .iter()
        .map(|(s, w)| w * crate::metric::khat_unchecked(dom, &point::lerp(a, b, *s), &v))
        .sum()
}

/// Thinness of the surrogate-geodesic triangle `pqr`: the largest distance
/// from a node of one side to the union of the other two. Node distances
/// are straight-chord `k̂` lengths.
pub fn thin_triangle_delta<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], q: &[C64], r: &[C64], settings: &GeodesicSettings) -> Result<f64> {
    let sides: Vec<PolyCurve> = [(p, q), (q, r), (r, p)]
        .iter()
        .map(|(a, b)| optimize_geodesic(dom, a, b, settings).map(|x| x.0))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (i, side) in sides.iter().enumerate() {
        for x in side.nodes() {
            let nearest = sides
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, s)| s.nodes())
                .map(|y| chord_khat_length(dom, x, y))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTable {
    /// `(t, certified lower bound on K(σ_x(t), σ_y(t)))`.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of the lower bound against `t`.
    pub slope: f64,
}

fn normal_ray_points<D: DomainOracle + ?Sized>(dom: &D, x: &[C64], ts: &[f64]) -> Result<Vec<CPoint>> {
    let ray = normal_reach(dom, x)?;
    let eps = ray.eps.min(1.0);
    Ok(ts.iter().map(|t| ray.point_at(eps * (-t).exp())).collect())
}

/// Certified lower bounds between `σ_x(t)` and `σ_y(t)` along the schedule.
pub fn boundary_divergence_probe<D: DomainOracle + ?Sized>(dom: &D, x: &[C64], y: &[C64], ts: &[f64]) -> Result<DivergenceTable> {
    check_schedule(ts)?;
    if point::dist(x, y) == 0.0 {
        return Err(GeomError::IdenticalBoundaryPoints);
    }
    let sx = normal_ray_points(dom, x, ts)?;
    let sy = normal_ray_points(dom, y, ts)?;
    let rows: Vec<(f64, f64)> = ts
        .iter()
        .zip(sx.iter().zip(&sy))
        .map(|(t, (a, b))| Ok((*t, distance_lower(dom, a, b)?.0)))
        .collect::<Result<_>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
    let slope = if rows.len() >= 2 { linear_fit(&xs, &ys).0 } else { 0.0 };
    Ok(DivergenceTable { rows, slope })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatShadowingReport {
    /// `(t, upper bound on K(σ_x(t), σ_y(t)))`.
    pub rows: Vec<(f64, f64)>,
    pub ratio: f64,
    pub bounded: bool,
    pub in_flat: bool,
    pub sup_gap: f64,
}

/// Ratio `last/first` at or below which the probe reports bounded.
pub const FLAT_BOUNDED_RATIO: f64 = 1.2;

/// Whether the closed unit disc `{x + ζ(y−x) : |ζ| ≤ 1}` lies in `∂Ω`.
pub fn in_common_flat<D: DomainOracle + ?Sized>(dom: &D, x: &[C64], y: &[C64]) -> bool {
    let v = point::sub(y, x);
    let scale = 1.0 + point::norm(x) + point::norm(y);
    for i in 0..=8 {
        for k in 0..16 {
            let zeta = C64::from_polar(i as f64 / 8.0, std::f64::consts::TAU * k as f64 / 16.0);
            if dom.defining_value(&point::axpy(x, zeta, &v)).abs() > 1e-9 * scale {
                return false;
            }
        }
    }
    true
}

/// Upper bounds on `K(σ_x(t), σ_y(t))` along the schedule for `x, y` in a
/// common boundary flat. With `require_flat` false, pairs outside a flat
/// are measured too and flagged.
pub fn flat_shadowing_probe<D: DomainOracle + ?Sized>(
    dom: &D,
    x: &[C64],
    y: &[C64],
    ts: &[f64],
    settings: &GeodesicSettings,
    require_flat: bool,
) -> Result<FlatShadowingReport> {
    check_schedule(ts)?;
    let in_flat = point::dist(x, y) == 0.0 || in_common_flat(dom, x, y);
    if require_flat && !in_flat {
        return Err(GeomError::NotInFlat);
    }
    let sx = normal_ray_points(dom, x, ts)?;
    let sy = normal_ray_points(dom, y, ts)?;
    let rows: Vec<(f64, f64)> = ts
        .iter()
        .zip(sx.iter().zip(&sy))
        .map(|(t, (a, b))| Ok((*t, distance_upper(dom, a, b, settings)?)))
        .collect::<Result<_>>()?;
    let first = rows[0].1;
    let last = rows[rows.len() - 1].1;
    let ratio = if first > 0.0 { last / first } else if last > 0.0 { f64::INFINITY } else { 1.0 };
    let sup_gap = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(FlatShadowingReport { rows, ratio, bounded: ratio <= FLAT_BOUNDED_RATIO, in_flat, sup_gap })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Fitted δ increase per doubling of scale above which δ is growing.
    pub slope: f64,
    /// `δ(last)/δ(first)` at or below which δ is bounded-consistent.
    pub bounded_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { slope: 0.25, bounded_ratio: 1.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundedConsistent,
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::BoundedConsistent => "bounded-consistent",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityVerdict {
    pub verdict: Verdict,
    pub growth_ratio: f64,
    pub slope_per_doubling: f64,
    pub thresholds: Thresholds,
}

pub fn growth_ratio(deltas: &[f64]) -> f64 {
    let (first, last) = (deltas[0], deltas[deltas.len() - 1]);
    if first > 0.0 {
        last / first
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Trend classification from a scale schedule and per-scale δ.
pub fn verdict_from(scales: &[f64], deltas: &[f64], thresholds: Thresholds) -> Result<HyperbolicityVerdict> {
    if scales.len() < 2 || deltas.len() != scales.len() {
        return Err(GeomError::TooFewScales);
    }
    let xs: Vec<f64> = scales.iter().map(|s| s.log2()).collect();
    let (slope, _) = linear_fit(&xs, deltas);
    let ratio = growth_ratio(deltas);
    let verdict = if slope > thresholds.slope {
        Verdict::Growing
    } else if ratio <= thresholds.bounded_ratio {
        Verdict::BoundedConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(HyperbolicityVerdict { verdict, growth_ratio: ratio, slope_per_doubling: slope, thresholds })
}

pub fn verdict(report: &FourPointReport, thresholds: Thresholds) -> Result<HyperbolicityVerdict> {
    verdict_from(&report.scale_schedule, &report.delta_per_scale, thresholds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::exact_distance;

    fn real_line(a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    #[test]
    fn gromov_product_examples() {
        let disk = Domain::disk();
        let d = |a: &[C64], b: &[C64]| exact_distance(&disk, a, b).unwrap();
        let o = vec![C64::new(0.1, 0.2)];
        let p = vec![C64::new(-0.4, 0.3)];
        let q = [C64::new(0.5, -0.6)];
        assert!((gromov_product(d, &o[..], &p[..], &p[..]) - d(&o, &p)).abs() < 1e-14);
        assert!(gromov_product(d, &o[..], &o[..], &q[..]).abs() < 1e-14);
        let bidisc = Domain::bidisc();
        let db = |a: &[C64], b: &[C64]| exact_distance(&bidisc, a, b).unwrap();
        let r = 1.7f64;
        let z = C64::new(0.0, 0.0);
        let t = C64::new(r.tanh(), 0.0);
        let val = gromov_product(db, &[z, z][..], &[t, z][..], &[z, t][..]);
        assert!((val - r / 2.0).abs() < 1e-12);
    }

    #[test]
    fn real_line_is_zero_hyperbolic() {
        let quads = [[0.0, 1.0, 2.5, 7.0], [3.0, -1.0, 4.0, 0.5]];
        assert_eq!(four_point_delta(real_line, &quads), 0.0);
        assert_eq!(four_point_delta(real_line, &[[1.0, 1.0, 3.0, 5.0]]), 0.0);
    }

    #[test]
    fn bidisc_witness_gives_r() {
        let bidisc = Domain::bidisc();
        let d = |a: &CPoint, b: &CPoint| exact_distance(&bidisc, a, b).unwrap();
        for r in [1.0, 2.0, 4.0, 8.0] {
            let w = bidisc_witness(r);
            assert!(four_point_delta(d, std::slice::from_ref(&w)) >= r - 1e-9);
        }
    }

    #[test]
    fn canonical_delta_is_max_over_labellings() {
        let mut rng = substream(5, 0);
        let ball = Domain::unit_ball(2);
        let d = |a: &CPoint, b: &CPoint| exact_distance(&ball, a, b).unwrap();
        for _ in 0..100 {
            let q: [CPoint; 4] = std::array::from_fn(|_| point::scale(&point::random_unit(&mut rng, 2), rng.random_range(0.0..0.99)));
            let mut best = f64::NEG_INFINITY;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for e in 0..4 {
                            let mut idx = [a, b, c, e];
                            idx.sort();
                            if idx != [0, 1, 2, 3] {
                                continue;
                            }
                            best = best.max(labelled_defect(d, &q[a], &q[b], &q[c], &q[e]));
                        }
                    }
                }
            }
            assert!((best.max(0.0) - quadruple_delta(d, &q)).abs() < 1e-9);
        }
    }

    #[test]
    fn interval_gromov_product_brackets_exact() {
        let disk = Domain::disk();
        let s = GeodesicSettings::default();
        let o = [C64::new(0.0, 0.0)];
        let p = [C64::new(0.5, 0.2)];
        let q = [C64::new(-0.3, 0.6)];
        let exact = gromov_product(|a: &[C64], b: &[C64]| exact_distance(&disk, a, b).unwrap(), &o[..], &p[..], &q[..]);
        let (lo, hi) = gromov_product_interval(
            |a: &[C64], b: &[C64]| crate::metric::distance_interval(&disk, a, b, &s).unwrap(),
            &o[..],
            &p[..],
            &q[..],
        );
        assert!(lo <= exact && exact <= hi);
    }

    #[test]
    fn verdict_examples() {
        let bidisc = Domain::bidisc();
        let d = |a: &CPoint, b: &CPoint| exact_distance(&bidisc, a, b).unwrap();
        let rep = four_point_scan(d, &PolydiscSampler { dim: 2, planted: true }, &[2.0, 4.0, 8.0], 50, 1, "exact").unwrap();
        for (s, dl) in rep.scale_schedule.iter().zip(&rep.delta_per_scale) {
            assert!(*dl >= s - 1e-9);
        }
        assert_eq!(verdict(&rep, Thresholds::default()).unwrap().verdict, Verdict::Growing);
        let flat = verdict_from(&[1.0, 2.0, 4.0], &[0.5, 0.52, 0.53], Thresholds::default()).unwrap();
        assert_eq!(flat.verdict, Verdict::BoundedConsistent);
        assert_eq!(verdict_from(&[1.0], &[0.5], Thresholds::default()), Err(GeomError::TooFewScales));
    }

    #[test]
    fn ball_scan_plateaus() {
        let ball = Domain::unit_ball(2);
        let d = |a: &CPoint, b: &CPoint| exact_distance(&ball, a, b).unwrap();
        let rep = four_point_scan(d, &BallSphereSampler { dim: 2 }, &[2.0, 4.0, 8.0], 200, 7, "exact").unwrap();
        let v = verdict(&rep, Thresholds::default()).unwrap();
        assert!(v.growth_ratio <= 1.2, "{rep:?}");
        assert_eq!(v.verdict, Verdict::BoundedConsistent);
    }

    #[test]
    fn thin_triangle_examples() {
        let disk = Domain::disk();
        let s = GeodesicSettings::default();
        let r = |x: f64| vec![C64::new(x, 0.0)];
        assert!(thin_triangle_delta(&disk, &r(-0.5), &r(0.0), &r(0.5), &s).unwrap() <= 0.05);
        let z = r(0.2);
        assert_eq!(thin_triangle_delta(&disk, &z, &z, &z, &s).unwrap(), 0.0);
        // equilateral triangle with exact side length 4
        let side = |rho: f64| exact_distance(&disk, &[C64::new(rho, 0.0)], &[C64::from_polar(rho, std::f64::consts::TAU / 3.0)]).unwrap();
        let (mut lo, mut hi) = (0.0, 0.9999);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if side(mid) < 4.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v: Vec<CPoint> = (0..3).map(|k| vec![C64::from_polar(lo, std::f64::consts::TAU * k as f64 / 3.0)]).collect();
        let delta = thin_triangle_delta(&disk, &v[0], &v[1], &v[2], &s).unwrap();
        assert!(delta <= 2.0 * 3f64.ln() + 0.05, "{delta}");
    }

    #[test]
    fn divergence_examples() {
        let ball = Domain::unit_ball(2);
        let z = C64::new(0.0, 0.0);
        let x = [C64::new(1.0, 0.0), z];
        let y = [C64::new(-1.0, 0.0), z];
        let ts: Vec<f64> = (1..=6).map(f64::from).collect();
        let tab = boundary_divergence_probe(&ball, &x, &y, &ts).unwrap();
        assert!(tab.slope >= 0.2, "{tab:?}");
        assert_eq!(boundary_divergence_probe(&ball, &x, &x, &ts), Err(GeomError::IdenticalBoundaryPoints));
    }

    #[test]
    fn flat_probe_examples() {
        let s = GeodesicSettings::default();
        let ts: Vec<f64> = (1..=6).map(f64::from).collect();
        let z = C64::new(0.0, 0.0);
        let bidisc = Domain::bidisc();
        let x = [C64::new(1.0, 0.0), z];
        let y = [C64::new(1.0, 0.0), C64::new(0.5, 0.0)];
        let rep = flat_shadowing_probe(&bidisc, &x, &y, &ts, &s, true).unwrap();
        assert!(rep.in_flat && rep.bounded, "{rep:?}");
        let ball = Domain::unit_ball(2);
        let bx = [C64::new(1.0, 0.0), z];
        let by = [z, C64::new(1.0, 0.0)];
        assert_eq!(flat_shadowing_probe(&ball, &bx, &by, &ts, &s, true), Err(GeomError::NotInFlat));
        let rep = flat_shadowing_probe(&ball, &bx, &by, &ts, &s, false).unwrap();
        assert!(!rep.in_flat && !rep.bounded, "{rep:?}");
        let rep = flat_shadowing_probe(&bidisc, &x, &x, &ts, &s, true).unwrap();
        assert_eq!(rep.sup_gap, 0.0);
    }
}
