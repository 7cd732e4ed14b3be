//! Hilbert metric `½ log` of the cross-ratio on bounded real convex bodies.

use crate::error::{GeomError, Result};
use crate::hyperbolicity::{try_four_point_scan, FourPointReport, QuadrupleSampler};
use crate::point;
use crate::rng::TaskRng;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Body description as it appears in configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "body", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    /// Euclidean unit disk.
    Disk,
    Ball { dim: usize },
    Cube { dim: usize },
    Polygon { vertices: Vec<[f64; 2]> },
    RegularPolygon { sides: usize },
}

impl BodySpec {
    pub fn build(&self) -> Result<RealConvexBody> {
        match self {
            BodySpec::Disk => RealConvexBody::ball(2),
            BodySpec::Ball { dim } => RealConvexBody::ball(*dim),
            BodySpec::Cube { dim } => RealConvexBody::cube(*dim),
            BodySpec::Polygon { vertices } => RealConvexBody::polygon(vertices),
            BodySpec::RegularPolygon { sides } => RealConvexBody::regular_polygon(*sides),
        }
    }
}

/// Bounded open convex body in `ℝ^dim`.
#[derive(Clone, Debug, PartialEq)]
pub enum RealConvexBody {
    /// Unit Euclidean ball.
    Ball { dim: usize },
    /// `(−1, 1)^dim`.
    Cube { dim: usize },
    /// `{x : ⟨nᵢ, x⟩ < cᵢ}` with unit normals.
    Polygon { vertices: Vec<[f64; 2]>, normals: Vec<[f64; 2]>, offsets: Vec<f64> },
    /// `{A x + b : x ∈ inner}`.
    Affine { inner: Box<RealConvexBody>, a: DMatrix<f64>, a_inv: DMatrix<f64>, b: DVector<f64> },
}

impl RealConvexBody {
    pub fn ball(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GeomError::InvalidParameter("body needs dim >= 1".into()));
        }
        Ok(RealConvexBody::Ball { dim })
    }

    pub fn cube(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GeomError::InvalidParameter("body needs dim >= 1".into()));
        }
        Ok(RealConvexBody::Cube { dim })
    }

    /// Strictly convex polygon from its vertices in either orientation.
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeomError::InvalidParameter("polygon needs at least 3 vertices".into()));
        }
        let cross = |i: usize| {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        };
        let sign = cross(0).signum();
        if sign == 0.0 || (0..n).any(|i| cross(i).signum() != sign) {
            return Err(GeomError::InvalidParameter("polygon vertices must be strictly convex".into()));
        }
        let mut verts = vertices.to_vec();
        if sign < 0.0 {
            verts.reverse();
        }
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (verts[i], verts[(i + 1) % n]);
            let e = [b[0] - a[0], b[1] - a[1]];
            let len = e[0].hypot(e[1]);
            let nrm = [e[1] / len, -e[0] / len];
            normals.push(nrm);
            offsets.push(nrm[0] * a[0] + nrm[1] * a[1]);
        }
        Ok(RealConvexBody::Polygon { vertices: verts, normals, offsets })
    }

    /// Regular polygon inscribed in the unit circle with a vertex on the
    /// positive first axis.
    pub fn regular_polygon(sides: usize) -> Result<Self> {
        let verts: Vec<[f64; 2]> = (0..sides)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / sides as f64;
                [th.cos(), th.sin()]
            })
            .collect();
        Self::polygon(&verts)
    }

    /// Image under `x ↦ A x + b`; `A` must be invertible.
    pub fn affine_image(&self, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let d = self.dim();
        if a.nrows() != d || a.ncols() != d || b.len() != d {
            return Err(GeomError::DimensionMismatch { expected: d, found: a.nrows() });
        }
        let a_inv = a.clone().try_inverse().ok_or_else(|| GeomError::InvalidParameter("affine map is singular".into()))?;
        Ok(RealConvexBody::Affine { inner: Box::new(self.clone()), a, a_inv, b })
    }

    pub fn dim(&self) -> usize {
        match self {
            RealConvexBody::Ball { dim } | RealConvexBody::Cube { dim } => *dim,
            RealConvexBody::Polygon { .. } => 2,
            RealConvexBody::Affine { inner, .. } => inner.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            RealConvexBody::Ball { .. } => x.iter().map(|c| c * c).sum::<f64>() < 1.0,
            RealConvexBody::Cube { .. } => x.iter().all(|c| c.abs() < 1.0),
            RealConvexBody::Polygon { normals, offsets, .. } => {
                normals.iter().zip(offsets).all(|(n, c)| n[0] * x[0] + n[1] * x[1] < *c)
            }
            RealConvexBody::Affine { inner, a_inv, b, .. } => {
                let y = a_inv * (DVector::from_column_slice(x) - b);
                inner.contains(y.as_slice())
            }
        }
    }

    /// A point inside the body used as sampling centre.
    pub fn centre(&self) -> Vec<f64> {
        match self {
            RealConvexBody::Ball { dim } | RealConvexBody::Cube { dim } => vec![0.0; *dim],
            RealConvexBody::Polygon { vertices, .. } => {
                let n = vertices.len() as f64;
                let sx: f64 = vertices.iter().map(|v| v[0]).sum();
                let sy: f64 = vertices.iter().map(|v| v[1]).sum();
                vec![sx / n, sy / n]
            }
            RealConvexBody::Affine { inner, a, b, .. } => (a * DVector::from_vec(inner.centre()) + b).as_slice().to_vec(),
        }
    }

    /// Radius of a Euclidean ball about the origin containing the body.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            RealConvexBody::Ball { .. } => 1.0,
            RealConvexBody::Cube { dim } => (*dim as f64).sqrt(),
            RealConvexBody::Polygon { vertices, .. } => vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max),
            RealConvexBody::Affine { inner, a, b, .. } => a.norm() * inner.bounding_radius() + b.norm(),
        }
    }

    /// Distance from interior `x` to the boundary along unit `u`, by
    /// bisection carried to floating-point resolution.
    pub fn ray_exit(&self, x: &[f64], u: &[f64]) -> f64 {
        let at = |s: f64| x.iter().zip(u).map(|(a, b)| a + s * b).collect::<Vec<_>>();
        let mut lo = 0.0;
        let mut hi = 2.0 * self.bounding_radius() + point::real_norm(x) + 1.0;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.contains(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Endpoints `(a, b)` of the chord through `x` and `y`, ordered `a, x, y, b`.
    pub fn chord(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let v: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let n = point::real_norm(&v);
        if !(n > 0.0) {
            return Err(GeomError::DegenerateChord);
        }
        let u: Vec<f64> = v.iter().map(|c| c / n).collect();
        let back: Vec<f64> = u.iter().map(|c| -c).collect();
        let sa = self.ray_exit(x, &back);
        let sb = self.ray_exit(y, &u);
        let a = x.iter().zip(&u).map(|(p, d)| p - sa * d).collect();
        let b = y.iter().zip(&u).map(|(p, d)| p + sb * d).collect();
        Ok((a, b))
    }
}

/// `H(x, y) = ½ log((‖a−y‖‖b−x‖)/(‖a−x‖‖b−y‖))` with chord endpoints
/// ordered `a, x, y, b`.
pub fn hilbert_distance(body: &RealConvexBody, x: &[f64], y: &[f64]) -> Result<f64> {
    for z in [x, y] {
        if z.len() != body.dim() {
            return Err(GeomError::DimensionMismatch { expected: body.dim(), found: z.len() });
        }
        if !body.contains(z) {
            return Err(GeomError::NotInterior);
        }
    }
    if point::real_dist(x, y) == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = body.chord(x, y)?;
    let (ay, bx) = (point::real_dist(&a, y), point::real_dist(&b, x));
    let (ax, by) = (point::real_dist(&a, x), point::real_dist(&b, y));
    let h = 0.5 * ((ay / ax).ln() + (bx / by).ln());
    if !(ax > 0.0 && by > 0.0) || !h.is_finite() {
        return Err(GeomError::DegenerateChord);
    }
    Ok(h.max(0.0))
}

/// Point at Hilbert distance `s` from interior `c` along unit `u`.
pub fn point_at_distance(body: &RealConvexBody, c: &[f64], u: &[f64], s: f64) -> Vec<f64> {
    let back: Vec<f64> = u.iter().map(|x| -x).collect();
    let (rp, rm) = (body.ray_exit(c, u), body.ray_exit(c, &back));
    let e = (2.0 * s).exp();
    // solves ½ log((rm + t) rp / (rm (rp − t))) = s; the second form avoids
    // cancellation near the boundary
    let gap = rp * (rm + rp) / (rp + e * rm);
    let t = rp - gap;
    c.iter().zip(u).map(|(a, b)| a + t * b).collect()
}

/// Three points at Hilbert distance `scale` from the body centre, plus the
/// centre. With `planted`, index 0 is an edge witness when the body has one
/// (see [`edge_witness`]).
#[derive(Clone, Debug)]
pub struct BodySampler {
    pub body: RealConvexBody,
    pub planted: bool,
}

/// Axis witness `(0,0), (τ(2R),0), (τ(R),τ(R)), (τ(R),−τ(R))` in the square,
/// `τ = tanh`, padded with zeros to `dim`.
pub fn square_witness(r: f64, dim: usize) -> [Vec<f64>; 4] {
    let (a, b) = (r.tanh(), (2.0 * r).tanh());
    let pad = |x: f64, y: f64| {
        let mut v = vec![0.0; dim];
        v[0] = x;
        v[1] = y;
        v
    };
    [pad(0.0, 0.0), pad(b, 0.0), pad(a, a), pad(a, -a)]
}

/// The square witness pushed into the parallelogram `c + u(m − c) + v t`
/// spanned by the first polygon edge (midpoint `m`, half-edge `t`) and its
/// reflection through the centre `c`. Cubes use [`square_witness`] directly.
/// `None` when the body has no flat face or a witness point falls outside.
pub fn edge_witness(body: &RealConvexBody, r: f64) -> Option<[Vec<f64>; 4]> {
    let w = match body {
        RealConvexBody::Cube { dim } if *dim >= 2 => square_witness(r, *dim),
        RealConvexBody::Polygon { vertices, .. } => {
            let c = body.centre();
            let (a, b) = (vertices[0], vertices[1]);
            let m = [0.5 * (a[0] + b[0]) - c[0], 0.5 * (a[1] + b[1]) - c[1]];
            let t = [0.5 * (b[0] - a[0]), 0.5 * (b[1] - a[1])];
            square_witness(r, 2).map(|p| vec![c[0] + p[0] * m[0] + p[1] * t[0], c[1] + p[0] * m[1] + p[1] * t[1]])
        }
        _ => return None,
    };
    w.iter().all(|p| body.contains(p)).then_some(w)
}

impl QuadrupleSampler for BodySampler {
    type Point = Vec<f64>;

    fn sample(&self, scale: f64, index: usize, rng: &mut TaskRng) -> Result<[Vec<f64>; 4]> {
        let dim = self.body.dim();
        if self.planted && index == 0 {
            if let Some(w) = edge_witness(&self.body, scale) {
                return Ok(w);
            }
        }
        let c = self.body.centre();
        let mut one = || point_at_distance(&self.body, &c, &point::random_unit_real(rng, dim), scale);
        Ok([one(), one(), one(), c.clone()])
    }

    fn coords(&self, p: &Vec<f64>) -> Vec<f64> {
        p.clone()
    }
}

/// Four-point scan under the Hilbert metric of `body`.
pub fn hilbert_four_point_scan(body: &RealConvexBody, sampler: &BodySampler, scales: &[f64], n: usize, seed: u64) -> Result<FourPointReport> {
    try_four_point_scan(|a: &Vec<f64>, b: &Vec<f64>| hilbert_distance(body, a, b), sampler, scales, n, seed, "hilbert")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolicity::{verdict, Thresholds, Verdict};
    use crate::rng::substream;
    use rand::Rng;

    #[test]
    fn distance_examples() {
        let disk = RealConvexBody::ball(2).unwrap();
        let sq = RealConvexBody::cube(2).unwrap();
        let t = 0.5f64.atanh();
        assert!((hilbert_distance(&disk, &[0.0, 0.0], &[0.5, 0.0]).unwrap() - t).abs() < 1e-12);
        assert!((hilbert_distance(&sq, &[0.0, 0.0], &[0.5, 0.0]).unwrap() - t).abs() < 1e-12);
        assert_eq!(hilbert_distance(&disk, &[0.1, 0.2], &[0.1, 0.2]).unwrap(), 0.0);
        assert_eq!(hilbert_distance(&disk, &[0.1, 0.2], &[1.1, 0.2]), Err(GeomError::NotInterior));
    }

    #[test]
    fn metric_axioms_on_disk() {
        let disk = RealConvexBody::ball(2).unwrap();
        let mut rng = substream(31, 0);
        let mut pt = || point::random_unit_real(&mut rng, 2).into_iter().map(|c| c * 0.95).collect::<Vec<_>>();
        for _ in 0..1000 {
            let (x, y, z) = (pt(), pt(), pt());
            let (dxy, dyx) = (hilbert_distance(&disk, &x, &y).unwrap(), hilbert_distance(&disk, &y, &x).unwrap());
            assert!((dxy - dyx).abs() <= 1e-9 * (1.0 + dxy));
            let dxz = hilbert_distance(&disk, &x, &z).unwrap();
            let dzy = hilbert_distance(&disk, &z, &y).unwrap();
            assert!(dxy <= dxz + dzy + 1e-9);
        }
    }

    #[test]
    fn affine_invariance() {
        let mut rng = substream(32, 0);
        for base in [RealConvexBody::cube(2).unwrap(), RealConvexBody::ball(2).unwrap(), RealConvexBody::regular_polygon(7).unwrap()] {
            for _ in 0..100 {
                let a = loop {
                    let m = DMatrix::<f64>::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
                    if m.determinant().abs() > 0.2 {
                        break m;
                    }
                };
                let b = DVector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
                let img = base.affine_image(a.clone(), b.clone()).unwrap();
                let x = vec![rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
                let y = vec![rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
                let map = |p: &[f64]| (&a * DVector::from_column_slice(p) + &b).as_slice().to_vec();
                let h0 = hilbert_distance(&base, &x, &y).unwrap();
                let h1 = hilbert_distance(&img, &map(&x), &map(&y)).unwrap();
                assert!((h0 - h1).abs() <= 1e-9 * (1.0 + h0), "{h0} vs {h1}");
            }
        }
    }

    #[test]
    fn radial_placement_hits_target_distance() {
        let body = RealConvexBody::regular_polygon(5).unwrap();
        let c = body.centre();
        let mut rng = substream(33, 0);
        for s in [0.5, 2.0, 6.0] {
            let u = point::random_unit_real(&mut rng, 2);
            let x = point_at_distance(&body, &c, &u, s);
            assert!((hilbert_distance(&body, &c, &x).unwrap() - s).abs() < 1e-6);
        }
    }

    #[test]
    fn polygon_rejections() {
        assert!(RealConvexBody::polygon(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(RealConvexBody::polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.8, 0.2]]).is_err());
        let cw = RealConvexBody::polygon(&[[0.0, 1.0], [1.0, -1.0], [-1.0, -1.0]]).unwrap();
        assert!(cw.contains(&[0.0, 0.0]) && !cw.contains(&[0.0, 1.5]));
        let spec: BodySpec = serde_json::from_str(r#"{"body":"polygon","vertices":[[1,0],[0,1],[-1,0],[0,-1]]}"#).unwrap();
        assert!(spec.build().unwrap().contains(&[0.4, 0.4]));
        assert_eq!(serde_json::from_str::<BodySpec>(r#"{"body":"disk"}"#).unwrap(), BodySpec::Disk);
    }

    #[test]
    fn square_witness_grows_linearly() {
        let sq = RealConvexBody::cube(2).unwrap();
        let d = |a: &Vec<f64>, b: &Vec<f64>| hilbert_distance(&sq, a, b).unwrap();
        let mut prev = 0.0;
        for r in [1.0, 2.0, 4.0, 8.0] {
            let delta = crate::hyperbolicity::quadruple_delta(d, &square_witness(r, 2));
            assert!(delta >= 0.4 * r && delta > prev, "{r}: {delta}");
            prev = delta;
        }
    }

    #[test]
    fn disk_and_square_scans_contrast() {
        let scales = [2.0, 4.0, 8.0];
        let disk = RealConvexBody::ball(2).unwrap();
        let rep = hilbert_four_point_scan(&disk, &BodySampler { body: disk.clone(), planted: true }, &scales, 100, 4).unwrap();
        assert_eq!(verdict(&rep, Thresholds::default()).unwrap().verdict, Verdict::BoundedConsistent, "{rep:?}");
        let sq = RealConvexBody::cube(2).unwrap();
        let rep = hilbert_four_point_scan(&sq, &BodySampler { body: sq.clone(), planted: true }, &scales, 100, 4).unwrap();
        let square = verdict(&rep, Thresholds::default()).unwrap();
        assert_eq!(square.verdict, Verdict::Growing, "{rep:?}");
        let gon = RealConvexBody::regular_polygon(64).unwrap();
        let rep = hilbert_four_point_scan(&gon, &BodySampler { body: gon.clone(), planted: true }, &scales, 100, 4).unwrap();
        let v = verdict(&rep, Thresholds::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Growing, "{rep:?}");
        assert!(v.slope_per_doubling < square.slope_per_doubling);
    }
}
