//! Domain oracles for the families studied here, plus the boundary-distance
//! quantities δ_Ω(p) and δ_Ω(p; v) every estimator is built on.
//!
//! A domain is `Ω = {r < 0}` for a defining function `r`. Everything else
//! (ray exits, slice radii, boundary distances) has a generic implementation
//! on top of `r`; families with closed forms override the hot paths.

mod family;
mod fspec;
mod normal;
mod probes;
mod projective;

pub use family::{scaling_group_apply, Domain, DomainFamily, ProjectiveTransformId};
pub use fspec::{Epigraph, FSpec, Monomial, PowerTerm, Weight};
pub use normal::{boundary_normal, normal_reach, NormalRay};
pub use probes::{
    c_convex_slice_check, finite_type_probe, l_convexity_fit, l_convexity_fit_about, FiniteType, LConvexityEstimate,
    SliceTopology,
};
pub use projective::{projective_transform, Direction};

use crate::error::{GeomError, Result};
use crate::numeric::{bisect_exit, brent_min, golden_min};
use crate::point::{self, CPoint, C64};
use rand::SeedableRng;
use std::f64::consts::TAU;
use std::sync::OnceLock;

/// Ray angles used for complex-line slice radii.
pub const SLICE_RAYS: usize = 64;
/// Real directions used for the Euclidean boundary distance.
pub const BOUNDARY_DIRECTIONS: usize = 512;
/// Relative tolerance for ray-exit bisection.
pub const ROOT_REL_TOL: f64 = 1e-10;

/// Search horizon in Euclidean distance for unbounded domains.
pub fn horizon(p: &[C64]) -> f64 {
    1e6 * (1.0 + point::norm(p))
}

/// Immutable description of an open domain `Ω = {r < 0} ⊂ ℂ^d`.
pub trait DomainOracle: Send + Sync {
    /// Complex dimension.
    fn dim(&self) -> usize;

    fn defining_value(&self, z: &[C64]) -> f64;

    /// Real gradient of `r`, packed as `∂r/∂x_j + i ∂r/∂y_j`.
    fn gradient(&self, z: &[C64]) -> CPoint {
        numerical_gradient(self, z)
    }

    fn is_bounded(&self) -> bool;

    /// Radius of a ball about the origin containing Ω, when bounded.
    fn bounding_radius(&self) -> Option<f64> {
        None
    }

    /// Known boundary points where `r` is not smooth (cone tips).
    fn singular_points(&self) -> Vec<CPoint> {
        Vec::new()
    }

    /// Whether `x` should be refused by normal computations.
    fn singular_at(&self, x: &[C64]) -> bool {
        self.singular_points()
            .iter()
            .any(|s| point::dist(s, x) <= 1e-9 * (1.0 + point::norm(x)))
    }

    fn is_convex(&self) -> bool;

    fn is_c_convex(&self) -> bool {
        self.is_convex()
    }

    /// Set for families whose boundary is known to be non-smooth away from
    /// the registered singular points (p = 1 cones).
    fn non_smooth_boundary(&self) -> bool {
        false
    }

    fn contains(&self, z: &[C64]) -> bool {
        self.defining_value(z) < 0.0
    }

    /// Smallest `s > 0` with `p + s·u ∉ Ω`, or `None` when the ray stays
    /// inside up to `max_s`. The returned parameter is on the closed
    /// complement (`contains` is false there).
    fn ray_exit(&self, p: &[C64], u: &[C64], max_s: f64) -> Option<f64> {
        bisection_ray_exit(self, p, u, max_s)
    }

    /// `min{|ζ| : p + ζv ∈ ∂Ω}`, `+∞` if the slice has no boundary within
    /// the search horizon.
    fn slice_radius(&self, p: &[C64], v: &[C64]) -> f64 {
        mesh_slice_radius(self, p, v)
    }

    /// Euclidean distance from an interior point to `∂Ω`.
    fn boundary_distance(&self, p: &[C64]) -> f64 {
        mesh_boundary_distance(self, p)
    }
}

/// Central-difference gradient.
pub fn numerical_gradient<D: DomainOracle + ?Sized>(dom: &D, z: &[C64]) -> CPoint {
    let h = 1e-6 * (1.0 + point::norm(z));
    let mut w = z.to_vec();
    let mut out = vec![C64::new(0.0, 0.0); z.len()];
    for j in 0..z.len() {
        for (k, dir) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
            w[j] = z[j] + dir * h;
            let fp = dom.defining_value(&w);
            w[j] = z[j] - dir * h;
            let fm = dom.defining_value(&w);
            w[j] = z[j];
            let d = (fp - fm) / (2.0 * h);
            if k == 0 {
                out[j].re = d;
            } else {
                out[j].im = d;
            }
        }
    }
    out
}

/// Default ray exit: doubling bracket then bisection for convex domains,
/// a marching scan before bisection otherwise.
pub fn bisection_ray_exit<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], u: &[C64], max_s: f64) -> Option<f64> {
    let mut buf = p.to_vec();
    let mut inside = |s: f64| {
        point::axpy_into(&mut buf, p, C64::new(s, 0.0), u);
        dom.contains(&buf)
    };
    if dom.is_convex() {
        let mut hi = 1.0f64.min(max_s);
        if inside(hi) {
            loop {
                if hi >= max_s {
                    return None;
                }
                let next = (2.0 * hi).min(max_s);
                if !inside(next) {
                    let lo = hi;
                    return Some(bisect_exit(&mut inside, lo, next, ROOT_REL_TOL));
                }
                hi = next;
            }
        }
        let mut lo = 0.5 * hi;
        while !inside(lo) {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                return Some(hi);
            }
        }
        Some(bisect_exit(&mut inside, lo, hi, ROOT_REL_TOL))
    } else {
        let reach = match dom.bounding_radius() {
            Some(b) => ((b + point::norm(p)) / point::norm(u)).min(max_s),
            None => max_s,
        };
        const STEPS: usize = 512;
        let mut prev = 0.0;
        for k in 1..=STEPS {
            let s = reach * k as f64 / STEPS as f64;
            if !inside(s) {
                return Some(bisect_exit(&mut inside, prev, s, ROOT_REL_TOL));
            }
            prev = s;
        }
        None
    }
}

/// Pushes a closed-form root outward until the point is certified outside.
pub(crate) fn nudge_out<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], u: &[C64], mut s: f64) -> f64 {
    let mut buf = p.to_vec();
    let mut step = 4.0 * f64::EPSILON * s.max(1e-300);
    for _ in 0..64 {
        point::axpy_into(&mut buf, p, C64::new(s, 0.0), u);
        if !dom.contains(&buf) {
            return s;
        }
        s += step;
        step *= 2.0;
    }
    s
}

/// Minimum over the ray-angle mesh of an exit function, refined by Brent
/// iteration in θ around the best mesh cell.
pub fn min_over_angles<F: FnMut(f64) -> Option<f64>>(mut exit: F) -> f64 {
    let cell = TAU / SLICE_RAYS as f64;
    let mut best = f64::INFINITY;
    let mut best_k = 0;
    for k in 0..SLICE_RAYS {
        let s = exit(k as f64 * cell).unwrap_or(f64::INFINITY);
        if s < best {
            best = s;
            best_k = k;
        }
    }
    if !best.is_finite() {
        return best;
    }
    let theta0 = best_k as f64 * cell;
    let (_, refined) = brent_min(
        |th| exit(th).unwrap_or(f64::INFINITY).min(1e300),
        theta0 - cell,
        theta0 + cell,
        theta0,
        best,
        1e-10,
        60,
    );
    best.min(refined)
}

/// Generic slice radius via ray exits along `e^{iθ}v`.
pub fn mesh_slice_radius<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], v: &[C64]) -> f64 {
    let vn = point::norm(v);
    if vn == 0.0 {
        return f64::INFINITY;
    }
    let max_s = horizon(p) / vn;
    let mut u = v.to_vec();
    min_over_angles(|th| {
        let rot = C64::from_polar(1.0, th);
        for (uj, vj) in u.iter_mut().zip(v) {
            *uj = rot * vj;
        }
        dom.ray_exit(p, &u, max_s)
    })
}

type MeshCache = std::sync::Mutex<Vec<(usize, &'static [Vec<f64>])>>;

fn direction_mesh(real_dim: usize) -> &'static [Vec<f64>] {
    static MESHES: OnceLock<MeshCache> = OnceLock::new();
    let cache = MESHES.get_or_init(|| std::sync::Mutex::new(Vec::new()));
    let mut guard = cache.lock().expect("direction mesh cache poisoned");
    if let Some((_, m)) = guard.iter().find(|(n, _)| *n == real_dim) {
        return m;
    }
    let mesh: Vec<Vec<f64>> = if real_dim == 2 {
        (0..BOUNDARY_DIRECTIONS)
            .map(|k| {
                let th = TAU * k as f64 / BOUNDARY_DIRECTIONS as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6b6f_6261);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(BOUNDARY_DIRECTIONS);
        for axis in 0..real_dim {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; real_dim];
                e[axis] = sign;
                out.push(e);
            }
        }
        while out.len() < BOUNDARY_DIRECTIONS {
            out.push(point::random_unit_real(&mut rng, real_dim));
        }
        out
    };
    let leaked: &'static [Vec<f64>] = Box::leak(mesh.into_boxed_slice());
    guard.push((real_dim, leaked));
    leaked
}

fn orthonormal_complement(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec()];
    for axis in 0..n {
        let mut e = vec![0.0; n];
        e[axis] = 1.0;
        for b in &basis {
            let dot: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in e.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let len = point::real_norm(&e);
        if len > 1e-8 {
            basis.push(e.into_iter().map(|x| x / len).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Generic δ_Ω(p): minimum ray exit over a mesh of real directions with two
/// rounds of golden-section refinement around the best direction.
pub fn mesh_boundary_distance<D: DomainOracle + ?Sized>(dom: &D, p: &[C64]) -> f64 {
    let real_dim = 2 * dom.dim();
    let max_s = horizon(p);
    let exit_real = |u: &[f64]| -> f64 {
        let uc = point::from_real(u);
        dom.ray_exit(p, &uc, max_s).unwrap_or(f64::INFINITY)
    };
    let mesh = direction_mesh(real_dim);
    let mut best = f64::INFINITY;
    let mut best_u = mesh[0].clone();
    for u in mesh {
        let s = exit_real(u);
        if s < best {
            best = s;
            best_u = u.clone();
        }
    }
    if !best.is_finite() {
        return best;
    }
    let cell = if real_dim == 2 {
        TAU / BOUNDARY_DIRECTIONS as f64
    } else {
        // angular spacing of a roughly uniform mesh on S^{n-1}
        (4.0 * std::f64::consts::PI / BOUNDARY_DIRECTIONS as f64).powf(1.0 / (real_dim as f64 - 1.0)).min(1.0)
    };
    for round in 0..2 {
        let width = if round == 0 { cell } else { cell / 8.0 };
        for e in orthonormal_complement(&best_u) {
            let rotate = |phi: f64| -> Vec<f64> {
                best_u
                    .iter()
                    .zip(&e)
                    .map(|(a, b)| a * phi.cos() + b * phi.sin())
                    .collect()
            };
            let (phi, val) = golden_min(|phi| exit_real(&rotate(phi)).min(1e300), -width, width, 40);
            if val < best {
                best = val;
                best_u = rotate(phi);
            }
        }
    }
    best
}

/// δ_Ω(p; v): distance from `p` to `∂Ω` inside the complex line `p + ℂv`.
pub fn line_boundary_distance<D: DomainOracle + ?Sized>(dom: &D, p: &[C64], v: &[C64]) -> Result<f64> {
    check_dim(dom, p)?;
    check_dim(dom, v)?;
    if point::is_zero(v) {
        return Err(GeomError::ZeroVector);
    }
    if !dom.contains(p) {
        return Err(GeomError::NotInterior);
    }
    Ok(point::norm(v) * dom.slice_radius(p, v))
}

/// δ_Ω(p): Euclidean distance from `p` to `∂Ω`.
pub fn euclidean_boundary_distance<D: DomainOracle + ?Sized>(dom: &D, p: &[C64]) -> Result<f64> {
    check_dim(dom, p)?;
    if !dom.contains(p) {
        return Err(GeomError::NotInterior);
    }
    Ok(dom.boundary_distance(p))
}

pub fn contains<D: DomainOracle + ?Sized>(dom: &D, p: &[C64]) -> bool {
    p.len() == dom.dim() && dom.contains(p)
}

pub fn check_dim<D: DomainOracle + ?Sized>(dom: &D, p: &[C64]) -> Result<()> {
    if p.len() != dom.dim() {
        return Err(GeomError::DimensionMismatch { expected: dom.dim(), found: p.len() });
    }
    Ok(())
}

/// Forwards only `defining_value` and the structural flags of another
/// oracle, so every derived quantity takes the generic path. Used to
/// cross-check closed forms.
pub struct GenericView<'a, D: DomainOracle + ?Sized>(pub &'a D);

impl<D: DomainOracle + ?Sized> DomainOracle for GenericView<'_, D> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn defining_value(&self, z: &[C64]) -> f64 {
        self.0.defining_value(z)
    }
    fn is_bounded(&self) -> bool {
        self.0.is_bounded()
    }
    fn bounding_radius(&self) -> Option<f64> {
        self.0.bounding_radius()
    }
    fn is_convex(&self) -> bool {
        self.0.is_convex()
    }
    fn is_c_convex(&self) -> bool {
        self.0.is_c_convex()
    }
}
