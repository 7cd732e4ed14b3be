use super::{check_dim, DomainOracle};
use crate::error::{GeomError, Result};
use crate::point::{self, CPoint, C64};

/// Inward normal ray at a smooth boundary point, with the measured reach
/// and the ratio `min δ_Ω(x + t n)/t` on a geometric grid below it.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalRay {
    pub base: CPoint,
    pub normal: CPoint,
    pub eps: f64,
    pub c_lower: f64,
}

impl NormalRay {
    pub fn point_at(&self, t: f64) -> CPoint {
        point::axpy(&self.base, C64::new(t, 0.0), &self.normal)
    }

    /// Geometric grid `eps·2^{-k}`, `k = 0..=20`.
    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=REACH_GRID).map(move |k| self.eps * 0.5f64.powi(k))
    }
}

const REACH_GRID: i32 = 20;
const MAX_DOUBLINGS: usize = 6;
const MAX_HALVINGS: usize = 40;

pub(crate) fn boundary_residual_ok<D: DomainOracle + ?Sized>(dom: &D, x: &[C64]) -> std::result::Result<(), f64> {
    let r = dom.defining_value(x);
    if r.abs() <= 1e-8 * (1.0 + point::norm(x)) {
        Ok(())
    } else {
        Err(r.abs())
    }
}

/// `n_x = −∇r(x)/‖∇r(x)‖`.
pub fn boundary_normal<D: DomainOracle + ?Sized>(dom: &D, x: &[C64]) -> Result<CPoint> {
    check_dim(dom, x)?;
    if dom.singular_at(x) {
        return Err(GeomError::SingularBoundaryPoint);
    }
    boundary_residual_ok(dom, x).map_err(|residual| GeomError::BasePointNotOnBoundary { residual })?;
    let g = dom.gradient(x);
    let gn = point::norm(&g);
    if !(gn > 0.0) || !gn.is_finite() {
        return Err(GeomError::SingularBoundaryPoint);
    }
    Ok(point::scale(&g, -1.0 / gn))
}

/// Reach ε of the inward normal at `x` by doubling/halving from 1, and the
/// constant `c_lower = min_k δ_Ω(x + t_k n)/t_k` on the grid `t_k = ε 2^{-k}`.
pub fn normal_reach<D: DomainOracle + ?Sized>(dom: &D, x: &[C64]) -> Result<NormalRay> {
    let normal = boundary_normal(dom, x)?;
    let at = |t: f64| point::axpy(x, C64::new(t, 0.0), &normal);
    let grid_inside = |t: f64| (0..=REACH_GRID).all(|k| dom.contains(&at(t * 0.5f64.powi(k))));
    let mut eps = 1.0;
    if grid_inside(eps) {
        for _ in 0..MAX_DOUBLINGS {
            if !grid_inside(2.0 * eps) {
                break;
            }
            eps *= 2.0;
        }
    } else {
        let mut found = false;
        for _ in 0..MAX_HALVINGS {
            eps *= 0.5;
            if grid_inside(eps) {
                found = true;
                break;
            }
        }
        if !found {
            return Err(GeomError::ReachNotFound);
        }
    }
    let mut ray = NormalRay { base: x.to_vec(), normal, eps, c_lower: f64::INFINITY };
    ray.c_lower = ray
        .grid()
        .map(|t| dom.boundary_distance(&ray.point_at(t)) / t)
        .fold(f64::INFINITY, f64::min);
    Ok(ray)
}
