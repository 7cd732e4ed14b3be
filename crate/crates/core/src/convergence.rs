//! Hausdorff distance between sampled sets, local Hausdorff semi-norms,
//! rescaled-domain sequences and metric-continuity probes.

use crate::domains::{Domain, DomainOracle};
use crate::error::{GeomError, Result};
use crate::hilbert::RealConvexBody;
use crate::metric::{distance_interval, khat, MetricBounds};
use crate::paths::GeodesicSettings;
use crate::point::{self, CPoint, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A subset of `ℝ^n` given by a membership test.
pub trait Region: Sync {
    fn real_dim(&self) -> usize;
    fn contains_real(&self, x: &[f64]) -> bool;
}

impl<D: DomainOracle + Sync> Region for D {
    fn real_dim(&self) -> usize {
        2 * self.dim()
    }

    fn contains_real(&self, x: &[f64]) -> bool {
        self.contains(&point::from_real(x))
    }
}

impl Region for RealConvexBody {
    fn real_dim(&self) -> usize {
        self.dim()
    }

    fn contains_real(&self, x: &[f64]) -> bool {
        self.contains(x)
    }
}

/// `inner + offset`.
pub struct Translated<'a, R: Region + ?Sized> {
    pub inner: &'a R,
    pub offset: Vec<f64>,
}

impl<R: Region + ?Sized> Region for Translated<'_, R> {
    fn real_dim(&self) -> usize {
        self.inner.real_dim()
    }

    fn contains_real(&self, x: &[f64]) -> bool {
        let y: Vec<f64> = x.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        self.inner.contains_real(&y)
    }
}

/// Grid resolution per real dimension: 128 up to two real dimensions, 32 beyond.
pub fn default_resolution(real_dim: usize) -> usize {
    if real_dim <= 2 {
        128
    } else {
        32
    }
}

const MAX_GRID_POINTS: f64 = 5e7;

/// Boundary-adjacent sample cloud of a region on the grid
/// `{−half + i·h : 0 ≤ i ≤ n}^D`, `h = 2·half/n`, optionally clipped to the
/// closed ball of radius `clip` about the origin.
#[derive(Clone, Debug)]
pub struct SetSampler {
    pub real_dim: usize,
    pub half: f64,
    pub n: usize,
    pub clip: Option<f64>,
    inside: Vec<bool>,
    cloud: Vec<usize>,
}

impl SetSampler {
    pub fn new<R: Region + ?Sized>(region: &R, half: f64, n: usize, clip: Option<f64>) -> Result<Self> {
        let dim = region.real_dim();
        if !(half > 0.0) || n < 2 || clip.is_some_and(|c| !(c > 0.0)) {
            return Err(GeomError::InvalidParameter("window half-width, resolution and clip radius must be positive".into()));
        }
        if ((n + 1) as f64).powi(dim as i32) > MAX_GRID_POINTS {
            return Err(GeomError::InvalidParameter(format!("grid of {}^{dim} points is too large", n + 1)));
        }
        let total = (n + 1).pow(dim as u32);
        let mut s = SetSampler { real_dim: dim, half, n, clip, inside: Vec::new(), cloud: Vec::new() };
        let inside: Vec<bool> = (0..total)
            .into_par_iter()
            .map(|i| {
                let x = s.coords(i);
                clip.is_none_or(|c| point::real_norm(&x) <= c) && region.contains_real(&x)
            })
            .collect();
        let strides: Vec<usize> = (0..dim).map(|k| (n + 1).pow(k as u32)).collect();
        let cloud = (0..total)
            .filter(|&i| {
                inside[i]
                    && strides.iter().any(|&st| {
                        let c = (i / st) % (n + 1);
                        c == 0 || c == n || !inside[i - st] || !inside[i + st]
                    })
            })
            .collect();
        s.inside = inside;
        s.cloud = cloud;
        Ok(s)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half / self.n as f64
    }

    /// Grid diameter `h·√D`, the error bar of distances from the cloud.
    pub fn grid_diameter(&self) -> f64 {
        self.spacing() * (self.real_dim as f64).sqrt()
    }

    fn cell(&self, i: usize) -> Vec<usize> {
        let mut r = i;
        (0..self.real_dim)
            .map(|_| {
                let c = r % (self.n + 1);
                r /= self.n + 1;
                c
            })
            .collect()
    }

    fn coords(&self, i: usize) -> Vec<f64> {
        let h = self.spacing();
        self.cell(i).into_iter().map(|c| -self.half + c as f64 * h).collect()
    }

    /// Real coordinates of the boundary-adjacent samples.
    pub fn cloud(&self) -> Vec<Vec<f64>> {
        self.cloud.iter().map(|&i| self.coords(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    fn same_grid(&self, other: &SetSampler) -> bool {
        self.real_dim == other.real_dim && self.half == other.half && self.n == other.n
    }
}

const BUCKET: usize = 4;

struct Buckets<'a> {
    s: &'a SetSampler,
    map: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> Buckets<'a> {
    fn new(s: &'a SetSampler) -> Self {
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for &i in &s.cloud {
            let key = s.cell(i).into_iter().map(|c| (c / BUCKET) as i64).collect();
            map.entry(key).or_default().push(i);
        }
        Buckets { s, map }
    }

    /// Euclidean distance from grid point `i` to the nearest cloud point.
    fn nearest(&self, i: usize) -> f64 {
        let h = self.s.spacing();
        let c = self.s.cell(i);
        let home: Vec<i64> = c.iter().map(|x| (*x / BUCKET) as i64).collect();
        let max_ring = self.s.n / BUCKET + 1;
        let mut best = f64::INFINITY;
        for ring in 0..=max_ring as i64 {
            if best.is_finite() && best <= ((ring - 1).max(0) as f64) * (BUCKET as f64) * h {
                break;
            }
            let side = 2 * ring + 1;
            let count = (side as usize).pow(self.s.real_dim as u32);
            for k in 0..count {
                let mut r = k;
                let mut off = Vec::with_capacity(self.s.real_dim);
                for _ in 0..self.s.real_dim {
                    off.push((r % side as usize) as i64 - ring);
                    r /= side as usize;
                }
                if off.iter().all(|o| o.abs() < ring) {
                    continue;
                }
                let key: Vec<i64> = home.iter().zip(&off).map(|(a, b)| a + b).collect();
                if let Some(list) = self.map.get(&key) {
                    for &j in list {
                        let cj = self.s.cell(j);
                        let d2: f64 = c.iter().zip(&cj).map(|(a, b)| (*a as f64 - *b as f64).powi(2)).sum();
                        best = best.min(d2.sqrt() * h);
                    }
                }
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffEstimate {
    pub value: f64,
    /// Grid diameter; the estimate is within this of the windowed distance.
    pub error_bar: f64,
}

/// `sup_{a ∈ cloud(A)} d(a, B)`, zero at samples inside `B`.
fn directed(a: &SetSampler, b: &SetSampler) -> f64 {
    let buckets = Buckets::new(b);
    a.cloud
        .par_iter()
        .map(|&i| if b.inside[i] { 0.0 } else { buckets.nearest(i) })
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between two sampled sets on the same grid.
pub fn hausdorff_distance(a: &SetSampler, b: &SetSampler) -> Result<HausdorffEstimate> {
    if !a.same_grid(b) {
        return Err(GeomError::InvalidParameter("samplers must share window and resolution".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(GeomError::EmptySampleCloud);
    }
    let value = directed(a, b).max(directed(b, a));
    Ok(HausdorffEstimate { value, error_bar: a.grid_diameter() })
}

/// `d_H(A ∩ B_R(0), B ∩ B_R(0))` on a grid covering the closed ball.
pub fn local_hausdorff<A: Region + ?Sized, B: Region + ?Sized>(a: &A, b: &B, radius: f64, resolution: Option<usize>) -> Result<HausdorffEstimate> {
    if !(radius > 0.0) {
        return Err(GeomError::InvalidParameter("window radius must be positive".into()));
    }
    if a.real_dim() != b.real_dim() {
        return Err(GeomError::DimensionMismatch { expected: a.real_dim(), found: b.real_dim() });
    }
    let n = resolution.unwrap_or_else(|| default_resolution(a.real_dim()));
    let sa = SetSampler::new(a, radius, n, Some(radius))?;
    let sb = SetSampler::new(b, radius, n, Some(radius))?;
    hausdorff_distance(&sa, &sb)
}

/// `g_t(Ω)` for each `t` in the schedule.
pub fn rescaled_family(dom: &Domain, t_schedule: &[f64]) -> Result<Vec<Domain>> {
    let weights = dom.scaling_weights().ok_or(GeomError::NonHomogeneousFamily)?.to_vec();
    t_schedule
        .iter()
        .map(|&t| {
            if !(t > 0.0) || !t.is_finite() {
                return Err(GeomError::InvalidParameter("scaling parameter must be positive".into()));
            }
            Ok(Domain::Scaled { inner: Box::new(dom.clone()), t, weights: weights.clone() })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub index: usize,
    /// Some pair or tangent probe left `Ω_n`; the row carries no values.
    pub skipped: bool,
    pub intervals: Vec<MetricBounds>,
    pub khat_values: Vec<f64>,
    /// `max` over pairs of the larger endpoint difference from the limit.
    pub interval_drift: f64,
    pub khat_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub limit_intervals: Vec<MetricBounds>,
    pub limit_khat: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
}

/// Distance intervals for `pairs` and `k̂` for `tangents` on each `Ω_n`,
/// compared with the limit domain.
pub fn metric_convergence_probe<D: DomainOracle + ?Sized, L: DomainOracle + ?Sized>(
    sequence: &[&D],
    limit: &L,
    pairs: &[(CPoint, CPoint)],
    tangents: &[(CPoint, CPoint)],
    settings: &GeodesicSettings,
) -> Result<ConvergenceTable> {
    let limit_intervals: Vec<MetricBounds> = pairs.iter().map(|(p, q)| distance_interval(limit, p, q, settings)).collect::<Result<_>>()?;
    let limit_khat: Vec<f64> = tangents.iter().map(|(p, v)| khat(limit, p, v)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(sequence.len());
    for (index, dom) in sequence.iter().enumerate() {
        let inside = |z: &[C64]| dom.contains(z);
        if !pairs.iter().all(|(p, q)| inside(p) && inside(q)) || !tangents.iter().all(|(p, _)| inside(p)) {
            rows.push(ConvergenceRow { index, skipped: true, intervals: Vec::new(), khat_values: Vec::new(), interval_drift: f64::NAN, khat_drift: f64::NAN });
            continue;
        }
        let intervals: Vec<MetricBounds> = pairs.iter().map(|(p, q)| distance_interval(*dom, p, q, settings)).collect::<Result<_>>()?;
        let khat_values: Vec<f64> = tangents.iter().map(|(p, v)| khat(*dom, p, v)).collect::<Result<_>>()?;
        let interval_drift = intervals
            .iter()
            .zip(&limit_intervals)
            .map(|(a, b)| (a.lower - b.lower).abs().max((a.upper - b.upper).abs()))
            .fold(0.0, f64::max);
        let khat_drift = khat_values.iter().zip(&limit_khat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rows.push(ConvergenceRow { index, skipped: false, intervals, khat_values, interval_drift, khat_drift });
    }
    Ok(ConvergenceTable { limit_intervals, limit_khat, rows })
}
