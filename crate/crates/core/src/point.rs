//! Small helpers for points and vectors in ℂ^d stored as `[C64]`.

pub use num_complex::Complex64 as C64;

use rand::Rng;
use rand_distr::StandardNormal;

pub type CPoint = Vec<C64>;

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    norm_sqr(v).sqrt()
}

pub fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[C64], b: &[C64]) -> CPoint {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `p + s·v`.
pub fn axpy(p: &[C64], s: C64, v: &[C64]) -> CPoint {
    p.iter().zip(v).map(|(x, y)| x + s * y).collect()
}

/// Writes `p + s·v` into `out`.
pub fn axpy_into(out: &mut [C64], p: &[C64], s: C64, v: &[C64]) {
    for ((o, x), y) in out.iter_mut().zip(p).zip(v) {
        *o = x + s * y;
    }
}

pub fn scale(v: &[C64], s: f64) -> CPoint {
    v.iter().map(|z| z * s).collect()
}

/// Hermitian product `Σ conj(a_j) b_j`.
pub fn hermitian(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn lerp(a: &[C64], b: &[C64], t: f64) -> CPoint {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()
}

pub fn is_zero(v: &[C64]) -> bool {
    v.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// Interleaved real coordinates `(Re z_1, Im z_1, …)`.
pub fn to_real(p: &[C64]) -> Vec<f64> {
    p.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn from_real(x: &[f64]) -> CPoint {
    x.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// Uniform random unit vector in ℂ^d (viewed as ℝ^{2d}).
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CPoint {
    loop {
        let v: CPoint = (0..d)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = norm(&v);
        if n > 1e-12 {
            return scale(&v, 1.0 / n);
        }
    }
}

pub fn random_unit_real<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

pub fn real_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn real_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
