//! Scalar numerics: bracketing, 1-D minimization, quadrature, line fits.

use std::sync::OnceLock;

/// Bisection on a containment predicate. Requires `inside(lo)` and
/// `!inside(hi)`; shrinks until `hi - lo <= rel_tol * hi` and returns the
/// outside end, so the returned parameter never lands in the open set.
pub fn bisect_exit<F: FnMut(f64) -> bool>(mut inside: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization on `[a, b]`. Ties keep the earlier candidate.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Brent's parabolic/golden minimization on `[a, b]` starting from `x0`.
pub fn brent_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, x0: f64, fx0: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (fx0, fx0, fx0);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * (x.abs() + 1.0);
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) && q.is_finite() && p.is_finite() {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Romberg integration of `f` over `[0, 1]` built on successive trapezoid
/// refinements; stops when two diagonal entries agree to `rel_tol`.
pub fn romberg<F: FnMut(f64) -> f64>(mut f: F, rel_tol: f64, max_level: usize) -> f64 {
    let mut prev_row: Vec<f64> = Vec::with_capacity(max_level + 1);
    let mut trap = 0.5 * (f(0.0) + f(1.0));
    prev_row.push(trap);
    let mut n: usize = 1;
    for level in 1..=max_level {
        let h = 1.0 / (2 * n) as f64;
        let mut mids = 0.0;
        for k in 0..n {
            mids += f((2 * k + 1) as f64 * h);
        }
        trap = 0.5 * trap + mids / (2 * n) as f64;
        n *= 2;
        let mut row = Vec::with_capacity(level + 1);
        row.push(trap);
        let mut pow4 = 1.0;
        for j in 1..=level {
            pow4 *= 4.0;
            let val = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (pow4 - 1.0);
            row.push(val);
        }
        let cur = row[level];
        let last = prev_row[level - 1];
        if level >= 3 && ((cur - last).abs() <= rel_tol * cur.abs() || cur == last) {
            return cur;
        }
        if !cur.is_finite() {
            return cur;
        }
        prev_row = row;
    }
    prev_row[max_level]
}

/// Gauss–Legendre nodes and weights on `[0, 1]` for `m` points (1..=32).
pub fn gauss_legendre(m: usize) -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| (0..=32).map(legendre_rule).collect());
    &table[m.clamp(1, 32)]
}

fn legendre_rule(m: usize) -> Vec<(f64, f64)> {
    if m == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}
