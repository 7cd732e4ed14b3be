use crate::error::{GeomError, Result};
use crate::point::{CPoint, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `f(z₀, z) = (1/(z₀+i), z/(z₀+i))` and its inverse `(1/w₀ − i, w/w₀)`.
pub fn projective_transform(p: &[C64], direction: Direction) -> Result<CPoint> {
    if p.is_empty() {
        return Err(GeomError::InvalidParameter("empty point".into()));
    }
    let i = C64::new(0.0, 1.0);
    match direction {
        Direction::Forward => {
            let den = p[0] + i;
            if den.norm() <= 1e-300 {
                return Err(GeomError::PoleHit);
            }
            let inv = den.inv();
            let mut out = Vec::with_capacity(p.len());
            out.push(inv);
            out.extend(p[1..].iter().map(|z| z * inv));
            Ok(out)
        }
        Direction::Inverse => {
            if p[0].norm() <= 1e-300 {
                return Err(GeomError::PoleHit);
            }
            let inv = p[0].inv();
            let mut out = Vec::with_capacity(p.len());
            out.push(inv - i);
            out.extend(p[1..].iter().map(|w| w * inv));
            Ok(out)
        }
    }
}
