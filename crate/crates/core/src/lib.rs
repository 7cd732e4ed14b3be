//! Certified Kobayashi-distance intervals and coarse-geometry diagnostics
//! on convex and C-convex domains in ℂ^d.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod domains;
pub mod error;
pub mod hilbert;
pub mod hyperbolicity;
pub mod metric;
pub mod numeric;
pub mod paths;
pub mod point;
pub mod rng;

pub use error::{GeomError, Result};
pub use point::{CPoint, C64};
