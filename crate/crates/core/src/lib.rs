//! Fractional perimeters, nonlocal mean curvature, discrete nonlocal minimal
//! sets, the weighted extension energy and fractal dimensions.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod error;
pub mod extension;
pub mod fractal;
pub mod geometry;
pub mod kernel;
pub mod minimizer;
pub mod perimeter;
pub mod quad;
pub mod reduce;

pub use error::{Error, Result};
