//! Scalars, points, configurations and the dot-product primitives.

mod point;
mod scalar;

pub use point::{complex_dot, dot, rotate, scale, ComplexDot, Configuration, Point};
pub use scalar::{Mode, Scalar};
