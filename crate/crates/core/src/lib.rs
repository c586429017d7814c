//! Distinct dot products of planar point configurations.
//!
//! Building blocks: exact/approximate [`geometry`], point-family
//! [`generators`], the [`count`] kernels, the structural analyses in
//! [`structure`], and sweeps and verification suites in [`harness`].

pub mod count;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod harness;
pub mod parallel;
pub mod points_file;
pub mod structure;

pub use count::{
    brute_force_oracle, count_distinct, distinct_dot_products, distinct_dot_products_with, per_point_fertility,
    per_point_fertility_with, projection_values, projection_values_with, CountOptions, DotProductSet, ExactKernel,
    FertilityReport, Quantization,
};
pub use error::{Error, Result};
pub use geometry::{Configuration, Mode, Point, Scalar};
pub use parallel::Parallelism;
