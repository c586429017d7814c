//! Scaling sweeps and bound verification suites.

mod scaling;
mod slope;
mod verify;

pub use scaling::*;
pub use slope::{fit_slope, SlopeFit};
pub use verify::{
    circle_and_outer_ray, dense_ray_instance, random_one_ray, verify_suite, Check, Relation, Suite, VerifyParams,
    VerifyReport,
};
