//! Origin-centred structure: supporting lines and circles, rays and their
//! spacing, wedges, and bucket projections.

mod buckets;
mod circles;
mod lines;
mod rays;
mod wedge;

pub use buckets::{bucket_projection_report, Bucket, BucketReport};
pub use circles::{popular_circle, supporting_circles, supporting_circles_with, CircleGroup, SupportingCircles};
pub use lines::{
    popular_line, supporting_lines, supporting_lines_with, Direction, LineGroup, SupportingLines,
    DEFAULT_ANGLE_TOLERANCE,
};
pub use rays::{
    density_report, extract_max_well_spaced, is_well_spaced, is_well_spaced_pair, iterate_dense_lines, DensityReport,
    Extraction, RayPoints,
};
pub use wedge::{max_wedge, Wedge, WEDGE_TOLERANCE};
