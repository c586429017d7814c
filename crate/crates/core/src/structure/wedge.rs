use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Point};

/// Slack on the closed wedge boundary, so that points placed exactly on it
/// survive rounding in `arccos` and `atan2`.
pub const WEDGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wedge {
    /// Start angle in `[0, 2π)`.
    pub theta: f64,
    /// `arccos b`.
    pub width: f64,
    /// Members in angular order from `theta`.
    pub members: Vec<Point>,
    /// Origin points skipped by the sweep.
    pub origins_excluded: usize,
    /// `ceil(width / 2π · n')` over the `n'` non-origin points.
    pub guarantee: usize,
}

/// The closed wedge `{θ ≤ arg p ≤ θ + arccos b}` holding the most points.
///
/// Only start angles at point arguments need checking. Ties keep the
/// smallest start angle.
pub fn max_wedge(cfg: &Configuration, b: f64) -> Result<Wedge> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::usage(format!("b must lie in (0, 1), got {b}")));
    }
    let width = b.acos();
    let mut polar: Vec<(f64, &Point)> = cfg
        .iter()
        .filter(|p| !p.is_origin())
        .map(|p| (full_turn_angle(p.angle()), p))
        .collect();
    let origins_excluded = cfg.len() - polar.len();
    if polar.is_empty() {
        return Err(Error::domain("every point is at the origin"));
    }
    polar.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m = polar.len();
    let unrolled = |k: usize| polar[k % m].0 + if k >= m { TAU } else { 0.0 };
    let (mut best_start, mut best_count) = (0, 0);
    let mut end = 0;
    for (start, &(angle, _)) in polar.iter().enumerate() {
        end = end.max(start);
        let limit = angle + width + WEDGE_TOLERANCE;
        while end < start + m && unrolled(end) <= limit {
            end += 1;
        }
        if end - start > best_count {
            best_start = start;
            best_count = end - start;
        }
    }
    let members = (best_start..best_start + best_count)
        .map(|k| polar[k % m].1.clone())
        .collect();
    Ok(Wedge {
        theta: polar[best_start].0,
        width,
        members,
        origins_excluded,
        guarantee: (width / TAU * m as f64).ceil() as usize,
    })
}

/// Maps `(-π, π]` to `[0, 2π)`.
fn full_turn_angle(a: f64) -> f64 {
    if a < 0.0 {
        (a + TAU).min(TAU.next_down())
    } else {
        a
    }
}
