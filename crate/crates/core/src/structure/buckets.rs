use std::f64::consts::TAU;

use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::count::default_quantum;
use crate::error::{Error, Result};
use crate::geometry::Point;

use super::rays::RayPoints;

/// Relative tolerance for "all circle points share one radius".
const RADIUS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bucket {
    pub index: usize,
    /// Open interval `(lower, upper)` in units of the circle radius.
    pub lower: f64,
    pub upper: f64,
    /// Distinct projections strictly inside the bucket.
    pub distinct: usize,
    /// `distinct >= expected_min`.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketReport {
    pub circle_radius: f64,
    pub circle_len: usize,
    /// Line radii divided by the circle radius, increasing.
    pub line_radii: Vec<f64>,
    /// The ratio in `k = arccos(ratio) / 2π`.
    pub ratio: Option<f64>,
    pub k: f64,
    /// `floor(k N)`.
    pub expected_min: usize,
    pub buckets: Vec<Bucket>,
    /// Distinct normalized cross products `c · ℓ / R²` overall.
    pub total_distinct: usize,
    pub quantum: f64,
}

impl BucketReport {
    pub fn all_pass(&self) -> bool {
        self.buckets.iter().all(|b| b.pass)
    }
}

/// Counts distinct normalized projections `c · ℓ / R²` inside each bucket
/// `B_0 = (0, ρ_1)`, `B_i = (ρ_i, ρ_{i+1})`, where `ρ_i = |ℓ_i| / R`.
///
/// `c · ℓ` is the real part of the complex dot product `c ⋆ ℓ`, so the line
/// may lie on any ray. `b_or_r` fixes the ratio in `k = arccos(ratio) / 2π`:
/// a value in `(0, 1)` is `b`, a value above 1 is a geometric ratio `r`
/// standing for `1 / r`. Without it the largest consecutive radius ratio is
/// used. Values within one grid quantum of a bucket edge are not counted.
pub fn bucket_projection_report(circle: &[Point], line: &RayPoints, b_or_r: Option<f64>) -> Result<BucketReport> {
    let first = circle
        .first()
        .ok_or_else(|| Error::usage("the circle needs at least one point"))?;
    if line.is_empty() {
        return Err(Error::usage("the line needs at least one point"));
    }
    let radius = first.radius();
    if radius == 0.0 {
        return Err(Error::usage("circle points must not be the origin"));
    }
    if let Some(p) = circle
        .iter()
        .find(|p| (p.radius() - radius).abs() > RADIUS_TOLERANCE * radius)
    {
        return Err(Error::usage(format!(
            "circle point at radius {} is off the circle of radius {radius}",
            p.radius()
        )));
    }
    let rho: Vec<f64> = line.members().iter().map(|p| p.radius() / radius).collect();
    if rho[0] < 1.0 - RADIUS_TOLERANCE {
        return Err(Error::usage(format!(
            "line point at normalized radius {} lies inside the circle",
            rho[0]
        )));
    }
    let ratio = match b_or_r {
        Some(x) if x > 0.0 && x < 1.0 => Some(x),
        Some(x) if x > 1.0 && x.is_finite() => Some(1.0 / x),
        Some(x) => return Err(Error::usage(format!("b must lie in (0, 1) or r above 1, got {x}"))),
        None => line.ratios().iter().copied().reduce(f64::max),
    };
    let k = ratio.map_or(0.0, |r| r.acos() / TAU);
    let expected_min = (k * circle.len() as f64 + 1e-9).floor() as usize;

    let r2 = radius * radius;
    let circle_xy: Vec<(f64, f64)> = circle.iter().map(Point::to_f64_pair).collect();
    let values: Vec<f64> = line
        .members()
        .iter()
        .flat_map(|l| {
            let (lx, ly) = l.to_f64_pair();
            circle_xy.iter().map(move |(cx, cy)| (cx * lx + cy * ly) / r2)
        })
        .collect();
    let quantum = default_quantum(rho[rho.len() - 1]);
    let cell = |v: f64| (v / quantum).round() as i64;
    let total_distinct = values.iter().map(|&v| cell(v)).collect::<FxHashSet<_>>().len();

    let edges: Vec<f64> = std::iter::once(0.0).chain(rho.iter().copied()).collect();
    let buckets = edges
        .windows(2)
        .enumerate()
        .map(|(index, w)| {
            let (lower, upper) = (w[0], w[1]);
            let distinct = values
                .iter()
                .filter(|&&v| v > lower + quantum && v < upper - quantum)
                .map(|&v| cell(v))
                .collect::<FxHashSet<_>>()
                .len();
            Bucket {
                index,
                lower,
                upper,
                distinct,
                pass: distinct >= expected_min,
            }
        })
        .collect();
    Ok(BucketReport {
        circle_radius: radius,
        circle_len: circle.len(),
        line_radii: rho,
        ratio,
        k,
        expected_min,
        buckets,
        total_distinct,
        quantum,
    })
}
