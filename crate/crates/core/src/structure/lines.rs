use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rustc_hash::FxHashMap;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Mode, Point, Scalar};

use super::rays::RayPoints;

/// Default angular tolerance for grouping approximate directions.
pub const DEFAULT_ANGLE_TOLERANCE: f64 = 1e-12;

/// A line through the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    /// Primitive integer vector with `dx > 0`, or `dx = 0` and `dy > 0`.
    Exact { dx: BigInt, dy: BigInt },
    /// Angle in `[0, π)`.
    Approx { theta: f64 },
}

impl Direction {
    /// Direction of the line through `p`; `None` for the origin.
    pub fn of(p: &Point) -> Option<Direction> {
        if p.is_origin() {
            return None;
        }
        Some(match p.exact_coords() {
            Some((x, y)) => {
                // (a/b, c/d) is parallel to (a d, c b).
                let mut dx = x.numer() * y.denom();
                let mut dy = y.numer() * x.denom();
                let g = dx.gcd(&dy);
                dx /= &g;
                dy /= &g;
                if dx.is_negative() || (dx.is_zero() && dy.is_negative()) {
                    dx = -dx;
                    dy = -dy;
                }
                Direction::Exact { dx, dy }
            }
            None => Direction::Approx {
                theta: half_turn_angle(p.angle()),
            },
        })
    }

    /// Angle of the canonical vector: `(-π/2, π/2]` for exact directions,
    /// `[0, π)` for approximate ones.
    pub fn angle(&self) -> f64 {
        match self {
            Direction::Exact { dx, dy } => Point::exact(dx.clone().into(), dy.clone().into()).angle(),
            Direction::Approx { theta } => *theta,
        }
    }

    /// `+1` or `-1` for the ray of the line containing `p`, `0` at the origin.
    /// Assumes `p` lies on the line.
    pub fn side_of(&self, p: &Point) -> i8 {
        match (self, p.exact_coords()) {
            (Direction::Exact { dx, .. }, Some((x, y))) => {
                // p = t (dx, dy) and dx >= 0, so sign(t) is visible in one coordinate.
                let s = if dx.is_zero() { y.signum() } else { x.signum() };
                if s.is_positive() {
                    1
                } else if s.is_negative() {
                    -1
                } else {
                    0
                }
            }
            _ => {
                let t = self.angle();
                let (x, y) = p.to_f64_pair();
                let along = x * t.cos() + y * t.sin();
                if along > 0.0 {
                    1
                } else if along < 0.0 {
                    -1
                } else {
                    0
                }
            }
        }
    }

    /// Canonical order: exact directions by slope with the vertical last,
    /// approximate ones by angle.
    pub fn canonical_cmp(&self, other: &Direction) -> Ordering {
        match (self, other) {
            (Direction::Exact { dx: a, dy: b }, Direction::Exact { dx: c, dy: d }) => {
                match (a.is_zero(), c.is_zero()) {
                    (true, true) => Ordering::Equal,
                    (true, false) => Ordering::Greater,
                    (false, true) => Ordering::Less,
                    // b/a vs d/c with a, c > 0
                    (false, false) => (b * c).cmp(&(d * a)),
                }
            }
            _ => self.angle().total_cmp(&other.angle()),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Exact { dx, dy } => write!(f, "({dx}, {dy})"),
            Direction::Approx { theta } => write!(f, "θ={theta:?}"),
        }
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Direction::Exact { dx, dy } => {
                let mut s = serializer.serialize_struct("Direction", 2)?;
                s.serialize_field("dx", &dx.to_string())?;
                s.serialize_field("dy", &dy.to_string())?;
                s.end()
            }
            Direction::Approx { theta } => {
                let mut s = serializer.serialize_struct("Direction", 1)?;
                s.serialize_field("theta", theta)?;
                s.end()
            }
        }
    }
}

/// Folds an angle in `(-π, π]` into `[0, π)`.
pub(crate) fn half_turn_angle(a: f64) -> f64 {
    let t = if a < 0.0 { a + PI } else { a };
    if t >= PI {
        t - PI
    } else {
        t
    }
}

/// Points of one supporting line, ordered by signed position along the
/// canonical direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineGroup {
    pub direction: Direction,
    pub members: Vec<Point>,
}

impl LineGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The two rays, positive side first. Either may be empty.
    pub fn rays(&self) -> (RayPoints, RayPoints) {
        let (pos, neg): (Vec<Point>, Vec<Point>) = self
            .members
            .iter()
            .cloned()
            .partition(|p| self.direction.side_of(p) > 0);
        (
            RayPoints::from_members(self.direction.clone(), 1, pos),
            RayPoints::from_members(self.direction.clone(), -1, neg),
        )
    }

    /// The larger ray; ties go to the positive side.
    pub fn popular_ray(&self) -> RayPoints {
        let (pos, neg) = self.rays();
        if neg.len() > pos.len() {
            neg
        } else {
            pos
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportingLines {
    /// Sorted by size descending, then canonical direction.
    pub groups: Vec<LineGroup>,
    /// Origin points, which lie on every line and are left out.
    pub origin_count: usize,
    /// Smallest angular gap between distinct group directions (mod π).
    pub min_angular_gap: Option<f64>,
}

pub fn supporting_lines(cfg: &Configuration) -> SupportingLines {
    supporting_lines_with(cfg, DEFAULT_ANGLE_TOLERANCE)
}

/// Groups approximate directions whose angles chain within `tolerance`.
pub fn supporting_lines_with(cfg: &Configuration, tolerance: f64) -> SupportingLines {
    group_lines(cfg.points(), cfg.mode(), tolerance)
}

pub(crate) fn group_lines(points: &[Point], mode: Mode, tolerance: f64) -> SupportingLines {
    let origin_count = points.iter().filter(|p| p.is_origin()).count();
    let mut groups = match mode {
        Mode::Exact => group_exact(points),
        Mode::Approx => group_approx(points, tolerance),
    };
    for g in &mut groups {
        let dir = g.direction.clone();
        g.members.sort_by(|p, q| position_cmp(&dir, p, q));
    }
    groups.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| a.direction.canonical_cmp(&b.direction))
    });
    let mut angles: Vec<f64> = groups.iter().map(|g| half_turn_angle(g.direction.angle())).collect();
    angles.sort_by(f64::total_cmp);
    let min_angular_gap = if angles.len() < 2 {
        None
    } else {
        let wrap = angles[0] + PI - angles[angles.len() - 1];
        angles.windows(2).map(|w| w[1] - w[0]).chain([wrap]).reduce(f64::min)
    };
    SupportingLines {
        groups,
        origin_count,
        min_angular_gap,
    }
}

/// Order by signed position along the direction.
fn position_cmp(dir: &Direction, p: &Point, q: &Point) -> Ordering {
    let (sp, sq) = (dir.side_of(p), dir.side_of(q));
    if sp != sq {
        return sp.cmp(&sq);
    }
    let by_radius = radius_cmp(p, q);
    if sp < 0 {
        by_radius.reverse()
    } else {
        by_radius
    }
}

/// Compares `|p|` and `|q|`, exactly when both are exact.
pub(crate) fn radius_cmp(p: &Point, q: &Point) -> Ordering {
    match (p.radius2(), q.radius2()) {
        (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(&b),
        (a, b) => a.to_f64().total_cmp(&b.to_f64()),
    }
}

fn group_exact(points: &[Point]) -> Vec<LineGroup> {
    let mut index: FxHashMap<(BigInt, BigInt), usize> = FxHashMap::default();
    let mut groups: Vec<LineGroup> = Vec::new();
    for p in points {
        let Some(direction) = Direction::of(p) else {
            continue;
        };
        let Direction::Exact { dx, dy } = &direction else {
            unreachable!("exact point");
        };
        let slot = *index.entry((dx.clone(), dy.clone())).or_insert_with(|| {
            groups.push(LineGroup {
                direction: direction.clone(),
                members: Vec::new(),
            });
            groups.len() - 1
        });
        groups[slot].members.push(p.clone());
    }
    groups
}

fn group_approx(points: &[Point], tolerance: f64) -> Vec<LineGroup> {
    let mut keyed: Vec<(f64, &Point)> = points
        .iter()
        .filter(|p| !p.is_origin())
        .map(|p| (half_turn_angle(p.angle()), p))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<(f64, Vec<Point>)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (theta, p) in keyed {
        match clusters.last_mut() {
            Some((_, members)) if theta - last <= tolerance => members.push(p.clone()),
            _ => clusters.push((theta, vec![p.clone()])),
        }
        last = theta;
    }
    // Angles just below π and just above 0 describe the same line.
    if clusters.len() > 1 && clusters[0].0 + PI - last <= tolerance {
        let (_, tail) = clusters.pop().expect("nonempty");
        clusters[0].1.extend(tail);
    }
    clusters
        .into_iter()
        .map(|(theta, members)| LineGroup {
            direction: Direction::Approx { theta },
            members,
        })
        .collect()
}

/// The largest supporting line.
pub fn popular_line(cfg: &Configuration) -> Result<LineGroup> {
    supporting_lines(cfg)
        .groups
        .into_iter()
        .next()
        .ok_or_else(|| Error::domain("every point is at the origin"))
}

/// Whether `p` lies on the line (exactly, or within the default tolerance).
pub(crate) fn on_line(dir: &Direction, p: &Point) -> bool {
    match (dir, Direction::of(p)) {
        (_, None) => true,
        (Direction::Exact { .. }, Some(d)) => &d == dir,
        (Direction::Approx { theta }, Some(d)) => {
            let diff = (d.angle() - theta).abs();
            diff.min(PI - diff) <= DEFAULT_ANGLE_TOLERANCE
        }
    }
}
