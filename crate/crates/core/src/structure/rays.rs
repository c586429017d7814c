use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Mode, Point, Scalar};

use super::lines::{group_lines, on_line, radius_cmp, Direction, DEFAULT_ANGLE_TOLERANCE};

/// Points on one side of the origin along one line, by increasing radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayPoints {
    direction: Direction,
    side: i8,
    members: Vec<Point>,
    /// `|p_i| / |p_{i+1}|` for consecutive members.
    ratios: Vec<f64>,
}

impl RayPoints {
    /// Validates that `points` are distinct, non-origin and on one ray, then
    /// sorts them by radius.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::usage("a ray needs at least one point"))?;
        let direction = Direction::of(first).ok_or_else(|| Error::usage("the origin is on no ray"))?;
        let side = direction.side_of(first);
        for p in &points {
            if p.mode() != first.mode() {
                return Err(Error::usage("ray points mix exact and approximate coordinates"));
            }
            if p.is_origin() {
                return Err(Error::usage("the origin is on no ray"));
            }
            if !on_line(&direction, p) {
                let (x, y) = p.to_f64_pair();
                return Err(Error::usage(format!(
                    "point ({x:?}, {y:?}) is not on the line {direction}"
                )));
            }
            if direction.side_of(p) != side {
                let (x, y) = p.to_f64_pair();
                return Err(Error::usage(format!("point ({x:?}, {y:?}) is on the opposite ray")));
            }
        }
        let ray = RayPoints::from_members(direction, side, points);
        if ray
            .members
            .windows(2)
            .any(|w| radius_cmp(&w[0], &w[1]) == Ordering::Equal)
        {
            return Err(Error::usage("ray points must be distinct"));
        }
        Ok(ray)
    }

    /// Trusted construction from points known to share the ray.
    pub(crate) fn from_members(direction: Direction, side: i8, mut members: Vec<Point>) -> Self {
        members.sort_by(radius_cmp);
        let ratios = members.windows(2).map(|w| radius_ratio(&w[0], &w[1])).collect();
        RayPoints {
            direction,
            side,
            members,
            ratios,
        }
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    /// `+1` or `-1` relative to the canonical direction.
    pub fn side(&self) -> i8 {
        self.side
    }

    pub fn members(&self) -> &[Point] {
        &self.members
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `|p| / |q|` as a double, computed from the squared ratio so huge exact
/// radii do not overflow.
fn radius_ratio(p: &Point, q: &Point) -> f64 {
    match (p.radius2(), q.radius2()) {
        (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a / b).to_f64().sqrt(),
        _ => p.radius() / q.radius(),
    }
}

pub(crate) fn check_b(b: &Scalar) -> Result<()> {
    let v = b.to_f64();
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("b must lie in (0, 1), got {b}")))
    }
}

/// Compares `|inner| / |outer|` with `b` through `|inner|² ⋚ b² |outer|²`,
/// exactly when the points are exact.
pub(crate) fn compare_ratio(inner: &Point, outer: &Point, b: &Scalar) -> Result<Ordering> {
    Ok(match (inner.radius2(), outer.radius2()) {
        (Scalar::Exact(ri), Scalar::Exact(ro)) => {
            let b = b.to_mode(Mode::Exact)?;
            let b = b.as_exact().expect("exact");
            ri.cmp(&(b * b * ro))
        }
        (ri, ro) => {
            let b = b.to_f64();
            ri.to_f64().total_cmp(&(b * b * ro.to_f64()))
        }
    })
}

/// `W_b(p, q)`: same-ray points with `|p| / |q| < b` for the smaller radius.
pub fn is_well_spaced_pair(p: &Point, q: &Point, b: &Scalar) -> Result<bool> {
    check_b(b)?;
    let ray = RayPoints::new(vec![p.clone(), q.clone()])?;
    Ok(compare_ratio(&ray.members[0], &ray.members[1], b)? == Ordering::Less)
}

/// Every consecutive pair is well spaced; vacuous for fewer than two points.
pub fn is_well_spaced(l: &RayPoints, b: &Scalar) -> Result<bool> {
    check_b(b)?;
    for w in l.members.windows(2) {
        if compare_ratio(&w[0], &w[1], b)? != Ordering::Less {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    /// Maximal well-spaced subset, greedy from the innermost point.
    pub kept: RayPoints,
    /// Each rejected point with a consecutive neighbour in the input at
    /// ratio `>= b` (the preceding one when possible).
    pub t_pairs: Vec<(Point, Point)>,
}

/// Greedy maximal `W_b` subset: keep the innermost point, then every point
/// well spaced from the last kept one.
pub fn extract_max_well_spaced(l: &RayPoints, b: &Scalar) -> Result<Extraction> {
    check_b(b)?;
    let mut kept: Vec<Point> = Vec::new();
    let mut rejected: Vec<usize> = Vec::new();
    for (i, p) in l.members.iter().enumerate() {
        match kept.last() {
            Some(last) if compare_ratio(last, p, b)? != Ordering::Less => rejected.push(i),
            _ => kept.push(p.clone()),
        }
    }
    let mut t_pairs = Vec::with_capacity(rejected.len());
    for i in rejected {
        let t = &l.members[i];
        let before = i.checked_sub(1).map(|j| &l.members[j]);
        let after = l.members.get(i + 1);
        let partner = match (before, after) {
            (Some(p), _) if compare_ratio(p, t, b)? != Ordering::Less => p,
            (_, Some(q)) if compare_ratio(t, q, b)? != Ordering::Less => q,
            _ => unreachable!("a rejected point is close to its predecessor"),
        };
        t_pairs.push((t.clone(), partner.clone()));
    }
    Ok(Extraction {
        kept: RayPoints::from_members(l.direction.clone(), l.side, kept),
        t_pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub direction: Direction,
    pub side: i8,
    /// Points on the ray.
    pub len: usize,
    /// Consecutive ratios in `(b, 1)`.
    pub close_pairs: usize,
    /// Consecutive ratios below `b`.
    pub spaced_pairs: usize,
    /// Consecutive ratios equal to `b`.
    pub boundary_pairs: usize,
    pub b: Scalar,
    pub c: f64,
    pub n: usize,
    /// `c √n`.
    pub threshold: f64,
    pub is_b_dense: bool,
}

/// Classifies consecutive ratios of `l` against `b`; the ray is b-dense when
/// `close_pairs >= c √n`.
pub fn density_report(l: &RayPoints, b: &Scalar, c: f64, n: usize) -> Result<DensityReport> {
    check_b(b)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::usage(format!(
            "threshold coefficient must be non-negative, got {c}"
        )));
    }
    let (mut close, mut spaced, mut boundary) = (0, 0, 0);
    for w in l.members.windows(2) {
        match compare_ratio(&w[0], &w[1], b)? {
            Ordering::Greater => close += 1,
            Ordering::Less => spaced += 1,
            Ordering::Equal => boundary += 1,
        }
    }
    let threshold = c * (n as f64).sqrt();
    Ok(DensityReport {
        direction: l.direction.clone(),
        side: l.side,
        len: l.len(),
        close_pairs: close,
        spaced_pairs: spaced,
        boundary_pairs: boundary,
        b: b.clone(),
        c,
        n,
        threshold,
        is_b_dense: close as f64 >= threshold,
    })
}

/// Repeatedly reports on the popular line's popular ray and removes it.
/// The threshold uses the original configuration size throughout.
pub fn iterate_dense_lines(cfg: &Configuration, b: &Scalar, c: f64, rounds: usize) -> Result<Vec<DensityReport>> {
    check_b(b)?;
    if rounds == 0 {
        return Err(Error::usage("rounds must be at least 1"));
    }
    let n = cfg.len();
    let mut remaining: Vec<Point> = cfg.points().iter().filter(|p| !p.is_origin()).cloned().collect();
    let mut reports = Vec::new();
    for _ in 0..rounds {
        let lines = group_lines(&remaining, cfg.mode(), DEFAULT_ANGLE_TOLERANCE);
        let Some(line) = lines.groups.first() else {
            break;
        };
        let ray = line.popular_ray();
        reports.push(density_report(&ray, b, c, n)?);
        let removed: std::collections::HashSet<&Point> = ray.members().iter().collect();
        remaining = remaining.iter().filter(|p| !removed.contains(p)).cloned().collect();
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(xs: &[i64]) -> RayPoints {
        RayPoints::new(xs.iter().map(|&x| Point::int(x, 0)).collect()).unwrap()
    }

    fn xs(ray: &RayPoints) -> Vec<f64> {
        ray.members().iter().map(|p| p.x().to_f64()).collect()
    }

    fn half() -> Scalar {
        Scalar::ratio(1, 2)
    }

    #[test]
    fn pair_predicate() {
        let p = |x| Point::int(x, 0);
        assert!(is_well_spaced_pair(&p(1), &p(4), &half()).unwrap());
        assert!(is_well_spaced_pair(&p(4), &p(1), &half()).unwrap());
        assert!(!is_well_spaced_pair(&p(2), &p(3), &half()).unwrap());
        assert!(!is_well_spaced_pair(&p(1), &p(2), &half()).unwrap());
        assert!(is_well_spaced_pair(&p(1), &Point::int(0, 3), &half()).is_err());
        assert!(is_well_spaced_pair(&p(1), &p(-3), &half()).is_err());
        assert!(is_well_spaced_pair(&p(1), &p(3), &Scalar::int(1)).is_err());
    }

    #[test]
    fn set_predicate() {
        assert!(is_well_spaced(&axis(&[1, 3, 7]), &half()).unwrap());
        assert!(!is_well_spaced(&axis(&[1, 2, 3]), &half()).unwrap());
        assert!(is_well_spaced(&axis(&[5]), &half()).unwrap());
    }

    #[test]
    fn greedy_extraction() {
        let l = axis(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let e = extract_max_well_spaced(&l, &half()).unwrap();
        assert_eq!(xs(&e.kept), vec![1.0, 3.0, 7.0]);
        assert_eq!(e.t_pairs.len(), 5);
        for (t, partner) in &e.t_pairs {
            let ray = RayPoints::new(vec![t.clone(), partner.clone()]).unwrap();
            assert_ne!(
                compare_ratio(&ray.members()[0], &ray.members()[1], &half()).unwrap(),
                Ordering::Less
            );
        }
        let geometric = axis(&[1, 4, 16, 64]);
        let e = extract_max_well_spaced(&geometric, &half()).unwrap();
        assert_eq!(e.kept, geometric);
        assert!(e.t_pairs.is_empty());
    }

    #[test]
    fn density_counts() {
        let b = Scalar::parse_in("0.7", Mode::Exact).unwrap();
        let r = density_report(&axis(&[1, 2, 3, 4, 5]), &b, 1.0, 5).unwrap();
        assert_eq!((r.close_pairs, r.spaced_pairs, r.boundary_pairs), (2, 2, 0));
        let g = density_report(&axis(&[1, 2, 4, 8]), &b, 1.0, 4).unwrap();
        assert_eq!(g.close_pairs, 0);
        let arith: Vec<i64> = (10..110).collect();
        let b9 = Scalar::parse_in("0.9", Mode::Exact).unwrap();
        let a = density_report(&axis(&arith), &b9, 1.0, 100).unwrap();
        assert_eq!(a.close_pairs, 99);
        assert!(a.is_b_dense);
        let edge = density_report(&axis(&[1, 2]), &half(), 1.0, 2).unwrap();
        assert_eq!(edge.boundary_pairs, 1);
    }

    #[test]
    fn iterated_extraction() {
        let mut points: Vec<Point> = (10..110).map(|k| Point::int(k, 0)).collect();
        points.extend((10..110).map(|k| Point::int(0, k)));
        let cfg = Configuration::new(points).unwrap();
        let b = Scalar::parse_in("0.9", Mode::Exact).unwrap();
        let reports = iterate_dense_lines(&cfg, &b, 1.0, 2).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.is_b_dense && r.close_pairs == 99));
        let one_ray = Configuration::new((1..6).map(|k| Point::int(k, k)).collect()).unwrap();
        assert_eq!(iterate_dense_lines(&one_ray, &b, 1.0, 3).unwrap().len(), 1);
    }

    #[test]
    fn ray_validation() {
        assert!(RayPoints::new(vec![]).is_err());
        assert!(RayPoints::new(vec![Point::int(0, 0)]).is_err());
        let ray = RayPoints::new(vec![Point::int(-4, -4), Point::int(-1, -1)]).unwrap();
        assert_eq!(ray.side(), -1);
        assert_eq!(ray.members()[0], Point::int(-1, -1));
        assert_eq!(ray.ratios(), &[0.25]);
    }
}
