use std::collections::HashSet;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::scalar::{Mode, Scalar};
use crate::error::{Error, Result};

/// A planar point whose coordinates share one [`Mode`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    x: Scalar,
    y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Result<Self> {
        match (x, y) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Ok(Point::exact(x, y)),
            (Scalar::Approx(x), Scalar::Approx(y)) => Point::try_approx(x, y),
            (x, y) => Err(Error::usage(format!(
                "point ({x}, {y}) mixes {} and {} coordinates",
                x.mode(),
                y.mode()
            ))),
        }
    }

    pub fn exact(x: BigRational, y: BigRational) -> Self {
        Point {
            x: Scalar::Exact(x),
            y: Scalar::Exact(y),
        }
    }

    /// Integer point in exact mode.
    pub fn int(x: i64, y: i64) -> Self {
        Point::exact(
            BigRational::from_integer(BigInt::from(x)),
            BigRational::from_integer(BigInt::from(y)),
        )
    }

    /// Approximate point. Panics on non-finite input; use [`Point::new`] for
    /// checked construction.
    pub fn approx(x: f64, y: f64) -> Self {
        Point::try_approx(x, y).expect("finite coordinates")
    }

    fn try_approx(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::usage(format!("non-finite point ({x}, {y})")));
        }
        // -0.0 and 0.0 name the same point; keep one bit pattern.
        let norm = |v: f64| if v == 0.0 { 0.0 } else { v };
        Ok(Point {
            x: Scalar::Approx(norm(x)),
            y: Scalar::Approx(norm(y)),
        })
    }

    pub fn x(&self) -> &Scalar {
        &self.x
    }

    pub fn y(&self) -> &Scalar {
        &self.y
    }

    pub fn mode(&self) -> Mode {
        self.x.mode()
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// `x² + y²` in the point's own mode.
    pub fn radius2(&self) -> Scalar {
        match (&self.x, &self.y) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(x * x + y * y),
            (Scalar::Approx(x), Scalar::Approx(y)) => Scalar::Approx(x * x + y * y),
            _ => unreachable!("homogeneous by construction"),
        }
    }

    pub fn radius(&self) -> f64 {
        match (&self.x, &self.y) {
            (Scalar::Approx(x), Scalar::Approx(y)) => x.hypot(*y),
            _ => self.x.to_f64().hypot(self.y.to_f64()),
        }
    }

    /// `atan2(y, x)` in `(-π, π]`; always approximate. The origin maps to 0.
    pub fn angle(&self) -> f64 {
        match (&self.x, &self.y) {
            (Scalar::Approx(x), Scalar::Approx(y)) => y.atan2(*x),
            (Scalar::Exact(x), Scalar::Exact(y)) => {
                if x.is_zero() && y.is_zero() {
                    return 0.0;
                }
                // Scale into [-1, 1] first so huge coordinates do not overflow.
                let m = if x.abs() > y.abs() { x.abs() } else { y.abs() };
                let xs = (x / &m).to_f64().unwrap_or(0.0);
                let ys = (y / &m).to_f64().unwrap_or(0.0);
                let a = ys.atan2(xs);
                if a == -PI {
                    PI
                } else {
                    a
                }
            }
            _ => unreachable!("homogeneous by construction"),
        }
    }

    pub fn to_mode(&self, mode: Mode) -> Result<Point> {
        Point::new(self.x.to_mode(mode)?, self.y.to_mode(mode)?)
    }

    pub(crate) fn exact_coords(&self) -> Option<(&BigRational, &BigRational)> {
        match (&self.x, &self.y) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Some((x, y)),
            _ => None,
        }
    }

    /// Coordinates as doubles (exact values are rounded).
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

impl Eq for Point {}

impl Hash for Point {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match (&self.x, &self.y) {
            (Scalar::Exact(x), Scalar::Exact(y)) => {
                // Ratio's own Hash expands a continued fraction; reduced
                // parts hash the same value far more cheaply.
                0u8.hash(state);
                for q in [x, y] {
                    q.numer().hash(state);
                    q.denom().hash(state);
                }
            }
            (Scalar::Approx(x), Scalar::Approx(y)) => {
                1u8.hash(state);
                x.to_bits().hash(state);
                y.to_bits().hash(state);
            }
            _ => unreachable!("homogeneous by construction"),
        }
    }
}

/// An ordered list of pairwise distinct points sharing one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    points: Vec<Point>,
    mode: Mode,
}

impl Configuration {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::usage("configuration has no points"))?;
        let mode = first.mode();
        if let Some(p) = points.iter().find(|p| p.mode() != mode) {
            return Err(Error::usage(format!(
                "point ({}, {}) is {} in a {mode} configuration",
                p.x,
                p.y,
                p.mode()
            )));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !seen.insert(p) {
                return Err(Error::usage(format!("duplicate point ({}, {})", p.x, p.y)));
            }
        }
        Ok(Configuration { points, mode })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    /// Converts every point into `mode`.
    pub fn to_mode(&self, mode: Mode) -> Result<Configuration> {
        if mode == self.mode {
            return Ok(self.clone());
        }
        Configuration::new(self.points.iter().map(|p| p.to_mode(mode)).collect::<Result<_>>()?)
    }

    /// Concatenation; fails if the parts share a point.
    pub fn union(&self, other: &Configuration) -> Result<Configuration> {
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Configuration::new(points)
    }

    pub fn non_origin_count(&self) -> usize {
        self.points.iter().filter(|p| !p.is_origin()).count()
    }
}

impl<'a> IntoIterator for &'a Configuration {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// `p ⋆ q = |p||q| e^{i(arg p − arg q)}`, i.e. `p · conj(q)` read as complex
/// numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexDot {
    /// Real part; equals `dot(p, q)` and keeps the points' mode.
    pub re: Scalar,
    pub im: f64,
    pub modulus: f64,
    /// `arg p − arg q` wrapped into `(-π, π]`.
    pub angle: f64,
}

fn check_modes(p: &Point, q: &Point) -> Result<()> {
    if p.mode() == q.mode() {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "dot product of {} and {} points",
            p.mode(),
            q.mode()
        )))
    }
}

/// Euclidean dot product `p_x q_x + p_y q_y`.
pub fn dot(p: &Point, q: &Point) -> Result<Scalar> {
    check_modes(p, q)?;
    Ok(match (p.x(), p.y(), q.x(), q.y()) {
        (Scalar::Exact(px), Scalar::Exact(py), Scalar::Exact(qx), Scalar::Exact(qy)) => {
            Scalar::Exact(px * qx + py * qy)
        }
        (Scalar::Approx(px), Scalar::Approx(py), Scalar::Approx(qx), Scalar::Approx(qy)) => {
            Scalar::Approx(px * qx + py * qy)
        }
        _ => unreachable!("modes checked"),
    })
}

pub fn complex_dot(p: &Point, q: &Point) -> Result<ComplexDot> {
    check_modes(p, q)?;
    if p.is_origin() || q.is_origin() {
        return Err(Error::domain("complex dot product with the origin has no argument"));
    }
    let re = dot(p, q)?;
    // Im(p · conj q) = p_y q_x − p_x q_y
    let im = match (p.x(), p.y(), q.x(), q.y()) {
        (Scalar::Exact(px), Scalar::Exact(py), Scalar::Exact(qx), Scalar::Exact(qy)) => {
            Scalar::Exact(py * qx - px * qy).to_f64()
        }
        _ => {
            let (px, py) = p.to_f64_pair();
            let (qx, qy) = q.to_f64_pair();
            py * qx - px * qy
        }
    };
    let modulus = p.radius() * q.radius();
    let mut angle = im.atan2(re.to_f64());
    if angle == -PI {
        angle = PI;
    }
    Ok(ComplexDot { re, im, modulus, angle })
}

/// Applies the rotation `(x, y) ↦ (cx − sy, sx + cy)`.
///
/// `c² + s²` must equal 1 exactly in exact mode (pass a rational point on the
/// unit circle such as `(3/5, 4/5)`), or within `1e-12` in approximate mode.
pub fn rotate(config: &Configuration, c: &Scalar, s: &Scalar) -> Result<Configuration> {
    let mode = config.mode();
    if c.mode() != mode || s.mode() != mode {
        return Err(Error::usage("rotation must match the configuration's mode"));
    }
    let norm = c.try_mul(c)?.try_add(&s.try_mul(s)?)?;
    let unit = match &norm {
        Scalar::Exact(q) => q.is_one(),
        Scalar::Approx(v) => (v - 1.0).abs() <= 1e-12,
    };
    if !unit {
        return Err(Error::usage(format!("c² + s² = {norm}, expected 1")));
    }
    let points = config
        .iter()
        .map(|p| {
            let x = c.try_mul(p.x())?.try_sub(&s.try_mul(p.y())?)?;
            let y = s.try_mul(p.x())?.try_add(&c.try_mul(p.y())?)?;
            Point::new(x, y)
        })
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(points)
}

/// Multiplies every point by `s`; every dot product scales by `s²`.
pub fn scale(config: &Configuration, s: &Scalar) -> Result<Configuration> {
    if s.mode() != config.mode() {
        return Err(Error::usage("scale factor must match the configuration's mode"));
    }
    if s.is_zero() {
        return Err(Error::usage("scale factor 0 collapses every point to the origin"));
    }
    let points = config
        .iter()
        .map(|p| Point::new(s.try_mul(p.x())?, s.try_mul(p.y())?))
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&Point::int(1, 0), &Point::int(4, 0)).unwrap(), Scalar::int(4));
        assert_eq!(dot(&Point::int(1, 0), &Point::int(0, 1)).unwrap(), Scalar::int(0));
        let u = Point::exact(q(3, 5), q(4, 5));
        assert_eq!(dot(&u, &u).unwrap(), Scalar::int(1));
    }

    #[test]
    fn dot_rejects_mixed_modes() {
        let e = dot(&Point::int(1, 0), &Point::approx(1.0, 0.0));
        assert!(matches!(e, Err(Error::Usage(_))));
    }

    #[test]
    fn complex_dot_examples() {
        let z = complex_dot(&Point::int(2, 0), &Point::int(3, 0)).unwrap();
        assert_eq!(z.re, Scalar::int(6));
        assert_eq!((z.modulus, z.angle), (6.0, 0.0));

        let z = complex_dot(&Point::int(0, 1), &Point::int(1, 0)).unwrap();
        assert_eq!(z.re, Scalar::int(0));
        assert!((z.modulus - 1.0).abs() < 1e-15);
        assert!((z.angle - FRAC_PI_2).abs() < 1e-15);

        let z = complex_dot(&Point::int(1, 1), &Point::int(2, 0)).unwrap();
        assert_eq!(z.re, Scalar::int(2));
        assert!((z.modulus - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((z.angle - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn complex_dot_rejects_origin() {
        let e = complex_dot(&Point::int(0, 0), &Point::int(1, 0));
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn rotation_examples() {
        let cfg = Configuration::new(vec![Point::int(1, 0)]).unwrap();
        let same = rotate(&cfg, &Scalar::int(1), &Scalar::int(0)).unwrap();
        assert_eq!(same, cfg);
        let r = rotate(&cfg, &Scalar::ratio(3, 5), &Scalar::ratio(4, 5)).unwrap();
        assert_eq!(r.points()[0], Point::exact(q(3, 5), q(4, 5)));
        assert!(rotate(&cfg, &Scalar::int(1), &Scalar::int(1)).is_err());
    }

    #[test]
    fn scale_rejects_zero() {
        let cfg = Configuration::new(vec![Point::int(1, 0)]).unwrap();
        assert!(matches!(scale(&cfg, &Scalar::int(0)), Err(Error::Usage(_))));
    }

    #[test]
    fn configuration_invariants() {
        assert!(Configuration::new(vec![]).is_err());
        assert!(Configuration::new(vec![Point::int(1, 2), Point::int(1, 2)]).is_err());
        assert!(Configuration::new(vec![Point::int(1, 2), Point::approx(1.0, 2.0)]).is_err());
        // signed zeros collapse
        assert!(Configuration::new(vec![Point::approx(0.0, 1.0), Point::approx(-0.0, 1.0)]).is_err());
    }

    #[test]
    fn exact_angle_survives_huge_coordinates() {
        let big = num_traits::pow(BigRational::from_integer(3.into()), 3000);
        let p = Point::exact(big.clone(), big);
        assert!((p.angle() - PI / 4.0).abs() < 1e-15);
        assert_eq!(Point::int(-1, 0).angle(), PI);
    }
}
