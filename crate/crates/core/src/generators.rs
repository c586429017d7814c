//! Deterministic constructions of the point families under study.
//!
//! Random families draw from [`Prng`], a xoshiro256++ generator seeded through
//! SplitMix64 (`seed_from_u64`). Uniform doubles take the top 53 bits of each
//! output, so a seed reproduces the same configuration on every platform.

use std::collections::HashSet;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Mode, Point, Scalar};

/// Seeded xoshiro256++ stream.
#[derive(Debug, Clone)]
pub struct Prng(Xoshiro256PlusPlus);

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (`bound > 0`), by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        lo + self.below((hi - lo) as u64 + 1) as i64
    }
}

fn default_radius() -> Scalar {
    Scalar::int(1)
}

fn default_random_mode() -> Mode {
    Mode::Approx
}

/// Parameters for one generated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// `(a r^k, 0)` for `k = 0..n`.
    GeometricLine {
        a: Scalar,
        r: Scalar,
        #[serde(default)]
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<Mode>,
    },
    /// `(a + k d, 0)` for `k = 0..n`.
    ArithmeticLine {
        a: Scalar,
        d: Scalar,
        #[serde(default)]
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode: Option<Mode>,
    },
    EquallySpacedCircle {
        #[serde(default)]
        n: usize,
        #[serde(default = "default_radius")]
        radius: Scalar,
        #[serde(default)]
        phase: f64,
    },
    /// `circle` unit-circle points plus a geometric line `a r^k`, `k < line`.
    CirclePlusLine {
        #[serde(default)]
        circle: usize,
        #[serde(default)]
        line: usize,
        r: Scalar,
        a: Scalar,
    },
    /// `circle` unit-circle points inside the sector `[0, arccos b]` plus
    /// line points at the given radii on the positive x-axis.
    SectorCirclePlusLine {
        #[serde(default)]
        circle: usize,
        radii: Vec<Scalar>,
        b: Scalar,
    },
    /// Radii `r^i` (`i < circles`) crossed with `rays` equally spaced angles.
    PolarLattice {
        circles: usize,
        #[serde(default)]
        rays: usize,
        r: Scalar,
    },
    RandomDisk {
        #[serde(default)]
        n: usize,
        seed: u64,
        #[serde(default = "default_radius")]
        radius: Scalar,
        #[serde(default = "default_random_mode")]
        mode: Mode,
    },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Configuration> {
        match self {
            GeneratorSpec::GeometricLine { a, r, n, mode } => {
                let (a, r) = coerce_pair(a, r, *mode)?;
                gen_geometric_line(&a, &r, *n)
            }
            GeneratorSpec::ArithmeticLine { a, d, n, mode } => {
                let (a, d) = coerce_pair(a, d, *mode)?;
                gen_arithmetic_line(&a, &d, *n)
            }
            GeneratorSpec::EquallySpacedCircle { n, radius, phase } => gen_equally_spaced_circle(*n, radius, *phase),
            GeneratorSpec::CirclePlusLine { circle, line, r, a } => {
                gen_circle_plus_line(*circle, *line, r, a).map(|c| c.config)
            }
            GeneratorSpec::SectorCirclePlusLine { circle, radii, b } => {
                gen_sector_circle_plus_line(*circle, radii, b).map(|c| c.config)
            }
            GeneratorSpec::PolarLattice { circles, rays, r } => gen_polar_lattice(*circles, *rays, r),
            GeneratorSpec::RandomDisk { n, seed, radius, mode } => gen_random_disk(*n, *seed, radius, *mode),
        }
    }

    /// Generates composite families with their circle/line split preserved.
    pub fn generate_parts(&self) -> Result<Option<CircleAndLine>> {
        match self {
            GeneratorSpec::CirclePlusLine { circle, line, r, a } => {
                gen_circle_plus_line(*circle, *line, r, a).map(Some)
            }
            GeneratorSpec::SectorCirclePlusLine { circle, radii, b } => {
                gen_sector_circle_plus_line(*circle, radii, b).map(Some)
            }
            _ => Ok(None),
        }
    }

    /// The same family at size `n`. Single-size families take `n` points;
    /// circle-plus-line takes `round(n^circle_exp)` circle and
    /// `round(n^line_exp)` line points; the sector family takes `n` circle
    /// points and the polar lattice `n` rays.
    pub fn resized(&self, n: usize, circle_exp: f64, line_exp: f64) -> GeneratorSpec {
        let power = |e: f64| ((n as f64).powf(e).round() as usize).max(1);
        let mut spec = self.clone();
        match &mut spec {
            GeneratorSpec::GeometricLine { n: size, .. }
            | GeneratorSpec::ArithmeticLine { n: size, .. }
            | GeneratorSpec::EquallySpacedCircle { n: size, .. }
            | GeneratorSpec::RandomDisk { n: size, .. }
            | GeneratorSpec::SectorCirclePlusLine { circle: size, .. }
            | GeneratorSpec::PolarLattice { rays: size, .. } => *size = n,
            GeneratorSpec::CirclePlusLine { circle, line, .. } => {
                *circle = power(circle_exp);
                *line = power(line_exp);
            }
        }
        spec
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::GeometricLine { .. } => "geometric-line",
            GeneratorSpec::ArithmeticLine { .. } => "arithmetic-line",
            GeneratorSpec::EquallySpacedCircle { .. } => "equally-spaced-circle",
            GeneratorSpec::CirclePlusLine { .. } => "circle-plus-line",
            GeneratorSpec::SectorCirclePlusLine { .. } => "sector-circle-plus-line",
            GeneratorSpec::PolarLattice { .. } => "polar-lattice",
            GeneratorSpec::RandomDisk { .. } => "random-disk",
        }
    }
}

fn coerce_pair(a: &Scalar, b: &Scalar, mode: Option<Mode>) -> Result<(Scalar, Scalar)> {
    let mode = match mode {
        Some(m) => m,
        None if a.mode() == Mode::Exact && b.mode() == Mode::Exact => Mode::Exact,
        None => Mode::Approx,
    };
    Ok((a.to_mode(mode)?, b.to_mode(mode)?))
}

fn require_count(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        Err(Error::usage(format!("{what} must be at least 1")))
    } else {
        Ok(())
    }
}

fn positive_f64(s: &Scalar, what: &str) -> Result<f64> {
    let v = s.to_f64();
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::usage(format!("{what} must be positive, got {s}")))
    }
}

fn on_x_axis(x: Scalar) -> Result<Point> {
    let zero = Scalar::zero(x.mode());
    Point::new(x, zero)
}

/// Points `(a r^k, 0)`, `k = 0..n`.
pub fn gen_geometric_line(a: &Scalar, r: &Scalar, n: usize) -> Result<Configuration> {
    require_count(n, "n")?;
    if a.mode() != r.mode() {
        return Err(Error::usage("a and r must share a mode"));
    }
    if a.is_zero() {
        return Err(Error::usage("a = 0 places every point at the origin"));
    }
    if r.signum() <= 0 {
        return Err(Error::usage(format!("ratio r must be positive, got {r}")));
    }
    if r.try_cmp(&Scalar::one(r.mode()))?.is_eq() {
        return Err(Error::usage("ratio r = 1 repeats the same point"));
    }
    let points = match (a, r) {
        (Scalar::Exact(a), Scalar::Exact(r)) => {
            // With gcd(A, B) = gcd(P, Q) = 1, the fraction A P / (B Q) reduces by
            // exactly gcd(A, Q) · gcd(P, B), which avoids a full-width gcd per term.
            let (num, den) = (a.numer(), a.denom());
            let (mut p, mut q) = (BigInt::one(), BigInt::one());
            let mut points = Vec::with_capacity(n);
            for _ in 0..n {
                let g = small_gcd(num, &q) * small_gcd(den, &p);
                let term = BigRational::new_raw(num * &p / &g, den * &q / &g);
                points.push(Point::exact(term, BigRational::zero()));
                p *= r.numer();
                q *= r.denom();
            }
            points
        }
        (Scalar::Approx(a), Scalar::Approx(r)) => (0..n)
            .map(|k| Point::new(Scalar::Approx(a * r.powi(k as i32)), Scalar::Approx(0.0)))
            .collect::<Result<_>>()?,
        _ => unreachable!(),
    };
    Configuration::new(points)
}

/// `gcd(small, big)` reducing the big operand first.
fn small_gcd(small: &BigInt, big: &BigInt) -> BigInt {
    if small.is_zero() {
        return big.abs();
    }
    small.gcd(&(big % small))
}

/// Points `(a + k d, 0)`, `k = 0..n`.
pub fn gen_arithmetic_line(a: &Scalar, d: &Scalar, n: usize) -> Result<Configuration> {
    require_count(n, "n")?;
    if a.mode() != d.mode() {
        return Err(Error::usage("a and d must share a mode"));
    }
    if d.is_zero() {
        return Err(Error::usage("step d = 0 repeats the same point"));
    }
    let mut points = Vec::with_capacity(n);
    let mut x = a.clone();
    for k in 0..n {
        if x.is_zero() {
            return Err(Error::usage(format!("term k = {k} lands on the origin")));
        }
        points.push(on_x_axis(x.clone())?);
        x = match (a, d) {
            (Scalar::Approx(a), Scalar::Approx(d)) => Scalar::Approx(a + (k + 1) as f64 * d),
            _ => x.try_add(d)?,
        };
    }
    Configuration::new(points)
}

/// `n` points `R (cos(φ + 2πk/n), sin(φ + 2πk/n))`; always approximate.
pub fn gen_equally_spaced_circle(n: usize, radius: &Scalar, phase: f64) -> Result<Configuration> {
    require_count(n, "n")?;
    let radius = positive_f64(radius, "radius")?;
    let points = circle_points(n, radius, phase);
    Configuration::new(points)
}

fn circle_points(n: usize, radius: f64, phase: f64) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let theta = phase + TAU * k as f64 / n as f64;
            Point::approx(radius * theta.cos(), radius * theta.sin())
        })
        .collect()
}

/// A configuration built from a circle part followed by a line part.
#[derive(Debug, Clone)]
pub struct CircleAndLine {
    pub config: Configuration,
    pub circle_len: usize,
}

impl CircleAndLine {
    pub fn circle(&self) -> &[Point] {
        &self.config.points()[..self.circle_len]
    }

    pub fn line(&self) -> &[Point] {
        &self.config.points()[self.circle_len..]
    }
}

fn join_disjoint(circle: Vec<Point>, line: Vec<Point>) -> Result<CircleAndLine> {
    let on_circle: HashSet<&Point> = circle.iter().collect();
    if let Some(p) = line.iter().find(|p| on_circle.contains(p)) {
        let (x, y) = p.to_f64_pair();
        return Err(Error::usage(format!(
            "line point ({x:?}, {y:?}) coincides with a circle point"
        )));
    }
    let circle_len = circle.len();
    let mut points = circle;
    points.extend(line);
    Ok(CircleAndLine {
        config: Configuration::new(points)?,
        circle_len,
    })
}

/// `circle` equally spaced unit-circle points plus the geometric line
/// `a r^k` (`k < line`), all approximate.
pub fn gen_circle_plus_line(circle: usize, line: usize, r: &Scalar, a: &Scalar) -> Result<CircleAndLine> {
    require_count(circle, "circle point count")?;
    require_count(line, "line point count")?;
    if r.to_f64() <= 1.0 {
        return Err(Error::usage(format!("ratio r must exceed 1, got {r}")));
    }
    positive_f64(a, "a")?;
    let circle_pts = circle_points(circle, 1.0, 0.0);
    let (a, r) = coerce_pair(a, r, None)?;
    let line_pts = gen_geometric_line(&a, &r, line)?.to_mode(Mode::Approx)?.into_points();
    join_disjoint(circle_pts, line_pts)
}

/// Unit-circle points at angles `(j + 1) arccos(b) / (circle + 1)` plus line
/// points `(radius, 0)`.
///
/// Consecutive radii must satisfy `r_i / r_{i+1} < b`.
pub fn gen_sector_circle_plus_line(circle: usize, radii: &[Scalar], b: &Scalar) -> Result<CircleAndLine> {
    require_count(circle, "circle point count")?;
    let bf = b.to_f64();
    if !(bf > 0.0 && bf < 1.0) {
        return Err(Error::usage(format!("b must lie in (0, 1), got {b}")));
    }
    if radii.is_empty() {
        return Err(Error::usage("at least one line radius is required"));
    }
    for r in radii {
        positive_f64(r, "line radius")?;
    }
    for w in radii.windows(2) {
        if !ratio_below(&w[0], &w[1], b)? {
            return Err(Error::usage(format!(
                "radii {} and {} are not increasing with ratio below {b}",
                w[0], w[1]
            )));
        }
    }
    let width = bf.acos();
    let circle_pts = (0..circle)
        .map(|j| {
            let theta = width * (j + 1) as f64 / (circle + 1) as f64;
            Point::approx(theta.cos(), theta.sin())
        })
        .collect();
    let line_pts = radii
        .iter()
        .map(|r| Ok(Point::approx(r.to_mode(Mode::Approx)?.to_f64(), 0.0)))
        .collect::<Result<Vec<_>>>()?;
    join_disjoint(circle_pts, line_pts)
}

/// `0 < lo/hi < b`, exactly when all three are exact.
fn ratio_below(lo: &Scalar, hi: &Scalar, b: &Scalar) -> Result<bool> {
    match (lo, hi, b) {
        (Scalar::Exact(lo), Scalar::Exact(hi), Scalar::Exact(b)) => Ok(lo.is_positive() && lo < hi && lo < &(b * hi)),
        _ => {
            let (lo, hi, b) = (lo.to_f64(), hi.to_f64(), b.to_f64());
            Ok(lo > 0.0 && lo < hi && lo / hi < b)
        }
    }
}

/// Points `r^i (cos 2πj/k, sin 2πj/k)` for `i < circles`, `j < rays`.
pub fn gen_polar_lattice(circles: usize, rays: usize, r: &Scalar) -> Result<Configuration> {
    require_count(circles, "circle count")?;
    require_count(rays, "ray count")?;
    let r = positive_f64(r, "r")?;
    if r <= 1.0 {
        return Err(Error::usage(format!("r must exceed 1, got {r}")));
    }
    let mut points = Vec::with_capacity(circles * rays);
    for i in 0..circles {
        let rho = r.powi(i as i32);
        for j in 0..rays {
            let theta = TAU * j as f64 / rays as f64;
            points.push(Point::approx(rho * theta.cos(), rho * theta.sin()));
        }
    }
    Configuration::new(points)
}

/// `n` distinct points uniform in the disk of the given radius, by rejection
/// from the bounding square. Exact mode keeps the sampled doubles as exact
/// dyadic fractions.
pub fn gen_random_disk(n: usize, seed: u64, radius: &Scalar, mode: Mode) -> Result<Configuration> {
    require_count(n, "n")?;
    let rf = positive_f64(radius, "radius")?;
    let r2_exact = match mode {
        Mode::Exact => {
            let r = radius.to_mode(Mode::Exact)?;
            r.as_exact().map(|q| q * q)
        }
        Mode::Approx => None,
    };
    let mut rng = Prng::new(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let x = (2.0 * rng.unit_f64() - 1.0) * rf;
        let y = (2.0 * rng.unit_f64() - 1.0) * rf;
        let p = match mode {
            Mode::Approx => {
                if x * x + y * y > rf * rf {
                    continue;
                }
                Point::approx(x, y)
            }
            Mode::Exact => {
                let p = Point::approx(x, y).to_mode(Mode::Exact)?;
                let inside = match (p.radius2(), &r2_exact) {
                    (Scalar::Exact(d), Some(r2)) => &d <= r2,
                    _ => false,
                };
                if !inside {
                    continue;
                }
                p
            }
        };
        if seen.insert(p.clone()) {
            points.push(p);
        }
    }
    Configuration::new(points)
}

/// The canonical rational Pythagorean rotation `(3/5, 4/5)`.
pub fn pythagorean_rotation() -> (Scalar, Scalar) {
    (Scalar::ratio(3, 5), Scalar::ratio(4, 5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(cfg: &Configuration) -> Vec<Scalar> {
        cfg.iter().map(|p| p.x().clone()).collect()
    }

    #[test]
    fn geometric_line_examples() {
        let cfg = gen_geometric_line(&Scalar::int(1), &Scalar::int(2), 4).unwrap();
        assert_eq!(xs(&cfg), [1, 2, 4, 8].map(Scalar::int));
        let cfg = gen_geometric_line(&Scalar::int(1), &Scalar::int(2), 1).unwrap();
        assert_eq!(cfg.points(), &[Point::int(1, 0)]);
        let cfg = gen_geometric_line(&Scalar::int(3), &Scalar::ratio(1, 2), 3).unwrap();
        assert_eq!(xs(&cfg), vec![Scalar::int(3), Scalar::ratio(3, 2), Scalar::ratio(3, 4)]);
    }

    #[test]
    fn geometric_line_errors() {
        assert!(gen_geometric_line(&Scalar::int(1), &Scalar::int(1), 3).is_err());
        assert!(gen_geometric_line(&Scalar::int(0), &Scalar::int(2), 3).is_err());
        assert!(gen_geometric_line(&Scalar::int(1), &Scalar::int(-2), 3).is_err());
        assert!(gen_geometric_line(&Scalar::int(1), &Scalar::int(2), 0).is_err());
    }

    #[test]
    fn arithmetic_line_examples() {
        let cfg = gen_arithmetic_line(&Scalar::int(1), &Scalar::int(1), 5).unwrap();
        assert_eq!(xs(&cfg), [1, 2, 3, 4, 5].map(Scalar::int));
        let cfg = gen_arithmetic_line(&Scalar::int(1), &Scalar::int(1), 1).unwrap();
        assert_eq!(cfg.len(), 1);
        let cfg = gen_arithmetic_line(&Scalar::ratio(1, 2), &Scalar::ratio(1, 2), 3).unwrap();
        assert_eq!(xs(&cfg), vec![Scalar::ratio(1, 2), Scalar::int(1), Scalar::ratio(3, 2)]);
        assert!(gen_arithmetic_line(&Scalar::int(-2), &Scalar::int(1), 5).is_err());
    }

    #[test]
    fn circle_examples() {
        let cfg = gen_equally_spaced_circle(4, &Scalar::int(1), 0.0).unwrap();
        let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, (x, y)) in cfg.iter().zip(want) {
            let (px, py) = p.to_f64_pair();
            assert!((px - x).abs() < 1e-12 && (py - y).abs() < 1e-12);
        }
        let cfg = gen_equally_spaced_circle(1, &Scalar::int(2), 0.0).unwrap();
        assert_eq!(cfg.points(), &[Point::approx(2.0, 0.0)]);
        assert!(gen_equally_spaced_circle(3, &Scalar::int(0), 0.0).is_err());
    }

    #[test]
    fn circle_plus_line_examples() {
        let c = gen_circle_plus_line(4, 2, &Scalar::int(2), &Scalar::int(3)).unwrap();
        assert_eq!(c.config.len(), 6);
        assert_eq!((c.circle().len(), c.line().len()), (4, 2));
        let c = gen_circle_plus_line(1, 1, &Scalar::int(2), &Scalar::int(3)).unwrap();
        assert_eq!(c.config.len(), 2);
        // a = 1 puts the first line point on the circle point (1, 0)
        let e = gen_circle_plus_line(4, 2, &Scalar::int(2), &Scalar::int(1)).unwrap_err();
        assert!(e.to_string().contains("coincides"));
    }

    #[test]
    fn sector_examples() {
        let radii = [1, 3, 7].map(Scalar::int);
        let c = gen_sector_circle_plus_line(3, &radii, &Scalar::ratio(1, 2)).unwrap();
        for p in c.circle() {
            assert!(p.angle() > 0.0 && p.angle() <= std::f64::consts::FRAC_PI_3);
        }
        let c = gen_sector_circle_plus_line(1, &[Scalar::int(1)], &Scalar::ratio(1, 2)).unwrap();
        assert_eq!(c.config.len(), 2);
        let bad = [1, 2, 3].map(Scalar::int);
        assert!(gen_sector_circle_plus_line(3, &bad, &Scalar::ratio(1, 2)).is_err());
        let unsorted = [3, 1].map(Scalar::int);
        assert!(gen_sector_circle_plus_line(3, &unsorted, &Scalar::ratio(1, 2)).is_err());
    }

    #[test]
    fn polar_lattice_examples() {
        let cfg = gen_polar_lattice(1, 4, &Scalar::int(2)).unwrap();
        assert_eq!(cfg.len(), 4);
        for p in &cfg {
            assert!((p.radius() - 1.0).abs() < 1e-15);
        }
        let cfg = gen_polar_lattice(2, 1, &Scalar::int(2)).unwrap();
        assert_eq!(cfg.points(), &[Point::approx(1.0, 0.0), Point::approx(2.0, 0.0)]);
    }

    #[test]
    fn random_disk_is_deterministic() {
        let a = gen_random_disk(50, 7, &Scalar::int(1), Mode::Approx).unwrap();
        let b = gen_random_disk(50, 7, &Scalar::int(1), Mode::Approx).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.radius() <= 1.0));
        let c = gen_random_disk(50, 8, &Scalar::int(1), Mode::Approx).unwrap();
        assert_ne!(a, c);
        let e = gen_random_disk(20, 7, &Scalar::int(3), Mode::Exact).unwrap();
        assert_eq!(e.mode(), Mode::Exact);
        assert_eq!(gen_random_disk(1, 0, &Scalar::int(1), Mode::Approx).unwrap().len(), 1);
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = GeneratorSpec::GeometricLine {
            a: Scalar::ratio(7, 3),
            r: Scalar::ratio(3, 2),
            n: 10,
            mode: None,
        };
        let text = toml::to_string(&spec).unwrap();
        assert!(text.contains("kind = \"geometric-line\""));
        let back: GeneratorSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
