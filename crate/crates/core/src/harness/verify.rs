use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::count::{count_distinct, CountOptions, Quantization};
use crate::error::{Error, Result};
use crate::generators::{gen_circle_plus_line, gen_equally_spaced_circle, gen_random_disk, GeneratorSpec, Prng};
use crate::geometry::{Configuration, Mode, Point, Scalar};
use crate::structure::{
    bucket_projection_report, density_report, extract_max_well_spaced, max_wedge, popular_circle, supporting_circles,
    supporting_lines, BucketReport, CircleGroup, RayPoints,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// `|D| >= 2n - 1` on one ray.
    LineLower,
    /// `|D| = floor(n/2) + 1` on an equally spaced circle.
    CircleCount,
    /// Every bucket holds at least the projections the sector argument
    /// guarantees.
    BucketBound,
    /// Wedge averaging bound and the circle-by-ray lower bound inside it.
    WedgeBound,
    /// The popular ray is b-dense.
    DensityPipeline,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::LineLower,
        Suite::CircleCount,
        Suite::BucketBound,
        Suite::WedgeBound,
        Suite::DensityPipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::LineLower => "line_lower",
            Suite::CircleCount => "circle_count",
            Suite::BucketBound => "bucket_bound",
            Suite::WedgeBound => "wedge_bound",
            Suite::DensityPipeline => "density_pipeline",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

/// One checked (in)equality `observed REL bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub relation: Relation,
    pub bound: f64,
    /// `observed - bound`; non-negative for a satisfied `>=`.
    pub margin: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, observed: f64, relation: Relation, bound: f64) -> Self {
        let passed = match relation {
            Relation::Eq => observed == bound,
            Relation::Ge => observed >= bound,
        };
        Check {
            name: name.into(),
            observed,
            relation,
            bound,
            margin: observed - bound,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    /// The headline number, e.g. the count for `circle_count`.
    pub summary: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn new(suite: Suite, summary: String, checks: Vec<Check>) -> Self {
        VerifyReport {
            suite,
            passed: checks.iter().all(|c| c.passed),
            summary,
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Smallest margin over all checks.
    pub fn min_margin(&self) -> Option<f64> {
        self.checks.iter().map(|c| c.margin).reduce(f64::min)
    }
}

/// Suite parameters; unset fields take per-suite defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    /// Size: points for generated instances, upper bound for random trials.
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub b: Option<Scalar>,
    pub c: Option<f64>,
    /// Geometric ratio for `bucket_bound` instances.
    pub r: Option<Scalar>,
    /// Instance generator overriding the built-in defaults.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

/// Runs a suite on `input`, or on generated instances when `input` is
/// `None`.
pub fn verify_suite(suite: Suite, params: &VerifyParams, input: Option<&Configuration>) -> Result<VerifyReport> {
    let generated;
    let input = match (input, &params.generator) {
        (Some(cfg), _) => Some(cfg),
        (None, Some(generator)) if suite == Suite::BucketBound => {
            return match generator.generate_parts()? {
                Some(parts) => bucket_bound(parts.circle(), parts.line(), params),
                None => bucket_bound_config(&generator.generate()?, params),
            };
        }
        (None, Some(generator)) => {
            generated = generator.generate()?;
            Some(&generated)
        }
        (None, None) => None,
    };
    match suite {
        Suite::LineLower => line_lower(params, input),
        Suite::CircleCount => circle_count(params, input),
        Suite::BucketBound => match input {
            Some(cfg) => bucket_bound_config(cfg, params),
            None => {
                let r = params.r.clone().unwrap_or(Scalar::int(2));
                let parts = gen_circle_plus_line(params.n.unwrap_or(24), 6, &r, &r)?;
                bucket_bound(parts.circle(), parts.line(), params)
            }
        },
        Suite::WedgeBound => wedge_bound(params, input),
        Suite::DensityPipeline => density_pipeline(params, input),
    }
}

fn exact_count(cfg: &Configuration) -> Result<usize> {
    count_distinct(cfg, &CountOptions::new(Quantization::Auto))
}

fn line_lower(params: &VerifyParams, input: Option<&Configuration>) -> Result<VerifyReport> {
    let check = |cfg: &Configuration, name: String| -> Result<Check> {
        let n = cfg.len();
        Ok(Check::new(
            name,
            exact_count(cfg)? as f64,
            Relation::Ge,
            (2 * n - 1) as f64,
        ))
    };
    let checks = match input {
        Some(cfg) => {
            if cfg.mode() != Mode::Exact {
                return Err(Error::usage("line_lower needs an exact configuration"));
            }
            RayPoints::new(cfg.points().to_vec())
                .map_err(|e| Error::usage(format!("line_lower needs points on one ray: {e}")))?;
            vec![check(cfg, "input".into())?]
        }
        None => {
            let mut rng = Prng::new(params.seed);
            let max_n = params.n.unwrap_or(100);
            (0..params.trials.unwrap_or(200))
                .map(|t| {
                    let n = 1 + rng.below(max_n as u64) as usize;
                    check(&random_one_ray(&mut rng, n), format!("trial {t} (n = {n})"))
                })
                .collect::<Result<_>>()?
        }
    };
    let worst = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    Ok(VerifyReport::new(
        Suite::LineLower,
        format!("{} configurations, min margin {worst}", checks.len()),
        checks,
    ))
}

fn circle_count(params: &VerifyParams, input: Option<&Configuration>) -> Result<VerifyReport> {
    let generated;
    let cfg = match input {
        Some(cfg) => {
            let circles = supporting_circles(cfg);
            if circles.groups.len() != 1 || circles.groups[0].degenerate {
                return Err(Error::usage("circle_count needs points on one circle about the origin"));
            }
            cfg
        }
        None => {
            generated = gen_equally_spaced_circle(params.n.unwrap_or(8), &Scalar::int(1), 0.0)?;
            &generated
        }
    };
    let count = exact_count(cfg)?;
    let n = cfg.len();
    let checks = vec![Check::new(
        format!("n = {n}"),
        count as f64,
        Relation::Eq,
        (n / 2 + 1) as f64,
    )];
    Ok(VerifyReport::new(Suite::CircleCount, count.to_string(), checks))
}

/// The popular circle and the popular ray among the points outside it.
pub fn circle_and_outer_ray(cfg: &Configuration) -> Result<(CircleGroup, RayPoints)> {
    let circle = popular_circle(cfg)?;
    let r2 = circle.radius2.to_f64();
    let outside: Vec<Point> = cfg.iter().filter(|p| p.radius2().to_f64() > r2).cloned().collect();
    if outside.is_empty() {
        return Err(Error::usage("no points lie outside the popular circle"));
    }
    let outside = Configuration::new(outside)?;
    let ray = supporting_lines(&outside).groups[0].popular_ray();
    Ok((circle, ray))
}

fn bucket_bound_config(cfg: &Configuration, params: &VerifyParams) -> Result<VerifyReport> {
    let (circle, ray) = circle_and_outer_ray(cfg)?;
    bucket_bound(&circle.members, ray.members(), params)
}

fn bucket_bound(circle: &[Point], line: &[Point], params: &VerifyParams) -> Result<VerifyReport> {
    let ray = RayPoints::new(line.to_vec())?;
    let b_or_r = params.b.as_ref().or(params.r.as_ref()).map(Scalar::to_f64);
    let report = bucket_projection_report(circle, &ray, b_or_r)?;
    let guaranteed = sector_projections(circle, &ray, &report);
    let mut checks: Vec<Check> = report
        .buckets
        .iter()
        .map(|b| {
            Check::new(
                format!("B_{}", b.index),
                b.distinct as f64,
                Relation::Ge,
                guaranteed as f64,
            )
        })
        .collect();
    checks.push(Check::new(
        "total",
        report.total_distinct as f64,
        Relation::Ge,
        (guaranteed * report.buckets.len()) as f64,
    ));
    let summary = format!(
        "k = {:.6}, floor(kN) = {}, per-bucket {:?}, sector points {guaranteed}, floor(kN) flags {}",
        report.k,
        report.expected_min,
        report.buckets.iter().map(|b| b.distinct).collect::<Vec<_>>(),
        if report.all_pass() { "all pass" } else { "not all pass" },
    );
    Ok(VerifyReport::new(Suite::BucketBound, summary, checks))
}

/// Distinct `cos θ` strictly inside `(ratio, 1)` over circle points at angle
/// `θ` from the ray. Each such point lands `ℓ_{i+1} cos θ` in every bucket,
/// and different angles land on different values.
fn sector_projections(circle: &[Point], ray: &RayPoints, report: &BucketReport) -> usize {
    let Some(ratio) = report.ratio else {
        return 0;
    };
    let (ux, uy) = {
        let (x, y) = ray.members()[0].to_f64_pair();
        let norm = x.hypot(y);
        (x / norm, y / norm)
    };
    let q = report.quantum;
    circle
        .iter()
        .map(|c| {
            let (x, y) = c.to_f64_pair();
            (x * ux + y * uy) / report.circle_radius
        })
        .filter(|&cos| cos > ratio + q && cos < 1.0 - q)
        .map(|cos| (cos / q).round() as i64)
        .collect::<HashSet<_>>()
        .len()
}

const WEDGE_BS: [f64; 3] = [0.3, 0.7, 0.9];

fn wedge_bound(params: &VerifyParams, input: Option<&Configuration>) -> Result<VerifyReport> {
    let bs: Vec<f64> = match &params.b {
        Some(b) => vec![b.to_f64()],
        None => WEDGE_BS.to_vec(),
    };
    let configs: Vec<(String, Configuration)> = match input {
        Some(cfg) => vec![("input".into(), cfg.clone())],
        None => {
            let mut rng = Prng::new(params.seed);
            let max_n = params.n.unwrap_or(60);
            (0..params.trials.unwrap_or(100))
                .map(|t| {
                    let n = 1 + rng.below(max_n as u64) as usize;
                    let seed = rng.next_u64();
                    Ok((
                        format!("trial {t} (n = {n})"),
                        gen_random_disk(n, seed, &Scalar::int(1), Mode::Approx)?,
                    ))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut checks = Vec::new();
    for (name, cfg) in &configs {
        let count = exact_count(cfg)?;
        for &b in &bs {
            let (wedge_check, product_check) = wedge_checks(cfg, b, count)?;
            checks.push(Check {
                name: format!("{name}, b = {b}: wedge"),
                ..wedge_check
            });
            checks.push(Check {
                name: format!("{name}, b = {b}: |C||S|"),
                ..product_check
            });
        }
    }
    let summary = format!("{} configurations x {} values of b", configs.len(), bs.len());
    Ok(VerifyReport::new(Suite::WedgeBound, summary, checks))
}

/// The averaging bound for the widest wedge, and `|D(P)| >= |C'| |S|` where
/// inside the wedge `C'` is the popular circle restricted to one side of the
/// popular ray's line and `S` a maximal well-spaced subset of that ray
/// outside the circle.
///
/// Within the wedge every angle between `c` and `s` is at most `arccos b`,
/// so `c · s ∈ [b |c||s|, |c||s|]`; well-spacing makes these intervals
/// disjoint across `S` and distinct angles on one side give distinct cosines.
fn wedge_checks(cfg: &Configuration, b: f64, count: usize) -> Result<(Check, Check)> {
    let wedge = max_wedge(cfg, b)?;
    let wedge_check = Check::new("", wedge.members.len() as f64, Relation::Ge, wedge.guarantee as f64);
    let inside = Configuration::new(wedge.members)?;
    let circle = popular_circle(&inside)?;
    let r2 = circle.radius2.to_f64();
    let line = &supporting_lines(&inside).groups[0];
    let ray = line.popular_ray();
    let outside: Vec<Point> = ray
        .members()
        .iter()
        .filter(|p| p.radius2().to_f64() > r2)
        .cloned()
        .collect();
    let spaced = if outside.is_empty() {
        0
    } else {
        let b_exact = Scalar::approx(b).to_mode(cfg.mode())?;
        extract_max_well_spaced(&RayPoints::new(outside)?, &b_exact)?.kept.len()
    };
    let (ux, uy) = ray.members()[0].to_f64_pair();
    let (mut left, mut right) = (0, 0);
    for c in &circle.members {
        let (x, y) = c.to_f64_pair();
        let cross = ux * y - uy * x;
        if cross >= 0.0 {
            left += 1;
        }
        if cross <= 0.0 {
            right += 1;
        }
    }
    let product = left.max(right) * spaced;
    Ok((wedge_check, Check::new("", count as f64, Relation::Ge, product as f64)))
}

fn density_pipeline(params: &VerifyParams, input: Option<&Configuration>) -> Result<VerifyReport> {
    let generated;
    let cfg = match input {
        Some(cfg) => cfg,
        None => {
            generated = dense_ray_instance(params.n.unwrap_or(10_000), params.seed)?;
            &generated
        }
    };
    let b = params.b.clone().unwrap_or_else(|| Scalar::ratio(9, 10));
    let c = params.c.unwrap_or(0.9);
    let line = supporting_lines(cfg)
        .groups
        .into_iter()
        .next()
        .ok_or_else(|| Error::domain("every point is at the origin"))?;
    let report = density_report(&line.popular_ray(), &b, c, cfg.len())?;
    let checks = vec![Check::new(
        "close pairs",
        report.close_pairs as f64,
        Relation::Ge,
        report.threshold,
    )];
    let summary = format!(
        "popular ray {} side {:+}: {} points, {} close pairs, threshold {:.3}, b-dense {}",
        report.direction, report.side, report.len, report.close_pairs, report.threshold, report.is_b_dense
    );
    Ok(VerifyReport::new(Suite::DensityPipeline, summary, checks))
}

/// `n` distinct exact points `t · (dx, dy)` on one random ray, with random
/// positive rational `t`.
pub fn random_one_ray(rng: &mut Prng, n: usize) -> Configuration {
    let (dx, dy) = loop {
        let d = (rng.range_i64(-5, 5), rng.range_i64(-5, 5));
        if d != (0, 0) {
            break d;
        }
    };
    let mut seen = HashSet::new();
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let t = BigRational::new(BigInt::from(rng.range_i64(1, 1000)), BigInt::from(rng.range_i64(1, 12)));
        if seen.insert(t.clone()) {
            points.push(Point::exact(&t * BigInt::from(dx), &t * BigInt::from(dy)));
        }
    }
    Configuration::new(points).expect("distinct points")
}

/// Exact configuration of `n >= 100` points: the arithmetic ray
/// `{10, ..., 109} · d` for a random primitive `d`, plus random lattice points
/// off its line.
pub fn dense_ray_instance(n: usize, seed: u64) -> Result<Configuration> {
    if n < 100 {
        return Err(Error::usage("the dense-ray instance needs n >= 100"));
    }
    let mut rng = Prng::new(seed);
    let (dx, dy) = loop {
        let (x, y) = (rng.range_i64(1, 9), rng.range_i64(1, 9));
        if num_integer::gcd(x, y) == 1 {
            break (x, y);
        }
    };
    let mut points: Vec<Point> = (10..110).map(|k| Point::int(k * dx, k * dy)).collect();
    let mut seen: HashSet<(i64, i64)> = (10..110).map(|k| (k * dx, k * dy)).collect();
    const SPAN: i64 = 1_000_000;
    while points.len() < n {
        let (x, y) = (rng.range_i64(-SPAN, SPAN), rng.range_i64(-SPAN, SPAN));
        if x * dy == y * dx || !seen.insert((x, y)) {
            continue;
        }
        points.push(Point::int(x, y));
    }
    Configuration::new(points)
}
