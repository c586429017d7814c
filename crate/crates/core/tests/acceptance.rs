//! End-to-end acceptance checks, one printed PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines come out in order and the summary
//! fails the test target when any criterion fails.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use dotprods::generators::{
    gen_arithmetic_line, gen_circle_plus_line, gen_equally_spaced_circle, gen_geometric_line, gen_polar_lattice,
    gen_random_disk, gen_sector_circle_plus_line, pythagorean_rotation, GeneratorSpec, Prng,
};
use dotprods::geometry::{rotate, scale};
use dotprods::harness::{
    dense_ray_instance, report_json, rows_csv, run_scaling, verify_suite, write_outputs, ExperimentSpec, Suite,
    VerifyParams,
};
use dotprods::structure::{
    bucket_projection_report, density_report, extract_max_well_spaced, max_wedge, supporting_circles, supporting_lines,
    RayPoints, WEDGE_TOLERANCE,
};
use dotprods::{
    brute_force_oracle, count_distinct, distinct_dot_products, Configuration, CountOptions, Mode, Point, Quantization,
    Scalar,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn exact_count(cfg: &Configuration) -> usize {
    count_distinct(cfg, &CountOptions::new(Quantization::Exact)).unwrap()
}

fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

/// Distinct values after sorting and merging neighbours closer than `tol`.
fn distinct_with_tolerance(mut values: Vec<f64>, tol: f64) -> usize {
    values.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last = f64::NEG_INFINITY;
    for v in values {
        if v - last > tol {
            count += 1;
            last = v;
        }
    }
    count
}

/// Random exact configuration: small lattice points (many coincident
/// products) or rationals with small denominators.
fn random_exact(rng: &mut Prng, n: usize) -> Configuration {
    let lattice = rng.below(2) == 0;
    let span = if lattice { 3 + n as i64 / 4 } else { 50 };
    let mut seen = HashSet::new();
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let (x, y) = (rng.range_i64(-span, span), rng.range_i64(-span, span));
        let (dx, dy) = if lattice {
            (1, 1)
        } else {
            (rng.range_i64(1, 6), rng.range_i64(1, 6))
        };
        let px = BigRational::new(BigInt::from(x), BigInt::from(dx));
        let py = BigRational::new(BigInt::from(y), BigInt::from(dy));
        if seen.insert((px.clone(), py.clone())) {
            points.push(Point::exact(px, py));
        }
    }
    Configuration::new(points).unwrap()
}

fn c1_geometric_line() -> Outcome {
    let mut slowest: f64 = 0.0;
    for n in [10, 100, 1000, 5000] {
        for r in [ratio(2, 1), ratio(3, 2), ratio(1, 3)] {
            for a in [ratio(1, 1), ratio(7, 3)] {
                let cfg = gen_geometric_line(&a, &r, n).unwrap();
                let start = Instant::now();
                let count = exact_count(&cfg);
                let elapsed = start.elapsed().as_secs_f64();
                ensure!(count == 2 * n - 1, "a = {a}, r = {r}, n = {n}: |D| = {count}");
                if n == 5000 {
                    slowest = slowest.max(elapsed);
                }
            }
        }
    }
    ensure!(slowest < 60.0, "n = 5000 took {slowest:.1} s");
    Ok(format!("24 instances exact, slowest n = 5000 count {slowest:.2} s"))
}

fn c2_circle_count() -> Outcome {
    let grid = Quantization::Grid(Some(1e-9));
    for n in [8, 100, 1000, 9, 101] {
        let cfg = gen_equally_spaced_circle(n, &Scalar::int(1), 0.0).unwrap();
        let count = distinct_dot_products(&cfg, grid).unwrap().cardinality();
        ensure!(count == n / 2 + 1, "n = {n}: |D| = {count}");
        // Spot check: the products are cos(2πm/n), m = 0..n.
        let spot = distinct_with_tolerance((0..n).map(|m| (TAU * m as f64 / n as f64).cos()).collect(), 1e-12);
        ensure!(spot == count, "n = {n}: cosine spot check gives {spot}");
    }
    Ok("n = 8, 100, 1000 give n/2 + 1; n = 9, 101 give floor(n/2) + 1".into())
}

fn c3_oracle_equivalence() -> Outcome {
    let mut rng = Prng::new(3);
    for trial in 0..500 {
        let n = 1 + rng.below(200) as usize;
        let cfg = random_exact(&mut rng, n);
        let fast = distinct_dot_products(&cfg, Quantization::Exact).unwrap();
        let oracle = brute_force_oracle(&cfg).unwrap();
        ensure!(fast.values() == oracle.values(), "trial {trial} (n = {n}) disagrees");
    }
    Ok("500 of 500 configurations agree value for value".into())
}

fn c4_invariance() -> Outcome {
    let mut rng = Prng::new(4);
    let (c, s) = pythagorean_rotation();
    for trial in 0..100 {
        let n = 1 + rng.below(120) as usize;
        let cfg = random_exact(&mut rng, n);
        let base = exact_count(&cfg);
        let rotated = exact_count(&rotate(&cfg, &c, &s).unwrap());
        let scaled = exact_count(&scale(&cfg, &ratio(7, 2)).unwrap());
        ensure!(
            base == rotated && base == scaled,
            "trial {trial}: {base} / {rotated} / {scaled}"
        );
    }
    Ok("100 of 100 unchanged under rotation (3/5, 4/5) and scale 7/2".into())
}

fn c5_line_lower() -> Outcome {
    let params = VerifyParams {
        n: Some(100),
        trials: Some(200),
        seed: 5,
        ..Default::default()
    };
    let report = verify_suite(Suite::LineLower, &params, None).unwrap();
    ensure!(report.checks.len() == 200, "{} trials ran", report.checks.len());
    ensure!(report.passed, "failed: {:?}", report.failures().next());
    Ok(report.summary)
}

fn c6_supporting_circles() -> Outcome {
    let mut configs: Vec<Configuration> = Vec::new();
    for n in [1, 2, 5, 17, 40] {
        configs.push(gen_geometric_line(&Scalar::int(1), &Scalar::int(2), n).unwrap());
        configs.push(gen_arithmetic_line(&ratio(1, 2), &Scalar::int(3), n).unwrap());
        configs.push(gen_equally_spaced_circle(n, &Scalar::int(2), 0.3).unwrap());
        configs.push(gen_random_disk(n, n as u64, &Scalar::int(1), Mode::Approx).unwrap());
        configs.push(gen_random_disk(n, n as u64, &Scalar::int(1), Mode::Exact).unwrap());
        configs.push(gen_polar_lattice(n.min(6), n, &Scalar::int(2)).unwrap());
        configs.push(
            gen_circle_plus_line(n, 1 + n / 4, &Scalar::int(2), &Scalar::int(2))
                .unwrap()
                .config,
        );
    }
    let radii: Vec<Scalar> = [1, 3, 7, 15, 31].iter().map(|&r| Scalar::int(r)).collect();
    configs.push(gen_sector_circle_plus_line(5, &radii, &ratio(1, 2)).unwrap().config);
    let mut rng = Prng::new(6);
    configs.extend((0..100).map(|_| {
        let n = 1 + rng.below(60) as usize;
        random_exact(&mut rng, n)
    }));
    for (i, cfg) in configs.iter().enumerate() {
        let circles = supporting_circles(cfg).groups.len();
        let count = distinct_dot_products(cfg, Quantization::Auto).unwrap().cardinality();
        ensure!(
            circles <= count,
            "configuration {i}: {circles} circles > {count} products"
        );
    }
    Ok(format!("{} configurations", configs.len()))
}

fn c7_bucket_bound() -> Outcome {
    let start = Instant::now();
    let parts = gen_circle_plus_line(24, 6, &Scalar::int(2), &Scalar::int(2)).unwrap();
    let ray = RayPoints::new(parts.line().to_vec()).unwrap();
    let report = bucket_projection_report(parts.circle(), &ray, Some(2.0)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    // Brute force from angles: ρ cos(2πi/24) for ρ in {2, ..., 64}.
    let values: Vec<f64> = (1..=6)
        .flat_map(|j| (0..24).map(move |i| f64::from(1 << j) * (TAU * i as f64 / 24.0).cos()))
        .collect();
    let total = distinct_with_tolerance(values.clone(), 1e-9);
    let mut observed = Vec::new();
    for j in 1..=5 {
        let (lo, hi) = (f64::from(1 << j), f64::from(1 << (j + 1)));
        let inside: Vec<f64> = values
            .iter()
            .copied()
            .filter(|&v| v > lo + 1e-9 && v < hi - 1e-9)
            .collect();
        let brute = distinct_with_tolerance(inside, 1e-9);
        let bucket = &report.buckets[j];
        ensure!(
            bucket.distinct == brute,
            "B_{j}: report {} vs brute force {brute}",
            bucket.distinct
        );
        ensure!(brute >= 2, "B_{j} holds {brute} < 2");
        observed.push(brute);
    }
    ensure!(
        report.total_distinct == total,
        "total: report {} vs brute force {total}",
        report.total_distinct
    );
    ensure!(total >= 10, "total {total} < 10");
    ensure!(elapsed < 1.0, "took {elapsed:.2} s");
    Ok(format!(
        "B_1..B_5 = {observed:?} (each >= 2), total {total}; computed k = {:.4}, floor(kN) = {}",
        report.k, report.expected_min
    ))
}

fn c8_sector_lemma() -> Outcome {
    let radii: Vec<Scalar> = [1, 3, 7, 15, 31].iter().map(|&r| Scalar::int(r)).collect();
    let parts = gen_sector_circle_plus_line(5, &radii, &ratio(1, 2)).unwrap();
    let ray = RayPoints::new(parts.line().to_vec()).unwrap();
    let report = bucket_projection_report(parts.circle(), &ray, Some(0.5)).unwrap();
    let per_bucket: Vec<usize> = report.buckets.iter().map(|b| b.distinct).collect();
    ensure!(per_bucket == vec![5; 5], "per-bucket {per_bucket:?}");

    let r = parts.circle()[0].radius();
    let mut edges = vec![0.0];
    edges.extend(parts.line().iter().map(|p| p.radius() / r));
    let values: Vec<f64> = parts
        .line()
        .iter()
        .flat_map(|l| {
            let (lx, ly) = l.to_f64_pair();
            parts.circle().iter().map(move |c| {
                let (cx, cy) = c.to_f64_pair();
                (cx * lx + cy * ly) / (r * r)
            })
        })
        .collect();
    for (i, w) in edges.windows(2).enumerate() {
        let inside = values
            .iter()
            .copied()
            .filter(|&v| v > w[0] + 1e-9 && v < w[1] - 1e-9)
            .collect();
        let brute = distinct_with_tolerance(inside, 1e-9);
        ensure!(brute == 5, "B_{i}: brute force {brute}");
    }
    Ok(format!("per-bucket {per_bucket:?}"))
}

/// Largest closed wedge of angular width `arccos b`, by trying every start.
fn brute_wedge(cfg: &Configuration, b: f64) -> usize {
    let width = b.acos();
    let angles: Vec<f64> = cfg
        .iter()
        .filter(|p| !p.is_origin())
        .map(|p| p.angle().rem_euclid(TAU))
        .collect();
    angles
        .iter()
        .map(|&start| {
            angles
                .iter()
                .filter(|&&a| (a - start).rem_euclid(TAU) <= width + WEDGE_TOLERANCE)
                .count()
        })
        .max()
        .unwrap_or(0)
}

fn c9_wedge_bound() -> Outcome {
    let mut rng = Prng::new(9);
    for trial in 0..100 {
        let n = 1 + rng.below(80) as usize;
        let cfg = gen_random_disk(n, rng.next_u64(), &Scalar::int(1), Mode::Approx).unwrap();
        for b in [0.3, 0.7, 0.9] {
            let wedge = max_wedge(&cfg, b).unwrap();
            let guarantee = (b.acos() / TAU * n as f64).ceil() as usize;
            ensure!(
                wedge.members.len() >= guarantee,
                "trial {trial}, b = {b}: {} < {guarantee}",
                wedge.members.len()
            );
            let brute = brute_wedge(&cfg, b);
            ensure!(
                wedge.members.len() == brute,
                "trial {trial}, b = {b}: sweep {} vs brute {brute}",
                wedge.members.len()
            );
        }
    }
    let report = verify_suite(
        Suite::WedgeBound,
        &VerifyParams {
            seed: 9,
            ..Default::default()
        },
        None,
    )
    .unwrap();
    ensure!(report.passed, "suite failed: {:?}", report.failures().next());
    Ok("300 wedges meet ceil(arccos b / 2π · n) and match brute force; suite passed".into())
}

/// Maximum well-spaced subset size over all subsets; `t` sorted ascending,
/// ratios compared as `t_i q < p t_j` for `b = p / q`.
fn exhaustive_well_spaced(t: &[BigRational], b: &BigRational) -> usize {
    let m = t.len();
    (0u32..1 << m)
        .filter(|mask| {
            let chosen: Vec<&BigRational> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| &t[i]).collect();
            chosen.windows(2).all(|w| w[0] < &(b * w[1]))
        })
        .map(u32::count_ones)
        .max()
        .unwrap_or(0) as usize
}

fn c10_greedy_extraction() -> Outcome {
    let line: Vec<Point> = (1..=8).map(|x| Point::int(x, 0)).collect();
    let kept = extract_max_well_spaced(&RayPoints::new(line).unwrap(), &ratio(1, 2))
        .unwrap()
        .kept;
    let expected: Vec<Point> = [1, 3, 7].iter().map(|&x| Point::int(x, 0)).collect();
    ensure!(kept.members() == expected.as_slice(), "kept {:?}", kept.members());

    let mut rng = Prng::new(10);
    let bs = [(1, 2), (2, 3), (9, 10), (1, 3), (3, 4)];
    for trial in 0..200 {
        let m = 1 + rng.below(15) as usize;
        let (bn, bd) = bs[rng.below(bs.len() as u64) as usize];
        let b = BigRational::new(BigInt::from(bn), BigInt::from(bd));
        let (dx, dy) = (rng.range_i64(-4, 4), rng.range_i64(1, 4));
        let mut t: Vec<BigRational> = Vec::new();
        while t.len() < m {
            let v = BigRational::new(BigInt::from(rng.range_i64(1, 400)), BigInt::from(rng.range_i64(1, 8)));
            if !t.contains(&v) {
                t.push(v);
            }
        }
        t.sort();
        let points = t
            .iter()
            .map(|v| Point::exact(v * BigInt::from(dx), v * BigInt::from(dy)))
            .collect();
        let greedy = extract_max_well_spaced(&RayPoints::new(points).unwrap(), &ratio(bn, bd)).unwrap();
        let best = exhaustive_well_spaced(&t, &b);
        ensure!(
            greedy.kept.len() == best,
            "trial {trial}: greedy {} vs exhaustive {best}",
            greedy.kept.len()
        );
    }
    Ok("{1..8}, b = 1/2 keeps {1, 3, 7}; greedy is maximum on 200 random rays".into())
}

fn c11_density_pipeline() -> Outcome {
    let start = Instant::now();
    let cfg = dense_ray_instance(10_000, 11).unwrap();
    let line = supporting_lines(&cfg).groups.into_iter().next().unwrap();
    let report = density_report(&line.popular_ray(), &ratio(9, 10), 0.9, cfg.len()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(report.close_pairs == 99, "close pairs {}", report.close_pairs);
    ensure!(
        report.close_pairs as f64 >= (cfg.len() as f64).sqrt() - 1.0,
        "below √n - 1"
    );
    ensure!(report.is_b_dense, "not b-dense at c = 0.9");
    ensure!(elapsed < 120.0, "took {elapsed:.1} s");
    let suite = verify_suite(
        Suite::DensityPipeline,
        &VerifyParams {
            seed: 11,
            ..Default::default()
        },
        None,
    )
    .unwrap();
    ensure!(suite.passed, "suite failed: {}", suite.summary);
    Ok(format!(
        "99 close pairs, threshold {:.1}, b-dense, {elapsed:.2} s",
        report.threshold
    ))
}

fn c12_scaling() -> Outcome {
    let ns: Vec<usize> = (7..=13).map(|k| 1 << k).collect();
    let families = [
        GeneratorSpec::GeometricLine {
            a: Scalar::int(1),
            r: Scalar::int(2),
            n: 0,
            mode: None,
        },
        GeneratorSpec::EquallySpacedCircle {
            n: 0,
            radius: Scalar::int(1),
            phase: 0.0,
        },
    ];
    let mut fits = Vec::new();
    for family in families {
        let run = run_scaling(&ExperimentSpec::new(family.clone(), ns.clone())).unwrap();
        let (alpha, residual) = (run.report.exponent, run.report.residual);
        ensure!((0.93..=1.01).contains(&alpha), "{}: exponent {alpha}", family.kind());
        ensure!(residual < 0.02, "{}: residual {residual}", family.kind());
        fits.push(format!("{} {alpha:.4} (residual {residual:.1e})", family.kind()));
    }
    Ok(fits.join(", "))
}

fn c13_reproducibility() -> Outcome {
    let mut spec = ExperimentSpec::new(
        GeneratorSpec::RandomDisk {
            n: 0,
            seed: 13,
            radius: Scalar::int(1),
            mode: Mode::Approx,
        },
        vec![16, 32, 64],
    );
    spec.analyses = vec![dotprods::harness::Analysis::Lines, dotprods::harness::Analysis::Circles];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    for dir in &dirs {
        let run = run_scaling(&spec).unwrap();
        let paths = write_outputs(&run, &dir.path().join("sweep")).unwrap();
        let verify = verify_suite(Suite::BucketBound, &VerifyParams::default(), None).unwrap();
        std::fs::write(
            dir.path().join("verify.json"),
            serde_json::to_string_pretty(&verify).unwrap(),
        )
        .unwrap();
        files.push(vec![
            std::fs::read(paths.csv).unwrap(),
            std::fs::read(paths.json).unwrap(),
            std::fs::read(paths.dat).unwrap(),
            std::fs::read(dir.path().join("verify.json")).unwrap(),
            rows_csv(&run.report).into_bytes(),
            report_json(&run.report).into_bytes(),
        ]);
    }
    ensure!(files[0] == files[1], "report files differ between runs");
    Ok(format!(
        "{} report files byte-identical across two runs",
        files[0].len()
    ))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("geometric-line exact count", c1_geometric_line),
        ("equally-spaced-circle count", c2_circle_count),
        ("oracle equivalence", c3_oracle_equivalence),
        ("rotation and scale invariance", c4_invariance),
        ("line lower bound", c5_line_lower),
        ("supporting circles <= |D|", c6_supporting_circles),
        ("bucket bound", c7_bucket_bound),
        ("sector lemma", c8_sector_lemma),
        ("wedge bound", c9_wedge_bound),
        ("greedy extraction", c10_greedy_extraction),
        ("density pipeline", c11_density_pipeline),
        ("scaling exponents", c12_scaling),
        ("reproducibility", c13_reproducibility),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(format!("panicked: {}", panic_message(&e))));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}
