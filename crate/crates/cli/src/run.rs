use std::fmt::Write as _;
use std::io::Write as _;

use serde::Serialize;

use dotprods::harness::{
    circle_and_outer_ray, run_scaling_with, verify_suite, write_outputs, ExperimentSpec, VerifyParams,
};
use dotprods::points_file::{format_points, read_points, write_points};
use dotprods::structure::{
    bucket_projection_report, density_report, extract_max_well_spaced, iterate_dense_lines, max_wedge, popular_line,
    supporting_circles_with, supporting_lines, supporting_lines_with,
};
use dotprods::{
    distinct_dot_products_with, per_point_fertility_with, Configuration, CountOptions, Error, Parallelism, Result,
};

use crate::args::{
    Analysis, AnalyzeArgs, Command, CountArgs, Format, GenerateArgs, Invocation, ScalingArgs, VerifyArgs,
};

/// What a run printed and whether its checks held.
pub struct Outcome {
    pub report: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(report: String) -> Self {
        Outcome { report, passed: true }
    }
}

pub fn run(invocation: &Invocation) -> Result<Outcome> {
    let parallelism = configure_threads(invocation.threads)?;
    let format = invocation.format;
    match &invocation.command {
        Command::Generate(args) => generate(args, format),
        Command::Count(args) => count(args, format, parallelism),
        Command::Analyze(args) => analyze(args, format, parallelism),
        Command::Scaling(args) => scaling(args, format, parallelism),
        Command::Verify(args) => verify(args, format),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> Result<Parallelism> {
    match threads {
        Some(1) => Ok(Parallelism::Sequential),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::usage(format!("cannot size the thread pool: {e}")))?;
            Ok(Parallelism::Parallel)
        }
        None => Ok(Parallelism::Parallel),
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: Option<usize>) -> Result<Parallelism> {
    Ok(Parallelism::Sequential)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn load(path: &std::path::Path) -> Result<Configuration> {
    let cfg = read_points(path)?;
    if cfg.is_empty() {
        return Err(Error::usage(format!("{} holds no points", path.display())));
    }
    Ok(cfg)
}

fn generate(args: &GenerateArgs, format: Format) -> Result<Outcome> {
    let spec = args.spec();
    let cfg = spec.generate()?;
    let Some(path) = &args.output else {
        return Ok(Outcome::ok(format_points(&cfg)));
    };
    write_points(path, &cfg)?;
    #[derive(Serialize)]
    struct Generated<'a> {
        kind: &'a str,
        mode: String,
        points: usize,
        output: &'a std::path::Path,
    }
    let report = Generated {
        kind: spec.kind(),
        mode: cfg.mode().to_string(),
        points: cfg.len(),
        output: path,
    };
    Ok(Outcome::ok(match format {
        Format::Text => format!("wrote {} {} points to {}\n", report.points, report.mode, path.display()),
        Format::Structured => json(&report),
    }))
}

fn count(args: &CountArgs, format: Format, parallelism: Parallelism) -> Result<Outcome> {
    let cfg = load(&args.input)?;
    let opts = CountOptions::new(args.quantization)
        .with_parallelism(parallelism)
        .with_kernel(args.kernel);
    let set = distinct_dot_products_with(&cfg, &opts)?;
    let fertility = if args.fertility {
        Some(per_point_fertility_with(&cfg, &opts)?)
    } else {
        None
    };

    #[derive(Serialize)]
    struct CountReport {
        cardinality: usize,
        points: usize,
        pairs: u64,
        exact: bool,
        quantum: Option<f64>,
        min_gap: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        min_fertility: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        fertility: Option<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        values: Option<Vec<String>>,
    }
    let report = CountReport {
        cardinality: set.cardinality(),
        points: cfg.len(),
        pairs: set.pairs_examined(),
        exact: set.is_exact(),
        quantum: set.quantum(),
        min_gap: set.min_gap(),
        min_fertility: fertility.as_ref().map(|f| f.minimum),
        fertility: fertility.map(|f| f.per_point.into_iter().map(|(_, d)| d).collect()),
        values: args
            .values
            .then(|| set.values().iter().map(ToString::to_string).collect()),
    };
    if format == Format::Structured {
        return Ok(Outcome::ok(json(&report)));
    }
    let mut out = format!("{}\n", report.cardinality);
    let _ = writeln!(out, "points: {}", report.points);
    let _ = writeln!(out, "ordered pairs: {}", report.pairs);
    match report.quantum {
        None => out.push_str("dedup: exact\n"),
        Some(q) => {
            let _ = writeln!(out, "dedup: grid, quantum {q:e}");
        }
    }
    if let Some(gap) = report.min_gap {
        let _ = writeln!(out, "min gap: {gap:e}");
    }
    if let Some(m) = report.min_fertility {
        let _ = writeln!(out, "min fertility: {m}");
    }
    if let Some(values) = &report.values {
        for v in values {
            let _ = writeln!(out, "{v}");
        }
    }
    Ok(Outcome::ok(out))
}

fn analyze(args: &AnalyzeArgs, format: Format, parallelism: Parallelism) -> Result<Outcome> {
    let cfg = load(&args.input)?;
    let b = || args.b.clone().expect("checked when parsing");
    let structured = format == Format::Structured;
    let report = match args.what {
        Analysis::Lines => {
            let lines = match args.tolerance {
                Some(t) => supporting_lines_with(&cfg, t),
                None => supporting_lines(&cfg),
            };
            if structured {
                json(&lines)
            } else {
                let mut out = format!("{} lines, {} origin points\n", lines.groups.len(), lines.origin_count);
                for g in &lines.groups {
                    let (pos, neg) = g.rays();
                    let _ = writeln!(
                        out,
                        "{}  {} points ({} + {})",
                        g.direction,
                        g.len(),
                        pos.len(),
                        neg.len()
                    );
                }
                out
            }
        }
        Analysis::Circles => {
            let circles = supporting_circles_with(&cfg, args.quantization)?;
            if structured {
                json(&circles)
            } else {
                let mut out = format!("{} circles\n", circles.groups.len());
                for g in &circles.groups {
                    let _ = writeln!(out, "r^2 = {}  {} points", g.radius2, g.len());
                }
                out
            }
        }
        Analysis::Wedge => {
            let wedge = max_wedge(&cfg, b().to_f64())?;
            if structured {
                json(&wedge)
            } else {
                format!(
                    "wedge at {:.6} rad, width {:.6}: {} points (guarantee {})\n",
                    wedge.theta,
                    wedge.width,
                    wedge.members.len(),
                    wedge.guarantee
                )
            }
        }
        Analysis::Density => {
            let line = popular_line(&cfg)?;
            let report = density_report(&line.popular_ray(), &b(), args.c, cfg.len())?;
            if structured {
                json(&report)
            } else {
                density_line(&report)
            }
        }
        Analysis::Iterate => {
            let reports = iterate_dense_lines(&cfg, &b(), args.c, args.rounds)?;
            if structured {
                json(&reports)
            } else {
                reports.iter().map(density_line).collect()
            }
        }
        Analysis::Extract => {
            let line = popular_line(&cfg)?;
            let extraction = extract_max_well_spaced(&line.popular_ray(), &b())?;
            if structured {
                json(&extraction)
            } else {
                let mut out = format!(
                    "kept {} of {} points, {} rejected\n",
                    extraction.kept.len(),
                    line.popular_ray().len(),
                    extraction.t_pairs.len()
                );
                for p in extraction.kept.members() {
                    let _ = writeln!(out, "{} {}", p.x(), p.y());
                }
                out
            }
        }
        Analysis::Buckets => {
            let (circle, ray) = circle_and_outer_ray(&cfg)?;
            let report = bucket_projection_report(&circle.members, &ray, args.b.as_ref().map(|b| b.to_f64()))?;
            if structured {
                json(&report)
            } else {
                let mut out = format!(
                    "circle of {} points, radius {}; k = {:.6}, floor(kN) = {}\n",
                    report.circle_len, report.circle_radius, report.k, report.expected_min
                );
                for bucket in &report.buckets {
                    let _ = writeln!(
                        out,
                        "B_{} ({}, {}): {} distinct",
                        bucket.index, bucket.lower, bucket.upper, bucket.distinct
                    );
                }
                let _ = writeln!(out, "total: {}", report.total_distinct);
                out
            }
        }
        Analysis::Fertility => {
            let opts = CountOptions::new(args.quantization).with_parallelism(parallelism);
            let report = per_point_fertility_with(&cfg, &opts)?;
            if structured {
                json(&report)
            } else {
                let mut out = format!("min fertility: {}\n", report.minimum);
                for (i, d) in &report.per_point {
                    let _ = writeln!(out, "{i}: {d}");
                }
                out
            }
        }
    };
    Ok(Outcome::ok(report))
}

fn density_line(r: &dotprods::structure::DensityReport) -> String {
    format!(
        "ray {} ({:+}): {} points, {} close / {} spaced / {} boundary pairs, threshold {:.3}, b-dense {}\n",
        r.direction, r.side, r.len, r.close_pairs, r.spaced_pairs, r.boundary_pairs, r.threshold, r.is_b_dense
    )
}

fn scaling(args: &ScalingArgs, format: Format, parallelism: Parallelism) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.experiment)?;
    let spec = ExperimentSpec::from_toml(&text)?;
    let run = run_scaling_with(&spec, parallelism)?;
    if let Some(prefix) = args.output.as_ref().or(spec.output.as_ref()) {
        let paths = write_outputs(&run, prefix)?;
        let _ = writeln!(std::io::stderr(), "wrote {}", paths.json.display());
    }
    let report = &run.report;
    if format == Format::Structured {
        return Ok(Outcome::ok(json(report)));
    }
    let mut out = format!(
        "{}: exponent {:.4}, residual {:.2e}, monotone {}\n",
        report.family, report.exponent, report.residual, report.monotone
    );
    for row in &report.rows {
        let _ = writeln!(out, "n = {}: {} points, |D| = {}", row.n, row.points, row.count);
    }
    Ok(Outcome::ok(out))
}

fn verify(args: &VerifyArgs, format: Format) -> Result<Outcome> {
    let input = args.input.as_deref().map(load).transpose()?;
    let params = VerifyParams {
        n: args.n,
        trials: args.trials,
        seed: args.seed,
        b: args.b.clone(),
        c: args.c,
        r: args.r.clone(),
        generator: None,
    };
    let report = verify_suite(args.suite, &params, input.as_ref())?;
    let text = match format {
        Format::Structured => json(&report),
        Format::Text => {
            let mut out = format!("{}\n", report.summary);
            let failures: Vec<_> = report.failures().collect();
            for c in &failures {
                let _ = writeln!(out, "FAIL {}: {} vs {}", c.name, c.observed, c.bound);
            }
            let _ = writeln!(
                out,
                "{}: {} of {} checks passed",
                report.suite,
                report.checks.len() - failures.len(),
                report.checks.len()
            );
            out
        }
    };
    Ok(Outcome {
        report: text,
        passed: report.passed,
    })
}
