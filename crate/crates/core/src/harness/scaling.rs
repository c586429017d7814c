use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::count::{count_distinct, per_point_fertility_with, projection_values_with, CountOptions, Quantization};
use crate::error::{Error, Result};
use crate::generators::GeneratorSpec;
use crate::parallel::Parallelism;
use crate::structure::{supporting_circles_with, supporting_lines};

use super::slope::{fit_slope, SlopeFit};

/// What each row counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `|D(P)|` over all pairs.
    #[default]
    Full,
    /// Distinct circle-by-line products of a composite family.
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Lines,
    Circles,
    Fertility,
}

fn default_circle_exponent() -> f64 {
    0.5
}

fn default_line_exponent() -> f64 {
    0.25
}

/// One n-sweep, as read from an experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Family template; its size fields are replaced by each `n`.
    pub generator: GeneratorSpec,
    pub ns: Vec<usize>,
    #[serde(default)]
    pub quantization: Quantization,
    #[serde(default)]
    pub measure: Measure,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    /// Replaces the seed of random families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output path prefix for [`write_outputs`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_circle_exponent")]
    pub circle_exponent: f64,
    #[serde(default = "default_line_exponent")]
    pub line_exponent: f64,
}

impl ExperimentSpec {
    pub fn new(generator: GeneratorSpec, ns: Vec<usize>) -> Self {
        ExperimentSpec {
            generator,
            ns,
            quantization: Quantization::Auto,
            measure: Measure::Full,
            analyses: Vec::new(),
            seed: None,
            output: None,
            circle_exponent: default_circle_exponent(),
            line_exponent: default_line_exponent(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::usage(format!("invalid experiment file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.len() < 2 {
            return Err(Error::usage("an experiment needs at least two sizes"));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) || self.ns[0] == 0 {
            return Err(Error::usage("sizes must be positive and strictly increasing"));
        }
        Ok(())
    }

    /// The generator for size `n`.
    pub fn instance(&self, n: usize) -> GeneratorSpec {
        let mut spec = self.generator.resized(n, self.circle_exponent, self.line_exponent);
        if let (GeneratorSpec::RandomDisk { seed, .. }, Some(s)) = (&mut spec, self.seed) {
            *seed = s;
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineSummary {
    pub groups: usize,
    pub popular: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleSummary {
    pub groups: usize,
    pub popular: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub points: usize,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines: Option<LineSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circles: Option<CircleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_fertility: Option<usize>,
}

/// Sweep results. Wall times are kept out so that reruns are byte-identical;
/// see [`ScalingRun::timings`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub family: String,
    pub measure: Measure,
    pub quantization: Quantization,
    pub rows: Vec<ScalingRow>,
    pub exponent: f64,
    pub residual: f64,
    /// Counts never decrease along the sweep.
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct ScalingRun {
    pub report: ScalingReport,
    /// Seconds per row, in row order.
    pub timings: Vec<f64>,
}

pub fn run_scaling(spec: &ExperimentSpec) -> Result<ScalingRun> {
    run_scaling_with(spec, Parallelism::default())
}

pub fn run_scaling_with(spec: &ExperimentSpec, parallelism: Parallelism) -> Result<ScalingRun> {
    spec.validate()?;
    let opts = CountOptions::new(spec.quantization).with_parallelism(parallelism);
    let mut rows = Vec::with_capacity(spec.ns.len());
    let mut timings = Vec::with_capacity(spec.ns.len());
    for &n in &spec.ns {
        let start = Instant::now();
        let row = scaling_row(spec, n, &opts).map_err(|e| annotate(e, n))?;
        timings.push(start.elapsed().as_secs_f64());
        rows.push(row);
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.count as f64)).collect();
    let SlopeFit { slope, residual, .. } = fit_slope(&points)?;
    let monotone = rows.windows(2).all(|w| w[0].count <= w[1].count);
    Ok(ScalingRun {
        report: ScalingReport {
            family: spec.generator.kind().to_string(),
            measure: spec.measure,
            quantization: spec.quantization,
            rows,
            exponent: slope,
            residual,
            monotone,
        },
        timings,
    })
}

fn annotate(e: Error, n: usize) -> Error {
    match e {
        Error::Usage(m) => Error::Usage(format!("at n = {n}: {m}")),
        Error::Domain(m) => Error::Domain(format!("at n = {n}: {m}")),
        other => other,
    }
}

fn scaling_row(spec: &ExperimentSpec, n: usize, opts: &CountOptions) -> Result<ScalingRow> {
    let generator = spec.instance(n);
    let (cfg, count) = match spec.measure {
        Measure::Full => {
            let cfg = generator.generate()?;
            let count = count_distinct(&cfg, opts)?;
            (cfg, count)
        }
        Measure::Cross => {
            let parts = generator
                .generate_parts()?
                .ok_or_else(|| Error::usage(format!("{} has no circle/line split to cross", generator.kind())))?;
            let count = projection_values_with(parts.circle(), parts.line(), opts)?.cardinality();
            (parts.config, count)
        }
    };
    let mut row = ScalingRow {
        n,
        points: cfg.len(),
        count,
        lines: None,
        circles: None,
        min_fertility: None,
    };
    for analysis in &spec.analyses {
        match analysis {
            Analysis::Lines => {
                let lines = supporting_lines(&cfg);
                row.lines = Some(LineSummary {
                    groups: lines.groups.len(),
                    popular: lines.groups.first().map_or(0, |g| g.len()),
                });
            }
            Analysis::Circles => {
                let circles = supporting_circles_with(&cfg, spec.quantization)?;
                row.circles = Some(CircleSummary {
                    groups: circles.proper().count(),
                    popular: circles.proper().map(|g| g.len()).max().unwrap_or(0),
                });
            }
            Analysis::Fertility => {
                row.min_fertility = Some(per_point_fertility_with(&cfg, opts)?.minimum);
            }
        }
    }
    Ok(row)
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub dat: PathBuf,
    pub timings: PathBuf,
}

impl OutputPaths {
    pub fn for_prefix(prefix: &Path) -> Self {
        let with = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        OutputPaths {
            csv: with(".csv"),
            json: with(".json"),
            dat: with(".dat"),
            timings: with(".timings.csv"),
        }
    }
}

/// Writes `PREFIX.csv`, `PREFIX.json`, `PREFIX.dat` (gnuplot columns `n
/// count`) and `PREFIX.timings.csv`. Only the last depends on wall time.
pub fn write_outputs(run: &ScalingRun, prefix: &Path) -> Result<OutputPaths> {
    let paths = OutputPaths::for_prefix(prefix);
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let report = &run.report;
    fs::write(&paths.csv, rows_csv(report))?;
    fs::write(&paths.json, report_json(report))?;
    let mut dat = format!(
        "# {} exponent {:.6} residual {:.6}\n# n count\n",
        report.family, report.exponent, report.residual
    );
    for r in &report.rows {
        writeln!(dat, "{} {}", r.n, r.count).expect("string write");
    }
    fs::write(&paths.dat, dat)?;
    let mut timings = String::from("n,seconds\n");
    for (r, t) in report.rows.iter().zip(&run.timings) {
        writeln!(timings, "{},{t:.6}", r.n).expect("string write");
    }
    fs::write(&paths.timings, timings)?;
    Ok(paths)
}

pub fn rows_csv(report: &ScalingReport) -> String {
    let mut out = String::from("n,points,count,line_groups,popular_line,circle_groups,popular_circle,min_fertility\n");
    let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.points,
            r.count,
            opt(r.lines.as_ref().map(|l| l.groups)),
            opt(r.lines.as_ref().map(|l| l.popular)),
            opt(r.circles.as_ref().map(|c| c.groups)),
            opt(r.circles.as_ref().map(|c| c.popular)),
            opt(r.min_fertility),
        )
        .expect("string write");
    }
    out
}

pub fn report_json(report: &ScalingReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}
