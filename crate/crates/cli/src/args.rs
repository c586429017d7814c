use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use dotprods::generators::GeneratorSpec;
use dotprods::harness::Suite;
use dotprods::{Error, ExactKernel, Mode, Quantization, Result, Scalar};

#[derive(Debug, Parser)]
#[command(
    name = "dotprods",
    version,
    about = "Count and analyze distinct dot products of planar point sets"
)]
pub struct Cli {
    /// Replay an effective-config file instead of a subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Worker thread cap; 1 runs sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    /// JSON.
    Structured,
}

/// Everything needed to repeat a run; echoed to stderr as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Invocation {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub command: Command,
}

impl Invocation {
    pub fn from_cli(cli: Cli) -> Result<Invocation> {
        let mut invocation = match (cli.config, cli.command) {
            (Some(_), Some(_)) => return Err(Error::usage("give either --config or a subcommand, not both")),
            (None, None) => return Err(Error::usage("missing subcommand; see --help")),
            (Some(path), None) => {
                let text = std::fs::read_to_string(&path)?;
                toml::from_str::<Invocation>(&text)
                    .map_err(|e| Error::usage(format!("invalid config {}: {e}", path.display())))?
            }
            (None, Some(command)) => Invocation {
                format: Format::default(),
                threads: None,
                command,
            },
        };
        if let Some(format) = cli.format {
            invocation.format = format;
        }
        if cli.threads.is_some() {
            invocation.threads = cli.threads;
        }
        if invocation.threads == Some(0) {
            return Err(Error::usage("--threads must be at least 1"));
        }
        invocation.command.normalize()?;
        Ok(invocation)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("invocations serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write a generated configuration as a points file.
    Generate(Box<GenerateArgs>),
    /// Count distinct dot products of a points file.
    Count(CountArgs),
    /// Structural analyses of a points file.
    Analyze(AnalyzeArgs),
    /// Run an n-sweep from an experiment file.
    Scaling(ScalingArgs),
    /// Check one of the bound suites; exit 1 when a check fails.
    Verify(VerifyArgs),
}

impl Command {
    /// Folds shorthand flags into the effective fields that get echoed.
    fn normalize(&mut self) -> Result<()> {
        match self {
            Command::Generate(args) => args.normalize(),
            Command::Count(args) => args.normalize(),
            Command::Analyze(args) => args.normalize(),
            Command::Scaling(_) | Command::Verify(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    GeometricLine,
    ArithmeticLine,
    EquallySpacedCircle,
    CirclePlusLine,
    SectorCirclePlusLine,
    PolarLattice,
    RandomDisk,
}

#[derive(Debug, Clone, PartialEq, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateArgs {
    /// Output points file; stdout when absent.
    #[arg(short, long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,

    #[arg(skip)]
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,

    #[arg(long, value_enum)]
    #[serde(skip)]
    kind: Option<Kind>,
    /// Number of points (circle points or rays for composite families).
    #[arg(long)]
    #[serde(skip)]
    n: Option<usize>,
    /// First term of a line.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip)]
    a: Option<Scalar>,
    /// Geometric ratio.
    #[arg(long)]
    #[serde(skip)]
    r: Option<Scalar>,
    /// Arithmetic step.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip)]
    d: Option<Scalar>,
    #[arg(long)]
    #[serde(skip)]
    radius: Option<Scalar>,
    /// Circle phase in radians.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip)]
    phase: Option<f64>,
    /// Circle points of a composite family.
    #[arg(long)]
    #[serde(skip)]
    circle: Option<usize>,
    /// Line points of `circle-plus-line`.
    #[arg(long)]
    #[serde(skip)]
    line: Option<usize>,
    /// Comma-separated line radii of `sector-circle-plus-line`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip)]
    radii: Vec<Scalar>,
    #[arg(long)]
    #[serde(skip)]
    b: Option<Scalar>,
    /// Number of circles of `polar-lattice`.
    #[arg(long)]
    #[serde(skip)]
    circles: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    rays: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    mode: Option<Mode>,
}

fn required<T: Clone>(value: &Option<T>, flag: &str, kind: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::usage(format!("--{flag} is required for --kind {kind}")))
}

impl GenerateArgs {
    fn normalize(&mut self) -> Result<()> {
        let Some(kind) = self.kind else {
            return match self.generator {
                Some(_) => Ok(()),
                None => Err(Error::usage("--kind is required")),
            };
        };
        let name = kind
            .to_possible_value()
            .expect("no skipped kinds")
            .get_name()
            .to_owned();
        let k = name.as_str();
        let one = Scalar::int(1);
        self.generator = Some(match kind {
            Kind::GeometricLine => GeneratorSpec::GeometricLine {
                a: self.a.clone().unwrap_or(one),
                r: required(&self.r, "r", k)?,
                n: required(&self.n, "n", k)?,
                mode: self.mode,
            },
            Kind::ArithmeticLine => GeneratorSpec::ArithmeticLine {
                a: self.a.clone().unwrap_or(one.clone()),
                d: self.d.clone().unwrap_or(one),
                n: required(&self.n, "n", k)?,
                mode: self.mode,
            },
            Kind::EquallySpacedCircle => GeneratorSpec::EquallySpacedCircle {
                n: required(&self.n, "n", k)?,
                radius: self.radius.clone().unwrap_or(one),
                phase: self.phase.unwrap_or(0.0),
            },
            Kind::CirclePlusLine => {
                let r = required(&self.r, "r", k)?;
                GeneratorSpec::CirclePlusLine {
                    circle: required(&self.circle.or(self.n), "circle", k)?,
                    line: required(&self.line, "line", k)?,
                    a: self.a.clone().unwrap_or(r.clone()),
                    r,
                }
            }
            Kind::SectorCirclePlusLine => {
                if self.radii.is_empty() {
                    return Err(Error::usage(format!("--radii is required for --kind {k}")));
                }
                GeneratorSpec::SectorCirclePlusLine {
                    circle: required(&self.circle.or(self.n), "circle", k)?,
                    radii: self.radii.clone(),
                    b: required(&self.b, "b", k)?,
                }
            }
            Kind::PolarLattice => GeneratorSpec::PolarLattice {
                circles: required(&self.circles, "circles", k)?,
                rays: required(&self.rays.or(self.n), "rays", k)?,
                r: required(&self.r, "r", k)?,
            },
            Kind::RandomDisk => GeneratorSpec::RandomDisk {
                n: required(&self.n, "n", k)?,
                seed: self.seed.unwrap_or(0),
                radius: self.radius.clone().unwrap_or(one),
                mode: self.mode.unwrap_or(Mode::Approx),
            },
        });
        Ok(())
    }

    pub fn spec(&self) -> &GeneratorSpec {
        self.generator.as_ref().expect("normalized")
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountArgs {
    /// Points file.
    pub input: PathBuf,

    /// `auto`, `exact`, `grid` or `grid:<quantum>`.
    #[arg(long, short = 'q', default_value = "auto", conflicts_with_all = ["exact", "grid"])]
    #[serde(default)]
    pub quantization: Quantization,

    /// Shorthand for `--quantization exact`.
    #[arg(long)]
    #[serde(skip)]
    exact: bool,

    /// Shorthand for a grid, optionally with its quantum.
    #[arg(long, num_args = 0..=1, value_name = "QUANTUM")]
    #[serde(skip)]
    grid: Option<Option<f64>>,

    #[arg(long, default_value = "auto")]
    #[serde(default)]
    pub kernel: ExactKernel,

    /// Also report per-point distinct products.
    #[arg(long)]
    #[serde(default)]
    pub fertility: bool,

    /// Also list the distinct values.
    #[arg(long)]
    #[serde(default)]
    pub values: bool,
}

impl CountArgs {
    fn normalize(&mut self) -> Result<()> {
        if self.exact {
            self.quantization = Quantization::Exact;
        }
        if let Some(q) = self.grid {
            self.quantization = match q {
                Some(q) => format!("grid:{q}").parse()?,
                None => Quantization::Grid(None),
            };
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    /// Lines through the origin and their rays.
    Lines,
    /// Circles about the origin.
    Circles,
    /// Widest-populated wedge of angle `arccos b`.
    Wedge,
    /// Density of the popular ray.
    Density,
    /// Repeated density reports, removing each popular ray.
    Iterate,
    /// Greedy well-spaced subset of the popular ray.
    Extract,
    /// Bucketed projections of the popular circle onto the outer popular ray.
    Buckets,
    /// Per-point distinct products.
    Fertility,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeArgs {
    /// Points file.
    pub input: PathBuf,

    #[arg(long, value_enum, default_value = "lines")]
    pub what: Analysis,

    /// Spacing ratio in (0, 1).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Scalar>,

    /// Density threshold coefficient.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "default_c")]
    pub c: f64,

    #[arg(long, default_value_t = 3)]
    #[serde(default = "default_rounds")]
    pub rounds: usize,

    /// Angular tolerance for grouping approximate points into lines.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,

    #[arg(long, short = 'q', default_value = "auto")]
    #[serde(default)]
    pub quantization: Quantization,
}

fn default_c() -> f64 {
    1.0
}

fn default_rounds() -> usize {
    3
}

impl AnalyzeArgs {
    fn normalize(&mut self) -> Result<()> {
        let needs_b = matches!(
            self.what,
            Analysis::Wedge | Analysis::Density | Analysis::Iterate | Analysis::Extract
        );
        if needs_b && self.b.is_none() {
            return Err(Error::usage("--b is required for this analysis"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingArgs {
    /// Experiment file (TOML).
    pub experiment: PathBuf,

    /// Output prefix; overrides the experiment's `output`.
    #[arg(long, short)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: Suite,

    /// Run on this points file instead of generated instances.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,

    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Scalar>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,

    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Scalar>,
}
