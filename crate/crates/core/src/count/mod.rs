//! Distinct dot products `D(P) = {p · q : p, q ∈ P}`, self-pairs included.
//!
//! Exact configurations are deduplicated by rational equality; approximate
//! ones on a global grid, `u ≡ v` iff `round(u / q) = round(v / q)`. Both are
//! independent of enumeration order, so sequential and parallel runs agree.

mod kernels;
mod oracle;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Mode, Point, Scalar};
use crate::parallel::Parallelism;
use kernels::{
    clear_denominators, distinct_keys, row_distinct_counts, BigKernel, FactoredKernel, GridKernel, Int128Kernel,
    PairSpace,
};

pub use oracle::brute_force_oracle;

/// Relative size of the default grid cell.
pub const DEFAULT_RELATIVE_QUANTUM: f64 = 1e-9;

/// Grid keys must stay well inside `i64`.
const MAX_GRID_CELLS: f64 = 4.0e18;

/// Deduplication rule.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Quantization {
    /// Exact for exact configurations, default grid otherwise.
    #[default]
    Auto,
    Exact,
    /// Grid with the given quantum, or the default `1e-9 · max(1, max|v|)`.
    Grid(Option<f64>),
}

impl fmt::Display for Quantization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantization::Auto => f.write_str("auto"),
            Quantization::Exact => f.write_str("exact"),
            Quantization::Grid(None) => f.write_str("grid"),
            Quantization::Grid(Some(q)) => write!(f, "grid:{q:?}"),
        }
    }
}

impl FromStr for Quantization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(Quantization::Auto),
            "exact" => Ok(Quantization::Exact),
            "grid" => Ok(Quantization::Grid(None)),
            other => {
                let q = other
                    .strip_prefix("grid:")
                    .unwrap_or(other)
                    .parse::<f64>()
                    .map_err(|_| Error::usage(format!("unknown quantization `{other}`")))?;
                if !(q.is_finite() && q > 0.0) {
                    return Err(Error::usage(format!("quantum must be positive, got {q}")));
                }
                Ok(Quantization::Grid(Some(q)))
            }
        }
    }
}

impl TryFrom<String> for Quantization {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Quantization> for String {
    fn from(q: Quantization) -> String {
        q.to_string()
    }
}

/// Exact-mode kernel selection. All kernels produce identical sets; they
/// differ only in which inputs they accept and how fast they are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactKernel {
    /// The first of `int128`, `factored`, `bigint` that applies.
    #[default]
    Auto,
    /// Common-denominator coordinates below 2^62.
    Int128,
    /// All points on one line through the origin, coordinates smooth up to
    /// a 64-bit cofactor.
    Factored,
    BigInt,
}

impl FromStr for ExactKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ExactKernel::Auto),
            "int128" => Ok(ExactKernel::Int128),
            "factored" => Ok(ExactKernel::Factored),
            "bigint" => Ok(ExactKernel::BigInt),
            _ => Err(Error::usage(format!("unknown kernel `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CountOptions {
    pub quantization: Quantization,
    pub parallelism: Parallelism,
    pub exact_kernel: ExactKernel,
}

impl CountOptions {
    pub fn new(quantization: Quantization) -> Self {
        CountOptions {
            quantization,
            ..Default::default()
        }
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn with_kernel(mut self, kernel: ExactKernel) -> Self {
        self.exact_kernel = kernel;
        self
    }
}

/// Sorted distinct dot values with their dedup metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DotProductSet {
    cardinality: usize,
    /// `None` for exact dedup.
    quantum: Option<f64>,
    pairs_examined: u64,
    /// Smallest gap between consecutive values.
    min_gap: Option<f64>,
    values: Vec<Scalar>,
}

impl DotProductSet {
    pub(crate) fn new(values: Vec<Scalar>, quantum: Option<f64>, pairs_examined: u64, min_gap: Option<f64>) -> Self {
        DotProductSet {
            cardinality: values.len(),
            quantum,
            pairs_examined,
            min_gap,
            values,
        }
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn quantum(&self) -> Option<f64> {
        self.quantum
    }

    pub fn is_exact(&self) -> bool {
        self.quantum.is_none()
    }

    pub fn pairs_examined(&self) -> u64 {
        self.pairs_examined
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.min_gap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FertilityReport {
    /// `(point index, |{p · q : q ∈ P}|)`.
    pub per_point: Vec<(usize, usize)>,
    pub minimum: usize,
    pub quantum: Option<f64>,
}

pub fn distinct_dot_products(cfg: &Configuration, quantization: Quantization) -> Result<DotProductSet> {
    distinct_dot_products_with(cfg, &CountOptions::new(quantization))
}

pub fn distinct_dot_products_with(cfg: &Configuration, opts: &CountOptions) -> Result<DotProductSet> {
    let space = PairSpace::Triangle { n: cfg.len() };
    Prepared::new(cfg.points(), cfg.mode(), space, || triangle_bound(cfg.points()), opts)?
        .values(space, opts.parallelism)
}

/// `|D(P)|` without materializing the values.
pub fn count_distinct(cfg: &Configuration, opts: &CountOptions) -> Result<usize> {
    let space = PairSpace::Triangle { n: cfg.len() };
    Ok(
        Prepared::new(cfg.points(), cfg.mode(), space, || triangle_bound(cfg.points()), opts)?
            .count(space, opts.parallelism),
    )
}

pub fn per_point_fertility(cfg: &Configuration, quantization: Quantization) -> Result<FertilityReport> {
    per_point_fertility_with(cfg, &CountOptions::new(quantization))
}

pub fn per_point_fertility_with(cfg: &Configuration, opts: &CountOptions) -> Result<FertilityReport> {
    let n = cfg.len();
    let space = PairSpace::Triangle { n };
    let prepared = Prepared::new(cfg.points(), cfg.mode(), space, || triangle_bound(cfg.points()), opts)?;
    let counts = prepared.row_counts(n, opts.parallelism);
    Ok(FertilityReport {
        minimum: counts.iter().copied().min().unwrap_or(0),
        per_point: counts.into_iter().enumerate().collect(),
        quantum: prepared.quantum(),
    })
}

/// Distinct cross products `{c · ℓ : c ∈ C, ℓ ∈ L}`.
pub fn projection_values(c: &[Point], l: &[Point], quantization: Quantization) -> Result<DotProductSet> {
    projection_values_with(c, l, &CountOptions::new(quantization))
}

pub fn projection_values_with(c: &[Point], l: &[Point], opts: &CountOptions) -> Result<DotProductSet> {
    if c.is_empty() || l.is_empty() {
        return Err(Error::usage("projection sets must be nonempty"));
    }
    let mode = c[0].mode();
    if c.iter().chain(l).any(|p| p.mode() != mode) {
        return Err(Error::usage("projection sets mix exact and approximate points"));
    }
    let points: Vec<Point> = c.iter().chain(l).cloned().collect();
    let space = PairSpace::Cross {
        rows: c.len(),
        cols: l.len(),
    };
    let bound = || max_radius(c) * max_radius(l);
    Prepared::new(&points, mode, space, bound, opts)?.values(space, opts.parallelism)
}

/// The default grid quantum for values bounded by `max_abs`.
pub fn default_quantum(max_abs: f64) -> f64 {
    DEFAULT_RELATIVE_QUANTUM * max_abs.max(1.0)
}

/// Largest `|p · q|` over the configuration, which is the largest `|p|²`.
pub(crate) fn triangle_bound(points: &[Point]) -> f64 {
    let r = max_radius(points);
    r * r
}

fn max_radius(points: &[Point]) -> f64 {
    points.iter().map(Point::radius).fold(0.0, f64::max)
}

/// Resolved grid quantum, or `None` for exact dedup. `max_abs` bounds the
/// values and is only evaluated when a grid is used.
pub(crate) fn resolve_quantum(
    quantization: Quantization,
    mode: Mode,
    max_abs: impl FnOnce() -> f64,
) -> Result<Option<f64>> {
    let q = match (quantization, mode) {
        (Quantization::Grid(q), _) => q,
        (Quantization::Auto, Mode::Exact) => return Ok(None),
        (Quantization::Exact, Mode::Exact) => return Ok(None),
        (Quantization::Exact, Mode::Approx) => return Err(Error::usage("exact dedup requires an exact configuration")),
        _ => None,
    };
    let max_abs = max_abs();
    if !max_abs.is_finite() {
        return Err(Error::usage("dot values overflow double precision; use exact mode"));
    }
    let q = q.unwrap_or_else(|| default_quantum(max_abs));
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::usage(format!("quantum must be positive, got {q}")));
    }
    if max_abs / q > MAX_GRID_CELLS {
        return Err(Error::usage(format!(
            "quantum {q:e} is too fine for values up to {max_abs:e}; use exact mode or a coarser quantum"
        )));
    }
    Ok(Some(q))
}

enum Prepared {
    Grid(GridKernel, f64),
    Int128(Int128Kernel, BigInt),
    Factored(FactoredKernel, BigInt),
    Big(BigKernel, BigInt),
}

impl Prepared {
    fn new(
        points: &[Point],
        mode: Mode,
        space: PairSpace,
        bound: impl FnOnce() -> f64,
        opts: &CountOptions,
    ) -> Result<Self> {
        if let Some(q) = resolve_quantum(opts.quantization, mode, bound)? {
            let coords: Vec<_> = points.iter().map(Point::to_f64_pair).collect();
            return Ok(Prepared::Grid(GridKernel::new(&coords, q), q));
        }
        let cleared = clear_denominators(points);
        let d2 = &cleared.denom * &cleared.denom;
        let kernel = opts.exact_kernel;
        if matches!(kernel, ExactKernel::Auto | ExactKernel::Int128) {
            if let Some(k) = Int128Kernel::try_new(&cleared) {
                return Ok(Prepared::Int128(k, d2));
            }
        }
        // Cross products of a single line are not worth a dedicated path.
        let triangle = matches!(space, PairSpace::Triangle { .. });
        if triangle && matches!(kernel, ExactKernel::Auto | ExactKernel::Factored) {
            if let Some(k) = FactoredKernel::try_new(&cleared) {
                return Ok(Prepared::Factored(k, d2));
            }
        }
        match kernel {
            ExactKernel::Auto | ExactKernel::BigInt => Ok(Prepared::Big(BigKernel::new(&cleared), d2)),
            other => Err(Error::usage(format!(
                "the {other:?} kernel does not apply to this input"
            ))),
        }
    }

    fn quantum(&self) -> Option<f64> {
        match self {
            Prepared::Grid(_, q) => Some(*q),
            _ => None,
        }
    }

    fn count(&self, space: PairSpace, par: Parallelism) -> usize {
        match self {
            Prepared::Grid(k, _) => distinct_keys(k, space, par).len(),
            Prepared::Int128(k, _) => distinct_keys(k, space, par).len(),
            Prepared::Factored(k, _) => distinct_keys(k, space, par).len(),
            Prepared::Big(k, _) => distinct_keys(k, space, par).len(),
        }
    }

    fn row_counts(&self, n: usize, par: Parallelism) -> Vec<usize> {
        match self {
            Prepared::Grid(k, _) => row_distinct_counts(k, n, par),
            Prepared::Int128(k, _) => row_distinct_counts(k, n, par),
            Prepared::Factored(k, _) => row_distinct_counts(k, n, par),
            Prepared::Big(k, _) => row_distinct_counts(k, n, par),
        }
    }

    fn values(&self, space: PairSpace, par: Parallelism) -> Result<DotProductSet> {
        let pairs = space.ordered_pairs();
        let (numerators, d2) = match self {
            Prepared::Grid(k, q) => {
                let mut cells: Vec<(i64, f64)> = k.distinct(space, par).into_iter().collect();
                cells.sort_unstable_by_key(|c| c.0);
                let values: Vec<f64> = cells.into_iter().map(|c| c.1).collect();
                let gap = values.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
                let values = values.into_iter().map(Scalar::approx).collect();
                return Ok(DotProductSet::new(values, Some(*q), pairs, gap));
            }
            Prepared::Int128(k, d2) => {
                let mut keys: Vec<i128> = distinct_keys(k, space, par).into_iter().collect();
                keys.sort_unstable();
                (keys.into_iter().map(BigInt::from).collect::<Vec<_>>(), d2)
            }
            Prepared::Factored(k, d2) => {
                let keys = distinct_keys(k, space, par);
                let mut nums: Vec<BigInt> = keys.iter().map(|key| k.numerator(key)).collect();
                nums.sort_unstable();
                (nums, d2)
            }
            Prepared::Big(k, d2) => {
                let mut keys: Vec<BigInt> = distinct_keys(k, space, par).into_iter().collect();
                keys.sort_unstable();
                (keys, d2)
            }
        };
        let gap = numerators
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .min()
            .and_then(|g| BigRational::new(g, d2.clone()).to_f64());
        let values = numerators
            .into_iter()
            .map(|num| Scalar::Exact(BigRational::new(num, d2.clone())))
            .collect();
        Ok(DotProductSet::new(values, None, pairs, gap))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_equally_spaced_circle, gen_geometric_line};

    fn ints(coords: &[(i64, i64)]) -> Configuration {
        Configuration::new(coords.iter().map(|&(x, y)| Point::int(x, y)).collect()).unwrap()
    }

    fn line(xs: &[i64]) -> Configuration {
        ints(&xs.iter().map(|&x| (x, 0)).collect::<Vec<_>>())
    }

    #[test]
    fn geometric_line_values() {
        let cfg = gen_geometric_line(&Scalar::int(1), &Scalar::int(2), 4).unwrap();
        let set = distinct_dot_products(&cfg, Quantization::Exact).unwrap();
        let expected: Vec<Scalar> = [1, 2, 4, 8, 16, 32, 64].iter().map(|&v| Scalar::int(v)).collect();
        assert_eq!(set.values(), expected.as_slice());
        assert_eq!(set.pairs_examined(), 16);
        assert_eq!(set.min_gap(), Some(1.0));
    }

    #[test]
    fn trivial_sets() {
        assert_eq!(
            distinct_dot_products(&line(&[1]), Quantization::Auto)
                .unwrap()
                .cardinality(),
            1
        );
        let axes = ints(&[(1, 0), (0, 1)]);
        assert_eq!(
            distinct_dot_products(&axes, Quantization::Auto).unwrap().cardinality(),
            2
        );
        let table = line(&[1, 2, 3, 4, 5]);
        assert_eq!(
            distinct_dot_products(&table, Quantization::Exact)
                .unwrap()
                .cardinality(),
            14
        );
    }

    #[test]
    fn circle_under_grid() {
        let cfg = gen_equally_spaced_circle(8, &Scalar::int(1), 0.0).unwrap();
        let set = distinct_dot_products(&cfg, Quantization::Grid(Some(1e-9))).unwrap();
        assert_eq!(set.cardinality(), 5);
        assert_eq!(set.quantum(), Some(1e-9));
        assert!(distinct_dot_products(&cfg, Quantization::Exact).is_err());
    }

    #[test]
    fn kernels_agree() {
        let check = |n: usize, kernels: &[ExactKernel]| {
            let cfg = gen_geometric_line(&Scalar::ratio(7, 3), &Scalar::ratio(3, 2), n).unwrap();
            let reference = distinct_dot_products(&cfg, Quantization::Exact).unwrap();
            assert_eq!(reference.cardinality(), 2 * n - 1);
            for &kernel in kernels {
                let opts = CountOptions::new(Quantization::Exact).with_kernel(kernel);
                assert_eq!(
                    distinct_dot_products_with(&cfg, &opts).unwrap(),
                    reference,
                    "{kernel:?}"
                );
            }
        };
        check(20, &[ExactKernel::Int128, ExactKernel::Factored, ExactKernel::BigInt]);
        check(60, &[ExactKernel::Factored, ExactKernel::BigInt]);
    }

    #[test]
    fn forced_kernel_must_apply() {
        let cfg = ints(&[(1, 0), (0, 1)]);
        let opts = CountOptions::new(Quantization::Exact).with_kernel(ExactKernel::Factored);
        assert!(matches!(distinct_dot_products_with(&cfg, &opts), Err(Error::Usage(_))));
        let huge = gen_geometric_line(&Scalar::int(1), &Scalar::int(2), 100).unwrap();
        let opts = CountOptions::new(Quantization::Exact).with_kernel(ExactKernel::Int128);
        assert!(distinct_dot_products_with(&huge, &opts).is_err());
    }

    #[test]
    fn fertility_rows() {
        let cfg = gen_geometric_line(&Scalar::int(1), &Scalar::int(2), 4).unwrap();
        let report = per_point_fertility(&cfg, Quantization::Exact).unwrap();
        assert_eq!(report.per_point, vec![(0, 4), (1, 4), (2, 4), (3, 4)]);
        assert_eq!(report.minimum, 4);
        let axes = per_point_fertility(&ints(&[(1, 0), (0, 1)]), Quantization::Auto).unwrap();
        assert_eq!(axes.per_point, vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn projections() {
        let set = projection_values(
            &[Point::int(1, 0)],
            &[Point::int(2, 0), Point::int(4, 0)],
            Quantization::Auto,
        )
        .unwrap();
        assert_eq!(set.values(), &[Scalar::int(2), Scalar::int(4)]);
        assert_eq!(set.pairs_examined(), 2);
        let ortho = projection_values(
            &[Point::int(0, 1)],
            &[Point::int(2, 0), Point::int(5, 0)],
            Quantization::Auto,
        )
        .unwrap();
        assert_eq!(ortho.cardinality(), 1);
        assert!(projection_values(&[], &[Point::int(1, 0)], Quantization::Auto).is_err());
        assert!(projection_values(&[Point::int(1, 0)], &[Point::approx(2.0, 0.0)], Quantization::Auto).is_err());
    }

    #[test]
    fn quantization_parsing() {
        for q in [
            Quantization::Auto,
            Quantization::Exact,
            Quantization::Grid(None),
            Quantization::Grid(Some(1e-6)),
        ] {
            assert_eq!(q.to_string().parse::<Quantization>().unwrap(), q);
        }
        assert_eq!("1e-9".parse::<Quantization>().unwrap(), Quantization::Grid(Some(1e-9)));
        assert!("grid:-1".parse::<Quantization>().is_err());
        assert!("fuzzy".parse::<Quantization>().is_err());
    }

    #[test]
    fn grid_too_fine_is_rejected() {
        let cfg = line(&[1, 1_000_000]);
        assert!(distinct_dot_products(&cfg, Quantization::Grid(Some(1e-12))).is_err());
    }

    #[test]
    fn sequential_matches_parallel() {
        let cfg = gen_equally_spaced_circle(60, &Scalar::int(3), 0.1).unwrap();
        let seq = CountOptions::default().with_parallelism(Parallelism::Sequential);
        let par = CountOptions::default().with_parallelism(Parallelism::Parallel);
        assert_eq!(
            distinct_dot_products_with(&cfg, &seq).unwrap(),
            distinct_dot_products_with(&cfg, &par).unwrap()
        );
    }
}
