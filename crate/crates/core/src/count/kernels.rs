//! Pair-keying kernels.
//!
//! Each kernel maps a pair of point indices to a key whose equality is exactly
//! the dedup rule: grid cells for approximate values, and three exact
//! encodings of the same integer numerator `X_i X_j + Y_i Y_j` over a common
//! denominator.

use std::hash::{Hash, Hasher};
use std::ops::Range;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::{FxHashMap, FxHashSet};
use smallvec::SmallVec;

use crate::geometry::Point;
use crate::parallel::{fold_rows, map_rows, Parallelism};

/// Which index pairs to enumerate.
#[derive(Debug, Clone, Copy)]
pub(crate) enum PairSpace {
    /// Unordered pairs `i <= j` of `n` points (ordered pairs are implied by
    /// commutativity).
    Triangle { n: usize },
    /// Rows `0..rows` against columns `rows..rows + cols`.
    Cross { rows: usize, cols: usize },
}

impl PairSpace {
    fn rows(&self) -> usize {
        match *self {
            PairSpace::Triangle { n } => n,
            PairSpace::Cross { rows, .. } => rows,
        }
    }

    fn cols(&self, i: usize) -> Range<usize> {
        match *self {
            PairSpace::Triangle { n } => i..n,
            PairSpace::Cross { rows, cols } => rows..rows + cols,
        }
    }

    /// Ordered pairs covered by the enumeration.
    pub(crate) fn ordered_pairs(&self) -> u64 {
        match *self {
            PairSpace::Triangle { n } => (n as u64) * (n as u64),
            PairSpace::Cross { rows, cols } => (rows as u64) * (cols as u64),
        }
    }
}

pub(crate) trait PairKernel: Sync {
    type Key: Hash + Eq + Send;

    fn key(&self, i: usize, j: usize) -> Self::Key;
}

pub(crate) fn distinct_keys<K: PairKernel>(kernel: &K, space: PairSpace, par: Parallelism) -> FxHashSet<K::Key> {
    fold_rows(
        space.rows(),
        par,
        FxHashSet::default,
        |mut set, i| {
            set.extend(space.cols(i).map(|j| kernel.key(i, j)));
            set
        },
        |mut a, b| {
            if a.len() < b.len() {
                return merge_into(b, a);
            }
            a.extend(b);
            a
        },
    )
}

fn merge_into<T: Hash + Eq>(mut big: FxHashSet<T>, small: FxHashSet<T>) -> FxHashSet<T> {
    big.extend(small);
    big
}

/// Distinct keys in each full row `{key(i, j) : j < n}`.
pub(crate) fn row_distinct_counts<K: PairKernel>(kernel: &K, n: usize, par: Parallelism) -> Vec<usize> {
    map_rows(n, par, |i| {
        (0..n).map(|j| kernel.key(i, j)).collect::<FxHashSet<_>>().len()
    })
}

/// Approximate values deduplicated by `round(v / q)`.
pub(crate) struct GridKernel {
    xs: Vec<f64>,
    ys: Vec<f64>,
    inv_quantum: f64,
}

impl GridKernel {
    pub(crate) fn new(points: &[(f64, f64)], quantum: f64) -> Self {
        GridKernel {
            xs: points.iter().map(|p| p.0).collect(),
            ys: points.iter().map(|p| p.1).collect(),
            inv_quantum: 1.0 / quantum,
        }
    }

    #[inline]
    pub(crate) fn value(&self, i: usize, j: usize) -> f64 {
        self.xs[i] * self.xs[j] + self.ys[i] * self.ys[j]
    }

    #[inline]
    pub(crate) fn cell(&self, v: f64) -> i64 {
        (v * self.inv_quantum).round() as i64
    }

    /// Cell -> smallest value observed in it.
    pub(crate) fn distinct(&self, space: PairSpace, par: Parallelism) -> FxHashMap<i64, f64> {
        fold_rows(
            space.rows(),
            par,
            FxHashMap::default,
            |mut map, i| {
                for j in space.cols(i) {
                    let v = self.value(i, j);
                    map.entry(self.cell(v))
                        .and_modify(|m: &mut f64| *m = m.min(v))
                        .or_insert(v);
                }
                map
            },
            |mut a, b| {
                for (k, v) in b {
                    a.entry(k).and_modify(|m| *m = m.min(v)).or_insert(v);
                }
                a
            },
        )
    }
}

impl PairKernel for GridKernel {
    type Key = i64;

    fn key(&self, i: usize, j: usize) -> i64 {
        self.cell(self.value(i, j))
    }
}

/// Integer coordinates over one positive common denominator.
pub(crate) struct Cleared {
    pub xs: Vec<BigInt>,
    pub ys: Vec<BigInt>,
    pub denom: BigInt,
}

pub(crate) fn clear_denominators(points: &[Point]) -> Cleared {
    let coords: Vec<_> = points.iter().map(|p| p.exact_coords().expect("exact points")).collect();
    // Largest first: on geometric progressions every later denominator then
    // divides the running lcm and no big gcd is ever computed.
    let mut denoms: Vec<&BigInt> = coords
        .iter()
        .flat_map(|(x, y)| [x.denom(), y.denom()])
        .filter(|d| !d.is_one())
        .collect();
    denoms.sort_unstable_by_key(|d| std::cmp::Reverse(d.bits()));
    let mut denom = BigInt::one();
    for d in denoms {
        if !(&denom % d).is_zero() {
            denom = denom.lcm(d);
        }
    }
    let scale = |q: &num_rational::BigRational| q.numer() * (&denom / q.denom());
    Cleared {
        xs: coords.iter().map(|(x, _)| scale(x)).collect(),
        ys: coords.iter().map(|(_, y)| scale(y)).collect(),
        denom,
    }
}

/// Coordinates below 2^62 in magnitude, so each numerator fits an `i128`.
pub(crate) struct Int128Kernel {
    xs: Vec<i128>,
    ys: Vec<i128>,
}

const SMALL_LIMIT: i64 = 1 << 62;

impl Int128Kernel {
    pub(crate) fn try_new(c: &Cleared) -> Option<Self> {
        let small = |v: &BigInt| v.to_i64().filter(|x| x.abs() < SMALL_LIMIT).map(i128::from);
        Some(Int128Kernel {
            xs: c.xs.iter().map(small).collect::<Option<_>>()?,
            ys: c.ys.iter().map(small).collect::<Option<_>>()?,
        })
    }
}

impl PairKernel for Int128Kernel {
    type Key = i128;

    #[inline]
    fn key(&self, i: usize, j: usize) -> i128 {
        self.xs[i] * self.xs[j] + self.ys[i] * self.ys[j]
    }
}

/// Arbitrary-size numerators.
pub(crate) struct BigKernel {
    xs: Vec<BigInt>,
    ys: Vec<BigInt>,
}

impl BigKernel {
    pub(crate) fn new(c: &Cleared) -> Self {
        BigKernel {
            xs: c.xs.clone(),
            ys: c.ys.clone(),
        }
    }
}

impl PairKernel for BigKernel {
    type Key = BigInt;

    fn key(&self, i: usize, j: usize) -> BigInt {
        let xx = &self.xs[i] * &self.xs[j];
        if self.ys[i].is_zero() || self.ys[j].is_zero() {
            xx
        } else {
            xx + &self.ys[i] * &self.ys[j]
        }
    }
}

/// Trial-division base for [`FactoredKernel`].
const SMALL_PRIME_BOUND: u32 = 1000;

fn small_primes() -> Vec<u32> {
    let n = SMALL_PRIME_BOUND as usize;
    let mut composite = vec![false; n];
    let mut primes = Vec::new();
    for p in 2..n {
        if !composite[p] {
            primes.push(p as u32);
            for m in (p * p..n).step_by(p) {
                composite[m] = true;
            }
        }
    }
    primes
}

/// `|t| = ∏ p^e × rough` with every `p` below the trial bound and `rough`
/// free of such primes.
struct Factor {
    negative: bool,
    exps: SmallVec<[u32; 4]>,
    rough: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum FactoredKey {
    Zero,
    Value {
        negative: bool,
        exps: SmallVec<[u32; 4]>,
        rough: u128,
    },
}

// Exponent vectors of a progression are highly structured (e.g. `(s, C - s)`)
// and cluster under Fx's multiply-rotate; pre-mix into one well-spread word.
impl Hash for FactoredKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            FactoredKey::Zero => state.write_u64(0),
            FactoredKey::Value { negative, exps, rough } => {
                let mut h = mix64(*negative as u64 + 1);
                for &e in exps {
                    h = mix64(h ^ e as u64);
                }
                h = mix64(h ^ *rough as u64);
                h = mix64(h ^ (*rough >> 64) as u64);
                state.write_u64(h);
            }
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Points on one line through the origin, `(X_i, Y_i) = t_i (dx, dy)` with a
/// primitive direction. The numerator is `t_i t_j (dx² + dy²)`, so distinct
/// products `t_i t_j` are distinct values. Products are compared through
/// their factorization over small primes, which is unique, instead of
/// multiplying the (possibly thousands of digits long) integers.
pub(crate) struct FactoredKernel {
    primes: Vec<u32>,
    factors: Vec<Option<Factor>>,
    unit: BigInt,
}

impl FactoredKernel {
    pub(crate) fn try_new(c: &Cleared) -> Option<Self> {
        let (dx, dy) = primitive_direction(c)?;
        let ts =
            c.xs.iter()
                .zip(&c.ys)
                .map(|(x, y)| line_coordinate(x, y, &dx, &dy))
                .collect::<Option<Vec<_>>>()?;
        let base = small_primes();
        // `None` entries are zero coordinates.
        let mut raw = Vec::with_capacity(ts.len());
        for t in &ts {
            raw.push(if t.is_zero() {
                None
            } else {
                Some(factor_over(t.magnitude(), &base)?)
            });
        }
        // Only primes dividing some coordinate get an exponent slot.
        let mut active: Vec<usize> = raw
            .iter()
            .flatten()
            .flat_map(|(exps, _)| exps.iter().map(|&(idx, _)| idx))
            .collect();
        active.sort_unstable();
        active.dedup();
        let factors = raw
            .into_iter()
            .zip(&ts)
            .map(|(f, t)| {
                f.map(|(exps, rough)| {
                    let mut dense: SmallVec<[u32; 4]> = SmallVec::from_elem(0, active.len());
                    for (idx, e) in exps {
                        let slot = active.binary_search(&idx).expect("active prime");
                        dense[slot] = e;
                    }
                    Factor {
                        negative: t.sign() == Sign::Minus,
                        exps: dense,
                        rough,
                    }
                })
            })
            .collect();
        Some(FactoredKernel {
            primes: active.iter().map(|&i| base[i]).collect(),
            factors,
            unit: &dx * &dx + &dy * &dy,
        })
    }

    /// The exact numerator `X_i X_j + Y_i Y_j` a key stands for.
    pub(crate) fn numerator(&self, key: &FactoredKey) -> BigInt {
        match key {
            FactoredKey::Zero => BigInt::zero(),
            FactoredKey::Value { negative, exps, rough } => {
                let mut v = BigInt::from(*rough);
                for (&p, &e) in self.primes.iter().zip(exps) {
                    v *= num_traits::pow(BigInt::from(p), e as usize);
                }
                v *= &self.unit;
                if *negative {
                    -v
                } else {
                    v
                }
            }
        }
    }
}

impl PairKernel for FactoredKernel {
    type Key = FactoredKey;

    fn key(&self, i: usize, j: usize) -> FactoredKey {
        match (&self.factors[i], &self.factors[j]) {
            (Some(a), Some(b)) => FactoredKey::Value {
                negative: a.negative != b.negative,
                exps: a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect(),
                rough: a.rough as u128 * b.rough as u128,
            },
            _ => FactoredKey::Zero,
        }
    }
}

fn primitive_direction(c: &Cleared) -> Option<(BigInt, BigInt)> {
    let (x, y) = c.xs.iter().zip(&c.ys).find(|(x, y)| !(x.is_zero() && y.is_zero()))?;
    let g = x.gcd(y);
    let (mut dx, mut dy) = (x / &g, y / &g);
    if dx.is_negative() || (dx.is_zero() && dy.is_negative()) {
        dx = -dx;
        dy = -dy;
    }
    Some((dx, dy))
}

/// `t` with `(x, y) = t (dx, dy)`, if the point lies on that line.
fn line_coordinate(x: &BigInt, y: &BigInt, dx: &BigInt, dy: &BigInt) -> Option<BigInt> {
    let t = if !dx.is_zero() {
        let (t, rem) = x.div_rem(dx);
        if !rem.is_zero() {
            return None;
        }
        t
    } else {
        if !x.is_zero() {
            return None;
        }
        let (t, rem) = y.div_rem(dy);
        if !rem.is_zero() {
            return None;
        }
        t
    };
    (&t * dy == *y).then_some(t)
}

/// Sparse exponents `(prime index, e)` and the rough cofactor, or `None` if
/// the cofactor does not fit in 64 bits.
fn factor_over(m: &BigUint, base: &[u32]) -> Option<(Vec<(usize, u32)>, u64)> {
    let mut rest = m.clone();
    let mut exps = Vec::new();
    let twos = rest.trailing_zeros().unwrap_or(0);
    if twos > 0 {
        rest >>= twos;
        exps.push((0, twos as u32));
    }
    // Batch odd primes into products below 2^64 so one long division tests
    // several primes at once.
    let mut idx = 1;
    while idx < base.len() {
        let mut modulus: u64 = 1;
        let start = idx;
        while idx < base.len() {
            match modulus.checked_mul(base[idx] as u64) {
                Some(m) => {
                    modulus = m;
                    idx += 1;
                }
                None => break,
            }
        }
        let residue = (&rest % modulus).to_u64().expect("residue below modulus");
        for (k, &p) in base.iter().enumerate().take(idx).skip(start) {
            if residue.is_multiple_of(p as u64) {
                let e = strip_prime(&mut rest, p);
                exps.push((k, e));
            }
        }
    }
    let rough = rest.to_u64()?;
    Some((exps, rough))
}

/// Divides out every factor `p` of `m` and returns the multiplicity.
fn strip_prime(m: &mut BigUint, p: u32) -> u32 {
    let p64 = p as u64;
    // largest power of p that fits in a u64
    let (mut chunk, mut chunk_exp) = (p64, 1u32);
    while let Some(next) = chunk.checked_mul(p64) {
        chunk = next;
        chunk_exp += 1;
    }
    let mut e = 0;
    for (divisor, step) in [(chunk, chunk_exp), (p64, 1)] {
        let divisor = BigUint::from(divisor);
        loop {
            let (q, r) = m.div_rem(&divisor);
            if !r.is_zero() {
                break;
            }
            *m = q;
            e += step;
        }
    }
    e
}
