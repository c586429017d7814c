use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Mode, Scalar};

use super::DotProductSet;

/// Reference count for exact configurations: every ordered product as a
/// rational, sorted, one value per strictly increasing run.
///
/// Shares nothing with the counting kernels and is quadratic in memory, so it
/// is meant for small inputs.
pub fn brute_force_oracle(cfg: &Configuration) -> Result<DotProductSet> {
    if cfg.mode() != Mode::Exact {
        return Err(Error::usage("the oracle needs an exact configuration"));
    }
    let coords: Vec<(&BigRational, &BigRational)> = cfg
        .iter()
        .map(|p| match (p.x(), p.y()) {
            (Scalar::Exact(x), Scalar::Exact(y)) => (x, y),
            _ => unreachable!("exact configuration"),
        })
        .collect();
    let mut all = Vec::with_capacity(coords.len() * coords.len());
    for (px, py) in &coords {
        for (qx, qy) in &coords {
            all.push(*px * *qx + *py * *qy);
        }
    }
    let pairs = all.len() as u64;
    all.sort();
    let mut runs: Vec<BigRational> = Vec::new();
    for v in all {
        if runs.last().is_none_or(|last| *last < v) {
            runs.push(v);
        }
    }
    let min_gap = runs.windows(2).map(|w| &w[1] - &w[0]).min().and_then(|g| g.to_f64());
    let values = runs.into_iter().map(Scalar::Exact).collect();
    Ok(DotProductSet::new(values, None, pairs, min_gap))
}
