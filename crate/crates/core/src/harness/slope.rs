use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln count` about the fitted line.
    pub residual: f64,
}

/// Ordinary least squares of `ln count` on `ln n`.
pub fn fit_slope(rows: &[(f64, f64)]) -> Result<SlopeFit> {
    if rows.len() < 2 {
        return Err(Error::usage("slope fitting needs at least two rows"));
    }
    if let Some(&(n, c)) = rows
        .iter()
        .find(|&&(n, c)| !(n > 0.0 && c >= 1.0 && n.is_finite() && c.is_finite()))
    {
        return Err(Error::usage(format!(
            "row (n = {n}, count = {c}) needs n > 0 and count >= 1"
        )));
    }
    let logs: Vec<(f64, f64)> = rows.iter().map(|&(n, c)| (n.ln(), c.ln())).collect();
    let m = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::usage("slope fitting needs at least two distinct n"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (sse / m).sqrt(),
    })
}
