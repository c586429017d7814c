//! Plain-text points files.
//!
//! ```text
//! #mode exact
//! # comment
//! 1/1 0/1
//! 3/2 0/1
//! ```
//!
//! The `#mode` header must precede the first point. Exact coordinates are
//! written as `num/den`; approximate ones use the shortest decimal that
//! round-trips, so save/load is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Mode, Point, Scalar};

pub fn parse_points(text: &str) -> Result<Configuration> {
    let mut mode = None;
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim_start();
            if let Some(value) = rest.strip_prefix("mode") {
                if mode.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "duplicate #mode header".into(),
                    });
                }
                mode = Some(value.trim().parse::<Mode>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?);
            }
            continue;
        }
        let mode = mode.ok_or_else(|| Error::Parse {
            line: line_no,
            message: "missing `#mode exact|approx` header before the first point".into(),
        })?;
        let mut fields = line.split_whitespace();
        let (Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `x y`, got `{line}`"),
            });
        };
        let parse = |t: &str| {
            Scalar::parse_in(t, mode).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })
        };
        let point = Point::new(parse(x)?, parse(y)?).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        points.push(point);
    }
    if mode.is_none() {
        return Err(Error::Parse {
            line: 0,
            message: "missing `#mode exact|approx` header".into(),
        });
    }
    Configuration::new(points)
}

fn token(s: &Scalar) -> String {
    match s {
        Scalar::Exact(q) => exact_token(q),
        Scalar::Approx(v) => format!("{v:?}"),
    }
}

fn exact_token(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn format_points(config: &Configuration) -> String {
    let mut out = format!("#mode {}\n", config.mode());
    for p in config {
        let _ = writeln!(out, "{} {}", token(p.x()), token(p.y()));
    }
    out
}

pub fn read_points(path: impl AsRef<Path>) -> Result<Configuration> {
    let text = fs::read_to_string(path)?;
    parse_points(&text)
}

pub fn write_points(path: impl AsRef<Path>, config: &Configuration) -> Result<()> {
    fs::write(path, format_points(config))?;
    Ok(())
}
