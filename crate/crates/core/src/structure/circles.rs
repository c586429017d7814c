use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::count::{resolve_quantum, triangle_bound, Quantization};
use crate::error::{Error, Result};
use crate::geometry::{Configuration, Point, Scalar};

/// Points sharing one radius about the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleGroup {
    /// Exact radius², or the smallest radius² in the grid cell.
    pub radius2: Scalar,
    pub members: Vec<Point>,
    /// The radius-0 group holding the origin.
    pub degenerate: bool,
}

impl CircleGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportingCircles {
    /// By increasing radius.
    pub groups: Vec<CircleGroup>,
    /// Grid quantum for radius², `None` when grouped exactly.
    pub quantum: Option<f64>,
}

impl SupportingCircles {
    /// Groups other than the degenerate origin group.
    pub fn proper(&self) -> impl Iterator<Item = &CircleGroup> {
        self.groups.iter().filter(|g| !g.degenerate)
    }
}

/// Groups by radius² with the same dedup rule the counter would use, so the
/// number of circles never exceeds the number of distinct dot products.
pub fn supporting_circles(cfg: &Configuration) -> SupportingCircles {
    supporting_circles_with(cfg, Quantization::Auto).expect("auto quantization always resolves")
}

pub fn supporting_circles_with(cfg: &Configuration, quantization: Quantization) -> Result<SupportingCircles> {
    let quantum = resolve_quantum(quantization, cfg.mode(), || triangle_bound(cfg.points()))?;
    let mut groups: Vec<CircleGroup> = match quantum {
        None => {
            let mut map: BTreeMap<BigRational, Vec<Point>> = BTreeMap::new();
            for p in cfg {
                let Scalar::Exact(r2) = p.radius2() else {
                    unreachable!("exact configuration");
                };
                map.entry(r2).or_default().push(p.clone());
            }
            map.into_iter()
                .map(|(r2, members)| CircleGroup {
                    radius2: Scalar::Exact(r2),
                    members,
                    degenerate: false,
                })
                .collect()
        }
        Some(q) => {
            let mut map: BTreeMap<i64, (f64, Vec<Point>)> = BTreeMap::new();
            for p in cfg {
                let r2 = p.radius2().to_f64();
                let entry = map.entry((r2 / q).round() as i64).or_insert((r2, Vec::new()));
                entry.0 = entry.0.min(r2);
                entry.1.push(p.clone());
            }
            map.into_values()
                .map(|(r2, members)| CircleGroup {
                    radius2: Scalar::approx(r2),
                    members,
                    degenerate: false,
                })
                .collect()
        }
    };
    for g in &mut groups {
        g.degenerate = g.members.iter().any(Point::is_origin);
    }
    Ok(SupportingCircles { groups, quantum })
}

/// The largest non-degenerate circle; ties go to the smaller radius.
pub fn popular_circle(cfg: &Configuration) -> Result<CircleGroup> {
    let circles = supporting_circles(cfg);
    let mut best: Option<&CircleGroup> = None;
    for g in circles.proper() {
        if best.is_none_or(|b| g.len() > b.len()) {
            best = Some(g);
        }
    }
    best.cloned()
        .ok_or_else(|| Error::domain("every point is at the origin"))
}
