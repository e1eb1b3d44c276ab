use std::io::Write;

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::mesh::Mesh;
use crate::spatial::SurfaceIndex;
use crate::util::pairwise_sum;

/// Order statistics of a set of values; quartiles interpolate linearly
/// between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub lower_quartile: f64,
    pub median: f64,
    pub upper_quartile: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(GeoError::EmptyInput("no values to summarize"));
        }
        let mut s = values.to_vec();
        s.sort_unstable_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (s.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            s[lo] + (h - lo as f64) * (s[hi] - s[lo])
        };
        Ok(Summary {
            min: s[0],
            lower_quartile: q(0.25),
            median: q(0.5),
            upper_quartile: q(0.75),
            max: s[s.len() - 1],
            mean: pairwise_sum(values) / values.len() as f64,
        })
    }
}

/// Per-vertex thickness on the white-matter mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThicknessMap {
    pub values: Vec<f64>,
    pub summary: Summary,
}

/// Distance from every white-matter vertex to the closest point of the pial
/// surface.
pub fn cortical_thickness(white: &Mesh, pial: &Mesh) -> Result<ThicknessMap> {
    if white.vertex_count() == 0 {
        return Err(GeoError::EmptyInput("white-matter mesh has no vertices"));
    }
    let index = SurfaceIndex::build(pial)?;
    let values: Vec<f64> = index
        .closest_points(white.vertices())
        .into_iter()
        .map(|h| h.distance)
        .collect();
    let summary = Summary::of(&values)?;
    Ok(ThicknessMap { values, summary })
}

/// CSV with columns `vertex_id,thickness`.
pub fn write_thickness_csv<W: Write>(out: W, map: &ThicknessMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["vertex_id", "thickness"])?;
    for (i, t) in map.values.iter().enumerate() {
        w.write_record([i.to_string(), t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
