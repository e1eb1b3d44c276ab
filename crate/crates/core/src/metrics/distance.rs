use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometry::{mean_curvature, sample_surface};
use crate::mesh::Mesh;
use crate::spatial::SurfaceIndex;
use crate::util::{derive_seed, hash_words, pairwise_sum};

/// Default number of surface samples drawn from each mesh.
pub const DEFAULT_METRIC_SAMPLES: usize = 100_000;

/// Sampling seed for one mesh: the user seed mixed with a hash of the mesh
/// content. Each mesh's samples then do not depend on argument order, which
/// makes the symmetric metrics exactly symmetric.
pub fn mesh_sample_seed(seed: u64, mesh: &Mesh) -> u64 {
    let coords = mesh.vertices().iter().flat_map(|v| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    let faces = mesh.faces().iter().flat_map(|f| f.map(u64::from));
    let h = hash_words(
        [mesh.vertex_count() as u64, mesh.face_count() as u64]
            .into_iter()
            .chain(coords)
            .chain(faces),
    );
    derive_seed(seed, &[h])
}

/// Point-sample-to-exact-surface distances in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDistances {
    /// From samples on `a` to the surface of `b`.
    pub a_to_b: Vec<f64>,
    /// From samples on `b` to the surface of `a`.
    pub b_to_a: Vec<f64>,
}

fn check_mesh(m: &Mesh) -> Result<()> {
    if m.face_count() == 0 {
        return Err(GeoError::EmptyInput("mesh has no faces"));
    }
    Ok(())
}

/// Distances below this fraction of the sampled mesh's bounding-box diagonal
/// are rounding noise from the closest-point projection and reported as 0.
pub const ZERO_DISTANCE_RELATIVE: f64 = 1e-12;

/// Distances from `n_samples` area-weighted samples on `from` to the surface
/// of `to`.
pub fn directed_distances(from: &Mesh, to: &SurfaceIndex, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    check_mesh(from)?;
    let cloud = sample_surface(from, n_samples, mesh_sample_seed(seed, from), None)?;
    let floor = ZERO_DISTANCE_RELATIVE * from.bounding_box_diagonal();
    Ok(to
        .closest_points(&cloud.points)
        .into_iter()
        .map(|h| if h.distance < floor { 0.0 } else { h.distance })
        .collect())
}

impl SurfaceDistances {
    pub fn compute(a: &Mesh, b: &Mesh, n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(GeoError::InvalidParameter("n_samples must be positive".into()));
        }
        check_mesh(a)?;
        check_mesh(b)?;
        let ia = SurfaceIndex::build(a)?;
        let ib = SurfaceIndex::build(b)?;
        Ok(SurfaceDistances {
            a_to_b: directed_distances(a, &ib, n_samples, seed)?,
            b_to_a: directed_distances(b, &ia, n_samples, seed)?,
        })
    }

    /// Mean of the two directed mean distances.
    pub fn assd(&self) -> f64 {
        (bounded_mean(&self.a_to_b) + bounded_mean(&self.b_to_a)) / 2.0
    }

    /// Maximum, or nearest-rank percentile, of the pooled distances.
    pub fn hausdorff(&self, percentile: f64) -> Result<f64> {
        if !(percentile > 0.0 && percentile <= 100.0) {
            return Err(GeoError::InvalidParameter(format!(
                "percentile must be in (0, 100], got {percentile}"
            )));
        }
        let mut pooled: Vec<f64> = self.a_to_b.iter().chain(&self.b_to_a).copied().collect();
        if percentile == 100.0 {
            return Ok(pooled.iter().copied().fold(0.0, f64::max));
        }
        pooled.sort_unstable_by(f64::total_cmp);
        let rank = ((percentile / 100.0) * pooled.len() as f64).ceil() as usize;
        Ok(pooled[rank.clamp(1, pooled.len()) - 1])
    }

    /// Fraction of pooled distances strictly above each threshold.
    pub fn exceedance(&self, thresholds: &[f64]) -> Vec<f64> {
        let total = (self.a_to_b.len() + self.b_to_a.len()) as f64;
        thresholds
            .iter()
            .map(|&t| self.a_to_b.iter().chain(&self.b_to_a).filter(|&&d| d > t).count() as f64 / total)
            .collect()
    }
}

/// Mean that is never larger than the maximum, even after rounding.
fn bounded_mean(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    (pairwise_sum(values) / values.len() as f64).min(max)
}

/// Average symmetric surface distance.
pub fn assd(a: &Mesh, b: &Mesh, n_samples: usize, seed: u64) -> Result<f64> {
    Ok(SurfaceDistances::compute(a, b, n_samples, seed)?.assd())
}

/// Symmetric Hausdorff distance; `percentile = None` means the maximum.
pub fn hausdorff(a: &Mesh, b: &Mesh, n_samples: usize, seed: u64, percentile: Option<f64>) -> Result<f64> {
    SurfaceDistances::compute(a, b, n_samples, seed)?.hausdorff(percentile.unwrap_or(100.0))
}

pub fn exceedance_fractions(a: &Mesh, b: &Mesh, n_samples: usize, seed: u64, thresholds: &[f64]) -> Result<Vec<f64>> {
    Ok(SurfaceDistances::compute(a, b, n_samples, seed)?.exceedance(thresholds))
}

/// Distance summary of one mesh pair, serialized as
/// `{assd, hd, hd_percentile, frac_gt: {...}, n_samples, seed}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub assd: f64,
    pub hd: f64,
    pub hd_percentile: f64,
    /// Keyed by threshold as written by `f64`'s `Display`.
    pub frac_gt: BTreeMap<String, f64>,
    pub n_samples: usize,
    pub seed: u64,
}

pub fn threshold_key(t: f64) -> String {
    format!("{t}")
}

impl MetricsReport {
    pub fn from_distances(
        d: &SurfaceDistances,
        percentile: f64,
        thresholds: &[f64],
        n_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        let fr = d.exceedance(thresholds);
        Ok(MetricsReport {
            assd: d.assd(),
            hd: d.hausdorff(percentile)?,
            hd_percentile: percentile,
            frac_gt: thresholds.iter().map(|&t| threshold_key(t)).zip(fr).collect(),
            n_samples,
            seed,
        })
    }
}

/// ASSD, Hausdorff distance and exceedance fractions from one set of samples.
pub fn metrics_report(
    a: &Mesh,
    b: &Mesh,
    n_samples: usize,
    seed: u64,
    percentile: Option<f64>,
    thresholds: &[f64],
) -> Result<MetricsReport> {
    let d = SurfaceDistances::compute(a, b, n_samples, seed)?;
    MetricsReport::from_distances(&d, percentile.unwrap_or(100.0), thresholds, n_samples, seed)
}

/// Faces of `mesh` touching at least one vertex whose absolute mean curvature
/// is in the top `fraction` of all vertices.
pub fn high_curvature_faces(mesh: &Mesh, fraction: f64) -> Result<Vec<bool>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(GeoError::InvalidParameter("fraction must be in (0, 1]".into()));
    }
    let curv = mean_curvature(mesh)?;
    let mut order: Vec<usize> = (0..mesh.vertex_count()).collect();
    order.sort_by(|&i, &j| curv.abs_mean[j].total_cmp(&curv.abs_mean[i]).then(i.cmp(&j)));
    let keep = ((fraction * mesh.vertex_count() as f64).ceil() as usize).max(1);
    let mut hot = vec![false; mesh.vertex_count()];
    for &v in &order[..keep] {
        hot[v] = true;
    }
    Ok(mesh
        .faces()
        .iter()
        .map(|f| f.iter().any(|&v| hot[v as usize]))
        .collect())
}

/// ASSD restricted to a region of the target surface: target samples on
/// region faces measured against `pred`, and `pred` samples whose closest
/// target face is in the region measured against the target.
pub fn assd_in_region(pred: &Mesh, target: &Mesh, region: &[bool], n_samples: usize, seed: u64) -> Result<f64> {
    if region.len() != target.face_count() {
        return Err(GeoError::LengthMismatch {
            expected: target.face_count(),
            actual: region.len(),
        });
    }
    check_mesh(pred)?;
    check_mesh(target)?;
    let ip = SurfaceIndex::build(pred)?;
    let it = SurfaceIndex::build(target)?;
    let tc = sample_surface(target, n_samples, mesh_sample_seed(seed, target), None)?;
    let target_side: Vec<f64> = tc
        .points
        .iter()
        .zip(&tc.face_id)
        .filter(|(_, &f)| region[f as usize])
        .map(|(p, _)| ip.closest_point(p).distance)
        .collect();
    let pc = sample_surface(pred, n_samples, mesh_sample_seed(seed, pred), None)?;
    let pred_side: Vec<f64> = it
        .closest_points(&pc.points)
        .into_iter()
        .filter(|h| region[h.face])
        .map(|h| h.distance)
        .collect();
    match (target_side.is_empty(), pred_side.is_empty()) {
        (true, true) => Err(GeoError::EmptyInput("no samples fall in the region")),
        (false, true) => Ok(bounded_mean(&target_side)),
        (true, false) => Ok(bounded_mean(&pred_side)),
        (false, false) => Ok((bounded_mean(&target_side) + bounded_mean(&pred_side)) / 2.0),
    }
}
