//! Surface-to-surface evaluation: ASSD, Hausdorff distance, exceedance
//! fractions, rigid ICP alignment, consistency reports and cortical thickness.
//!
//! Distances are measured from random surface samples to the exact closest
//! point of the other surface.

mod distance;
mod icp;
mod thickness;

use serde::Serialize;

pub use distance::{
    assd, assd_in_region, directed_distances, exceedance_fractions, hausdorff, high_curvature_faces,
    mesh_sample_seed, metrics_report, threshold_key, MetricsReport, SurfaceDistances,
    DEFAULT_METRIC_SAMPLES, ZERO_DISTANCE_RELATIVE,
};
pub use icp::{icp_rigid, kabsch, IcpResult, RigidTransform};
pub use thickness::{cortical_thickness, write_thickness_csv, Summary, ThicknessMap};

use crate::error::{GeoError, Result};
use crate::mesh::Mesh;
use crate::spatial::SurfaceIndex;
use crate::util::pairwise_sum;

/// ICP settings used by [`consistency_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for IcpOptions {
    fn default() -> Self {
        IcpOptions {
            max_iters: 100,
            tol: 1e-9,
        }
    }
}

/// Per-pair metrics after alignment with their mean and (population)
/// standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub pairs: Vec<MetricsReport>,
    pub mean: MetricsReport,
    pub std: MetricsReport,
}

fn aggregate(pairs: &[MetricsReport], f: impl Fn(&[f64]) -> f64) -> MetricsReport {
    let first = &pairs[0];
    let column = |get: &dyn Fn(&MetricsReport) -> f64| f(&pairs.iter().map(get).collect::<Vec<_>>());
    MetricsReport {
        assd: column(&|r| r.assd),
        hd: column(&|r| r.hd),
        hd_percentile: first.hd_percentile,
        frac_gt: first
            .frac_gt
            .keys()
            .map(|k| (k.clone(), column(&|r| r.frac_gt[k])))
            .collect(),
        n_samples: first.n_samples,
        seed: first.seed,
    }
}

fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    let sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&sq) / v.len() as f64).sqrt()
}

/// For each pair, rigidly aligns the second mesh onto the first (ICP from the
/// second mesh's vertices) and then measures distances.
pub fn consistency_report(
    pairs: &[(Mesh, Mesh)],
    n_samples: usize,
    seed: u64,
    percentile: Option<f64>,
    thresholds: &[f64],
    icp: IcpOptions,
) -> Result<ConsistencyReport> {
    if pairs.is_empty() {
        return Err(GeoError::EmptyInput("no mesh pairs"));
    }
    let mut reports = Vec::with_capacity(pairs.len());
    for (first, second) in pairs {
        let index = SurfaceIndex::build(first)?;
        let aligned = icp_rigid(second.vertices(), &index, icp.max_iters, icp.tol)?;
        let moved = second.map_vertices(|p| aligned.transform.apply(p))?;
        reports.push(metrics_report(first, &moved, n_samples, seed, percentile, thresholds)?);
    }
    Ok(ConsistencyReport {
        mean: aggregate(&reports, mean),
        std: aggregate(&reports, std_dev),
        pairs: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::make_icosphere;
    use crate::Vec3;

    #[test]
    fn identical_pairs_are_perfectly_consistent() {
        let m = make_icosphere(2, [1.0, 0.8, 0.6]).unwrap();
        let r = consistency_report(&[(m.clone(), m.clone())], 2000, 0, None, &[0.01], IcpOptions::default())
            .unwrap();
        assert!(r.mean.assd < 1e-9 && r.mean.hd < 1e-9);
        assert_eq!(r.mean.frac_gt["0.01"], 0.0);
    }

    #[test]
    fn mean_is_arithmetic_mean_of_pairs() {
        let a = make_icosphere(2, [1.0, 0.8, 0.6]).unwrap();
        let pairs: Vec<(Mesh, Mesh)> = [1.02, 1.05, 1.1]
            .iter()
            .map(|&s| (a.clone(), a.map_vertices(|p| p * s).unwrap()))
            .collect();
        let r = consistency_report(&pairs, 1000, 3, None, &[0.05], IcpOptions::default()).unwrap();
        let expected = r.pairs.iter().map(|p| p.assd).sum::<f64>() / 3.0;
        assert!((r.mean.assd - expected).abs() < 1e-12);
        assert!(r.std.assd > 0.0);
        assert!(r.pairs.windows(2).all(|w| w[0].assd < w[1].assd));
        let _ = Vec3::zeros();
    }
}
