use super::backprop::accumulate_face_normal_gradient;
use super::chamfer::Correspondence;
use super::LossTerm;
use crate::error::{GeoError, Result};
use crate::geometry::SampledCloud;
use crate::mesh::{EdgeFaces, Mesh};
use crate::util::pairwise_sum;
use crate::Vec3;

/// Inter-mesh normal consistency between a predicted and a ground-truth cloud.
///
/// The returned gradient is with respect to the predicted *normals*; ground-truth
/// normals are constants and positions only enter through the nearest-neighbor
/// assignment. Use [`super::backprop_cloud`] to reach the mesh vertices.
pub fn inter_normal_consistency(pred: &SampledCloud, gt: &SampledCloud) -> Result<LossTerm> {
    let corr = Correspondence::compute(pred, gt)?;
    inter_normal_consistency_with(pred, gt, &corr)
}

pub fn inter_normal_consistency_with(
    pred: &SampledCloud,
    gt: &SampledCloud,
    corr: &Correspondence,
) -> Result<LossTerm> {
    for (cloud, name) in [(pred, "predicted"), (gt, "ground-truth")] {
        if cloud.normals.len() != cloud.points.len() {
            return Err(GeoError::InvalidParameter(format!(
                "{name} cloud has {} normals for {} points",
                cloud.normals.len(),
                cloud.points.len()
            )));
        }
    }
    let n = pred.len() as f64;
    let m = gt.len() as f64;
    let mut skipped = 0;
    let mut gradient = vec![Vec3::zeros(); pred.len()];

    let mut gt_terms = Vec::with_capacity(gt.len());
    for (u, &(v, _)) in corr.gt_to_pred.iter().enumerate() {
        let nv = pred.normals[v];
        if nv == Vec3::zeros() {
            skipped += 1;
            gt_terms.push(0.0);
            continue;
        }
        let nu = gt.normals[u];
        gt_terms.push(1.0 - nu.dot(&nv));
        gradient[v] -= nu / m;
    }
    let mut pred_terms = Vec::with_capacity(pred.len());
    for (v, &(u, _)) in corr.pred_to_gt.iter().enumerate() {
        let nv = pred.normals[v];
        if nv == Vec3::zeros() {
            skipped += 1;
            pred_terms.push(0.0);
            continue;
        }
        let nu = gt.normals[u];
        pred_terms.push(1.0 - nv.dot(&nu));
        gradient[v] -= nu / n;
    }
    Ok(LossTerm {
        value: pairwise_sum(&gt_terms) / m + pairwise_sum(&pred_terms) / n,
        gradient,
        skipped_degenerate: skipped,
    })
}

/// Intra-mesh normal consistency: sum over face pairs sharing an edge of
/// `1 - cos` between their normals. The gradient is with respect to vertices.
pub fn intra_normal_consistency(mesh: &Mesh) -> LossTerm {
    let pairs = EdgeFaces::new(mesh).adjacent_face_pairs();
    intra_normal_consistency_with(mesh, &pairs)
}

/// As [`intra_normal_consistency`] with precomputed adjacent face pairs. Pairs
/// involving a degenerate face are skipped and counted.
pub fn intra_normal_consistency_with(mesh: &Mesh, pairs: &[(u32, u32)]) -> LossTerm {
    let normals = mesh.normals();
    let degenerate: Vec<bool> = {
        let mut d = vec![false; mesh.face_count()];
        for &f in &normals.degenerate_faces {
            d[f] = true;
        }
        d
    };
    let mut face_grad = vec![Vec3::zeros(); mesh.face_count()];
    let mut terms = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    for &(f1, f2) in pairs {
        let (f1, f2) = (f1 as usize, f2 as usize);
        if degenerate[f1] || degenerate[f2] {
            skipped += 1;
            continue;
        }
        let (n1, n2) = (normals.face[f1], normals.face[f2]);
        terms.push(1.0 - n1.dot(&n2));
        face_grad[f1] -= n2;
        face_grad[f2] -= n1;
    }
    let mut gradient = vec![Vec3::zeros(); mesh.vertex_count()];
    accumulate_face_normal_gradient(mesh, &face_grad, &mut gradient);
    LossTerm {
        value: pairwise_sum(&terms),
        gradient,
        skipped_degenerate: skipped,
    }
}
