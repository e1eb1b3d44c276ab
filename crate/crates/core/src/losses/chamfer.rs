use rayon::prelude::*;

use super::LossTerm;
use crate::error::{GeoError, Result};
use crate::geometry::SampledCloud;
use crate::spatial::PointIndex;
use crate::util::pairwise_sum;
use crate::Vec3;

/// Nearest-neighbor assignments in both directions between a predicted and a
/// ground-truth cloud, as `(index, squared distance)`. Ties go to the lowest
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub gt_to_pred: Vec<(usize, f64)>,
    pub pred_to_gt: Vec<(usize, f64)>,
}

impl Correspondence {
    pub fn compute(pred: &SampledCloud, gt: &SampledCloud) -> Result<Self> {
        if gt.is_empty() {
            return Err(GeoError::EmptyInput("ground-truth cloud"));
        }
        let gt_index = PointIndex::build(&gt.points)?;
        Self::with_gt_index(pred, &gt_index)
    }

    /// Reuses a prebuilt index over the ground-truth points.
    pub fn with_gt_index(pred: &SampledCloud, gt_index: &PointIndex) -> Result<Self> {
        if pred.is_empty() {
            return Err(GeoError::EmptyInput("predicted cloud"));
        }
        let pred_index = PointIndex::build(&pred.points)?;
        Ok(Correspondence {
            gt_to_pred: pred_index.nearest_batch(gt_index.points()),
            pred_to_gt: gt_index.nearest_batch(&pred.points),
        })
    }
}

/// Curvature-weighted Chamfer distance; the gradient is with respect to the
/// predicted points.
pub fn chamfer_curvature(pred: &SampledCloud, gt: &SampledCloud) -> Result<LossTerm> {
    let kappa = gt_kappa(gt)?;
    let corr = Correspondence::compute(pred, gt)?;
    Ok(chamfer_with(pred, gt, &corr, Some(kappa)))
}

/// Chamfer distance with unit weights.
pub fn chamfer_classic(pred: &SampledCloud, gt: &SampledCloud) -> Result<LossTerm> {
    let corr = Correspondence::compute(pred, gt)?;
    Ok(chamfer_with(pred, gt, &corr, None))
}

pub(crate) fn gt_kappa(gt: &SampledCloud) -> Result<&[f64]> {
    match &gt.curvature_weight {
        Some(k) if k.len() == gt.len() => Ok(k),
        Some(k) => Err(GeoError::LengthMismatch {
            expected: gt.len(),
            actual: k.len(),
        }),
        None => Err(GeoError::InvalidParameter(
            "ground-truth cloud carries no curvature weights".into(),
        )),
    }
}

/// Chamfer value and gradient for precomputed assignments. `kappa` holds one
/// weight per ground-truth point; `None` means all ones.
pub fn chamfer_with(
    pred: &SampledCloud,
    gt: &SampledCloud,
    corr: &Correspondence,
    kappa: Option<&[f64]>,
) -> LossTerm {
    let n = pred.len() as f64;
    let m = gt.len() as f64;
    let weight = |i: usize| kappa.map_or(1.0, |k| k[i]);

    let gt_terms: Vec<f64> = corr
        .gt_to_pred
        .par_iter()
        .enumerate()
        .with_min_len(1024)
        .map(|(u, &(_, d2))| weight(u) * d2)
        .collect();
    let pred_terms: Vec<f64> = corr
        .pred_to_gt
        .par_iter()
        .with_min_len(1024)
        .map(|&(u, d2)| weight(u) * d2)
        .collect();
    let value = pairwise_sum(&gt_terms) / m + pairwise_sum(&pred_terms) / n;

    let mut gradient: Vec<Vec3> = corr
        .pred_to_gt
        .par_iter()
        .zip(&pred.points)
        .with_min_len(1024)
        .map(|(&(u, _), v)| (v - gt.points[u]) * (2.0 * weight(u) / n))
        .collect();
    for (u, &(v, _)) in corr.gt_to_pred.iter().enumerate() {
        gradient[v] += (pred.points[v] - gt.points[u]) * (2.0 * weight(u) / m);
    }
    LossTerm {
        value,
        gradient,
        skipped_degenerate: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NormalSource;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn cloud(points: Vec<Vec3>, kappa: Option<Vec<f64>>) -> SampledCloud {
        let n = points.len();
        SampledCloud {
            normals: vec![Vec3::z(); n],
            face_id: vec![0; n],
            barycentric: vec![[1.0, 0.0, 0.0]; n],
            points,
            curvature_weight: kappa,
            normal_source: NormalSource::Face,
        }
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect()
    }

    fn brute_force(pred: &[Vec3], gt: &[Vec3], kappa: &[f64]) -> f64 {
        let nearest = |q: &Vec3, set: &[Vec3]| {
            let mut best = (0, f64::INFINITY);
            for (i, p) in set.iter().enumerate() {
                let d = (p - q).norm_squared();
                if d < best.1 {
                    best = (i, d);
                }
            }
            best
        };
        let a: f64 = gt
            .iter()
            .enumerate()
            .map(|(i, u)| kappa[i] * nearest(u, pred).1)
            .sum::<f64>()
            / gt.len() as f64;
        let b: f64 = pred
            .iter()
            .map(|v| {
                let (u, d) = nearest(v, gt);
                kappa[u] * d
            })
            .sum::<f64>()
            / pred.len() as f64;
        a + b
    }

    #[test]
    fn coincident_clouds_have_zero_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = random_points(&mut rng, 40);
        let k: Vec<f64> = (0..40).map(|i| 1.0 + (i % 5) as f64).collect();
        let t = chamfer_curvature(&cloud(pts.clone(), None), &cloud(pts, Some(k))).unwrap();
        assert_eq!(t.value, 0.0);
        assert!(t.gradient.iter().all(|g| *g == Vec3::zeros()));
    }

    #[test]
    fn singleton_value_and_gradient() {
        let a = Vec3::new(0.1, -0.2, 0.3);
        let u = a + Vec3::new(0.3, 0.4, 0.0);
        let t = chamfer_curvature(&cloud(vec![u], None), &cloud(vec![a], Some(vec![2.0]))).unwrap();
        assert!((t.value - 1.0).abs() < 1e-15);
        let expected = (u - a) * 8.0;
        assert!((t.gradient[0] - expected).norm() < 1e-15);
        let c = chamfer_classic(&cloud(vec![u], None), &cloud(vec![a], None)).unwrap();
        assert!((c.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_clouds_match_brute_force() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pred = random_points(&mut rng, 50);
            let gt = random_points(&mut rng, 37);
            let k: Vec<f64> = (0..37).map(|_| rng.random_range(1.0..5.0)).collect();
            let t = chamfer_curvature(&cloud(pred.clone(), None), &cloud(gt.clone(), Some(k.clone())))
                .unwrap();
            assert!((t.value - brute_force(&pred, &gt, &k)).abs() < 1e-12);
            let c = chamfer_classic(&cloud(pred.clone(), None), &cloud(gt.clone(), None)).unwrap();
            assert!((c.value - brute_force(&pred, &gt, &[1.0; 37])).abs() < 1e-12);
            assert!(t.value >= c.value);
        }
    }

    #[test]
    fn classic_equals_curvature_with_unit_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pred = cloud(random_points(&mut rng, 30), None);
        let gt = cloud(random_points(&mut rng, 20), Some(vec![1.0; 20]));
        let a = chamfer_curvature(&pred, &gt).unwrap();
        let b = chamfer_classic(&pred, &gt).unwrap();
        assert!((a.value - b.value).abs() <= 1e-15);
        assert_eq!(a.gradient, b.gradient);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pred = random_points(&mut rng, 25);
        let gt = random_points(&mut rng, 30);
        let k: Vec<f64> = (0..30).map(|_| rng.random_range(1.0..5.0)).collect();
        let gt = cloud(gt, Some(k));
        let base = cloud(pred.clone(), None);
        let corr = Correspondence::compute(&base, &gt).unwrap();
        let t = chamfer_with(&base, &gt, &corr, gt.curvature_weight.as_deref());
        let h = 1e-6;
        for i in 0..pred.len() {
            for axis in 0..3 {
                let mut p = pred.clone();
                p[i][axis] += h;
                let plus = chamfer_curvature(&cloud(p.clone(), None), &gt).unwrap().value;
                p[i][axis] -= 2.0 * h;
                let minus = chamfer_curvature(&cloud(p, None), &gt).unwrap().value;
                let fd = (plus - minus) / (2.0 * h);
                assert!((fd - t.gradient[i][axis]).abs() < 1e-6, "{fd} vs {}", t.gradient[i][axis]);
            }
        }
    }

    #[test]
    fn missing_kappa_and_empty_clouds_rejected() {
        let p = cloud(vec![Vec3::zeros()], None);
        assert!(chamfer_curvature(&p, &cloud(vec![Vec3::x()], None)).is_err());
        assert!(chamfer_classic(&cloud(vec![], None), &p).is_err());
        assert!(chamfer_classic(&p, &cloud(vec![], None)).is_err());
    }
}
