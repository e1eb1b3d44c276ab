use nalgebra::{Matrix3, Rotation3, Unit};

use crate::error::{GeoError, Result};
use crate::spatial::SurfaceIndex;
use crate::util::pairwise_sum;
use crate::Vec3;

/// Proper rigid motion `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Rotation by `angle` radians about `axis`, then translation.
    pub fn from_axis_angle(axis: &Vec3, angle: f64, translation: Vec3) -> Self {
        RigidTransform {
            rotation: Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle).into_inner(),
            translation,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &RigidTransform) -> Self {
        RigidTransform {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }

    /// Rotation angle in radians.
    pub fn angle(&self) -> f64 {
        ((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

/// Outcome of [`icp_rigid`].
#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    /// Transform to apply to the source points.
    pub transform: RigidTransform,
    /// Mean squared point-to-surface distance after alignment.
    pub mse: f64,
    pub iterations: usize,
    /// False when `max_iters` ran out before the relative MSE change fell
    /// below the tolerance.
    pub converged: bool,
}

/// Least-squares rotation and translation mapping `src` onto `dst`
/// (determinant-corrected SVD solution).
pub fn kabsch(src: &[Vec3], dst: &[Vec3]) -> RigidTransform {
    let n = src.len() as f64;
    let cs = src.iter().sum::<Vec3>() / n;
    let cd = dst.iter().sum::<Vec3>() / n;
    let mut h = Matrix3::zeros();
    for (p, q) in src.iter().zip(dst) {
        h += (p - cs) * (q - cd).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let v = vt.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let rotation = v * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * u.transpose();
    RigidTransform {
        rotation,
        translation: cd - rotation * cs,
    }
}

fn check_spread(points: &[Vec3]) -> Result<()> {
    if points.len() < 3 {
        return Err(GeoError::Degenerate("ICP needs at least 3 source points".into()));
    }
    let c = points.iter().sum::<Vec3>() / points.len() as f64;
    let mut cov = Matrix3::zeros();
    for p in points {
        cov += (p - c) * (p - c).transpose();
    }
    let mut s: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    if !(s[0] > 0.0) || s[1] <= 1e-12 * s[0] {
        return Err(GeoError::Degenerate("ICP source points are collinear or coincident".into()));
    }
    Ok(())
}

fn correspondences(source: &[Vec3], t: &RigidTransform, target: &SurfaceIndex) -> (Vec<Vec3>, f64) {
    let moved: Vec<Vec3> = source.iter().map(|p| t.apply(p)).collect();
    let hits = target.closest_points(&moved);
    let d2: Vec<f64> = hits.iter().map(|h| h.distance * h.distance).collect();
    (
        hits.into_iter().map(|h| h.point).collect(),
        pairwise_sum(&d2) / source.len() as f64,
    )
}

/// Point-to-surface ICP. Each iteration pairs every transformed source point
/// with its closest surface point and re-solves the rigid motion. An
/// iteration that would raise the mean squared error is discarded and the
/// best transform so far is returned.
pub fn icp_rigid(source: &[Vec3], target: &SurfaceIndex, max_iters: usize, tol: f64) -> Result<IcpResult> {
    check_spread(source)?;
    if !(tol >= 0.0) {
        return Err(GeoError::InvalidParameter("tolerance must be nonnegative".into()));
    }
    let mut best = RigidTransform::identity();
    let (mut targets, mut mse) = correspondences(source, &best, target);
    for it in 1..=max_iters {
        if mse == 0.0 {
            return Ok(IcpResult {
                transform: best,
                mse,
                iterations: it - 1,
                converged: true,
            });
        }
        let candidate = kabsch(source, &targets);
        let (next_targets, next_mse) = correspondences(source, &candidate, target);
        if next_mse > mse {
            return Ok(IcpResult {
                transform: best,
                mse,
                iterations: it,
                converged: true,
            });
        }
        let change = (mse - next_mse) / mse;
        best = candidate;
        targets = next_targets;
        mse = next_mse;
        if change < tol {
            return Ok(IcpResult {
                transform: best,
                mse,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(IcpResult {
        transform: best,
        mse,
        iterations: max_iters,
        converged: false,
    })
}
