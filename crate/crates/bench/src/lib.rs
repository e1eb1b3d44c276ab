//! Shared fixtures for the benchmarks.

use cortexgeo::geometry::{curvature_weight, mean_curvature, sample_surface, DEFAULT_KAPPA_MAX};
use cortexgeo::template::make_icosphere;
use cortexgeo::{Mesh, SampledCloud, Vec3};

/// Sphere with `r = 1 + 0.15 sin(6 theta) sin(6 phi)`.
pub fn bumpy_sphere(subdivisions: u32) -> Mesh {
    make_icosphere(subdivisions, [1.0; 3])
        .unwrap()
        .map_vertices(|v| {
            let u = v.normalize();
            let theta = u.z.clamp(-1.0, 1.0).acos();
            let phi = u.y.atan2(u.x);
            u * (1.0 + 0.15 * (6.0 * theta).sin() * (6.0 * phi).sin())
        })
        .unwrap()
}

/// A predicted cloud of `n_pred` samples on a sphere and a curvature-weighted
/// target cloud of `n_gt` samples on a bumpy sphere.
pub fn chamfer_clouds(n_pred: usize, n_gt: usize) -> (SampledCloud, SampledCloud) {
    let pred_mesh = make_icosphere(5, [1.0; 3]).unwrap();
    let gt_mesh = bumpy_sphere(5);
    let kappa = curvature_weight(&mean_curvature(&gt_mesh).unwrap(), DEFAULT_KAPPA_MAX).unwrap();
    let pred = sample_surface(&pred_mesh, n_pred, 1, None).unwrap();
    let gt = sample_surface(&gt_mesh, n_gt, 2, Some(&kappa)).unwrap();
    (pred, gt)
}

/// Deterministic pseudo-random points in the unit cube.
pub fn cube_points(n: usize, seed: u64) -> Vec<Vec3> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n).map(|_| Vec3::new(next(), next(), next())).collect()
}
