#![allow(dead_code)]

use cortexgeo::template::make_icosphere;
use cortexgeo::{Mesh, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
}

/// Standard normal sample (Box-Muller).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Icosphere on a random ellipsoid with every vertex displaced by up to
/// `jitter` per axis.
pub fn jittered_sphere(level: u32, seed: u64, jitter: f64) -> Mesh {
    let mut r = rng(seed);
    let radii = [r.random_range(0.8..1.2), r.random_range(0.8..1.2), r.random_range(0.8..1.2)];
    let m = make_icosphere(level, radii).unwrap();
    let verts = m.vertices().iter().map(|v| v + random_vec(&mut r, jitter)).collect();
    m.with_vertices(verts).unwrap()
}

pub fn bumpy(v: &Vec3) -> Vec3 {
    let u = v.normalize();
    let theta = u.z.clamp(-1.0, 1.0).acos();
    let phi = u.y.atan2(u.x);
    u * (1.0 + 0.15 * (6.0 * theta).sin() * (6.0 * phi).sin())
}

pub fn bumpy_sphere(level: u32) -> Mesh {
    make_icosphere(level, [1.0; 3]).unwrap().map_vertices(bumpy).unwrap()
}

pub fn flatten(v: &[Vec3]) -> Vec<f64> {
    v.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

pub fn unflatten(x: &[f64]) -> Vec<Vec3> {
    x.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
}

/// Outcome of a central finite-difference comparison.
#[derive(Debug, Clone, Copy, Default)]
pub struct FdReport {
    /// `max |analytic - fd| / max |fd|` over the compared coordinates.
    pub relative_error: f64,
    pub compared: usize,
    pub skipped: usize,
}

/// Compares `analytic` with central differences of `f` at `x`. Coordinates for
/// which `unstable(x_plus, x_minus)` is true are skipped.
pub fn finite_difference(
    x: &[f64],
    analytic: &[f64],
    h: f64,
    f: impl Fn(&[f64]) -> f64,
    unstable: impl Fn(&[f64], &[f64]) -> bool,
) -> FdReport {
    assert_eq!(x.len(), analytic.len());
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut report = FdReport::default();
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        if unstable(&xp, &xm) {
            report.skipped += 1;
        } else {
            let fd = (f(&xp) - f(&xm)) / (2.0 * h);
            worst = worst.max((fd - analytic[i]).abs());
            scale = scale.max(fd.abs());
            report.compared += 1;
        }
        xp[i] = x[i];
        xm[i] = x[i];
    }
    report.relative_error = if scale > 0.0 { worst / scale } else { worst };
    report
}

/// Closest distance from `p` to triangle `abc`: the interior projection when
/// it lies inside, otherwise the nearest of the three edges.
pub fn point_triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let segment = |s: &Vec3, t: &Vec3| {
        let d = t - s;
        let len2 = d.norm_squared();
        let u = if len2 > 0.0 { ((p - s).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
        (p - (s + d * u)).norm()
    };
    let e0 = b - a;
    let e1 = c - a;
    let w = p - a;
    let (d00, d01, d11) = (e0.dot(&e0), e0.dot(&e1), e1.dot(&e1));
    let (d20, d21) = (w.dot(&e0), w.dot(&e1));
    let det = d00 * d11 - d01 * d01;
    if det > 0.0 {
        let s = (d11 * d20 - d01 * d21) / det;
        let t = (d00 * d21 - d01 * d20) / det;
        if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
            return (p - (a + e0 * s + e1 * t)).norm();
        }
    }
    segment(a, b).min(segment(b, c)).min(segment(c, a))
}

/// Distance from `p` to the surface of `mesh` by exhaustive search.
pub fn brute_force_distance(p: &Vec3, mesh: &Mesh) -> f64 {
    (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            point_triangle_distance(p, &a, &b, &c)
        })
        .fold(f64::INFINITY, f64::min)
}
