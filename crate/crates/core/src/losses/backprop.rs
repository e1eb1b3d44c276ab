//! Chain rule from point/normal gradients on a cloud back to mesh vertices.

use crate::error::{GeoError, Result};
use crate::geometry::{NormalSource, SampledCloud};
use crate::mesh::{triangle_normal, Mesh};
use crate::Vec3;

/// Gradient through `n = m / |m|`: `(I - n n^T) g / |m|`.
#[inline]
pub fn normalize_vjp(m: &Vec3, g: &Vec3) -> Vec3 {
    let len = m.norm();
    if len == 0.0 {
        return Vec3::zeros();
    }
    let n = m / len;
    (g - n * n.dot(g)) / len
}

/// Gradient through `N = (b - a) x (c - a)` with respect to `a`, `b`, `c`.
#[inline]
pub fn cross_vjp(a: &Vec3, b: &Vec3, c: &Vec3, g: &Vec3) -> [Vec3; 3] {
    [(b - c).cross(g), (c - a).cross(g), (a - b).cross(g)]
}

fn is_regular(mesh: &Mesh, face: usize) -> bool {
    let [a, b, c] = mesh.triangle(face);
    triangle_normal(&a, &b, &c).is_some()
}

/// Adds the vertex gradient induced by gradients on unit face normals.
/// Degenerate faces have a constant zero normal and pass nothing on.
pub fn accumulate_face_normal_gradient(mesh: &Mesh, face_grad: &[Vec3], out: &mut [Vec3]) {
    for (fi, g) in face_grad.iter().enumerate() {
        if *g == Vec3::zeros() || !is_regular(mesh, fi) {
            continue;
        }
        let [a, b, c] = mesh.triangle(fi);
        let cross = (b - a).cross(&(c - a));
        let gn = normalize_vjp(&cross, g);
        let d = cross_vjp(&a, &b, &c, &gn);
        for (k, &v) in mesh.faces()[fi].iter().enumerate() {
            out[v as usize] += d[k];
        }
    }
}

/// Adds the vertex gradient induced by gradients on area-weighted unit vertex
/// normals.
pub fn accumulate_vertex_normal_gradient(mesh: &Mesh, vertex_grad: &[Vec3], out: &mut [Vec3]) {
    let regular: Vec<bool> = (0..mesh.face_count()).map(|f| is_regular(mesh, f)).collect();
    let mut sums = vec![Vec3::zeros(); mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        if regular[fi] {
            let cross = mesh.face_cross(fi);
            for &v in f {
                sums[v as usize] += cross;
            }
        }
    }
    let sum_grad: Vec<Vec3> = sums
        .iter()
        .zip(vertex_grad)
        .map(|(m, g)| normalize_vjp(m, g))
        .collect();
    for (fi, f) in mesh.faces().iter().enumerate() {
        if !regular[fi] {
            continue;
        }
        let g = sum_grad[f[0] as usize] + sum_grad[f[1] as usize] + sum_grad[f[2] as usize];
        let [a, b, c] = mesh.triangle(fi);
        let d = cross_vjp(&a, &b, &c, &g);
        for (k, &v) in f.iter().enumerate() {
            out[v as usize] += d[k];
        }
    }
}

/// Maps gradients with respect to a cloud's points and normals to gradients
/// with respect to the vertices of the mesh the cloud was drawn from.
pub fn backprop_cloud(
    mesh: &Mesh,
    cloud: &SampledCloud,
    point_grad: Option<&[Vec3]>,
    normal_grad: Option<&[Vec3]>,
) -> Result<Vec<Vec3>> {
    for g in [point_grad, normal_grad].into_iter().flatten() {
        if g.len() != cloud.len() {
            return Err(GeoError::LengthMismatch {
                expected: cloud.len(),
                actual: g.len(),
            });
        }
    }
    let mut out = vec![Vec3::zeros(); mesh.vertex_count()];
    match cloud.normal_source {
        NormalSource::Face => {
            if let Some(&bad) = cloud.face_id.iter().find(|&&f| f as usize >= mesh.face_count()) {
                return Err(GeoError::InvalidParameter(format!(
                    "cloud references face {bad} but mesh has {} faces",
                    mesh.face_count()
                )));
            }
            if let Some(gp) = point_grad {
                for ((f, b), g) in cloud.face_id.iter().zip(&cloud.barycentric).zip(gp) {
                    let face = mesh.faces()[*f as usize];
                    for k in 0..3 {
                        out[face[k] as usize] += g * b[k];
                    }
                }
            }
            if let Some(gn) = normal_grad {
                let mut face_grad = vec![Vec3::zeros(); mesh.face_count()];
                for (f, g) in cloud.face_id.iter().zip(gn) {
                    face_grad[*f as usize] += g;
                }
                accumulate_face_normal_gradient(mesh, &face_grad, &mut out);
            }
        }
        NormalSource::Vertex => {
            if cloud.len() != mesh.vertex_count() {
                return Err(GeoError::LengthMismatch {
                    expected: mesh.vertex_count(),
                    actual: cloud.len(),
                });
            }
            if let Some(gp) = point_grad {
                for (o, g) in out.iter_mut().zip(gp) {
                    *o += g;
                }
            }
            if let Some(gn) = normal_grad {
                accumulate_vertex_normal_gradient(mesh, gn, &mut out);
            }
        }
    }
    Ok(out)
}
