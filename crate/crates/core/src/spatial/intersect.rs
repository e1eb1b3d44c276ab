use rayon::prelude::*;

use crate::mesh::Mesh;

use super::triangle::triangles_intersect;
use super::{Aabb, SurfaceIndex};

/// Tolerance guarding coplanar and touching triangle configurations.
pub const DEFAULT_GEOMETRIC_EPS: f64 = 1e-10;

/// Intersecting face pairs `(f1, f2)` with `f1 < f2`, excluding pairs that
/// share a vertex. Sorted ascending.
pub fn self_intersections(mesh: &Mesh) -> Vec<(usize, usize)> {
    self_intersections_with_tolerance(mesh, DEFAULT_GEOMETRIC_EPS)
}

pub fn self_intersections_with_tolerance(mesh: &Mesh, eps: f64) -> Vec<(usize, usize)> {
    let Ok(index) = SurfaceIndex::build(mesh) else {
        return Vec::new();
    };
    let faces = mesh.faces();
    let per_face: Vec<Vec<(usize, usize)>> = (0..mesh.face_count())
        .into_par_iter()
        .with_min_len(64)
        .map(|f1| {
            let t1 = mesh.triangle(f1);
            let mut bounds = Aabb::empty();
            for p in &t1 {
                bounds.grow(p);
            }
            index
                .faces_overlapping(&bounds, eps)
                .into_iter()
                .filter(|&f2| f2 > f1)
                .filter(|&f2| !faces[f1].iter().any(|v| faces[f2].contains(v)))
                .filter(|&f2| triangles_intersect(&t1, &mesh.triangle(f2), eps))
                .map(|f2| (f1, f2))
                .collect()
        })
        .collect();
    per_face.into_iter().flatten().collect()
}
