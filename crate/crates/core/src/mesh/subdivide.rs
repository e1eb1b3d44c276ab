use crate::error::{GeoError, Result};

use super::{EdgeFaces, Mesh};

/// Midpoint (1-to-4) subdivision applied `levels` times.
///
/// Each level inserts one vertex at the midpoint of every edge, so
/// `V' = V + E` and `F' = 4F`. Positions of the original vertices are kept,
/// which leaves the surface geometry unchanged.
pub fn subdivide_midpoint(mesh: &Mesh, levels: u32) -> Result<Mesh> {
    if levels == 0 {
        return Err(GeoError::InvalidParameter("subdivision levels must be positive".into()));
    }
    let mut current = mesh.clone();
    for _ in 0..levels {
        current = subdivide_once(&current)?;
    }
    Ok(current)
}

fn subdivide_once(mesh: &Mesh) -> Result<Mesh> {
    let incidence = EdgeFaces::new(mesh);
    let v = mesh.vertex_count();
    let new_count = v as u64 + incidence.edges.len() as u64;
    let face_count = mesh.face_count() as u64 * 4;
    if new_count > u32::MAX as u64 || face_count > u32::MAX as u64 {
        return Err(GeoError::InvalidParameter(format!(
            "subdivision would need {new_count} vertices, beyond the u32 index range"
        )));
    }

    let mut vertices = mesh.vertices().to_vec();
    vertices.reserve(incidence.edges.len());
    for &[a, b] in &incidence.edges {
        vertices.push((mesh.vertices()[a as usize] + mesh.vertices()[b as usize]) * 0.5);
    }
    let midpoint = |a: u32, b: u32| -> u32 {
        let key = [a.min(b), a.max(b)];
        let k = incidence
            .edges
            .binary_search(&key)
            .expect("edge derived from this face list");
        (v + k) as u32
    };

    let mut faces = Vec::with_capacity(mesh.face_count() * 4);
    for &[a, b, c] in mesh.faces() {
        let ab = midpoint(a, b);
        let bc = midpoint(b, c);
        let ca = midpoint(c, a);
        faces.push([a, ab, ca]);
        faces.push([b, bc, ab]);
        faces.push([c, ca, bc]);
        faces.push([ab, bc, ca]);
    }
    Mesh::new(vertices, faces)
}
