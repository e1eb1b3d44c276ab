use crate::error::{GeoError, Result};
use crate::mesh::{subdivide_midpoint, Mesh};
use crate::Vec3;

pub const MAX_ICOSPHERE_SUBDIVISIONS: u32 = 8;

/// Regular icosahedron inscribed in the unit sphere, outward CCW faces.
pub fn icosahedron() -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let vertices = raw
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    Mesh::new(vertices, faces).expect("static icosahedron is valid")
}

/// Icosahedron subdivided `subdivisions` times (re-projecting onto the unit
/// sphere after each level) and then mapped onto the ellipsoid with the given
/// semi-axes. Vertex count is `10 * 4^n + 2`.
pub fn make_icosphere(subdivisions: u32, radii: [f64; 3]) -> Result<Mesh> {
    if subdivisions > MAX_ICOSPHERE_SUBDIVISIONS {
        return Err(GeoError::InvalidParameter(format!(
            "icosphere subdivisions {subdivisions} exceed the cap of {MAX_ICOSPHERE_SUBDIVISIONS}"
        )));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(GeoError::InvalidParameter(format!("radii must be positive, got {radii:?}")));
    }
    let mut mesh = icosahedron();
    for _ in 0..subdivisions {
        mesh = subdivide_midpoint(&mesh, 1)?;
        mesh = mesh.map_vertices(|v| v.normalize())?;
    }
    mesh.map_vertices(|v| Vec3::new(v.x * radii[0], v.y * radii[1], v.z * radii[2]))
}
