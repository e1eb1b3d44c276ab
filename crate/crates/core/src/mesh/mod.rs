//! Indexed triangle meshes and the combinatorial machinery built on them.

mod adjacency;
pub mod io;
mod subdivide;
mod topology;

pub use adjacency::{build_adjacency, uniform_laplacian_apply, AdjacencyInfo, EdgeFaces};
pub use io::{load_mesh, load_mesh_file, save_mesh, save_mesh_file, MeshFormat};
pub use subdivide::subdivide_midpoint;
pub use topology::{topology_report, TopologyReport};

use crate::error::{GeoError, Result};
use crate::Vec3;

/// Indexed triangle surface. Faces are counter-clockwise vertex triples.
///
/// Construction validates that every index is in range, that faces have three
/// distinct vertices and that all coordinates are finite. Edges are never
/// stored; they are derived from the faces on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len();
        if n > u32::MAX as usize {
            return Err(GeoError::InvalidMesh(format!("{n} vertices exceed u32 index range")));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(GeoError::InvalidMesh(format!("vertex {i} has non-finite coordinates")));
            }
        }
        for (fi, f) in faces.iter().enumerate() {
            for &idx in f {
                if idx as usize >= n {
                    return Err(GeoError::IndexOutOfRange {
                        face: fi,
                        index: idx as usize,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(GeoError::InvalidMesh(format!(
                    "face {fi} has repeated vertex indices {f:?}"
                )));
            }
        }
        Ok(Mesh { vertices, faces })
    }

    pub fn empty() -> Self {
        Mesh {
            vertices: Vec::new(),
            faces: Vec::new(),
        }
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    #[inline]
    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Same connectivity, new positions.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(GeoError::LengthMismatch {
                expected: self.vertices.len(),
                actual: vertices.len(),
            });
        }
        if let Some(i) = vertices
            .iter()
            .position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(GeoError::Numerical(format!("vertex {i} became non-finite")));
        }
        Ok(Mesh {
            vertices,
            faces: self.faces.clone(),
        })
    }

    #[inline]
    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn face_areas(&self) -> Vec<f64> {
        (0..self.faces.len()).map(|f| self.face_area(f)).collect()
    }

    pub fn total_area(&self) -> f64 {
        crate::util::pairwise_sum(&self.face_areas())
    }

    /// Axis-aligned bounds `(min, max)`, or `None` for an empty mesh.
    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (lo.inf(v), hi.sup(v))
        }))
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        self.bounding_box().map(|(lo, hi)| (hi - lo).norm()).unwrap_or(0.0)
    }

    /// Applies `f` to every vertex position.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Self> {
        self.with_vertices(self.vertices.iter().map(f).collect())
    }

    /// Disjoint union of two meshes; faces of `other` are re-indexed.
    pub fn merged(&self, other: &Mesh) -> Result<Self> {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| f.map(|i| i + offset)));
        Mesh::new(vertices, faces)
    }

    /// Unnormalized face normal `(b - a) x (c - a)`; its length is twice the area.
    #[inline]
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a))
    }

    pub fn normals(&self) -> Normals {
        vertex_and_face_normals(self)
    }
}

/// Unit face normals, area-weighted unit vertex normals and the faces whose
/// normal could not be defined.
#[derive(Debug, Clone)]
pub struct Normals {
    pub face: Vec<Vec3>,
    pub vertex: Vec<Vec3>,
    pub degenerate_faces: Vec<usize>,
}

/// Relative threshold below which a face is considered to have zero area.
const DEGENERATE_REL: f64 = 1e-14;

/// Returns the unit normal of a triangle, or `None` if it has (numerically) zero area.
#[inline]
pub fn triangle_normal(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<Vec3> {
    let e1 = b - a;
    let e2 = c - a;
    let cross = e1.cross(&e2);
    let len = cross.norm();
    if len == 0.0 || len <= DEGENERATE_REL * e1.norm() * e2.norm() {
        None
    } else {
        Some(cross / len)
    }
}

pub fn vertex_and_face_normals(mesh: &Mesh) -> Normals {
    let mut face = Vec::with_capacity(mesh.face_count());
    let mut degenerate_faces = Vec::new();
    let mut accum = vec![Vec3::zeros(); mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let [a, b, c] = mesh.triangle(fi);
        match triangle_normal(&a, &b, &c) {
            Some(n) => {
                face.push(n);
                let cross = (b - a).cross(&(c - a));
                for &v in f {
                    accum[v as usize] += cross;
                }
            }
            None => {
                face.push(Vec3::zeros());
                degenerate_faces.push(fi);
            }
        }
    }
    let vertex = accum
        .into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                Vec3::zeros()
            }
        })
        .collect();
    Normals {
        face,
        vertex,
        degenerate_faces,
    }
}
