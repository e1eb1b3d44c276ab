use rand::Rng;
use rayon::prelude::*;

use crate::error::{GeoError, Result};
use crate::mesh::{triangle_normal, Mesh};
use crate::util::item_rng;
use crate::Vec3;

/// Where a cloud's normals come from, which also fixes how gradients on the
/// cloud flow back to mesh vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalSource {
    /// Normal of the source face (surface samples).
    Face,
    /// Area-weighted vertex normal; point `i` is vertex `i`.
    Vertex,
}

/// Oriented point set with surface provenance.
///
/// Every point equals `sum_k barycentric[k] * face_vertex[k]` of its source
/// face. `curvature_weight`, when present, carries one weight per point.
#[derive(Debug, Clone)]
pub struct SampledCloud {
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub face_id: Vec<u32>,
    pub barycentric: Vec<[f64; 3]>,
    pub curvature_weight: Option<Vec<f64>>,
    pub normal_source: NormalSource,
}

impl SampledCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps only the points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> SampledCloud {
        SampledCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: indices.iter().map(|&i| self.normals[i]).collect(),
            face_id: indices.iter().map(|&i| self.face_id[i]).collect(),
            barycentric: indices.iter().map(|&i| self.barycentric[i]).collect(),
            curvature_weight: self
                .curvature_weight
                .as_ref()
                .map(|k| indices.iter().map(|&i| k[i]).collect()),
            normal_source: self.normal_source,
        }
    }

    pub fn with_curvature_weight(mut self, kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() != self.points.len() {
            return Err(GeoError::LengthMismatch {
                expected: self.points.len(),
                actual: kappa.len(),
            });
        }
        self.curvature_weight = Some(kappa);
        Ok(self)
    }
}

/// Sample provenance (face and barycentric coordinates) that can be
/// re-evaluated on any mesh sharing the original face list. Holding the
/// provenance fixed while vertices move makes the sampled points a smooth
/// function of the vertex positions.
#[derive(Debug, Clone)]
pub struct SurfaceSamples {
    pub face_id: Vec<u32>,
    pub barycentric: Vec<[f64; 3]>,
}

impl SurfaceSamples {
    /// Draws `n` samples: faces with probability proportional to area,
    /// barycentric coordinates uniform on the simplex. Point `i` uses its own
    /// counter-based stream, so output is independent of thread count.
    pub fn draw(mesh: &Mesh, n: usize, seed: u64) -> Result<Self> {
        let areas = mesh.face_areas();
        let mut cumulative = Vec::with_capacity(areas.len());
        let mut acc = 0.0;
        for a in &areas {
            acc += a;
            cumulative.push(acc);
        }
        if !(acc > 0.0) {
            return Err(GeoError::Degenerate("mesh has zero total area".into()));
        }
        let total = acc;
        let draws: Vec<(u32, [f64; 3])> = (0..n)
            .into_par_iter()
            .with_min_len(512)
            .map(|i| {
                let mut rng = item_rng(seed, i as u64);
                let r0: f64 = rng.random::<f64>() * total;
                let face = cumulative
                    .partition_point(|&c| c <= r0)
                    .min(cumulative.len() - 1);
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let s = r1.sqrt();
                (face as u32, [1.0 - s, s * (1.0 - r2), s * r2])
            })
            .collect();
        let (face_id, barycentric) = draws.into_iter().unzip();
        Ok(SurfaceSamples {
            face_id,
            barycentric,
        })
    }

    pub fn len(&self) -> usize {
        self.face_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.face_id.is_empty()
    }

    /// Positions, face normals and interpolated scalars on `mesh`.
    pub fn realize(&self, mesh: &Mesh, vertex_scalars: Option<&[f64]>) -> Result<SampledCloud> {
        if let Some(s) = vertex_scalars {
            if s.len() != mesh.vertex_count() {
                return Err(GeoError::LengthMismatch {
                    expected: mesh.vertex_count(),
                    actual: s.len(),
                });
            }
        }
        if let Some(&bad) = self.face_id.iter().find(|&&f| f as usize >= mesh.face_count()) {
            return Err(GeoError::InvalidParameter(format!(
                "sample references face {bad} but mesh has {} faces",
                mesh.face_count()
            )));
        }
        let face_normals: Vec<Vec3> = (0..mesh.face_count())
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                triangle_normal(&a, &b, &c).unwrap_or_else(Vec3::zeros)
            })
            .collect();
        let points = self
            .face_id
            .par_iter()
            .zip(&self.barycentric)
            .with_min_len(1024)
            .map(|(&f, b)| {
                let [p0, p1, p2] = mesh.triangle(f as usize);
                p0 * b[0] + p1 * b[1] + p2 * b[2]
            })
            .collect();
        let normals = self.face_id.iter().map(|&f| face_normals[f as usize]).collect();
        let curvature_weight = vertex_scalars.map(|s| {
            self.face_id
                .iter()
                .zip(&self.barycentric)
                .map(|(&f, b)| {
                    let [i, j, k] = mesh.faces()[f as usize].map(|v| s[v as usize]);
                    if i == j && j == k {
                        i
                    } else {
                        i * b[0] + j * b[1] + k * b[2]
                    }
                })
                .collect()
        });
        Ok(SampledCloud {
            points,
            normals,
            face_id: self.face_id.clone(),
            barycentric: self.barycentric.clone(),
            curvature_weight,
            normal_source: NormalSource::Face,
        })
    }
}

/// Area-weighted random surface samples with barycentric provenance.
pub fn sample_surface(
    mesh: &Mesh,
    n: usize,
    seed: u64,
    vertex_scalars: Option<&[f64]>,
) -> Result<SampledCloud> {
    SurfaceSamples::draw(mesh, n, seed)?.realize(mesh, vertex_scalars)
}

/// The mesh vertices as a cloud with vertex normals and one-hot barycentric
/// coordinates. Vertices not used by any face get `face_id = u32::MAX`.
pub fn resample_as_vertices(mesh: &Mesh, vertex_scalars: Option<&[f64]>) -> Result<SampledCloud> {
    if let Some(s) = vertex_scalars {
        if s.len() != mesh.vertex_count() {
            return Err(GeoError::LengthMismatch {
                expected: mesh.vertex_count(),
                actual: s.len(),
            });
        }
    }
    let mut face_id = vec![u32::MAX; mesh.vertex_count()];
    let mut barycentric = vec![[1.0, 0.0, 0.0]; mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        for (corner, &v) in f.iter().enumerate() {
            if face_id[v as usize] == u32::MAX {
                face_id[v as usize] = fi as u32;
                let mut b = [0.0; 3];
                b[corner] = 1.0;
                barycentric[v as usize] = b;
            }
        }
    }
    Ok(SampledCloud {
        points: mesh.vertices().to_vec(),
        normals: mesh.normals().vertex,
        face_id,
        barycentric,
        curvature_weight: vertex_scalars.map(<[f64]>::to_vec),
        normal_source: NormalSource::Vertex,
    })
}
