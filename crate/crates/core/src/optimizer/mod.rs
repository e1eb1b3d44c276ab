//! Multi-stage template deformation by gradient descent on displacement
//! fields, and the mesh graph convolution operator with its vector-Jacobian
//! product.

mod config;
mod fit;
mod graph_conv;
mod stepper;

pub use config::{DeformConfig, PredSampling, ResamplePolicy};
pub use fit::{fit, write_trace_csv, FitResult, FitStatus, TraceRow};
pub use graph_conv::{graph_conv_forward, graph_conv_vjp, GraphConvGradients, GraphConvParams};
pub use stepper::{StepRule, Stepper};

use crate::error::{GeoError, Result};
use crate::mesh::Mesh;
use crate::Vec3;

/// Per-vertex displacement vectors; always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    vectors: Vec<Vec3>,
}

impl DisplacementField {
    pub fn new(vectors: Vec<Vec3>) -> Result<Self> {
        if vectors.iter().any(|v| !v.iter().all(|x| x.is_finite())) {
            return Err(GeoError::Numerical("displacement field has non-finite entries".into()));
        }
        Ok(DisplacementField { vectors })
    }

    pub fn zeros(len: usize) -> Self {
        DisplacementField {
            vectors: vec![Vec3::zeros(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn as_slice(&self) -> &[Vec3] {
        &self.vectors
    }

    pub fn into_inner(self) -> Vec<Vec3> {
        self.vectors
    }
}

impl std::ops::Neg for &DisplacementField {
    type Output = DisplacementField;

    fn neg(self) -> DisplacementField {
        DisplacementField {
            vectors: self.vectors.iter().map(|v| -v).collect(),
        }
    }
}

/// Moves every vertex by its displacement; faces are unchanged.
pub fn apply_displacement(mesh: &Mesh, disp: &DisplacementField) -> Result<Mesh> {
    if disp.len() != mesh.vertex_count() {
        return Err(GeoError::LengthMismatch {
            expected: mesh.vertex_count(),
            actual: disp.len(),
        });
    }
    let verts = mesh
        .vertices()
        .iter()
        .zip(disp.as_slice())
        .map(|(v, d)| v + d)
        .collect();
    mesh.with_vertices(verts)
}
