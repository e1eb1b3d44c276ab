use rayon::prelude::*;

use super::LossTerm;
use crate::error::{GeoError, Result};
use crate::mesh::{build_adjacency, uniform_laplacian_apply, AdjacencyInfo, Mesh};
use crate::util::pairwise_sum;
use crate::Vec3;

/// Applies the transpose of `D^-1 A - I`. Isolated vertices have an all-zero
/// row and column.
pub fn uniform_laplacian_transpose_apply(adj: &AdjacencyInfo, field: &[Vec3]) -> Vec<Vec3> {
    assert_eq!(field.len(), adj.vertex_count(), "field length must equal vertex count");
    adj.neighbors
        .iter()
        .enumerate()
        .map(|(j, nbrs)| {
            if nbrs.is_empty() {
                return Vec3::zeros();
            }
            let mut sum = Vec3::zeros();
            for &i in nbrs {
                sum += field[i as usize] / adj.neighbors[i as usize].len() as f64;
            }
            sum - field[j]
        })
        .collect()
}

/// Mean norm of the uniform Laplacian of a displacement field. The operator
/// comes from the previous-stage mesh and is held constant.
pub fn laplacian_displacement(adj: &AdjacencyInfo, disp: &[Vec3]) -> Result<LossTerm> {
    if disp.len() != adj.vertex_count() {
        return Err(GeoError::LengthMismatch {
            expected: adj.vertex_count(),
            actual: disp.len(),
        });
    }
    if disp.is_empty() {
        return Err(GeoError::EmptyInput("displacement field"));
    }
    let v = disp.len() as f64;
    let residual = uniform_laplacian_apply(adj, disp);
    let norms: Vec<f64> = residual.par_iter().with_min_len(1024).map(|r| r.norm()).collect();
    let unit: Vec<Vec3> = residual
        .iter()
        .zip(&norms)
        .map(|(r, &n)| if n > 0.0 { r / (n * v) } else { Vec3::zeros() })
        .collect();
    Ok(LossTerm {
        value: pairwise_sum(&norms) / v,
        gradient: uniform_laplacian_transpose_apply(adj, &unit),
        skipped_degenerate: 0,
    })
}

/// The same penalty applied to absolute vertex coordinates.
pub fn laplacian_absolute(adj: &AdjacencyInfo, vertices: &[Vec3]) -> Result<LossTerm> {
    laplacian_displacement(adj, vertices)
}

/// Mean squared edge length and its vertex gradient.
pub fn edge_loss(mesh: &Mesh) -> Result<LossTerm> {
    edge_loss_with(mesh, &build_adjacency(mesh))
}

pub fn edge_loss_with(mesh: &Mesh, adj: &AdjacencyInfo) -> Result<LossTerm> {
    if adj.edges.is_empty() {
        return Err(GeoError::EmptyInput("mesh has no edges"));
    }
    if adj.vertex_count() != mesh.vertex_count() {
        return Err(GeoError::LengthMismatch {
            expected: mesh.vertex_count(),
            actual: adj.vertex_count(),
        });
    }
    let verts = mesh.vertices();
    let e = adj.edges.len() as f64;
    let lengths: Vec<f64> = adj
        .edges
        .par_iter()
        .with_min_len(1024)
        .map(|&[i, j]| (verts[i as usize] - verts[j as usize]).norm_squared())
        .collect();
    let gradient = adj
        .neighbors
        .par_iter()
        .enumerate()
        .with_min_len(1024)
        .map(|(i, nbrs)| {
            let mut g = Vec3::zeros();
            for &j in nbrs {
                g += verts[i] - verts[j as usize];
            }
            g * (2.0 / e)
        })
        .collect();
    Ok(LossTerm {
        value: pairwise_sum(&lengths) / e,
        gradient,
        skipped_degenerate: 0,
    })
}
