use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::mesh::{build_adjacency, EdgeFaces, Mesh};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothMethod {
    /// Plain umbrella-operator smoothing; shrinks closed surfaces.
    Uniform,
    /// Vollmer's HC smoothing, which pushes vertices back toward their
    /// previous positions to counter shrinkage.
    Hc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothConfig {
    pub method: SmoothMethod,
    /// Step factor in (0, 1].
    pub lambda: f64,
    /// Stop once the largest per-vertex move falls below this. `None` means
    /// 1e-6 times the bounding-box diagonal.
    pub eps: Option<f64>,
    pub max_iters: usize,
    /// HC weight of the original positions.
    #[serde(default)]
    pub alpha: f64,
    /// HC weight of the vertex's own correction versus its neighbors'.
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    0.5
}

impl Default for SmoothConfig {
    fn default() -> Self {
        SmoothConfig {
            method: SmoothMethod::Hc,
            lambda: 1.0,
            eps: None,
            max_iters: 10_000,
            alpha: 0.0,
            beta: 0.5,
        }
    }
}

impl SmoothConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(GeoError::InvalidParameter(format!(
                "smoothing lambda must be in (0, 1], got {}",
                self.lambda
            )));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0) {
                return Err(GeoError::InvalidParameter(format!("eps must be positive, got {eps}")));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.beta) {
            return Err(GeoError::InvalidParameter("alpha and beta must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Iterated Laplacian smoothing until the surface stops changing.
///
/// Updates are Jacobi-style (all vertices read the previous iterate), so the
/// result does not depend on vertex order. Boundary vertices stay fixed. An
/// update is only applied when its largest vertex move reaches `eps`; the
/// returned count is the number of applied updates.
pub fn laplacian_smooth(mesh: &Mesh, config: &SmoothConfig) -> Result<(Mesh, usize)> {
    config.validate()?;
    let incidence = EdgeFaces::new(mesh);
    let non_manifold = incidence.non_manifold_edge_count();
    if non_manifold > 0 {
        return Err(GeoError::NonManifold(format!(
            "{non_manifold} edges have more than two incident faces"
        )));
    }
    let mut fixed = vec![false; mesh.vertex_count()];
    for (e, fs) in incidence.edges.iter().zip(&incidence.faces) {
        if fs.len() == 1 {
            fixed[e[0] as usize] = true;
            fixed[e[1] as usize] = true;
        }
    }
    let adj = build_adjacency(mesh);
    let eps = config
        .eps
        .unwrap_or_else(|| 1e-6 * mesh.bounding_box_diagonal().max(f64::MIN_POSITIVE));

    let original = mesh.vertices().to_vec();
    let mut current = original.clone();
    let mut iterations = 0;
    while iterations < config.max_iters {
        let mut next: Vec<Vec3> = current
            .iter()
            .enumerate()
            .map(|(i, q)| {
                let nbrs = &adj.neighbors[i];
                if fixed[i] || nbrs.is_empty() {
                    return *q;
                }
                let mean = nbrs.iter().map(|&j| current[j as usize]).sum::<Vec3>()
                    / nbrs.len() as f64;
                q + config.lambda * (mean - q)
            })
            .collect();

        if config.method == SmoothMethod::Hc {
            let b: Vec<Vec3> = (0..next.len())
                .map(|i| next[i] - (config.alpha * original[i] + (1.0 - config.alpha) * current[i]))
                .collect();
            for i in 0..next.len() {
                let nbrs = &adj.neighbors[i];
                if fixed[i] || nbrs.is_empty() {
                    continue;
                }
                let mean_b = nbrs.iter().map(|&j| b[j as usize]).sum::<Vec3>() / nbrs.len() as f64;
                next[i] -= config.beta * b[i] + (1.0 - config.beta) * mean_b;
            }
        }

        let max_move = next
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if !max_move.is_finite() {
            return Err(GeoError::Numerical("smoothing diverged".into()));
        }
        if max_move < eps {
            break;
        }
        current = next;
        iterations += 1;
    }
    Ok((mesh.with_vertices(current)?, iterations))
}
