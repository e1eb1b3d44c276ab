//! Mesh loss terms with analytic gradients.
//!
//! Cloud losses (Chamfer, inter-mesh normal consistency) return gradients with
//! respect to the predicted cloud; [`backprop_cloud`] carries them to mesh
//! vertices. Mesh losses return vertex gradients directly, and the Laplacian
//! losses return gradients with respect to their input field.

mod backprop;
mod chamfer;
mod normal;
mod regularizers;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometry::SampledCloud;
use crate::mesh::{build_adjacency, AdjacencyInfo, EdgeFaces, Mesh};
use crate::spatial::PointIndex;
use crate::Vec3;

pub use backprop::{
    accumulate_face_normal_gradient, accumulate_vertex_normal_gradient, backprop_cloud, cross_vjp,
    normalize_vjp,
};
pub use chamfer::{chamfer_classic, chamfer_curvature, chamfer_with, Correspondence};
pub use normal::{
    inter_normal_consistency, inter_normal_consistency_with, intra_normal_consistency,
    intra_normal_consistency_with,
};
pub use regularizers::{
    edge_loss, edge_loss_with, laplacian_absolute, laplacian_displacement,
    uniform_laplacian_transpose_apply,
};

/// A loss value with its gradient and the number of degenerate contributions
/// that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTerm {
    pub value: f64,
    pub gradient: Vec<Vec3>,
    pub skipped_degenerate: usize,
}

/// Weights of the five mesh loss terms for one surface class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassWeights {
    pub chamfer: f64,
    pub inter_nc: f64,
    pub laplacian: f64,
    pub intra_nc: f64,
    pub edge: f64,
}

impl ClassWeights {
    /// White-matter surface weights used for cortical reconstruction.
    pub const WHITE_MATTER: ClassWeights = ClassWeights {
        chamfer: 1.0,
        inter_nc: 0.01,
        laplacian: 0.1,
        intra_nc: 0.001,
        edge: 5.0,
    };

    /// Pial surface weights used for cortical reconstruction.
    pub const PIAL: ClassWeights = ClassWeights {
        chamfer: 1.0,
        inter_nc: 0.0125,
        laplacian: 0.25,
        intra_nc: 0.00225,
        edge: 5.0,
    };

    pub const ZERO: ClassWeights = ClassWeights {
        chamfer: 0.0,
        inter_nc: 0.0,
        laplacian: 0.0,
        intra_nc: 0.0,
        edge: 0.0,
    };

    pub fn as_array(&self) -> [f64; 5] {
        [self.chamfer, self.inter_nc, self.laplacian, self.intra_nc, self.edge]
    }

    /// `sum_k weight_k * term_k`, accumulated in term order.
    pub fn weighted(&self, terms: &TermValues) -> f64 {
        self.as_array()
            .iter()
            .zip(terms.as_array())
            .fold(0.0, |acc, (w, t)| acc + w * t)
    }

    fn validate(&self, class: &str) -> Result<()> {
        if self.as_array().iter().all(|w| w.is_finite() && *w >= 0.0) {
            Ok(())
        } else {
            Err(GeoError::InvalidParameter(format!(
                "weights of class '{class}' must be finite and nonnegative"
            )))
        }
    }
}

/// Per-class loss weights, serialized as
/// `{"classes": {"<name>": {"chamfer": .., "inter_nc": .., "laplacian": .., "intra_nc": .., "edge": ..}}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub classes: BTreeMap<String, ClassWeights>,
}

impl LossWeights {
    pub fn new(classes: BTreeMap<String, ClassWeights>) -> Result<Self> {
        let w = LossWeights { classes };
        w.validate()?;
        Ok(w)
    }

    pub fn single(class: &str, weights: ClassWeights) -> Result<Self> {
        Self::new(BTreeMap::from([(class.to_string(), weights)]))
    }

    /// The `wm` and `pial` classes with their cortical reconstruction weights.
    pub fn cortical() -> Self {
        LossWeights {
            classes: BTreeMap::from([
                ("pial".to_string(), ClassWeights::PIAL),
                ("wm".to_string(), ClassWeights::WHITE_MATTER),
            ]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(GeoError::InvalidParameter("no weight classes defined".into()));
        }
        for (name, w) in &self.classes {
            w.validate(name)?;
        }
        Ok(())
    }

    pub fn get(&self, class: &str) -> Result<&ClassWeights> {
        self.classes
            .get(class)
            .ok_or_else(|| GeoError::MissingWeightClass(class.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let w: LossWeights = serde_json::from_str(text)?;
        w.validate()?;
        Ok(w)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weights serialize")
    }
}

/// Unweighted values of the five terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TermValues {
    pub chamfer: f64,
    pub inter_nc: f64,
    pub laplacian: f64,
    pub intra_nc: f64,
    pub edge: f64,
}

impl TermValues {
    pub fn as_array(&self) -> [f64; 5] {
        [self.chamfer, self.inter_nc, self.laplacian, self.intra_nc, self.edge]
    }
}

impl std::ops::AddAssign for TermValues {
    fn add_assign(&mut self, o: TermValues) {
        self.chamfer += o.chamfer;
        self.inter_nc += o.inter_nc;
        self.laplacian += o.laplacian;
        self.intra_nc += o.intra_nc;
        self.edge += o.edge;
    }
}

/// Term values and weighted total for one (stage, class) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownEntry {
    pub stage: usize,
    pub class: String,
    pub terms: TermValues,
    pub weighted_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub entries: Vec<BreakdownEntry>,
    pub total: f64,
    pub skipped_degenerate: usize,
}

impl LossBreakdown {
    /// Unweighted terms summed over all entries.
    pub fn summed_terms(&self) -> TermValues {
        let mut t = TermValues::default();
        for e in &self.entries {
            t += e.terms;
        }
        t
    }
}

/// Chamfer flavor used by [`total_mesh_loss`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChamferMode {
    /// Ground-truth curvature weights.
    #[default]
    Curvature,
    /// Unit weights.
    Classic,
}

/// Field the Laplacian penalty is applied to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianMode {
    #[default]
    Displacement,
    Absolute,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossOptions {
    #[serde(default)]
    pub chamfer: ChamferMode,
    #[serde(default)]
    pub laplacian: LaplacianMode,
}

/// Connectivity derived once from a template and shared by every stage.
#[derive(Debug, Clone)]
pub struct MeshStructure {
    pub adjacency: AdjacencyInfo,
    pub face_pairs: Vec<(u32, u32)>,
}

impl MeshStructure {
    pub fn new(mesh: &Mesh) -> Self {
        MeshStructure {
            adjacency: build_adjacency(mesh),
            face_pairs: EdgeFaces::new(mesh).adjacent_face_pairs(),
        }
    }
}

/// Everything needed to evaluate the loss of one class at one stage.
///
/// `mesh` is the stage output, `displacement` the field that produced it from
/// the previous stage, and `pred_cloud` must have been sampled from `mesh`.
pub struct StageClassInput<'a> {
    pub stage: usize,
    pub class: &'a str,
    pub mesh: &'a Mesh,
    pub structure: &'a MeshStructure,
    pub displacement: &'a [Vec3],
    pub pred_cloud: &'a SampledCloud,
    pub gt_cloud: &'a SampledCloud,
    /// Optional prebuilt index over `gt_cloud.points`.
    pub gt_index: Option<&'a PointIndex>,
}

/// Gradients of the grand total for one (stage, class) input.
#[derive(Debug, Clone, PartialEq)]
pub struct StageClassGradient {
    /// With respect to the stage mesh vertices.
    pub vertices: Vec<Vec3>,
    /// With respect to the displacement field, through the Laplacian term only.
    pub displacement: Vec<Vec3>,
}

impl StageClassGradient {
    /// Full derivative with respect to the displacement, given that the stage
    /// mesh is the previous mesh plus the displacement.
    pub fn total_displacement(&self) -> Vec<Vec3> {
        self.vertices
            .iter()
            .zip(&self.displacement)
            .map(|(a, b)| a + b)
            .collect()
    }
}

fn add_scaled(out: &mut [Vec3], g: &[Vec3], w: f64) {
    if w != 0.0 {
        for (o, gi) in out.iter_mut().zip(g) {
            *o += gi * w;
        }
    }
}

/// Evaluates the weighted mesh loss over all (stage, class) inputs.
pub fn total_mesh_loss(
    inputs: &[StageClassInput<'_>],
    weights: &LossWeights,
    options: LossOptions,
) -> Result<(LossBreakdown, Vec<StageClassGradient>)> {
    let mut entries = Vec::with_capacity(inputs.len());
    let mut grads = Vec::with_capacity(inputs.len());
    let mut skipped = 0;
    for input in inputs {
        let w = weights.get(input.class)?;
        let mesh = input.mesh;
        let nv = mesh.vertex_count();
        if input.displacement.len() != nv {
            return Err(GeoError::LengthMismatch {
                expected: nv,
                actual: input.displacement.len(),
            });
        }
        if input.structure.adjacency.vertex_count() != nv {
            return Err(GeoError::LengthMismatch {
                expected: nv,
                actual: input.structure.adjacency.vertex_count(),
            });
        }

        let corr = match input.gt_index {
            Some(idx) => Correspondence::with_gt_index(input.pred_cloud, idx)?,
            None => Correspondence::compute(input.pred_cloud, input.gt_cloud)?,
        };
        let kappa = match options.chamfer {
            ChamferMode::Curvature => Some(chamfer::gt_kappa(input.gt_cloud)?),
            ChamferMode::Classic => None,
        };
        let chamfer = chamfer_with(input.pred_cloud, input.gt_cloud, &corr, kappa);
        let inter = inter_normal_consistency_with(input.pred_cloud, input.gt_cloud, &corr)?;
        let (lap, lap_on_disp) = match options.laplacian {
            LaplacianMode::Displacement => (
                laplacian_displacement(&input.structure.adjacency, input.displacement)?,
                true,
            ),
            LaplacianMode::Absolute => (
                laplacian_absolute(&input.structure.adjacency, mesh.vertices())?,
                false,
            ),
        };
        let intra = intra_normal_consistency_with(mesh, &input.structure.face_pairs);
        let edge = edge_loss_with(mesh, &input.structure.adjacency)?;
        skipped += inter.skipped_degenerate + intra.skipped_degenerate;

        let point_grad: Vec<Vec3> = chamfer.gradient.iter().map(|g| g * w.chamfer).collect();
        let normal_grad: Vec<Vec3> = inter.gradient.iter().map(|g| g * w.inter_nc).collect();
        let mut vertices = backprop_cloud(mesh, input.pred_cloud, Some(&point_grad), Some(&normal_grad))?;
        add_scaled(&mut vertices, &intra.gradient, w.intra_nc);
        add_scaled(&mut vertices, &edge.gradient, w.edge);
        let mut displacement = vec![Vec3::zeros(); nv];
        if lap_on_disp {
            add_scaled(&mut displacement, &lap.gradient, w.laplacian);
        } else {
            add_scaled(&mut vertices, &lap.gradient, w.laplacian);
        }

        let terms = TermValues {
            chamfer: chamfer.value,
            inter_nc: inter.value,
            laplacian: lap.value,
            intra_nc: intra.value,
            edge: edge.value,
        };
        entries.push(BreakdownEntry {
            stage: input.stage,
            class: input.class.to_string(),
            weighted_total: w.weighted(&terms),
            terms,
        });
        grads.push(StageClassGradient {
            vertices,
            displacement,
        });
    }
    let total = entries.iter().fold(0.0, |acc, e| acc + e.weighted_total);
    if !total.is_finite() {
        return Err(GeoError::Numerical(format!("mesh loss is not finite ({total})")));
    }
    Ok((
        LossBreakdown {
            entries,
            total,
            skipped_degenerate: skipped,
        },
        grads,
    ))
}
