//! Geometry processing for template-deformation cortical surface reconstruction.
//!
//! The crate bundles everything needed to deform a genus-0 template mesh onto a
//! target surface with explicit, analytically differentiated mesh losses and to
//! evaluate the result:
//!
//! - [`mesh`]: indexed triangle meshes, file I/O, adjacency, topology, subdivision
//! - [`spatial`]: KD-tree, face BVH, point/triangle distance, self-intersections
//! - [`geometry`]: discrete mean curvature, curvature weights, surface sampling
//! - [`losses`]: curvature-weighted Chamfer, normal consistency, Laplacian and edge
//!   losses, each with its gradient
//! - [`optimizer`]: multi-stage displacement-field fitting and a graph convolution
//!   operator with its vector-Jacobian product
//! - [`metrics`]: ASSD, Hausdorff distance, ICP alignment, cortical thickness
//! - [`template`]: Laplacian/HC smoothing and icosphere/ellipsoid templates
//!
//! All randomized operations take an explicit seed and produce bit-identical
//! results regardless of the size of the rayon thread pool.

pub mod error;
pub mod geometry;
pub mod losses;
pub mod mesh;
pub mod metrics;
pub mod optimizer;
pub mod spatial;
pub mod template;
pub mod util;

pub use error::{GeoError, Result};
pub use geometry::{CurvatureField, SampledCloud};
pub use losses::{LossBreakdown, LossWeights};
pub use mesh::{AdjacencyInfo, Mesh, MeshFormat, TopologyReport};
pub use metrics::{MetricsReport, RigidTransform, ThicknessMap};
pub use optimizer::{DeformConfig, DisplacementField, FitResult, GraphConvParams};
pub use spatial::{PointIndex, SurfaceIndex};
pub use template::SmoothConfig;

/// 3D position or direction in world units.
pub type Vec3 = nalgebra::Vector3<f64>;
