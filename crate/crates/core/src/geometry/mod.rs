//! Discrete curvature, curvature weights and differentiable surface sampling.

mod curvature;
mod sampling;

pub use curvature::{
    curvature_weight, mean_curvature, write_curvature_csv, CurvatureField, COT_CLAMP,
    DEFAULT_KAPPA_MAX, MIN_MIXED_AREA,
};
pub use sampling::{
    resample_as_vertices, sample_surface, NormalSource, SampledCloud, SurfaceSamples,
};
