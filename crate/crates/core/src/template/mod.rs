//! Template construction: parametric icospheres/ellipsoids and Laplacian
//! smoothing of an input surface until it stops changing.

mod icosphere;
mod smooth;

pub use icosphere::{icosahedron, make_icosphere, MAX_ICOSPHERE_SUBDIVISIONS};
pub use smooth::{laplacian_smooth, SmoothConfig, SmoothMethod};
