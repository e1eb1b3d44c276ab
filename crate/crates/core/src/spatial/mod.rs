//! Spatial acceleration structures and exact primitive queries.

mod bvh;
mod intersect;
mod kdtree;
pub mod triangle;

pub use bvh::{SurfaceHit, SurfaceIndex};
pub use intersect::{self_intersections, self_intersections_with_tolerance, DEFAULT_GEOMETRIC_EPS};
pub use kdtree::{Neighbor, PointIndex};

use crate::Vec3;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    #[inline]
    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    #[inline]
    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    /// Squared distance from `p` to the box (zero inside).
    #[inline]
    pub fn distance_squared(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d2 += v * v;
        }
        d2
    }

    #[inline]
    pub fn overlaps(&self, other: &Aabb, margin: f64) -> bool {
        (0..3).all(|k| {
            self.min[k] <= other.max[k] + margin && other.min[k] <= self.max[k] + margin
        })
    }

    pub fn widest_axis(&self) -> usize {
        let ext = self.max - self.min;
        if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        }
    }
}
