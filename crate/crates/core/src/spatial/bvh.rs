use rayon::prelude::*;

use crate::error::{GeoError, Result};
use crate::mesh::Mesh;
use crate::Vec3;

use super::triangle::closest_point_on_triangle;
use super::Aabb;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: u32, end: u32 },
    Split { left: u32, right: u32 },
}

/// Bounding-volume hierarchy over the faces of a mesh.
#[derive(Debug, Clone)]
pub struct SurfaceIndex {
    triangles: Vec<[Vec3; 3]>,
    order: Vec<u32>,
    nodes: Vec<Node>,
    bounds: Vec<Aabb>,
}

/// Closest point on the indexed surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    pub point: Vec3,
    pub face: usize,
    pub distance: f64,
}

impl SurfaceIndex {
    pub fn build(mesh: &Mesh) -> Result<Self> {
        if mesh.face_count() == 0 {
            return Err(GeoError::EmptyInput("surface index needs at least one face"));
        }
        let triangles: Vec<[Vec3; 3]> = (0..mesh.face_count()).map(|f| mesh.triangle(f)).collect();
        let centroids: Vec<Vec3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut index = SurfaceIndex {
            order: (0..triangles.len() as u32).collect(),
            triangles,
            nodes: Vec::new(),
            bounds: Vec::new(),
        };
        index.build_node(&centroids, 0, centroids.len());
        Ok(index)
    }

    fn build_node(&mut self, centroids: &[Vec3], start: usize, end: usize) -> u32 {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &f in &self.order[start..end] {
            for p in &self.triangles[f as usize] {
                bounds.grow(p);
            }
            cbounds.grow(&centroids[f as usize]);
        }
        let id = self.nodes.len() as u32;
        self.bounds.push(bounds);
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: start as u32,
                end: end as u32,
            });
            return id;
        }
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let axis = cbounds.widest_axis();
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let left = self.build_node(centroids, start, mid);
        let right = self.build_node(centroids, mid, end);
        self.nodes[id as usize] = Node::Split { left, right };
        id
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, face: usize) -> &[Vec3; 3] {
        &self.triangles[face]
    }

    /// Exact closest point over all faces. Among equidistant faces the lowest
    /// face index wins.
    pub fn closest_point(&self, query: &Vec3) -> SurfaceHit {
        let mut best = (f64::INFINITY, u32::MAX, Vec3::zeros());
        self.closest_rec(0, query, &mut best);
        SurfaceHit {
            point: best.2,
            face: best.1 as usize,
            distance: best.0.sqrt(),
        }
    }

    fn closest_rec(&self, node: u32, q: &Vec3, best: &mut (f64, u32, Vec3)) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &f in &self.order[start as usize..end as usize] {
                    let [a, b, c] = &self.triangles[f as usize];
                    let p = closest_point_on_triangle(q, a, b, c);
                    let d2 = (p - q).norm_squared();
                    if d2 < best.0 || (d2 == best.0 && f < best.1) {
                        *best = (d2, f, p);
                    }
                }
            }
            Node::Split { left, right } => {
                let dl = self.bounds[left as usize].distance_squared(q);
                let dr = self.bounds[right as usize].distance_squared(q);
                let (first, df, second, ds) = if dl <= dr {
                    (left, dl, right, dr)
                } else {
                    (right, dr, left, dl)
                };
                if df <= best.0 {
                    self.closest_rec(first, q, best);
                }
                if ds <= best.0 {
                    self.closest_rec(second, q, best);
                }
            }
        }
    }

    /// Closest-point queries for many points, in query order.
    pub fn closest_points(&self, queries: &[Vec3]) -> Vec<SurfaceHit> {
        queries
            .par_iter()
            .with_min_len(128)
            .map(|q| self.closest_point(q))
            .collect()
    }

    /// Faces whose bounding boxes overlap `bounds` expanded by `margin`, ascending.
    pub fn faces_overlapping(&self, bounds: &Aabb, margin: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            if !self.bounds[n as usize].overlaps(bounds, margin) {
                continue;
            }
            match self.nodes[n as usize] {
                Node::Leaf { start, end } => {
                    for &f in &self.order[start as usize..end as usize] {
                        let mut fb = Aabb::empty();
                        for p in &self.triangles[f as usize] {
                            fb.grow(p);
                        }
                        if fb.overlaps(bounds, margin) {
                            out.push(f as usize);
                        }
                    }
                }
                Node::Split { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        out.sort_unstable();
        out
    }
}
