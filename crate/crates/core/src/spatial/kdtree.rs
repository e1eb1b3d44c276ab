use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{GeoError, Result};
use crate::Vec3;

use super::Aabb;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: u32, end: u32 },
    Split { left: u32, right: u32 },
}

/// Balanced KD-tree over a 3D point set.
///
/// Nodes split at the median along the widest axis of their bounding box.
/// Queries order candidates by `(squared distance, point index)`, so results
/// equal an exhaustive scan exactly, ties included.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Vec3>,
    perm: Vec<u32>,
    nodes: Vec<Node>,
    bounds: Vec<Aabb>,
}

/// A query result: index into the indexed point set and Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    index: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PointIndex {
    pub fn build(points: &[Vec3]) -> Result<Self> {
        if points.is_empty() {
            return Err(GeoError::EmptyInput("point index needs at least one point"));
        }
        if points.len() > u32::MAX as usize {
            return Err(GeoError::InvalidParameter("too many points".into()));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeoError::InvalidParameter("point set contains non-finite coordinates".into()));
        }
        let mut index = PointIndex {
            points: points.to_vec(),
            perm: (0..points.len() as u32).collect(),
            nodes: Vec::new(),
            bounds: Vec::new(),
        };
        index.build_node(0, points.len());
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> u32 {
        let mut bounds = Aabb::empty();
        for &i in &self.perm[start..end] {
            bounds.grow(&self.points[i as usize]);
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
        let axis = bounds.widest_axis();
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a as usize][axis]
                .total_cmp(&points[b as usize][axis])
                .then(a.cmp(&b))
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id as usize] = Node::Split { left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Nearest indexed point; ties go to the lower index.
    pub fn nearest(&self, query: &Vec3) -> Neighbor {
        let mut best = Candidate {
            d2: f64::INFINITY,
            index: u32::MAX,
        };
        self.nearest_rec(0, query, &mut best);
        Neighbor {
            index: best.index as usize,
            distance: best.d2.sqrt(),
        }
    }

    /// Nearest point index and squared distance.
    pub fn nearest_squared(&self, query: &Vec3) -> (usize, f64) {
        let mut best = Candidate {
            d2: f64::INFINITY,
            index: u32::MAX,
        };
        self.nearest_rec(0, query, &mut best);
        (best.index as usize, best.d2)
    }

    fn nearest_rec(&self, node: u32, q: &Vec3, best: &mut Candidate) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &i in &self.perm[start as usize..end as usize] {
                    let c = Candidate {
                        d2: (self.points[i as usize] - q).norm_squared(),
                        index: i,
                    };
                    if c < *best {
                        *best = c;
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
                if df <= best.d2 {
                    self.nearest_rec(first, q, best);
                }
                if ds <= best.d2 {
                    self.nearest_rec(second, q, best);
                }
            }
        }
    }

    /// The `k` nearest points in ascending `(distance, index)` order.
    pub fn knn(&self, query: &Vec3, k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(GeoError::InvalidParameter("k must be positive".into()));
        }
        if k > self.points.len() {
            return Err(GeoError::InvalidParameter(format!(
                "k = {k} exceeds the {} indexed points",
                self.points.len()
            )));
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        Ok(out
            .into_iter()
            .map(|c| Neighbor {
                index: c.index as usize,
                distance: c.d2.sqrt(),
            })
            .collect())
    }

    fn knn_rec(&self, node: u32, q: &Vec3, k: usize, heap: &mut BinaryHeap<Candidate>) {
        let worst = |heap: &BinaryHeap<Candidate>| {
            if heap.len() < k {
                f64::INFINITY
            } else {
                heap.peek().map_or(f64::INFINITY, |c| c.d2)
            }
        };
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &i in &self.perm[start as usize..end as usize] {
                    let c = Candidate {
                        d2: (self.points[i as usize] - q).norm_squared(),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
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
                if df <= worst(heap) {
                    self.knn_rec(first, q, k, heap);
                }
                if ds <= worst(heap) {
                    self.knn_rec(second, q, k, heap);
                }
            }
        }
    }

    /// Nearest neighbor (index, squared distance) for every query, in query order.
    pub fn nearest_batch(&self, queries: &[Vec3]) -> Vec<(usize, f64)> {
        queries
            .par_iter()
            .with_min_len(256)
            .map(|q| self.nearest_squared(q))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_always_nearest() {
        let idx = PointIndex::build(&[Vec3::new(1.0, 2.0, 3.0)]).unwrap();
        let n = idx.nearest(&Vec3::new(-5.0, 0.0, 9.0));
        assert_eq!(n.index, 0);
        assert!(idx.knn(&Vec3::zeros(), 2).is_err());
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(PointIndex::build(&[]), Err(GeoError::EmptyInput(_))));
    }

    #[test]
    fn duplicate_points_give_zero_distance_lowest_index() {
        let p = Vec3::new(0.5, 0.5, 0.5);
        let pts = vec![Vec3::zeros(), p, Vec3::x(), p, p];
        let idx = PointIndex::build(&pts).unwrap();
        let n = idx.nearest(&p);
        assert_eq!((n.index, n.distance), (1, 0.0));
        let k = idx.knn(&p, 3).unwrap();
        assert_eq!(k.iter().map(|n| n.index).collect::<Vec<_>>(), vec![1, 3, 4]);
    }

    #[test]
    fn knn_all_points_sorted() {
        let pts: Vec<Vec3> = (0..50).map(|i| Vec3::new(i as f64 * 0.1, 0.0, 0.0)).collect();
        let idx = PointIndex::build(&pts).unwrap();
        let all = idx.knn(&Vec3::new(-1.0, 0.0, 0.0), 50).unwrap();
        assert_eq!(all.iter().map(|n| n.index).collect::<Vec<_>>(), (0..50).collect::<Vec<_>>());
        let first = idx.knn(&pts[7], 1).unwrap();
        assert_eq!((first[0].index, first[0].distance), (7, 0.0));
    }

    #[test]
    fn grid_five_nn_matches_exhaustive_with_ties() {
        let mut pts = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    pts.push(Vec3::new(i as f64, j as f64, k as f64));
                }
            }
        }
        let idx = PointIndex::build(&pts).unwrap();
        for q in [Vec3::new(2.0, 2.0, 2.0), Vec3::new(0.5, 0.5, 0.5), Vec3::new(5.0, 0.0, 2.5)] {
            let mut brute: Vec<(f64, usize)> =
                pts.iter().enumerate().map(|(i, p)| ((p - q).norm_squared(), i)).collect();
            brute.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let got: Vec<usize> = idx.knn(&q, 5).unwrap().iter().map(|n| n.index).collect();
            let want: Vec<usize> = brute[..5].iter().map(|b| b.1).collect();
            assert_eq!(got, want);
        }
    }
}
