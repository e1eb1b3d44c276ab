use crate::Vec3;

use super::Mesh;

/// Vertex adjacency derived from the face list.
///
/// `edges` holds each undirected edge once as `[lo, hi]`, sorted
/// lexicographically. `neighbors[i]` is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyInfo {
    pub edges: Vec<[u32; 2]>,
    pub neighbors: Vec<Vec<u32>>,
}

impl AdjacencyInfo {
    #[inline]
    pub fn degree(&self, vertex: usize) -> usize {
        self.neighbors[vertex].len()
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.neighbors.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

pub fn build_adjacency(mesh: &Mesh) -> AdjacencyInfo {
    let incidence = EdgeFaces::new(mesh);
    let mut neighbors = vec![Vec::new(); mesh.vertex_count()];
    for &[a, b] in &incidence.edges {
        neighbors[a as usize].push(b);
        neighbors[b as usize].push(a);
    }
    for n in &mut neighbors {
        n.sort_unstable();
    }
    AdjacencyInfo {
        edges: incidence.edges,
        neighbors,
    }
}

/// Edge to incident-face incidence. `faces[k]` lists the faces containing
/// `edges[k]` in ascending order.
#[derive(Debug, Clone)]
pub struct EdgeFaces {
    pub edges: Vec<[u32; 2]>,
    pub faces: Vec<Vec<u32>>,
}

impl EdgeFaces {
    pub fn new(mesh: &Mesh) -> Self {
        let mut keys: Vec<(u32, u32, u32)> = Vec::with_capacity(mesh.face_count() * 3);
        for (fi, f) in mesh.faces().iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                keys.push((a.min(b), a.max(b), fi as u32));
            }
        }
        keys.sort_unstable();
        let mut edges: Vec<[u32; 2]> = Vec::new();
        let mut faces: Vec<Vec<u32>> = Vec::new();
        for (a, b, f) in keys {
            match edges.last() {
                Some(&[la, lb]) if la == a && lb == b => faces.last_mut().unwrap().push(f),
                _ => {
                    edges.push([a, b]);
                    faces.push(vec![f]);
                }
            }
        }
        EdgeFaces { edges, faces }
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.faces.iter().filter(|f| f.len() == 1).count()
    }

    pub fn non_manifold_edge_count(&self) -> usize {
        self.faces.iter().filter(|f| f.len() > 2).count()
    }

    /// Pairs of faces sharing an edge. Edges with more than two incident faces
    /// contribute every pair.
    pub fn adjacent_face_pairs(&self) -> Vec<(u32, u32)> {
        let mut pairs = Vec::new();
        for fs in &self.faces {
            for i in 0..fs.len() {
                for j in i + 1..fs.len() {
                    pairs.push((fs[i], fs[j]));
                }
            }
        }
        pairs
    }
}

/// Applies the uniform Laplacian `D^-1 A - I`: each output is the mean of the
/// field over the vertex's neighbors minus the field at the vertex. Isolated
/// vertices map to zero.
pub fn uniform_laplacian_apply(adj: &AdjacencyInfo, field: &[Vec3]) -> Vec<Vec3> {
    assert_eq!(field.len(), adj.vertex_count(), "field length must equal vertex count");
    adj.neighbors
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            if nbrs.is_empty() {
                return Vec3::zeros();
            }
            let mut sum = Vec3::zeros();
            for &j in nbrs {
                sum += field[j as usize];
            }
            sum / nbrs.len() as f64 - field[i]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::*;
    use crate::template::make_icosphere;
    use std::collections::BTreeSet;

    #[test]
    fn single_triangle_edges() {
        let adj = build_adjacency(&single_triangle());
        assert_eq!(adj.edges, vec![[0, 1], [0, 2], [1, 2]]);
        assert!((0..3).all(|i| adj.degree(i) == 2));
    }

    #[test]
    fn icosahedron_has_30_edges_degree_5() {
        let ico = make_icosphere(0, [1.0; 3]).unwrap();
        let adj = build_adjacency(&ico);
        assert_eq!(adj.edge_count(), 30);
        assert!((0..12).all(|i| adj.degree(i) == 5));
    }

    #[test]
    fn matches_brute_force_edge_set_and_is_symmetric() {
        let m = make_icosphere(2, [1.0, 2.0, 0.5]).unwrap();
        let adj = build_adjacency(&m);
        let mut brute = BTreeSet::new();
        for f in m.faces() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                brute.insert([a.min(b), a.max(b)]);
            }
        }
        assert_eq!(adj.edges, brute.into_iter().collect::<Vec<_>>());
        let deg_sum: usize = (0..m.vertex_count()).map(|i| adj.degree(i)).sum();
        assert_eq!(deg_sum, 2 * adj.edge_count());
        for (i, nbrs) in adj.neighbors.iter().enumerate() {
            for &j in nbrs {
                assert!(adj.neighbors[j as usize].binary_search(&(i as u32)).is_ok());
            }
        }
    }

    #[test]
    fn isolated_vertex_has_no_neighbors_and_zero_laplacian() {
        let m = Mesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let adj = build_adjacency(&m);
        assert!(adj.neighbors[3].is_empty());
        let out = uniform_laplacian_apply(&adj, m.vertices());
        assert_eq!(out[3], Vec3::zeros());
    }

    #[test]
    fn laplacian_annihilates_constants() {
        let m = make_icosphere(1, [1.0; 3]).unwrap();
        let adj = build_adjacency(&m);
        let c = Vec3::new(0.3, -1.2, 7.0);
        let out = uniform_laplacian_apply(&adj, &vec![c; m.vertex_count()]);
        assert!(out.iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn laplacian_on_polygon_ring_points_to_centroid() {
        // Hexagonal fan: center 0, ring 1..=6. Ring vertices have neighbors
        // {0, prev, next}; their Laplacian points toward the center.
        let mut v = vec![Vec3::zeros()];
        for k in 0..6 {
            let t = k as f64 * std::f64::consts::TAU / 6.0;
            v.push(Vec3::new(t.cos(), t.sin(), 0.0));
        }
        let faces = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        let m = Mesh::new(v, faces).unwrap();
        let adj = build_adjacency(&m);
        let out = uniform_laplacian_apply(&adj, m.vertices());
        assert!(out[0].norm() < 1e-15);
        for i in 1..7 {
            let p = m.vertices()[i];
            let dir = out[i].normalize();
            assert!((dir + p.normalize()).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_matches_dense_matrix() {
        let m = make_icosphere(1, [1.3, 0.7, 1.0]).unwrap();
        let adj = build_adjacency(&m);
        let n = m.vertex_count();
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for f in m.faces() {
            for k in 0..3 {
                let (a, b) = (f[k] as usize, f[(k + 1) % 3] as usize);
                dense[(a, b)] = 1.0;
                dense[(b, a)] = 1.0;
            }
        }
        for i in 0..n {
            let d: f64 = dense.row(i).sum();
            for j in 0..n {
                dense[(i, j)] /= d;
            }
            dense[(i, i)] -= 1.0;
        }
        let field: Vec<Vec3> = (0..n)
            .map(|i| Vec3::new((i as f64).sin(), (2.0 * i as f64).cos(), i as f64 * 0.01))
            .collect();
        let out = uniform_laplacian_apply(&adj, &field);
        for c in 0..3 {
            let x = nalgebra::DVector::from_iterator(n, field.iter().map(|v| v[c]));
            let y = &dense * x;
            for i in 0..n {
                assert!((y[i] - out[i][c]).abs() < 1e-12);
            }
        }
    }
}
