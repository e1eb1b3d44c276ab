use serde::Serialize;

use super::{EdgeFaces, Mesh};

/// Counts and topological invariants of a mesh.
///
/// `component_genus[c]` is `None` for components with boundary or non-manifold
/// edges, where the closed-surface genus formula does not apply. `genus` is
/// the sum over components, present only when every component is closed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
    pub euler_characteristic: i64,
    pub genus: Option<i64>,
    pub component_genus: Vec<Option<i64>>,
    pub connected_components: usize,
    pub boundary_edge_count: usize,
    pub non_manifold_edge_count: usize,
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so labels are deterministic
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi as usize] = lo;
        }
    }
}

/// Connected components of faces (faces sharing an edge are connected).
/// Returns per-face component labels `0..count` ordered by first face.
pub fn face_components(mesh: &Mesh, incidence: &EdgeFaces) -> (Vec<usize>, usize) {
    let mut ds = DisjointSet::new(mesh.face_count());
    for fs in &incidence.faces {
        for w in fs.windows(2) {
            ds.union(w[0], w[1]);
        }
    }
    let mut label = vec![usize::MAX; mesh.face_count()];
    let mut root_label = std::collections::HashMap::new();
    for f in 0..mesh.face_count() {
        let r = ds.find(f as u32);
        let next = root_label.len();
        label[f] = *root_label.entry(r).or_insert(next);
    }
    let count = root_label.len();
    (label, count)
}

pub fn topology_report(mesh: &Mesh) -> TopologyReport {
    let incidence = EdgeFaces::new(mesh);
    let v = mesh.vertex_count();
    let e = incidence.edges.len();
    let f = mesh.face_count();
    let chi = v as i64 - e as i64 + f as i64;

    let (labels, cc) = face_components(mesh, &incidence);
    let mut comp_faces = vec![0i64; cc];
    let mut comp_edges = vec![0i64; cc];
    let mut comp_open = vec![false; cc];
    let mut comp_verts = vec![0i64; cc];
    for &l in &labels {
        comp_faces[l] += 1;
    }
    for fs in &incidence.faces {
        let l = labels[fs[0] as usize];
        comp_edges[l] += 1;
        if fs.len() != 2 {
            comp_open[l] = true;
        }
    }
    let mut vertex_label = vec![usize::MAX; v];
    for (fi, face) in mesh.faces().iter().enumerate() {
        for &vi in face {
            let slot = &mut vertex_label[vi as usize];
            if *slot == usize::MAX {
                *slot = labels[fi];
                comp_verts[labels[fi]] += 1;
            } else if *slot != labels[fi] {
                // vertex shared by two edge-disconnected components (pinch point)
                comp_open[labels[fi]] = true;
                comp_open[*slot] = true;
            }
        }
    }

    let component_genus: Vec<Option<i64>> = (0..cc)
        .map(|c| {
            if comp_open[c] {
                return None;
            }
            let chi_c = comp_verts[c] - comp_edges[c] + comp_faces[c];
            if (2 - chi_c) % 2 != 0 {
                None
            } else {
                Some((2 - chi_c) / 2)
            }
        })
        .collect();
    let genus = if cc > 0 && component_genus.iter().all(Option::is_some) {
        Some(component_genus.iter().map(|g| g.unwrap()).sum())
    } else {
        None
    };

    TopologyReport {
        vertex_count: v,
        edge_count: e,
        face_count: f,
        euler_characteristic: chi,
        genus,
        component_genus,
        connected_components: cc,
        boundary_edge_count: incidence.boundary_edge_count(),
        non_manifold_edge_count: incidence.non_manifold_edge_count(),
    }
}
