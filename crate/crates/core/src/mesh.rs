//! Indexed triangle meshes with edge connectivity, boundary classification
//! and topology queries.
//!
//! Faces are stored counterclockwise. Edges are derived from the faces and
//! numbered in order of first appearance, so identical inputs always yield
//! identical edge numbering. Corner `c` of face `f` is opposite the edge
//! `face_edges[f][c]`, which joins corners `c + 1` and `c + 2` (mod 3).

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("face {face} has a vertex index out of range (vertex count {vertex_count})")]
    IndexOutOfRange { face: usize, vertex_count: usize },
    #[error("face {face} is degenerate: repeated vertex index")]
    RepeatedIndex { face: usize },
    #[error("face {face} is degenerate: zero-length edge ({a}, {b})")]
    ZeroLengthEdge { face: usize, a: usize, b: usize },
    #[error("non-manifold edge ({a}, {b}): shared by more than two faces")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("inconsistent orientation across edge ({a}, {b})")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("non-manifold vertex {vertex}: boundary does not form simple loops")]
    NonManifoldVertex { vertex: usize },
    #[error("mesh has no faces")]
    Empty,
}

/// A triangle mesh with derived edge table and boundary flags.
#[derive(Debug, Clone)]
pub struct Mesh {
    positions: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    face_edges: Vec<[usize; 3]>,
    edge_faces: Vec<[Option<usize>; 2]>,
    edge_lookup: HashMap<(usize, usize), usize>,
    original_lengths: Vec<f64>,
    boundary_vertex: Vec<bool>,
    vertex_edges: Vec<Vec<usize>>,
}

/// Vertex/edge/face counts together with Euler characteristic and genus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TopologyReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    /// Genus of the (possibly bordered) orientable surface:
    /// `(2 - chi - boundary_loops) / 2`.
    pub genus: i64,
    pub boundary_loops: usize,
}

impl TopologyReport {
    pub fn is_closed(&self) -> bool {
        self.boundary_loops == 0
    }

    pub fn is_disk(&self) -> bool {
        self.euler_characteristic == 1 && self.boundary_loops == 1
    }
}

impl Mesh {
    /// Builds a mesh from positions and counterclockwise faces.
    ///
    /// Rejects out-of-range or repeated indices, zero-length edges, edges with
    /// more than two incident faces, inconsistent orientation and boundaries
    /// that are not disjoint simple loops.
    pub fn new(positions: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = positions.len();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_faces: Vec<[Option<usize>; 2]> = Vec::new();
        // Directed half-edge owner, used to check orientation.
        let mut edge_dir: Vec<[usize; 2]> = Vec::new();
        let mut edge_lookup = HashMap::new();
        let mut face_edges = Vec::with_capacity(faces.len());

        for (f, face) in faces.iter().enumerate() {
            if face.iter().any(|&v| v >= n) {
                return Err(MeshError::IndexOutOfRange { face: f, vertex_count: n });
            }
            if face[0] == face[1] || face[1] == face[2] || face[2] == face[0] {
                return Err(MeshError::RepeatedIndex { face: f });
            }
            let mut fe = [0; 3];
            for c in 0..3 {
                let a = face[(c + 1) % 3];
                let b = face[(c + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = match edge_lookup.get(&key) {
                    Some(&e) => {
                        let slot: &mut [Option<usize>; 2] = &mut edge_faces[e];
                        if slot[1].is_some() {
                            return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1 });
                        }
                        if edge_dir[e] == [a, b] {
                            return Err(MeshError::InconsistentOrientation { a: key.0, b: key.1 });
                        }
                        slot[1] = Some(f);
                        e
                    }
                    None => {
                        let e = edges.len();
                        edges.push([key.0, key.1]);
                        edge_faces.push([Some(f), None]);
                        edge_dir.push([a, b]);
                        edge_lookup.insert(key, e);
                        e
                    }
                };
                fe[c] = e;
            }
            face_edges.push(fe);
        }

        let mut original_lengths = Vec::with_capacity(edges.len());
        for (e, &[a, b]) in edges.iter().enumerate() {
            let d = distance(&positions[a], &positions[b]);
            if !(d > 0.0) {
                let f = edge_faces[e][0].unwrap_or(0);
                return Err(MeshError::ZeroLengthEdge { face: f, a, b });
            }
            original_lengths.push(d);
        }

        let mut vertex_edges = vec![Vec::new(); n];
        for (e, &[a, b]) in edges.iter().enumerate() {
            vertex_edges[a].push(e);
            vertex_edges[b].push(e);
        }

        // Each boundary vertex must have exactly one outgoing and one incoming
        // boundary half-edge, otherwise the boundary is not a set of simple loops.
        let mut out_deg = vec![0u32; n];
        let mut in_deg = vec![0u32; n];
        let mut boundary_vertex = vec![false; n];
        for (e, ef) in edge_faces.iter().enumerate() {
            if ef[1].is_none() {
                let [a, b] = edge_dir[e];
                out_deg[a] += 1;
                in_deg[b] += 1;
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }
        for v in 0..n {
            if boundary_vertex[v] && (out_deg[v] != 1 || in_deg[v] != 1) {
                return Err(MeshError::NonManifoldVertex { vertex: v });
            }
        }

        Ok(Self {
            positions,
            faces,
            edges,
            face_edges,
            edge_faces,
            edge_lookup,
            original_lengths,
            boundary_vertex,
            vertex_edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Edge endpoints, lower index first.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Edges of face `f`; entry `c` is the edge opposite corner `c`.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    /// Faces incident to edge `e` (second slot empty on boundary edges).
    pub fn edge_faces(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_faces[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Edges incident to vertex `v`, in increasing edge order.
    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn original_lengths(&self) -> &[f64] {
        &self.original_lengths
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_faces[e][1].is_none()
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_vertex.iter().any(|&b| b)
    }

    /// Faces sharing an edge with `f`, listed in corner order.
    pub fn face_neighbors(&self, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.face_edges[f].into_iter().filter_map(move |e| {
            let [a, b] = self.edge_faces[e];
            match (a, b) {
                (Some(a), Some(b)) => Some(if a == f { b } else { a }),
                _ => None,
            }
        })
    }

    /// Boundary loops, each listed in the traversal order induced by the
    /// face orientation (interior on the left). Loops start at their lowest
    /// vertex and are sorted by that vertex.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut next = vec![usize::MAX; n];
        for (f, face) in self.faces.iter().enumerate() {
            for c in 0..3 {
                let e = self.face_edges[f][c];
                if self.edge_faces[e][1].is_none() {
                    next[face[(c + 1) % 3]] = face[(c + 2) % 3];
                }
            }
        }
        let mut seen = vec![false; n];
        let mut loops = Vec::new();
        for start in 0..n {
            if next[start] == usize::MAX || seen[start] {
                continue;
            }
            let mut lp = Vec::new();
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                lp.push(v);
                v = next[v];
            }
            loops.push(lp);
        }
        loops
    }

    pub fn topology(&self) -> TopologyReport {
        let v = self.vertex_count();
        let e = self.edge_count();
        let f = self.face_count();
        let chi = v as i64 - e as i64 + f as i64;
        let loops = self.boundary_loops().len();
        TopologyReport {
            vertices: v,
            edges: e,
            faces: f,
            euler_characteristic: chi,
            genus: (2 - chi - loops as i64) / 2,
            boundary_loops: loops,
        }
    }

    /// Sum of face areas computed from `original_lengths` (Heron's formula).
    pub fn total_area(&self) -> f64 {
        (0..self.face_count())
            .map(|f| {
                let [e0, e1, e2] = self.face_edges[f];
                let l = &self.original_lengths;
                heron_area(l[e0], l[e1], l[e2])
            })
            .sum()
    }
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Triangle area from side lengths, using the numerically stable form of
/// Heron's formula. Returns 0 for degenerate or invalid sides.
pub fn heron_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p > 0.0 {
        0.25 * p.sqrt()
    } else {
        0.0
    }
}
