//! Slicing closed higher-genus meshes into topological disks with a
//! tree-cotree cut graph.

use std::collections::VecDeque;

use thiserror::Error;

use crate::mesh::{Mesh, MeshError};

#[derive(Debug, Error)]
pub enum CutError {
    #[error("mesh has a boundary; only closed meshes are cut")]
    HasBoundary,
    #[error("sphere-topology mesh (genus 0) is not supported")]
    Sphere,
    #[error("mesh is not connected")]
    Disconnected,
    #[error("cut mesh is invalid: {0}")]
    Rebuild(#[from] MeshError),
}

/// A cut-open copy of a closed mesh together with the correspondence back to
/// the original vertices and edges.
#[derive(Debug, Clone)]
pub struct CutMesh {
    pub mesh: Mesh,
    /// Original vertex of every vertex in the cut mesh.
    pub vertex_origin: Vec<usize>,
    /// Original edge of every edge in the cut mesh.
    pub edge_origin: Vec<usize>,
    /// Original edges along which the surface was opened.
    pub cut_edges: Vec<usize>,
}

impl CutMesh {
    /// Copies per-vertex data from the original mesh onto the cut mesh.
    pub fn lift_vertex_data<T: Copy>(&self, data: &[T]) -> Vec<T> {
        self.vertex_origin.iter().map(|&v| data[v]).collect()
    }

    /// Copies per-edge data from the original mesh onto the cut mesh.
    pub fn lift_edge_data<T: Copy>(&self, data: &[T]) -> Vec<T> {
        self.edge_origin.iter().map(|&e| data[e]).collect()
    }
}

/// Cuts a closed mesh of genus >= 1 into a disk.
///
/// A BFS spanning tree of the primal graph is grown from vertex 0 and a BFS
/// spanning tree of the dual graph (avoiding primal tree edges) from face 0.
/// Every edge not crossed by the dual tree is cut, after pruning dangling tree
/// branches, which leaves the primal tree paths closing the `2g` generator
/// edges into loops.
pub fn cut_to_disk(mesh: &Mesh) -> Result<CutMesh, CutError> {
    let topo = mesh.topology();
    if !topo.is_closed() {
        return Err(CutError::HasBoundary);
    }
    if topo.genus < 1 {
        return Err(CutError::Sphere);
    }
    let nv = mesh.vertex_count();
    let nf = mesh.face_count();
    let ne = mesh.edge_count();

    let mut in_tree = vec![false; ne];
    let mut seen = vec![false; nv];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &e in mesh.vertex_edges(v) {
            let [a, b] = mesh.edges()[e];
            let w = if a == v { b } else { a };
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(CutError::Disconnected);
    }

    let mut in_cotree = vec![false; ne];
    let mut face_seen = vec![false; nf];
    let mut queue = VecDeque::from([0usize]);
    face_seen[0] = true;
    while let Some(f) = queue.pop_front() {
        for e in mesh.face_edges(f) {
            if in_tree[e] {
                continue;
            }
            let [Some(a), Some(b)] = mesh.edge_faces(e) else { continue };
            let g = if a == f { b } else { a };
            if !face_seen[g] {
                face_seen[g] = true;
                in_cotree[e] = true;
                queue.push_back(g);
            }
        }
    }
    if face_seen.iter().any(|s| !s) {
        return Err(CutError::Disconnected);
    }

    let mut cut: Vec<bool> = in_cotree.iter().map(|c| !c).collect();
    let mut degree = vec![0usize; nv];
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        if cut[e] {
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    let mut leaves: VecDeque<usize> = (0..nv).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = leaves.pop_front() {
        if degree[v] != 1 {
            continue;
        }
        let Some(&e) = mesh.vertex_edges(v).iter().find(|&&e| cut[e]) else { continue };
        cut[e] = false;
        let [a, b] = mesh.edges()[e];
        let w = if a == v { b } else { a };
        degree[v] -= 1;
        degree[w] -= 1;
        if degree[w] == 1 {
            leaves.push_back(w);
        }
    }

    // Corners glued across uncut edges belong to the same output vertex.
    let faces = mesh.faces();
    let mut uf = UnionFind::new(3 * nf);
    for (e, &is_cut) in cut.iter().enumerate() {
        if is_cut {
            continue;
        }
        let [Some(f0), Some(f1)] = mesh.edge_faces(e) else { continue };
        for v in mesh.edges()[e] {
            let c0 = corner_of(faces[f0], v);
            let c1 = corner_of(faces[f1], v);
            uf.union(3 * f0 + c0, 3 * f1 + c1);
        }
    }

    let mut class_vertex = vec![usize::MAX; 3 * nf];
    let mut claimed = vec![false; nv];
    let mut vertex_origin: Vec<usize> = (0..nv).collect();
    let mut new_faces = Vec::with_capacity(nf);
    for (f, face) in faces.iter().enumerate() {
        let mut nface = [0; 3];
        for c in 0..3 {
            let root = uf.find(3 * f + c);
            if class_vertex[root] == usize::MAX {
                let v = face[c];
                class_vertex[root] = if claimed[v] {
                    vertex_origin.push(v);
                    vertex_origin.len() - 1
                } else {
                    claimed[v] = true;
                    v
                };
            }
            nface[c] = class_vertex[root];
        }
        new_faces.push(nface);
    }
    let positions: Vec<[f64; 3]> = vertex_origin.iter().map(|&v| mesh.positions()[v]).collect();
    let cut_mesh = Mesh::new(positions, new_faces)?;
    let edge_origin = cut_mesh
        .edges()
        .iter()
        .map(|&[a, b]| {
            mesh.edge_between(vertex_origin[a], vertex_origin[b]).expect("cut edges come from original edges")
        })
        .collect();
    let cut_edges = (0..ne).filter(|&e| cut[e]).collect();
    Ok(CutMesh { mesh: cut_mesh, vertex_origin, edge_origin, cut_edges })
}

fn corner_of(face: [usize; 3], v: usize) -> usize {
    face.iter().position(|&x| x == v).expect("vertex belongs to face")
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // lower root wins so class roots do not depend on union order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
