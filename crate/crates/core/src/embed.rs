//! Planar layout of a flat metric by breadth-first face traversal.
//!
//! The root is face 0: its first corner goes to the origin, its second on the
//! positive x axis and its third above the axis. Every other face is reached
//! across an already placed edge, and its free vertex is the counterclockwise
//! intersection of two circles. Placed vertices never move; when a face
//! closes a cycle of the traversal, the distance between the stored position
//! and the one its metric predicts is recorded as the inconsistency.

use std::collections::VecDeque;
use std::io::{self, Write};

use thiserror::Error;

use crate::mesh::{Mesh, TopologyReport};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("only topological disks can be embedded (got {0:?})")]
    NotDisk(TopologyReport),
    #[error("expected {expected} edge lengths, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("face {face}: circles around the placed edge do not intersect")]
    NoIntersection { face: usize },
}

/// The two circles are disjoint, nested or tangent, or their centers coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("circles do not intersect")]
pub struct NoIntersection;

/// Point at distance `l_ik` from `p_i` and `l_jk` from `p_j` such that
/// `(p_i, p_j, p_k)` turns counterclockwise.
pub fn third_vertex(p_i: [f64; 2], p_j: [f64; 2], l_ik: f64, l_jk: f64) -> Result<[f64; 2], NoIntersection> {
    let d = [p_j[0] - p_i[0], p_j[1] - p_i[1]];
    let l_ij = d[0].hypot(d[1]);
    if !(l_ij > 0.0) {
        return Err(NoIntersection);
    }
    let x = (l_ij * l_ij + l_ik * l_ik - l_jk * l_jk) / (2.0 * l_ij);
    let h2 = l_ik * l_ik - x * x;
    if !(h2 > 0.0) {
        return Err(NoIntersection);
    }
    let y = h2.sqrt();
    let (ex, ey) = (d[0] / l_ij, d[1] / l_ij);
    Ok([p_i[0] + x * ex - y * ey, p_i[1] + x * ey + y * ex])
}

/// Twice the signed area of the planar triangle `(a, b, c)`.
pub fn doubled_signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Planar coordinates of every vertex of a disk mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameterization {
    pub coords: Vec<[f64; 2]>,
    pub embedded: Vec<bool>,
    /// For meshes cut open from a closed surface: the original vertex of
    /// every vertex, so seam copies can be matched up.
    pub seam: Option<Vec<usize>>,
    /// Largest distance between a stored vertex position and the position
    /// implied by a later face that reaches it again.
    pub max_inconsistency: f64,
}

impl Parameterization {
    pub fn all_embedded(&self) -> bool {
        self.embedded.iter().all(|&e| e)
    }

    /// Coordinates translated so the bounding box starts at the origin and
    /// uniformly scaled into the unit square, with the scale factor applied.
    pub fn normalized(&self) -> (Vec<[f64; 2]>, f64) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.coords {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let scale = if extent > 0.0 { 1.0 / extent } else { 1.0 };
        let uv = self.coords.iter().map(|p| [(p[0] - lo[0]) * scale, (p[1] - lo[1]) * scale]).collect();
        (uv, scale)
    }

    /// Largest relative deviation `| |p_i - p_j| - l_ij | / l_ij` over all edges.
    pub fn max_length_error(&self, mesh: &Mesh, lengths: &[f64]) -> f64 {
        mesh.edges()
            .iter()
            .zip(lengths)
            .map(|(&[i, j], &l)| {
                let (a, b) = (self.coords[i], self.coords[j]);
                ((b[0] - a[0]).hypot(b[1] - a[1]) - l).abs() / l
            })
            .fold(0.0, f64::max)
    }

    /// Faces with non-positive signed area.
    pub fn flipped_faces(&self, mesh: &Mesh) -> usize {
        mesh.faces()
            .iter()
            .filter(|f| doubled_signed_area(self.coords[f[0]], self.coords[f[1]], self.coords[f[2]]) <= 0.0)
            .count()
    }

    /// Raw coordinates as `vertex,u,v` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "vertex,u,v")?;
        for (v, p) in self.coords.iter().enumerate() {
            writeln!(out, "{v},{:.17e},{:.17e}", p[0], p[1])?;
        }
        Ok(())
    }
}

/// Lays out a disk mesh with the given edge lengths.
pub fn embed(mesh: &Mesh, lengths: &[f64]) -> Result<Parameterization, EmbedError> {
    let topo = mesh.topology();
    if !topo.is_disk() {
        return Err(EmbedError::NotDisk(topo));
    }
    if lengths.len() != mesh.edge_count() {
        return Err(EmbedError::DimensionMismatch { expected: mesh.edge_count(), got: lengths.len() });
    }
    let n = mesh.vertex_count();
    let mut coords = vec![[0.0; 2]; n];
    let mut embedded = vec![false; n];
    let mut max_inconsistency: f64 = 0.0;

    let length = |f: usize, c: usize| lengths[mesh.face_edges(f)[c]];

    let [i, j, k] = mesh.faces()[0];
    coords[j] = [length(0, 2), 0.0];
    coords[k] = third_vertex(coords[i], coords[j], length(0, 1), length(0, 0))
        .map_err(|_| EmbedError::NoIntersection { face: 0 })?;
    embedded[i] = true;
    embedded[j] = true;
    embedded[k] = true;

    let mut visited = vec![false; mesh.face_count()];
    visited[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(f) = queue.pop_front() {
        for g in mesh.face_neighbors(f) {
            if visited[g] {
                continue;
            }
            visited[g] = true;
            queue.push_back(g);

            let face = mesh.faces()[g];
            // Corner whose opposite edge is shared with f: both its neighbors are placed.
            let c = (0..3)
                .find(|&c| {
                    let e = mesh.face_edges(g)[c];
                    mesh.edge_faces(e).contains(&Some(f))
                })
                .expect("neighboring faces share an edge");
            let (a, b, v) = (face[(c + 1) % 3], face[(c + 2) % 3], face[c]);
            // In g the corner order is (a, b, v); l_av is opposite b, l_bv opposite a.
            let p = third_vertex(coords[a], coords[b], length(g, (c + 2) % 3), length(g, (c + 1) % 3))
                .map_err(|_| EmbedError::NoIntersection { face: g })?;
            if embedded[v] {
                let q = coords[v];
                max_inconsistency = max_inconsistency.max((p[0] - q[0]).hypot(p[1] - q[1]));
            } else {
                coords[v] = p;
                embedded[v] = true;
            }
        }
    }
    Ok(Parameterization { coords, embedded, seam: None, max_inconsistency })
}
