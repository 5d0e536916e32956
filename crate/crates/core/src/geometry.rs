//! Intrinsic geometry of a metric triangle mesh: corner angles, angle-deficit
//! curvature, power centers and the two edge-weighted Laplacians.
//!
//! [`dual_laplacian`] is the curvature Jacobian `L_ij = dK_i / du_j` of a
//! circle packing metric. Off the diagonal it equals minus the dual edge
//! weight `w_ij = sum over faces of dtheta_i / du_j`, which in turn equals
//! `l*_ij / l_ij`, the signed distance between the two adjacent power centers
//! over the primal edge length. The diagonal follows from the curvature sum
//! being constant: every column sums to zero.

use std::f64::consts::PI;
use std::io::{self, Write};

use thiserror::Error;

use crate::mesh::Mesh;
use crate::metric::{MetricError, PackingMetric};

/// Angles within this distance of 0 or pi make a face singular.
pub const SINGULAR_ANGLE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("face {face} violates the triangle inequality")]
    TriangleInequality { face: usize },
    #[error("face {face} is degenerate (angle within {SINGULAR_ANGLE} of 0 or pi)")]
    Singular { face: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Interior angles per face, indexed by corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerAngles {
    angles: Vec<[f64; 3]>,
}

impl CornerAngles {
    pub fn face(&self, f: usize) -> [f64; 3] {
        self.angles[f]
    }

    pub fn as_slice(&self) -> &[[f64; 3]] {
        &self.angles
    }
}

/// Current and prescribed per-vertex curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureState {
    pub current: Vec<f64>,
    pub target: Vec<f64>,
}

impl CurvatureState {
    pub fn new(current: Vec<f64>, target: Vec<f64>) -> Self {
        assert_eq!(current.len(), target.len(), "curvature vectors differ in length");
        Self { current, target }
    }

    /// `target - current`.
    pub fn residual(&self) -> Vec<f64> {
        self.target.iter().zip(&self.current).map(|(t, k)| t - k).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.target.iter().zip(&self.current).map(|(t, k)| (t - k).abs()).fold(0.0, f64::max)
    }
}

/// Angle opposite `opposite` in a triangle with the two other sides `a`, `b`.
/// The cosine is clamped to [-1, 1] against round-off.
pub fn angle_from_lengths(opposite: f64, a: f64, b: f64) -> f64 {
    ((a * a + b * b - opposite * opposite) / (2.0 * a * b)).clamp(-1.0, 1.0).acos()
}

fn face_lengths(mesh: &Mesh, lengths: &[f64], f: usize) -> [f64; 3] {
    mesh.face_edges(f).map(|e| lengths[e])
}

fn satisfies_triangle_inequality([a, b, c]: [f64; 3]) -> bool {
    a + b > c && b + c > a && c + a > b
}

pub fn corner_angles(mesh: &Mesh, lengths: &[f64]) -> Result<CornerAngles, GeometryError> {
    let mut angles = Vec::with_capacity(mesh.face_count());
    for f in 0..mesh.face_count() {
        let l = face_lengths(mesh, lengths, f);
        if !satisfies_triangle_inequality(l) {
            return Err(GeometryError::TriangleInequality { face: f });
        }
        angles.push([
            angle_from_lengths(l[0], l[1], l[2]),
            angle_from_lengths(l[1], l[2], l[0]),
            angle_from_lengths(l[2], l[0], l[1]),
        ]);
    }
    Ok(CornerAngles { angles })
}

/// Angle deficit: `2 pi - sum` at interior vertices, `pi - sum` on the boundary.
pub fn vertex_curvatures(mesh: &Mesh, angles: &CornerAngles) -> Vec<f64> {
    let mut sum = vec![0.0; mesh.vertex_count()];
    for (face, a) in mesh.faces().iter().zip(&angles.angles) {
        for c in 0..3 {
            sum[face[c]] += a[c];
        }
    }
    sum.iter().enumerate().map(|(v, s)| if mesh.is_boundary_vertex(v) { PI - s } else { 2.0 * PI - s }).collect()
}

/// Sparse symmetric vertex-by-vertex matrix with the sparsity of the mesh
/// graph: one off-diagonal value per edge plus the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLaplacian {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

/// Curvature Jacobian `dK/du` of a circle packing metric.
pub type DualLaplacian = EdgeLaplacian;

impl EdgeLaplacian {
    /// Builds the matrix from per-edge off-diagonal values, setting each
    /// diagonal entry to minus the sum of its row.
    pub fn from_off_diagonal(mesh: &Mesh, off_diagonal: Vec<f64>) -> Self {
        let mut diagonal = vec![0.0; mesh.vertex_count()];
        for (&[i, j], &w) in mesh.edges().iter().zip(&off_diagonal) {
            diagonal[i] -= w;
            diagonal[j] -= w;
        }
        Self { diagonal, off_diagonal }
    }

    pub fn entry(&self, mesh: &Mesh, i: usize, j: usize) -> f64 {
        if i == j {
            self.diagonal[i]
        } else {
            mesh.edge_between(i, j).map_or(0.0, |e| self.off_diagonal[e])
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, mesh: &Mesh, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diagonal.iter().zip(x).map(|(d, x)| d * x).collect();
        for (&[i, j], &w) in mesh.edges().iter().zip(&self.off_diagonal) {
            y[i] += w * x[j];
            y[j] += w * x[i];
        }
        y
    }

    /// Sum of each column (equal to the row sums, by symmetry).
    pub fn column_sums(&self, mesh: &Mesh) -> Vec<f64> {
        self.apply(mesh, &vec![1.0; self.diagonal.len()])
    }

    /// Nonzero pattern as `(i, j, value)` triplets sorted by `(i, j)`.
    pub fn triplets(&self, mesh: &Mesh) -> Vec<(usize, usize, f64)> {
        let mut t: Vec<(usize, usize, f64)> = self.diagonal.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        for (&[i, j], &w) in mesh.edges().iter().zip(&self.off_diagonal) {
            t.push((i, j, w));
            t.push((j, i, w));
        }
        t.sort_by_key(|&(i, j, _)| (i, j));
        t
    }

    /// Coordinate-format dump, one `i j value` line per entry.
    pub fn write_coordinate<W: Write>(&self, mesh: &Mesh, mut out: W) -> io::Result<()> {
        for (i, j, v) in self.triplets(mesh) {
            writeln!(out, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }
}

fn check_singular(f: usize, a: [f64; 3]) -> Result<(), GeometryError> {
    if a.iter().any(|t| !(SINGULAR_ANGLE..=PI - SINGULAR_ANGLE).contains(t)) {
        return Err(GeometryError::Singular { face: f });
    }
    Ok(())
}

/// Derivative of the corner angle at `i` with respect to `u_j`, by the chain
/// rule through the cosine law.
///
/// Sides are named by their endpoints; `dl_jk` and `dl_ij` are the
/// derivatives of those sides with respect to `u_j`, and `cos_j` is the
/// cosine of the angle at `j`.
fn angle_derivative(l_jk: f64, area: f64, dl_jk: f64, dl_ij: f64, cos_j: f64) -> f64 {
    l_jk / (2.0 * area) * (dl_jk - cos_j * dl_ij)
}

/// Analytic dual edge weights `w_ij = sum_f dtheta_i / du_j`, one per edge.
pub fn dual_weights(
    mesh: &Mesh,
    metric: &PackingMetric,
    lengths: &[f64],
    angles: &CornerAngles,
) -> Result<Vec<f64>, GeometryError> {
    let r = metric.radii();
    let mut weights = vec![0.0; mesh.edge_count()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let a = angles.face(f);
        check_singular(f, a)?;
        let fe = mesh.face_edges(f);
        let l = fe.map(|e| lengths[e]);
        // side opposite corner c joins corners c+1, c+2
        let area = 0.5 * l[1] * l[2] * a[0].sin();
        // d l_side / d u_v for side `s` and one of its endpoints `v`
        let dl = |s: usize, v: usize| {
            let e = fe[s];
            let (p, q) = (face[(s + 1) % 3], face[(s + 2) % 3]);
            let other = if p == v { q } else { p };
            (r[v] * r[v] + r[v] * r[other] * metric.coupling(e)) / l[s]
        };
        for k in 0..3 {
            // edge opposite corner k joins corners i = k+1 and j = k+2
            let ci = (k + 1) % 3;
            let cj = (k + 2) % 3;
            let (vi, vj) = (face[ci], face[cj]);
            // dtheta_i / du_j: sides (j,k) = opposite ci, (i,j) = opposite k
            let dij = angle_derivative(l[ci], area, dl(ci, vj), dl(k, vj), a[cj].cos());
            // dtheta_j / du_i: sides (i,k) = opposite cj, (i,j) = opposite k
            let dji = angle_derivative(l[cj], area, dl(cj, vi), dl(k, vi), a[ci].cos());
            weights[fe[k]] += 0.5 * (dij + dji);
        }
    }
    Ok(weights)
}

/// Curvature Jacobian `L_ij = dK_i/du_j`: `-w_ij` off the diagonal, row and
/// column sums zero.
pub fn dual_laplacian(
    mesh: &Mesh,
    metric: &PackingMetric,
    lengths: &[f64],
    angles: &CornerAngles,
) -> Result<DualLaplacian, GeometryError> {
    let w = dual_weights(mesh, metric, lengths, angles)?;
    Ok(EdgeLaplacian::from_off_diagonal(mesh, w.into_iter().map(|w| -w).collect()))
}

/// Local planar frame of a face: corner 0 at the origin, corner 1 on the
/// positive x axis, corner 2 above it. `lengths[c]` is the side opposite
/// corner `c`.
pub fn face_frame(lengths: [f64; 3]) -> Result<[[f64; 2]; 3], GeometryError> {
    if !satisfies_triangle_inequality(lengths) {
        return Err(GeometryError::TriangleInequality { face: usize::MAX });
    }
    let [l12, l20, l01] = lengths;
    let x = (l01 * l01 + l20 * l20 - l12 * l12) / (2.0 * l01);
    let y = (l20 * l20 - x * x).max(0.0).sqrt();
    if !(y > 0.0) {
        return Err(GeometryError::Singular { face: usize::MAX });
    }
    Ok([[0.0, 0.0], [l01, 0.0], [x, y]])
}

/// Radical center of the three vertex circles of a face, in the frame of
/// [`face_frame`]: the point with equal power `|p - v_c|^2 - r_c^2` with
/// respect to every corner circle.
pub fn power_center(lengths: [f64; 3], radii: [f64; 3]) -> Result<[f64; 2], GeometryError> {
    let [_, p1, p2] = face_frame(lengths)?;
    let [r0, r1, r2] = radii;
    let px = (p1[0] * p1[0] + r0 * r0 - r1 * r1) / (2.0 * p1[0]);
    let rhs = 0.5 * (p2[0] * p2[0] + p2[1] * p2[1] + r0 * r0 - r2 * r2);
    let py = (rhs - p2[0] * px) / p2[1];
    Ok([px, py])
}

/// Signed dual edge lengths: per edge, the sum over adjacent faces of the
/// distance from the face's power center to the edge line, positive towards
/// the face interior.
pub fn dual_edge_lengths(mesh: &Mesh, metric: &PackingMetric, lengths: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let mut dual = vec![0.0; mesh.edge_count()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let fe = mesh.face_edges(f);
        let l = fe.map(|e| lengths[e]);
        let frame = face_frame(l).map_err(|e| with_face(e, f))?;
        let center = power_center(l, face.map(|v| metric.radius(v))).map_err(|e| with_face(e, f))?;
        for k in 0..3 {
            let a = frame[(k + 1) % 3];
            let b = frame[(k + 2) % 3];
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let cross = ex * (center[1] - a[1]) - ey * (center[0] - a[0]);
            dual[fe[k]] += cross / (ex * ex + ey * ey).sqrt();
        }
    }
    Ok(dual)
}

fn with_face(err: GeometryError, face: usize) -> GeometryError {
    match err {
        GeometryError::TriangleInequality { .. } => GeometryError::TriangleInequality { face },
        GeometryError::Singular { .. } => GeometryError::Singular { face },
        other => other,
    }
}

/// Cotangent Laplacian: `(1/2) sum cot` of the angles opposite each edge off
/// the diagonal, minus the row sum on the diagonal.
pub fn cotangent_laplacian(mesh: &Mesh, lengths: &[f64]) -> Result<EdgeLaplacian, GeometryError> {
    let angles = corner_angles(mesh, lengths)?;
    let mut off = vec![0.0; mesh.edge_count()];
    for f in 0..mesh.face_count() {
        let a = angles.face(f);
        check_singular(f, a)?;
        for (k, e) in mesh.face_edges(f).into_iter().enumerate() {
            off[e] += 0.5 * a[k].cos() / a[k].sin();
        }
    }
    Ok(EdgeLaplacian::from_off_diagonal(mesh, off))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{edge_lengths, initial_inversive_metric};
    use crate::shapes;

    fn equilateral_pair(side: f64) -> Mesh {
        let h = 0.5 * 3f64.sqrt() * side;
        Mesh::new(
            vec![[0.0, 0.0, 0.0], [side, 0.0, 0.0], [0.5 * side, h, 0.0], [1.5 * side, h, 0.0]],
            vec![[0, 1, 2], [1, 3, 2]],
        )
        .unwrap()
    }

    fn lengths_of(mesh: &Mesh, f: usize, l: [f64; 3]) -> Vec<f64> {
        let mut out = vec![0.0; mesh.edge_count()];
        for (c, e) in mesh.face_edges(f).into_iter().enumerate() {
            out[e] = l[c];
        }
        out
    }

    #[test]
    fn angle_examples() {
        let tri = Mesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let a = corner_angles(&tri, &lengths_of(&tri, 0, [2.0, 2.0, 2.0])).unwrap();
        for t in a.face(0) {
            assert!((t - PI / 3.0).abs() < 1e-15);
        }
        // 3-4-5: side opposite corner c
        let a = corner_angles(&tri, &lengths_of(&tri, 0, [3.0, 4.0, 5.0])).unwrap().face(0);
        assert!((a[2] - PI / 2.0).abs() < 1e-15);
        assert!((a[0] - 0.6435011087932844).abs() < 1e-15);
        assert!((a[0] - (3.0f64 / 5.0).asin()).abs() < 1e-15);
        assert!((a.iter().sum::<f64>() - PI).abs() < 1e-10);

        let err = corner_angles(&tri, &lengths_of(&tri, 0, [1.0, 1.0, 3.0])).unwrap_err();
        assert!(matches!(err, GeometryError::TriangleInequality { face: 0 }));
    }

    #[test]
    fn curvature_examples() {
        let tet = shapes::tetrahedron();
        let a = corner_angles(&tet, tet.original_lengths()).unwrap();
        let k = vertex_curvatures(&tet, &a);
        for &ki in &k {
            assert!((ki - PI).abs() < 1e-12);
        }
        assert!((k.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);

        let tri = Mesh::new(vec![[0.0; 3], [3.0, 0.0, 0.0], [3.0, 4.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let k = vertex_curvatures(&tri, &corner_angles(&tri, tri.original_lengths()).unwrap());
        assert!((k[1] - PI / 2.0).abs() < 1e-15);

        let g = shapes::grid(4, 4, 1.0);
        let k = vertex_curvatures(&g, &corner_angles(&g, g.original_lengths()).unwrap());
        for v in [5, 6, 9, 10] {
            assert!(k[v].abs() < 1e-14);
        }
    }

    #[test]
    fn equilateral_pair_weights() {
        let m = equilateral_pair(2.0);
        let metric = initial_inversive_metric(&m).unwrap();
        for r in metric.radii() {
            assert!((r - 1.0).abs() < 1e-12);
        }
        let l = edge_lengths(&m, &metric).unwrap();
        let a = corner_angles(&m, &l).unwrap();
        let w = dual_weights(&m, &metric, &l, &a).unwrap();
        let shared = m.edge_between(1, 2).unwrap();
        assert!((w[shared] - 1.0 / 3f64.sqrt()).abs() < 1e-12);

        let cot = cotangent_laplacian(&m, &l).unwrap();
        assert!((cot.off_diagonal[shared] - 1.0 / 3f64.sqrt()).abs() < 1e-12);

        let dual = dual_edge_lengths(&m, &metric, &l).unwrap();
        assert!((dual[shared] - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        // boundary edge: one face only
        let b = m.edge_between(0, 1).unwrap();
        assert!((dual[b] - 0.5 * dual[shared]).abs() < 1e-12);

        let lap = dual_laplacian(&m, &metric, &l, &a).unwrap();
        assert!((lap.entry(&m, 1, 2) + 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(lap.entry(&m, 0, 3), 0.0);
        assert_eq!(lap.entry(&m, 3, 0), 0.0);
    }

    #[test]
    fn right_angles_give_zero_cot_weight() {
        let m =
            Mesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2], [0, 2, 3]])
                .unwrap();
        let cot = cotangent_laplacian(&m, m.original_lengths()).unwrap();
        let diag = m.edge_between(0, 2).unwrap();
        assert!(cot.off_diagonal[diag].abs() < 1e-15);
    }

    #[test]
    fn power_center_of_equal_radii_is_circumcenter() {
        // right angle at corner 2: the circumcenter is the hypotenuse midpoint
        let l = [3.0, 4.0, 5.0];
        let frame = face_frame(l).unwrap();
        let c = power_center(l, [0.7, 0.7, 0.7]).unwrap();
        let mid = [0.5 * (frame[0][0] + frame[1][0]), 0.5 * (frame[0][1] + frame[1][1])];
        assert!((c[0] - mid[0]).abs() < 1e-12 && (c[1] - mid[1]).abs() < 1e-12);
        let c0 = power_center(l, [0.0, 0.0, 0.0]).unwrap();
        assert!((c0[0] - mid[0]).abs() < 1e-12 && (c0[1] - mid[1]).abs() < 1e-12);
        let tiny = power_center(l, [1e-9, 2e-9, 3e-9]).unwrap();
        assert!((tiny[0] - mid[0]).abs() < 1e-9 && (tiny[1] - mid[1]).abs() < 1e-9);
    }

    #[test]
    fn tangential_power_center_is_incenter() {
        // sides 0-1 = 3, 1-2 = 4, 2-0 = 5 with radii (2, 1, 3)
        let l = [4.0, 5.0, 3.0];
        let frame = face_frame(l).unwrap();
        let c = power_center(l, [2.0, 1.0, 3.0]).unwrap();
        // oracle: solve the two radical-axis equations with Cramer's rule
        let r = [2.0f64, 1.0, 3.0];
        let row = |a: usize, b: usize| {
            let (pa, pb) = (frame[a], frame[b]);
            (
                2.0 * (pb[0] - pa[0]),
                2.0 * (pb[1] - pa[1]),
                pb[0] * pb[0] + pb[1] * pb[1] - pa[0] * pa[0] - pa[1] * pa[1] - r[b] * r[b] + r[a] * r[a],
            )
        };
        let (a1, b1, c1) = row(0, 1);
        let (a2, b2, c2) = row(1, 2);
        let det = a1 * b2 - a2 * b1;
        let oracle = [(c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det];
        assert!((c[0] - oracle[0]).abs() < 1e-12 && (c[1] - oracle[1]).abs() < 1e-12);
        // incenter is at distance 1 (the inradius) from every side
        for k in 0..3 {
            let a = frame[(k + 1) % 3];
            let b = frame[(k + 2) % 3];
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let d = (ex * (c[1] - a[1]) - ey * (c[0] - a[0])) / (ex * ex + ey * ey).sqrt();
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_face_is_reported() {
        let m = Mesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let metric = initial_inversive_metric(&m).unwrap();
        let l = lengths_of(&m, 0, [1e-13, 1.0, 1.0]);
        let a = corner_angles(&m, &l).unwrap();
        assert!(matches!(dual_weights(&m, &metric, &l, &a), Err(GeometryError::Singular { face: 0 })));
    }

    #[test]
    fn matrix_dump_is_sorted() {
        let m = equilateral_pair(1.0);
        let lap = cotangent_laplacian(&m, m.original_lengths()).unwrap();
        let mut buf = Vec::new();
        lap.write_coordinate(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let keys: Vec<(usize, usize)> = text
            .lines()
            .map(|l| {
                let mut it = l.split(' ');
                (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
            })
            .collect();
        assert_eq!(keys.len(), 4 + 2 * 5);
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
