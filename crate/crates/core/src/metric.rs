//! Circle packing metrics.
//!
//! Each vertex carries a circle of radius `r_i = exp(u_i)` and each edge a
//! coupling term: the inversive distance `I_ij`, or `cos(phi_ij)` for a
//! Thurston intersection angle `phi_ij`. The edge length is
//!
//! ```text
//! l_ij^2 = r_i^2 + r_j^2 + 2 r_i r_j w_ij
//! ```
//!
//! The per-edge weights fix the conformal class; a flow only moves `u`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;
use thiserror::Error;

use crate::mesh::Mesh;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(
        "face {face}: tangential radius at vertex {vertex} is {value} (input lengths violate the triangle inequality)"
    )]
    DegenerateInput { face: usize, vertex: usize, value: f64 },
    #[error("edge {edge}: squared length {value} is not positive")]
    DegenerateLength { edge: usize, value: f64 },
    #[error("edge {edge}: Thurston weight {value} outside [0, pi/2]")]
    InvalidAngle { edge: usize, value: f64 },
    #[error("expected {expected} {what}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    InversiveDistance,
    Thurston,
}

#[derive(Debug, Clone)]
pub struct PackingMetric {
    scheme: Scheme,
    u: Vec<f64>,
    edge_weight: Vec<f64>,
}

impl PackingMetric {
    pub fn new(scheme: Scheme, u: Vec<f64>, edge_weight: Vec<f64>) -> Result<Self, MetricError> {
        if scheme == Scheme::Thurston {
            for (edge, &phi) in edge_weight.iter().enumerate() {
                if !(0.0..=FRAC_PI_2).contains(&phi) {
                    return Err(MetricError::InvalidAngle { edge, value: phi });
                }
            }
        }
        Ok(Self { scheme, u, edge_weight })
    }

    pub fn inversive(u: Vec<f64>, inversive_distance: Vec<f64>) -> Self {
        Self { scheme: Scheme::InversiveDistance, u, edge_weight: inversive_distance }
    }

    pub fn thurston(u: Vec<f64>, phi: Vec<f64>) -> Result<Self, MetricError> {
        Self::new(Scheme::Thurston, u, phi)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Per-vertex conformal factors `u_i = log r_i`.
    pub fn factors(&self) -> &[f64] {
        &self.u
    }

    pub fn factors_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn radius(&self, v: usize) -> f64 {
        self.u[v].exp()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.u.iter().map(|u| u.exp()).collect()
    }

    /// Stored per-edge weight: `I_ij` or `phi_ij`.
    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weight
    }

    /// Coupling term entering the length law: `I_ij` or `cos(phi_ij)`.
    pub fn coupling(&self, e: usize) -> f64 {
        match self.scheme {
            Scheme::InversiveDistance => self.edge_weight[e],
            Scheme::Thurston => self.edge_weight[e].cos(),
        }
    }

    fn check_dims(&self, mesh: &Mesh) -> Result<(), MetricError> {
        if self.u.len() != mesh.vertex_count() {
            return Err(MetricError::DimensionMismatch {
                what: "vertex factors",
                expected: mesh.vertex_count(),
                got: self.u.len(),
            });
        }
        if self.edge_weight.len() != mesh.edge_count() {
            return Err(MetricError::DimensionMismatch {
                what: "edge weights",
                expected: mesh.edge_count(),
                got: self.edge_weight.len(),
            });
        }
        Ok(())
    }
}

/// Inversive distance metric approximating the mesh's own edge lengths.
///
/// Every face corner proposes the tangential radius
/// `(d_ki + d_ij - d_jk) / 2`; each vertex takes the minimum proposal over
/// its corners, and `I_ij` is then chosen so that the length law reproduces
/// the original length `d_ij` exactly.
pub fn initial_inversive_metric(mesh: &Mesh) -> Result<PackingMetric, MetricError> {
    let d = mesh.original_lengths();
    let mut radius = vec![f64::INFINITY; mesh.vertex_count()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let fe = mesh.face_edges(f);
        for c in 0..3 {
            let opposite = d[fe[c]];
            let adjacent = d[fe[(c + 1) % 3]] + d[fe[(c + 2) % 3]];
            let r = 0.5 * (adjacent - opposite);
            if !(r > 0.0) {
                return Err(MetricError::DegenerateInput { face: f, vertex: face[c], value: r });
            }
            let v = face[c];
            radius[v] = radius[v].min(r);
        }
    }
    let inversive = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &[i, j])| {
            let (ri, rj) = (radius[i], radius[j]);
            (d[e] * d[e] - ri * ri - rj * rj) / (2.0 * ri * rj)
        })
        .collect();
    let u = radius.iter().map(|r| r.ln()).collect();
    Ok(PackingMetric::inversive(u, inversive))
}

/// Length of a single edge from its endpoint radii and coupling term.
pub fn edge_length(ri: f64, rj: f64, coupling: f64) -> Option<f64> {
    let sq = ri * ri + rj * rj + 2.0 * ri * rj * coupling;
    (sq > 0.0).then(|| sq.sqrt())
}

/// Edge lengths induced by `metric`.
pub fn edge_lengths(mesh: &Mesh, metric: &PackingMetric) -> Result<Vec<f64>, MetricError> {
    metric.check_dims(mesh)?;
    let r = metric.radii();
    mesh.edges()
        .iter()
        .enumerate()
        .map(|(e, &[i, j])| {
            let w = metric.coupling(e);
            edge_length(r[i], r[j], w).ok_or(MetricError::DegenerateLength {
                edge: e,
                value: r[i] * r[i] + r[j] * r[j] + 2.0 * r[i] * r[j] * w,
            })
        })
        .collect()
}

/// Faces whose side lengths fail any strict triangle inequality.
pub fn check_triangle_inequalities(mesh: &Mesh, lengths: &[f64]) -> Vec<usize> {
    (0..mesh.face_count())
        .filter(|&f| {
            let [a, b, c] = mesh.face_edges(f).map(|e| lengths[e]);
            !(a + b > c && b + c > a && c + a > b)
        })
        .collect()
}
