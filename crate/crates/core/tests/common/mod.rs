#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use calabi::cut::cut_to_disk;
use calabi::geometry::{corner_angles, vertex_curvatures};
use calabi::metric::{edge_lengths, initial_inversive_metric};
use calabi::{shapes, Mesh, PackingMetric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named meshes covering disks, punctured spheres, cut tori and grids.
pub fn gauss_bonnet_meshes() -> Vec<(&'static str, Mesh)> {
    vec![
        ("disk3", shapes::disk(3, 1.0)),
        ("disk5-jitter", shapes::jitter(&shapes::disk(5, 1.0), 0.02, 1)),
        ("sphere-minus-face1", shapes::sphere_minus_face(1)),
        ("sphere-minus-face2", shapes::jitter(&shapes::sphere_minus_face(2), 0.01, 2)),
        ("torus-cut-6x4", cut_to_disk(&shapes::torus(6, 4, 2.0, 0.8)).unwrap().mesh),
        ("torus-cut-9x6", cut_to_disk(&shapes::jitter(&shapes::torus(9, 6, 2.0, 1.0), 0.02, 3)).unwrap().mesh),
        ("grid4", shapes::grid(4, 4, 1.0)),
        ("grid6x5-jitter", shapes::jitter(&shapes::grid(6, 5, 0.5), 0.05, 4)),
        ("hemisphere4", shapes::hemisphere(4)),
        ("octasphere1", shapes::octasphere(1)),
        ("torus-closed", shapes::torus(8, 5, 2.0, 0.7)),
        ("tetrahedron", shapes::tetrahedron()),
    ]
}

/// Meshes with at most 50 vertices.
pub fn small_meshes() -> Vec<Mesh> {
    vec![
        shapes::disk(3, 1.0),
        shapes::jitter(&shapes::disk(2, 1.0), 0.03, 7),
        shapes::sphere_minus_face(1),
        shapes::octasphere(1),
        shapes::torus(6, 4, 2.0, 0.8),
        shapes::jitter(&shapes::grid(5, 5, 1.0), 0.1, 8),
        shapes::hemisphere(3),
    ]
}

pub fn lengths_ok(mesh: &Mesh, metric: &PackingMetric) -> bool {
    match edge_lengths(mesh, metric) {
        Ok(l) => corner_angles(mesh, &l).is_ok(),
        Err(_) => false,
    }
}

/// The mesh's own inversive distance metric with conformal factors perturbed
/// by up to `amount`, halving the perturbation until every triangle is valid.
pub fn perturbed_inversive(mesh: &Mesh, rng: &mut ChaCha8Rng, amount: f64) -> PackingMetric {
    let base = initial_inversive_metric(mesh).unwrap();
    let noise: Vec<f64> = (0..mesh.vertex_count()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut scale = amount;
    loop {
        let u: Vec<f64> = base.factors().iter().zip(&noise).map(|(u, n)| u + scale * n).collect();
        let m = PackingMetric::inversive(u, base.edge_weights().to_vec());
        if lengths_ok(mesh, &m) {
            return m;
        }
        scale *= 0.5;
    }
}

/// Thurston metric with random intersection angles in [0, pi/2] and random
/// radii; such metrics always satisfy the triangle inequalities.
pub fn random_thurston(mesh: &Mesh, rng: &mut ChaCha8Rng) -> PackingMetric {
    let u = (0..mesh.vertex_count()).map(|_| rng.random_range(-0.5..=0.5)).collect();
    let phi = (0..mesh.edge_count()).map(|_| rng.random_range(0.0..=FRAC_PI_2)).collect();
    PackingMetric::thurston(u, phi).unwrap()
}

pub fn curvatures(mesh: &Mesh, metric: &PackingMetric) -> Vec<f64> {
    let l = edge_lengths(mesh, metric).unwrap();
    vertex_curvatures(mesh, &corner_angles(mesh, &l).unwrap())
}

/// Central finite difference of the curvature vector with respect to `u_j`.
pub fn curvature_fd_column(mesh: &Mesh, metric: &PackingMetric, j: usize, h: f64) -> Vec<f64> {
    let mut plus = metric.clone();
    plus.factors_mut()[j] += h;
    let mut minus = metric.clone();
    minus.factors_mut()[j] -= h;
    let kp = curvatures(mesh, &plus);
    let km = curvatures(mesh, &minus);
    kp.iter().zip(&km).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

/// Least-squares circle through planar points (algebraic fit), returned as
/// center and radius.
pub fn fit_circle(points: &[[f64; 2]]) -> ([f64; 2], f64) {
    // Minimize sum (x^2 + y^2 + D x + E y + F)^2 via the normal equations.
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for p in points {
        let row = [p[0], p[1], 1.0];
        let rhs = -(p[0] * p[0] + p[1] * p[1]);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * rhs;
        }
    }
    let x = solve3(a, b);
    let center = [-x[0] / 2.0, -x[1] / 2.0];
    let radius = (center[0] * center[0] + center[1] * center[1] - x[2]).sqrt();
    (center, radius)
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Conformal factors shifted to zero mean.
pub fn mean_centered(u: &[f64]) -> Vec<f64> {
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    u.iter().map(|x| x - mean).collect()
}

/// The six corners of a hexagonal [`shapes::disk`]: boundary vertices with
/// only two incident faces.
pub fn hexagon_corners(mesh: &Mesh) -> Vec<usize> {
    let mut count = vec![0; mesh.vertex_count()];
    for f in mesh.faces() {
        for &v in f {
            count[v] += 1;
        }
    }
    (0..mesh.vertex_count()).filter(|&v| mesh.is_boundary_vertex(v) && count[v] == 2).collect()
}
