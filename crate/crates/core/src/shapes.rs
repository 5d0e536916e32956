//! Procedural test meshes: grids, hexagonal disks, hemispheres, spheres and tori.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Mesh;

/// Regular tetrahedron with unit edge length.
pub fn tetrahedron() -> Mesh {
    let s = 1.0 / (2.0 * 2f64.sqrt());
    let positions = vec![[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    let faces = vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]];
    Mesh::new(positions, faces).expect("tetrahedron is valid")
}

/// Planar grid of `nx * ny` vertices with spacing `h`, each cell split along
/// its rising diagonal. Vertex `(i, j)` has index `j * nx + i`.
pub fn grid(nx: usize, ny: usize, h: f64) -> Mesh {
    assert!(nx >= 2 && ny >= 2);
    let mut positions = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            positions.push([i as f64 * h, j as f64 * h, 0.0]);
        }
    }
    let mut faces = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v00 = j * nx + i;
            let v10 = v00 + 1;
            let v01 = v00 + nx;
            let v11 = v01 + 1;
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    Mesh::new(positions, faces).expect("grid is valid")
}

/// Corner vertices of [`grid`], counterclockwise from the origin.
pub fn grid_corners(nx: usize, ny: usize) -> [usize; 4] {
    [0, nx - 1, nx * ny - 1, nx * (ny - 1)]
}

/// Triangulated torus with `n` segments around the main ring and `m` around
/// the tube.
pub fn torus(n: usize, m: usize, major: f64, minor: f64) -> Mesh {
    assert!(n >= 3 && m >= 3);
    let mut positions = Vec::with_capacity(n * m);
    for i in 0..n {
        let theta = 2.0 * PI * i as f64 / n as f64;
        for j in 0..m {
            let phi = 2.0 * PI * j as f64 / m as f64;
            let rho = major + minor * phi.cos();
            positions.push([rho * theta.cos(), rho * theta.sin(), minor * phi.sin()]);
        }
    }
    let idx = |i: usize, j: usize| (i % n) * m + (j % m);
    let mut faces = Vec::with_capacity(2 * n * m);
    for i in 0..n {
        for j in 0..m {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh::new(positions, faces).expect("torus is valid")
}

/// Lattice points and triangles of a hexagon of side `rings` in the
/// triangular lattice, with each point mapped to `(rho, alpha)`: `rho` is the
/// hexagonal ring index over `rings`, `alpha` the lattice direction.
fn hex_lattice(rings: usize) -> (Vec<(f64, f64)>, Vec<[usize; 3]>) {
    let n = rings as i64;
    let mut index = HashMap::new();
    let mut polar = Vec::new();
    for r in -n..=n {
        for q in -n..=n {
            if (q + r).abs() > n {
                continue;
            }
            let x = q as f64 + 0.5 * r as f64;
            let y = 0.5 * 3f64.sqrt() * r as f64;
            let k = q.abs().max(r.abs()).max((q + r).abs());
            index.insert((q, r), polar.len());
            polar.push((k as f64 / n as f64, y.atan2(x)));
        }
    }
    let mut faces = Vec::new();
    for r in -n..=n {
        for q in -n..=n {
            let tri =
                |a: (i64, i64), b: (i64, i64), c: (i64, i64)| Some([*index.get(&a)?, *index.get(&b)?, *index.get(&c)?]);
            if let Some(t) = tri((q, r), (q + 1, r), (q, r + 1)) {
                faces.push(t);
            }
            if let Some(t) = tri((q + 1, r), (q + 1, r + 1), (q, r + 1)) {
                faces.push(t);
            }
        }
    }
    (polar, faces)
}

/// Flat disk of the given radius triangulated by a hexagonal lattice with
/// `rings` rings (`6 * rings^2` faces). Vertex 0 sits on the boundary.
pub fn disk(rings: usize, radius: f64) -> Mesh {
    assert!(rings >= 1);
    let (polar, faces) = hex_lattice(rings);
    let positions = polar.iter().map(|&(rho, a)| [radius * rho * a.cos(), radius * rho * a.sin(), 0.0]).collect();
    Mesh::new(positions, faces).expect("disk is valid")
}

/// Unit hemisphere (`z >= 0`) triangulated like [`disk`], with ring `k`
/// placed at polar angle `k / rings * pi / 2`.
pub fn hemisphere(rings: usize) -> Mesh {
    assert!(rings >= 1);
    let (polar, faces) = hex_lattice(rings);
    let positions = polar
        .iter()
        .map(|&(rho, a)| {
            let phi = rho * FRAC_PI_2;
            [phi.sin() * a.cos(), phi.sin() * a.sin(), phi.cos()]
        })
        .collect();
    Mesh::new(positions, faces).expect("hemisphere is valid")
}

/// Unit sphere from an octahedron refined `level` times by 1-to-4 splits.
pub fn octasphere(level: usize) -> Mesh {
    let (positions, faces) = octasphere_raw(level);
    Mesh::new(positions, faces).expect("octasphere is valid")
}

/// [`octasphere`] with face 0 removed, a topological disk.
pub fn sphere_minus_face(level: usize) -> Mesh {
    let (positions, mut faces) = octasphere_raw(level);
    faces.remove(0);
    Mesh::new(positions, faces).expect("punctured sphere is valid")
}

fn octasphere_raw(level: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let mut positions: Vec<[f64; 3]> =
        vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    let mut faces = vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
    for _ in 0..level {
        let mut mid = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0; 3];
            for c in 0..3 {
                let (a, b) = (f[c], f[(c + 1) % 3]);
                m[c] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let p = [
                        positions[a][0] + positions[b][0],
                        positions[a][1] + positions[b][1],
                        positions[a][2] + positions[b][2],
                    ];
                    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    positions.push([p[0] / n, p[1] / n, p[2] / n]);
                    positions.len() - 1
                });
            }
            next.push([f[0], m[0], m[2]]);
            next.push([m[0], f[1], m[1]]);
            next.push([m[2], m[1], f[2]]);
            next.push([m[0], m[1], m[2]]);
        }
        faces = next;
    }
    (positions, faces)
}

/// Copy of `mesh` with every vertex displaced by a uniform random offset of
/// at most `amount` per coordinate.
pub fn jitter(mesh: &Mesh, amount: f64, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = mesh
        .positions()
        .iter()
        .map(|p| {
            let mut q = *p;
            for x in &mut q {
                *x += rng.random_range(-amount..=amount);
            }
            q
        })
        .collect();
    Mesh::new(positions, mesh.faces().to_vec()).expect("jitter keeps connectivity")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topologies() {
        let t = tetrahedron().topology();
        assert_eq!((t.vertices, t.edges, t.faces, t.euler_characteristic), (4, 6, 4, 2));
        assert_eq!((t.genus, t.boundary_loops), (0, 0));

        let t = torus(8, 8, 2.0, 1.0).topology();
        assert_eq!((t.euler_characteristic, t.genus, t.boundary_loops), (0, 1, 0));

        for rings in [1, 3, 9] {
            let d = disk(rings, 1.0);
            let t = d.topology();
            assert!(t.is_disk());
            assert_eq!(t.faces, 6 * rings * rings);
        }
        assert!(hemisphere(4).topology().is_disk());
        assert_eq!(octasphere(2).topology().euler_characteristic, 2);
        assert!(sphere_minus_face(1).topology().is_disk());
        assert!(grid(5, 5, 1.0).topology().is_disk());
    }

    #[test]
    fn tetrahedron_has_unit_edges() {
        for &l in tetrahedron().original_lengths() {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }
}
