mod common;

use std::f64::consts::PI;

use calabi::analysis::{analyze, sample_corners};
use calabi::embed::{embed, Parameterization};
use calabi::flow::{run_flow, BoundaryMode, FlowConfig};
use calabi::geometry::{corner_angles, dual_laplacian};
use calabi::metric::{edge_lengths, initial_inversive_metric};
use calabi::obj::{parse_obj, write_obj};
use calabi::shapes;
use common::*;
use proptest::prelude::*;

fn mesh_pool() -> Vec<calabi::Mesh> {
    small_meshes()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn curvature_total_is_topological(which in 0usize..7, seed in any::<u64>(), amount in 0.0f64..0.4) {
        let mesh = &mesh_pool()[which];
        let metric = perturbed_inversive(mesh, &mut rng(seed), amount);
        let total: f64 = curvatures(mesh, &metric).iter().sum();
        let chi = mesh.topology().euler_characteristic as f64;
        prop_assert!((total - 2.0 * PI * chi).abs() < 1e-9);
    }

    #[test]
    fn thurston_curvature_total_is_topological(which in 0usize..7, seed in any::<u64>()) {
        let mesh = &mesh_pool()[which];
        let metric = random_thurston(mesh, &mut rng(seed));
        let total: f64 = curvatures(mesh, &metric).iter().sum();
        let chi = mesh.topology().euler_characteristic as f64;
        prop_assert!((total - 2.0 * PI * chi).abs() < 1e-9);
    }

    #[test]
    fn jacobian_is_symmetric_with_zero_sums(which in 0usize..7, seed in any::<u64>(), amount in 0.0f64..0.3) {
        let mesh = &mesh_pool()[which];
        let metric = perturbed_inversive(mesh, &mut rng(seed), amount);
        let l = edge_lengths(mesh, &metric).unwrap();
        let a = corner_angles(mesh, &l).unwrap();
        let lap = dual_laplacian(mesh, &metric, &l, &a).unwrap();
        let n = mesh.vertex_count();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(lap.entry(mesh, i, j).to_bits(), lap.entry(mesh, j, i).to_bits());
            }
        }
        let scale = (0..n).map(|i| lap.entry(mesh, i, i).abs()).fold(1.0, f64::max);
        for s in lap.column_sums(mesh) {
            prop_assert!(s.abs() < 1e-12 * scale);
        }
        // constants lie in the kernel
        for y in lap.apply(mesh, &vec![1.0; n]) {
            prop_assert!(y.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn planar_meshes_embed_isometrically(nx in 3usize..8, ny in 3usize..8, seed in any::<u64>()) {
        let bumpy = shapes::jitter(&shapes::grid(nx, ny, 1.0), 0.15, seed);
        let flat = bumpy.positions().iter().map(|p| [p[0], p[1], 0.0]).collect();
        let mesh = calabi::Mesh::new(flat, bumpy.faces().to_vec()).unwrap();
        let lengths = mesh.original_lengths().to_vec();
        let p = embed(&mesh, &lengths).unwrap();
        prop_assert!(p.all_embedded());
        prop_assert!(p.max_length_error(&mesh, &lengths) < 1e-12);
        prop_assert_eq!(p.flipped_faces(&mesh), 0);
        let report = analyze(&mesh, &p).unwrap();
        prop_assert!(report.max_relative_error < 1e-12);
        prop_assert_eq!(report.histogram.total(), 3 * mesh.face_count());
    }

    #[test]
    fn power_of_two_rescaling_leaves_the_report_bit_identical(seed in any::<u64>(), k in -6i32..6) {
        let mesh = shapes::jitter(&shapes::hemisphere(3), 0.02, seed);
        let metric = initial_inversive_metric(&mesh).unwrap();
        let config = FlowConfig { epsilon: 1e-9, ..FlowConfig::default() };
        let out = run_flow(&mesh, &metric, &config).unwrap();
        let p = embed(&mesh, &edge_lengths(&mesh, &out.metric).unwrap()).unwrap();
        let s = 2f64.powi(k);
        let scaled = Parameterization { coords: p.coords.iter().map(|c| [c[0] * s, c[1] * s]).collect(), ..p.clone() };
        let a = analyze(&mesh, &p).unwrap();
        let b = analyze(&mesh, &scaled).unwrap();
        prop_assert_eq!(&a.histogram.counts, &b.histogram.counts);
        prop_assert_eq!(a.histogram.underflow, b.histogram.underflow);
        prop_assert_eq!(a.histogram.overflow, b.histogram.overflow);
        for (x, y) in a.angle_ratios.iter().zip(&b.angle_ratios) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn corner_samples_are_distinct_and_reproducible(n in 0usize..40, seed in any::<u64>()) {
        let mesh = shapes::disk(3, 1.0);
        let p = embed(&mesh, mesh.original_lengths()).unwrap();
        let report = analyze(&mesh, &p).unwrap();
        let a = sample_corners(&report, n, seed).unwrap();
        let b = sample_corners(&report, n, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let mut idx: Vec<usize> = a.iter().map(|&(c, _)| c).collect();
        idx.sort_unstable();
        idx.dedup();
        prop_assert_eq!(idx.len(), n);
    }

    #[test]
    fn obj_round_trip_preserves_mesh_and_uv(nx in 2usize..6, ny in 2usize..6, seed in any::<u64>()) {
        let mesh = shapes::jitter(&shapes::grid(nx, ny, 0.7), 0.1, seed);
        let uv: Vec<[f64; 2]> = mesh.positions().iter().map(|p| [p[0], p[1]]).collect();
        let data = parse_obj(&write_obj(&mesh, Some(&uv))).unwrap();
        let back_uv = data.vertex_tex_coords().unwrap();
        let back = data.into_mesh().unwrap();
        prop_assert_eq!(back.faces(), mesh.faces());
        prop_assert_eq!(back.positions(), mesh.positions());
        prop_assert_eq!(back_uv, uv);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn free_boundary_keeps_boundary_factors(seed in any::<u64>(), bump in -0.3f64..0.3) {
        let mesh = shapes::jitter(&shapes::disk(3, 1.0), 0.03, seed);
        let mut metric = initial_inversive_metric(&mesh).unwrap();
        metric.factors_mut()[0] += bump;
        let config = FlowConfig { boundary: BoundaryMode::Free, epsilon: 1e-9, ..FlowConfig::default() };
        let out = run_flow(&mesh, &metric, &config).unwrap();
        prop_assert!(out.converged());
        for v in (0..mesh.vertex_count()).filter(|&v| mesh.is_boundary_vertex(v)) {
            prop_assert_eq!(out.metric.factors()[v].to_bits(), metric.factors()[v].to_bits());
        }
    }

    #[test]
    fn flow_energy_never_increases(seed in any::<u64>()) {
        let mesh = shapes::jitter(&shapes::grid(5, 5, 1.0), 0.1, seed);
        let metric = perturbed_inversive(&mesh, &mut rng(seed), 0.2);
        let corners = shapes::grid_corners(5, 5).map(|v| (v, PI / 2.0)).to_vec();
        let config = FlowConfig { boundary: BoundaryMode::FixedCorners(corners), epsilon: 1e-7, ..FlowConfig::default() };
        let out = run_flow(&mesh, &metric, &config).unwrap();
        prop_assert!(out.converged());
        for pair in out.trace.records.windows(2) {
            prop_assert!(pair[1].energy < pair[0].energy);
        }
    }
}
