use loopbie::mesh::{self, shapes, ControlMesh, PatchKind, PatchTable};
use loopbie::surface::{
    self, regular_basis, subdivision_rows, BaseRule, SampleTable, TriangleQuadrature,
};
use loopbie::Vec3;
use proptest::prelude::*;

/// Limit positions of every vertex after `levels` global subdivisions.
fn refined_limit_points(m: &ControlMesh, levels: usize) -> Vec<Vec3> {
    let mut r = m.clone();
    for _ in 0..levels {
        r = mesh::loop_subdivide(&r).unwrap();
    }
    shapes::limit_positions(&r)
}

fn bumpy_sphere(level: usize) -> ControlMesh {
    shapes::icosphere(level)
        .map_positions(|p| p * (1.0 + 0.2 * (3.0 * p.x).sin() * (2.0 * p.y + 0.3).cos()))
}

/// Patch evaluation at dyadic parameters reproduces the limit points of the
/// globally subdivided control mesh.
#[test]
fn patch_evaluation_matches_global_subdivision() {
    for m in [
        bumpy_sphere(1),
        shapes::tetrahedron().map_positions(|p| p * 1.3 + Vec3::new(0.1, 0.0, 0.0)),
    ] {
        let t = PatchTable::build(&m).unwrap();
        let refined = refined_limit_points(t.mesh(), 3);
        let mut checked_irregular = 0;
        for (pi, p) in t.patches().iter().enumerate() {
            for i in 0..=8 {
                for j in 0..=(8 - i) {
                    let (v, w) = (i as f64 / 8.0, j as f64 / 8.0);
                    let s = surface::evaluate(&t, pi, v, w).unwrap();
                    let d = refined
                        .iter()
                        .map(|q| (q - s.position).norm())
                        .fold(f64::INFINITY, f64::min);
                    assert!(
                        d < 1e-12,
                        "patch {pi} ({v}, {w}) kind {:?}: miss {d}",
                        p.kind
                    );
                }
            }
            if p.kind != PatchKind::Regular {
                checked_irregular += 1;
            }
        }
        assert!(checked_irregular > 0);
    }
}

#[test]
fn subdivision_route_agrees_with_box_spline_at_valence_six() {
    for &(v, w) in &[
        (0.3, 0.2),
        (0.01, 0.02),
        (0.7, 0.1),
        (0.05, 0.9),
        (1e-5, 3e-6),
        (0.25, 0.25),
    ] {
        let a = regular_basis(v, w);
        let b = subdivision_rows(6, v, w);
        for d in 0..6 {
            for i in 0..12 {
                // second derivatives lose digits as 4^level close to the corner
                let rel = if d >= 3 && v + w < 1e-3 { 1e-4 } else { 1e-10 };
                let tol = rel * (1.0 + a[d][i].abs());
                assert!(
                    (a[d][i] - b.rows[d][i]).abs() < tol,
                    "d={d} i={i} ({v},{w}) {} vs {}",
                    a[d][i],
                    b.rows[d][i]
                );
            }
        }
    }
}

#[test]
fn local_schemes_exist_for_common_valences() {
    for n in 3..=12 {
        let s = surface::IrregularScheme::get(n);
        assert_eq!(s.k, n + 6);
        // rows of the subdivision matrix are affine combinations
        for i in 0..s.k {
            let sum: f64 = s.a[i * s.k..(i + 1) * s.k].iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let t = PatchTable::build(&bumpy_sphere(1)).unwrap();
    let h = 1e-5;
    for pi in [0usize, 7, 33, 60] {
        for &(v, w) in &[(0.3, 0.3), (0.1, 0.2), (0.02, 0.05), (0.6, 0.1)] {
            let s = surface::evaluate(&t, pi, v, w).unwrap();
            let sv = (surface::evaluate(&t, pi, v + h, w).unwrap().position
                - surface::evaluate(&t, pi, v - h, w).unwrap().position)
                / (2.0 * h);
            let sw = (surface::evaluate(&t, pi, v, w + h).unwrap().position
                - surface::evaluate(&t, pi, v, w - h).unwrap().position)
                / (2.0 * h);
            let scale = s.d_u.norm().max(s.d_v.norm());
            assert!(
                (sv - s.d_u).norm() < 1e-6 * scale,
                "patch {pi}: {}",
                (sv - s.d_u).norm()
            );
            assert!((sw - s.d_v).norm() < 1e-6 * scale);
        }
    }
}

#[test]
fn gradient_and_laplacian_of_linear_functions() {
    let t = PatchTable::build(&bumpy_sphere(1)).unwrap();
    let a = Vec3::new(0.3, -1.1, 0.7);
    for pi in 0..t.len() {
        let s = surface::evaluate(&t, pi, 0.21, 0.37).unwrap();
        let vals: Vec<f64> = s
            .ring
            .iter()
            .map(|&i| a.dot(&t.mesh().position(i)))
            .collect();
        let grad: Vec3 = s
            .basis_surface_gradients
            .iter()
            .zip(&vals)
            .map(|(g, f)| g * *f)
            .sum();
        let tangential = a - s.normal * a.dot(&s.normal);
        assert!((grad - tangential).norm() < 1e-10);
        let lap: f64 = s
            .basis_surface_laplacians
            .iter()
            .zip(&vals)
            .map(|(l, f)| l * f)
            .sum();
        // Laplace-Beltrami of the position vector is 2 H n
        assert!((lap - 2.0 * s.mean_curvature * a.dot(&s.normal)).abs() < 1e-8 * (1.0 + lap.abs()));
    }
}

#[test]
fn extraordinary_corner_uses_limit_masks() {
    let t = PatchTable::build(&bumpy_sphere(1)).unwrap();
    let lim = shapes::limit_positions(t.mesh());
    for (pi, p) in t.patches().iter().enumerate() {
        if let PatchKind::Irregular(_) = p.kind {
            let s = surface::evaluate(&t, pi, 0.0, 0.0).unwrap();
            assert!((s.position - lim[p.corners[0] as usize]).norm() < 1e-14);
            let near = surface::evaluate(&t, pi, 1e-7, 1e-7).unwrap();
            assert!((near.normal - s.normal).norm() < 1e-3);
        }
    }
}

#[test]
fn area_is_invariant_under_one_refinement() {
    let m = shapes::limit_sphere(2, 1.0);
    let coarse = PatchTable::build(&m).unwrap();
    let fine = PatchTable::build(&mesh::loop_subdivide(&m).unwrap()).unwrap();
    let a0 = surface::surface_area(&coarse, &TriangleQuadrature::new(3, BaseRule::Three)).unwrap();
    let a1 = surface::surface_area(&fine, &TriangleQuadrature::new(2, BaseRule::Three)).unwrap();
    assert!(((a0 - a1) / a0).abs() < 1e-12, "{a0} {a1}");
}

#[test]
fn sphere_area_and_curvature() {
    let radius = 1.7;
    let t = PatchTable::build(&shapes::limit_sphere(3, radius)).unwrap();
    let area = surface::surface_area(&t, &TriangleQuadrature::new(3, BaseRule::Three)).unwrap();
    let exact = 4.0 * std::f64::consts::PI * radius * radius;
    assert!(
        ((area - exact) / exact).abs() < 1e-3,
        "area {area} vs {exact}"
    );
    let a3 = surface::surface_area(&t, &TriangleQuadrature::new(3, BaseRule::Six)).unwrap();
    let a4 = surface::surface_area(&t, &TriangleQuadrature::new(4, BaseRule::Six)).unwrap();
    assert!(((a3 - a4) / a4).abs() < 1e-6);
    let h2 = surface::mean_curvature_max(&t, 2).unwrap();
    let h3 = surface::mean_curvature_max(&t, 3).unwrap();
    assert!(h3 >= h2);
    // Loop limit surfaces of icospheres carry curvature ripples of roughly 25%
    // next to valence-5 vertices, so the maximum sits above 1/a.
    assert!(h2 * radius > 1.0 && h2 * radius < 1.3, "curvature {h2}");
    let scaled = PatchTable::build(&shapes::limit_sphere(3, 2.0 * radius)).unwrap();
    let hs = surface::mean_curvature_max(&scaled, 2).unwrap();
    assert!((hs * 2.0 - h2).abs() < 1e-12 * h2);
}

#[test]
fn mass_matrix_row_sums_give_area() {
    let t = PatchTable::build(&bumpy_sphere(1)).unwrap();
    let tab = SampleTable::build(&t, &TriangleQuadrature::new(1, BaseRule::Six)).unwrap();
    let mut total = 0.0;
    for i in 0..tab.len() {
        let s = tab.sample(&t, i);
        total += s.wj * s.values.iter().sum::<f64>();
    }
    assert!((total - tab.area()).abs() < 1e-12 * tab.area());
}

proptest! {
    #[test]
    fn partition_of_unity_every_valence(n in 3usize..=12, v in 0.0f64..1.0, w in 0.0f64..1.0) {
        prop_assume!(v + w <= 1.0 && v + w > 1e-9);
        let r = subdivision_rows(n, v, w);
        let s0: f64 = r.row(0).iter().sum();
        prop_assert!((s0 - 1.0).abs() < 1e-12);
        for d in 1..6 {
            let sd: f64 = r.row(d).iter().sum();
            let scale: f64 = r.row(d).iter().map(|x| x.abs()).sum::<f64>().max(1.0);
            prop_assert!(sd.abs() < 1e-11 * scale, "d={} sum={}", d, sd);
        }
    }

    #[test]
    fn regular_basis_is_a_nonnegative_partition(v in 0.0f64..1.0, w in 0.0f64..1.0) {
        prop_assume!(v + w <= 1.0);
        let b = regular_basis(v, w);
        prop_assert!((b[0].iter().sum::<f64>() - 1.0).abs() < 1e-14);
        prop_assert!(b[0].iter().all(|&x| x > -1e-15));
    }

    #[test]
    fn planar_rings_give_planar_limit(n in 3usize..=10, seed in 0u64..1000, v in 0.0f64..1.0, w in 0.0f64..1.0) {
        prop_assume!(v + w <= 1.0 && v + w > 1e-9);
        let mut x = seed as f64 + 0.5;
        let mut rnd = || { x = (x * 12.9898).sin() * 43758.5453; x - x.floor() };
        let pts: Vec<Vec3> = (0..n + 6).map(|_| Vec3::new(rnd(), rnd(), 0.0)).collect();
        let r = subdivision_rows(n, v, w);
        let p: Vec3 = r.row(0).iter().zip(&pts).map(|(c, q)| q * *c).sum();
        prop_assert!(p.z.abs() < 1e-15);
    }
}
