use loopbie::lbo::{self, EnvelopeLdl};
use loopbie::mesh::{shapes, PatchTable};
use proptest::prelude::*;

fn sphere_lbo(level: usize, radius: f64) -> (PatchTable, lbo::LboMatrices) {
    let t = PatchTable::build(&shapes::limit_sphere(level, radius)).unwrap();
    let m = lbo::assemble(&t, &lbo::default_rule()).unwrap();
    (t, m)
}

#[test]
fn structural_identities() {
    let (t, m) = sphere_lbo(2, 1.3);
    let n = t.num_vertices();
    let ones = vec![1.0; n];
    let mut a1 = vec![0.0; n];
    m.stiffness.matvec(&ones, &mut a1);
    assert!(a1.iter().all(|x| x.abs() < 1e-12 * m.stiffness.max_abs()));
    let area: f64 = m.mass.data.iter().sum();
    let exact = lbo::default_rule();
    let sampled = loopbie::surface::surface_area(&t, &exact).unwrap();
    assert!((area - sampled).abs() < 1e-10 * sampled);
    let g = lbo::assemble_gram(&t, &lbo::default_rule()).unwrap();
    assert!(g.g11.max_abs_diff(&m.stiffness) <= 1e-12 * m.stiffness.max_abs());
    assert!(g.g22.max_abs_diff(&m.stiffness) <= 1e-12 * m.stiffness.max_abs());
    // symmetry
    for i in 0..n {
        for (j, v) in m.stiffness.row(i) {
            assert!((v - m.stiffness.get(j, i)).abs() < 1e-14 * m.stiffness.max_abs());
        }
    }
}

#[test]
fn sphere_spectrum_matches_spherical_harmonics() {
    let radius = 0.8;
    let (_, m) = sphere_lbo(3, radius);
    let h = lbo::solve_dense(&m.stiffness, &m.mass, 30).unwrap();
    assert!(h.eigenvalues[0].abs() < 1e-9);
    let mut idx = 1;
    for l in 1..=4usize {
        let exact = (l * (l + 1)) as f64 / (radius * radius);
        for _ in 0..(2 * l + 1) {
            let rel = (h.eigenvalues[idx] - exact).abs() / exact;
            assert!(rel < 0.01, "l={l} got {} want {exact}", h.eigenvalues[idx]);
            idx += 1;
        }
    }
    assert!(h.b_orthonormality_error(&m.mass) < 1e-8);
    assert!(h.a_diagonal_error(&m.stiffness) < 1e-8 * h.eigenvalues.last().unwrap());
}

#[test]
fn lanczos_bands_agree_with_dense() {
    let (_, m) = sphere_lbo(2, 1.0);
    let dense = lbo::solve_dense(&m.stiffness, &m.mass, 60).unwrap();
    let lz = lbo::solve_lanczos(&m.stiffness, &m.mass, 60, 16).unwrap();
    for (a, b) in dense.eigenvalues.iter().zip(&lz.eigenvalues) {
        assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()), "{a} vs {b}");
    }
    assert!(lz.b_orthonormality_error(&m.mass) < 1e-8);
}

#[test]
fn envelope_factorization_solves_spd_system() {
    let (_, m) = sphere_lbo(2, 1.0);
    let n = m.mass.rows;
    let perm = lbo::rcm_order(&m.stiffness);
    let ldl = EnvelopeLdl::factor(&m.mass, perm).unwrap();
    let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut b = vec![0.0; n];
    m.mass.matvec(&x, &mut b);
    let y = ldl.solve(&b);
    let err = x
        .iter()
        .zip(&y)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-10);
    assert_eq!(ldl.negative_pivots(), 0);
}

#[test]
fn transform_of_a_single_mode() {
    let (_, m) = sphere_lbo(2, 1.0);
    let h = lbo::solve_dense(&m.stiffness, &m.mass, 40).unwrap();
    let f: Vec<f64> = h.basis.column(7).iter().copied().collect();
    let c = h.forward(&m.mass, &f);
    for (i, ci) in c.iter().enumerate() {
        let want = if i == 7 { 1.0 } else { 0.0 };
        assert!((ci - want).abs() < 1e-10);
    }
}

#[test]
fn full_basis_reconstruction_is_exact() {
    let (t, m) = sphere_lbo(1, 1.0);
    let n = t.num_vertices();
    let h = lbo::solve_dense(&m.stiffness, &m.mass, n).unwrap();
    let a1: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 3.0).collect();
    let a2: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).cos()).collect();
    let e = lbo::reconstruction_error(&h, &m.stiffness, &m.mass, &a1, &a2, n - 1).unwrap();
    assert!(e < 1e-12, "{e}");
    let mut prev = f64::INFINITY;
    for mm in [5, 10, 20, 30] {
        let e = lbo::reconstruction_error(&h, &m.stiffness, &m.mass, &a1, &a2, mm).unwrap();
        assert!(e <= prev);
        prev = e;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn parseval_and_two_routes(seed in 0u64..10_000) {
        let (t, m) = sphere_lbo(1, 1.0);
        let n = t.num_vertices();
        let h = lbo::solve_dense(&m.stiffness, &m.mass, n).unwrap();
        let mut x = seed as f64 + 0.1;
        let mut rnd = || { x = (x * 78.233).sin() * 43758.5453; x - x.floor() - 0.5 };
        let a1: Vec<f64> = (0..n).map(|_| rnd()).collect();
        let a2: Vec<f64> = (0..n).map(|_| rnd()).collect();
        let (v1, v2) = lbo::current_mht(&h, &m.mass, &a1, &a2).unwrap();
        let (w1, w2) = lbo::current_mht_a_form(&h, &m.stiffness, &a1, &a2).unwrap();
        let norm: f64 = v1.iter().chain(&v2).map(|x| x * x).sum::<f64>().sqrt();
        for (p, q) in v1.iter().chain(&v2).zip(w1.iter().chain(&w2)) {
            prop_assert!((p - q).abs() < 1e-10 * norm);
        }
        let energy = |a: &[f64]| { let mut y = vec![0.0; n]; m.stiffness.matvec(a, &mut y); y.iter().zip(a).map(|(p, q)| p * q).sum::<f64>() };
        let parseval: f64 = v1.iter().chain(&v2).map(|x| x * x).sum();
        prop_assert!((parseval - energy(&a1) - energy(&a2)).abs() < 1e-10 * parseval);
    }
}
