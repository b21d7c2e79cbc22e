use std::f64::consts::PI;

use loopbie::bie::container::{read_blocks, write_blocks};
use loopbie::bie::{
    current_overlap, dense_operators, duffy_rule, green_value, greens, tested_excitation,
    Discretization, KernelPair, OperatorSet, PlaneWave, QuadConfig, Wavenumber,
};
use loopbie::lbo;
use loopbie::linalg::{cnorm, CMat};
use loopbie::mesh::{shapes, PatchTable};
use loopbie::solver::{OpKind, Operators};
use loopbie::{Vec3, C64};
use proptest::prelude::*;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn small_problem(k: f64) -> (Discretization, KernelPair) {
    let t = PatchTable::build(&shapes::limit_sphere(0, 1.0)).unwrap();
    let sigma = loopbie::surface::mean_curvature_max(&t, 2).unwrap();
    let kp = KernelPair::new(Wavenumber::real(k), Wavenumber::regularizer(k, sigma));
    let disc = Discretization::new(t, QuadConfig::default(), 2.0 * PI / k).unwrap();
    (disc, kp)
}

/// Potential of a unit density over a flat triangle at an in-plane point:
/// sum over edges of `d (asinh(t2 / d) - asinh(t1 / d))`.
fn flat_potential(tri: &[[f64; 2]; 3], p: [f64; 2]) -> f64 {
    let mut s = 0.0;
    for e in 0..3 {
        let (a, b) = (tri[e], tri[(e + 1) % 3]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let u = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let nrm = [u[1], -u[0]];
        let d = (a[0] - p[0]) * nrm[0] + (a[1] - p[1]) * nrm[1];
        if d.abs() < 1e-14 {
            continue;
        }
        let t1 = (a[0] - p[0]) * u[0] + (a[1] - p[1]) * u[1];
        let t2 = (b[0] - p[0]) * u[0] + (b[1] - p[1]) * u[1];
        s += d * ((t2 / d).asinh() - (t1 / d).asinh());
    }
    s / (4.0 * PI)
}

#[test]
fn green_function_values_and_gradient() {
    let k = Wavenumber::regularizer(3.0, 1.2);
    let (r, rp) = (Vec3::new(0.3, -0.2, 0.5), Vec3::new(-0.1, 0.4, 0.2));
    let (g, grad) = greens(r, rp, k).unwrap();
    let d = (r - rp).norm();
    let expect = (-C64::new(0.0, 1.0) * k.kappa * d).exp() / (4.0 * PI * d);
    assert!((g - expect).norm() < 1e-15 * expect.norm());
    assert!((greens(rp, r, k).unwrap().0 - g).norm() == 0.0);
    let h = 1e-6;
    for (dim, gd) in grad.iter().enumerate() {
        let mut e = Vec3::zeros();
        e[dim] = h;
        let fd = (green_value(k.kappa, (r + e - rp).norm())
            - green_value(k.kappa, (r - e - rp).norm()))
            / (2.0 * h);
        assert!((fd - gd).norm() < 1e-7 * expect.norm());
    }
    assert!(g.norm() < 1.0 / (4.0 * PI * d));
    assert!(greens(r, r, k).is_err());
}

#[test]
fn duffy_rule_matches_flat_triangle_potential() {
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let vertex = 2f64.sqrt() * (1.0 + 2f64.sqrt()).ln() / (4.0 * PI);
    assert!((flat_potential(&tri, [0.0, 0.0]) - vertex).abs() < 1e-15);
    for apex in [[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [1.0 / 3.0, 1.0 / 3.0]] {
        let exact = flat_potential(&tri, apex);
        let quad: f64 = duffy_rule(&tri, apex, 16)
            .iter()
            .map(|(p, w)| {
                w / (4.0 * PI * ((p[0] - apex[0]).powi(2) + (p[1] - apex[1]).powi(2)).sqrt())
            })
            .sum();
        assert!(
            (quad - exact).abs() < 1e-8 * exact,
            "{apex:?}: {quad} vs {exact}"
        );
    }
    let area: f64 = duffy_rule(&tri, [0.2, 0.3], 16).iter().map(|q| q.1).sum();
    assert!((area - 0.5).abs() < 1e-8);
}

#[test]
fn duffy_rule_converges_with_order() {
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]];
    let apex = [0.45, 0.2];
    let exact = flat_potential(&tri, apex);
    let err = |n| {
        let q: f64 = duffy_rule(&tri, apex, n)
            .iter()
            .map(|(p, w)| {
                w / (4.0 * PI * ((p[0] - apex[0]).powi(2) + (p[1] - apex[1]).powi(2)).sqrt())
            })
            .sum();
        (q - exact).abs()
    };
    let e: Vec<f64> = [2, 4, 8].iter().map(|&n| err(n)).collect();
    assert!(e[1] < 0.5 * e[0] && e[2] < 0.5 * e[1], "{e:?}");
}

#[test]
fn dense_operators_structure() {
    let (disc, kp) = small_problem(PI);
    let ops = OperatorSet::assemble(&disc, kp, None).unwrap();
    let n = ops.dim();
    for m in [&ops.t, &ops.tp] {
        let asym = m.diff_norm(&m.transpose()) / m.norm();
        assert!(asym < 1e-10, "{asym:e}");
    }
    let ones: Vec<C64> = (0..n).map(|_| C64::new(1.0, 0.0)).collect();
    for op in [OpKind::T, OpKind::Tp, OpKind::K] {
        let mut y = vec![ZERO; n];
        ops.apply(op, &ones, &mut y).unwrap();
        let m = match op {
            OpKind::T => &ops.t,
            OpKind::Tp => &ops.tp,
            OpKind::K => &ops.k,
        };
        assert!(cnorm(&y) <= 1e-8 * m.norm() * cnorm(&ones), "{op:?}");
    }
    let mut e = vec![ZERO; n];
    e[5] = C64::new(1.0, 0.0);
    let mut col = vec![ZERO; n];
    ops.apply(OpKind::K, &e, &mut col).unwrap();
    assert!((0..n).all(|i| col[i] == ops.k.at(i, 5)));
    let mut short = vec![ZERO; n - 1];
    assert!(ops.apply(OpKind::T, &e, &mut short).is_err());
    let rule = lbo::default_rule();
    let gram = lbo::assemble_gram(&disc.table, &rule).unwrap();
    let stiff = lbo::assemble(&disc.table, &rule).unwrap().stiffness;
    assert!(gram.g11.max_abs_diff(&stiff) <= 1e-12 * stiff.max_abs());
    let overlap = current_overlap(&disc.table, &rule).unwrap();
    let nv = disc.num_vertices();
    let cross: f64 = (0..nv)
        .flat_map(|i| {
            overlap
                .row(i)
                .filter(|&(j, _)| j >= nv)
                .map(|(_, v)| v.abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    assert!(cross < 1e-4 * overlap.max_abs(), "{cross:e}");
}

#[test]
fn operators_are_continuous_in_wavenumber() {
    let (disc, _) = small_problem(2.0);
    let blocks = |k: f64| {
        let kp = KernelPair::new(Wavenumber::real(k), Wavenumber::regularizer(k, 1.0));
        dense_operators(&disc, &kp, None)
    };
    let (a, b, c) = (blocks(2.0), blocks(2.0 + 1e-4), blocks(2.0 + 2e-4));
    for (x, y, z) in [
        (&a.t, &b.t, &c.t),
        (&a.k, &b.k, &c.k),
        (&a.tp, &b.tp, &c.tp),
    ] {
        let (d1, d2) = (y.diff_norm(x), z.diff_norm(x));
        assert!(d1 < 1e-2 * x.norm());
        assert!((d2 / d1 - 2.0).abs() < 1e-3, "{}", d2 / d1);
    }
}

#[test]
fn container_round_trip() {
    let mut m = CMat::zeros(3, 4);
    for i in 0..3 {
        for j in 0..4 {
            *m.at_mut(i, j) = C64::new(i as f64 - 0.5 * j as f64, 1e-300 * (i * j) as f64);
        }
    }
    let kappa = C64::new(2.5, -0.1);
    let mut buf = Vec::new();
    write_blocks(
        &mut buf,
        kappa,
        &[("T", &m), ("K", &m.transpose().transpose())],
    )
    .unwrap();
    let (k2, blocks) = read_blocks(&mut buf.as_slice()).unwrap();
    assert_eq!(k2, kappa);
    assert_eq!(blocks.len(), 2);
    assert_eq!(blocks[0].0, "T");
    assert_eq!(blocks[1].1.data, m.data);
    buf[0] = b'X';
    assert!(read_blocks(&mut buf.as_slice()).is_err());
    assert!(read_blocks(&mut &b"LBIEOPS1"[..]).is_err());
}

#[test]
fn plane_wave_excitation() {
    let k = 2.0;
    assert!(PlaneWave::new(Vec3::z(), Vec3::new(0.0, 0.3, 1.0), k, 1.0).is_err());
    let wave = PlaneWave::new(-Vec3::z(), Vec3::x(), k, 2.0).unwrap();
    let r = Vec3::new(0.1, 0.2, 0.3);
    let (e, h) = (wave.e_field(r), wave.h_field(r));
    let phase = C64::new(0.0, k * 0.3).exp();
    assert!((e[0] - 2.0 * phase).norm() < 1e-14);
    assert!((h[1] * loopbie::constants::ETA0 + 2.0 * phase).norm() < 1e-12);
    let (disc, _) = small_problem(k);
    let (vt, vk) = tested_excitation(&disc.table, &disc.fine, &wave);
    let nv = disc.num_vertices();
    for v in [&vt, &vk] {
        for fam in 0..2 {
            let s: C64 = v[fam * nv..(fam + 1) * nv].iter().sum();
            assert!(s.norm() < 1e-10 * cnorm(v));
        }
    }
    let doubled = PlaneWave::new(-Vec3::z(), Vec3::x(), k, 4.0).unwrap();
    let (vt2, _) = tested_excitation(&disc.table, &disc.fine, &doubled);
    assert!(vt
        .iter()
        .zip(&vt2)
        .all(|(a, b)| (2.0 * a - b).norm() < 1e-12 * cnorm(&vt)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_function_is_reciprocal_and_decays(
        a in prop::array::uniform3(-2.0f64..2.0),
        b in prop::array::uniform3(-2.0f64..2.0),
        k in 0.1f64..20.0,
        damp in 0.0f64..3.0,
    ) {
        let (r, rp) = (Vec3::from(a), Vec3::from(b));
        prop_assume!((r - rp).norm() > 1e-3);
        let kappa = Wavenumber { kappa: C64::new(k, -damp), is_regularizer: damp > 0.0 };
        let (g1, d1) = greens(r, rp, kappa).unwrap();
        let (g2, d2) = greens(rp, r, kappa).unwrap();
        prop_assert!((g1 - g2).norm() <= 1e-15 * g1.norm());
        for i in 0..3 {
            prop_assert!((d1[i] + d2[i]).norm() <= 1e-13 * d1[i].norm().max(1e-300));
        }
        prop_assert!(g1.norm() <= 1.0 / (4.0 * PI * (r - rp).norm()) * (1.0 + 1e-14));
    }
}
