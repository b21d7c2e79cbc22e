use std::f64::consts::PI;

use loopbie::bie::{Discretization, KernelPair, OperatorSet, QuadConfig, Wavenumber};
use loopbie::fmm::sphere::{bandlimit, plane_waves, translation, SphereGrid};
use loopbie::fmm::taylor::{add_moments, evaluate_local, m2l, Taylor};
use loopbie::fmm::{
    direct_sum, edge_neighbours, error_vs_order_report, two_patch_study, Fmm, FmmConfig,
    FmmOperators, FmmTree,
};
use loopbie::mesh::{shapes, PatchTable};
use loopbie::solver::{OpKind, Operators};
use loopbie::{Vec3, C64};
use proptest::prelude::*;

const J: C64 = C64 { re: 0.0, im: 1.0 };

fn green(k: C64, d: Vec3) -> C64 {
    let r = d.norm();
    (-J * k * r).exp() / (4.0 * PI * r)
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    fn point(&mut self, scale: f64) -> Vec3 {
        Vec3::new(self.next() - 0.5, self.next() - 0.5, self.next() - 0.5) * scale
    }

    fn complex(&mut self) -> C64 {
        C64::new(self.next() - 0.5, self.next() - 0.5)
    }
}

fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn sphere_points(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = Lcg(seed);
    (0..n).map(|_| rng.point(1.0).normalize()).collect()
}

fn assert_monotone(errs: &[f64]) {
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "error increased with order: {errs:?}");
    }
}

fn adjacent(a: [i64; 3], b: [i64; 3]) -> bool {
    (0..3).all(|d| (a[d] - b[d]).abs() <= 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tree_invariants(seed in 0u64..1000, n in 1usize..300, leaf in 0.05f64..0.6) {
        let mut rng = Lcg(seed);
        let src: Vec<Vec3> = (0..n).map(|_| rng.point(1.0)).collect();
        let tgt: Vec<Vec3> = (0..n / 2 + 1).map(|_| rng.point(1.2)).collect();
        let tree = FmmTree::build(&src, &tgt, leaf, 1.0).unwrap();
        let leaves = tree.leaves();
        let total: usize = leaves.iter().map(|b| b.sources.len()).sum();
        prop_assert_eq!(total, n);
        let mut seen = vec![false; n];
        for &i in &tree.source_order {
            prop_assert!(!seen[i]);
            seen[i] = true;
        }
        let origin = tree.root_centre - Vec3::repeat(0.5 * tree.root_size);
        for b in leaves {
            for k in b.sources.clone() {
                let p = src[tree.source_order[k]];
                for d in 0..3 {
                    let lo = origin[d] + b.coord[d] as f64 * tree.leaf_size;
                    prop_assert!(p[d] >= lo - 1e-9 && p[d] <= lo + tree.leaf_size + 1e-9);
                }
            }
            for &q in &b.near {
                prop_assert!(adjacent(b.coord, leaves[q as usize].coord));
            }
        }
        for l in 1..tree.levels.len() {
            let lev = &tree.levels[l];
            let up = &tree.levels[l - 1];
            for b in &lev.boxes {
                for &s in &b.interaction {
                    let sb = &lev.boxes[s as usize];
                    prop_assert!(!adjacent(b.coord, sb.coord));
                    let (pb, ps) = (&up.boxes[b.parent.unwrap() as usize], &up.boxes[sb.parent.unwrap() as usize]);
                    prop_assert!(adjacent(pb.coord, ps.coord));
                }
            }
        }
    }

    #[test]
    fn apply_is_linear(seed in 0u64..1000, a_re in -2.0f64..2.0, a_im in -2.0f64..2.0) {
        let pts = sphere_points(400, seed);
        let k = C64::new(2.0 * PI, 0.0);
        let fmm = Fmm::new(&pts, &pts, k, 2, FmmConfig { leaf_size: 0.25, order: 4 }).unwrap();
        let mut rng = Lcg(seed + 1);
        let x: Vec<C64> = (0..800).map(|_| rng.complex()).collect();
        let y: Vec<C64> = (0..800).map(|_| rng.complex()).collect();
        let a = C64::new(a_re, a_im);
        let z: Vec<C64> = x.iter().zip(&y).map(|(u, v)| a * u + v).collect();
        let (fx, fy, fz) = (fmm.apply(&x).unwrap(), fmm.apply(&y).unwrap(), fmm.apply(&z).unwrap());
        let comb: Vec<C64> = fx.pot.iter().zip(&fy.pot).map(|(u, v)| a * u + v).collect();
        let e = rel_err(&fz.pot, &comb);
        prop_assert!(e < 1e-12, "{e:e}");
    }
}

#[test]
fn single_leaf_tree_is_direct() {
    let pts = sphere_points(300, 7);
    let k = C64::new(2.0 * PI, -0.3);
    let mut rng = Lcg(3);
    let q: Vec<C64> = (0..900).map(|_| rng.complex()).collect();
    let fmm = Fmm::new(
        &pts,
        &pts,
        k,
        3,
        FmmConfig {
            leaf_size: 10.0,
            order: 6,
        },
    )
    .unwrap();
    assert_eq!(fmm.tree.depth(), 0);
    let f = fmm.apply(&q).unwrap();
    let d = direct_sum(&pts, &pts, k, &q, 3);
    assert!(rel_err(&f.pot, &d.pot) < 1e-13);
}

#[test]
fn apply_is_deterministic() {
    let pts = sphere_points(600, 11);
    let k = C64::new(2.0 * PI, 0.0);
    let mut rng = Lcg(5);
    let q: Vec<C64> = (0..600).map(|_| rng.complex()).collect();
    let fmm = Fmm::new(
        &pts,
        &pts,
        k,
        1,
        FmmConfig {
            leaf_size: 0.125,
            order: 5,
        },
    )
    .unwrap();
    let (a, b) = (fmm.apply(&q).unwrap(), fmm.apply(&q).unwrap());
    assert_eq!(a.pot, b.pot);
    assert_eq!(a.grad, b.grad);
}

#[test]
fn fmm_matches_direct_sum() {
    let pts = sphere_points(2000, 21);
    let k = C64::new(2.0 * PI, 0.0);
    let mut rng = Lcg(9);
    let q: Vec<C64> = (0..4000).map(|_| rng.complex()).collect();
    let d = direct_sum(&pts, &pts, k, &q, 2);
    let errs: Vec<f64> = [2, 6, 10]
        .iter()
        .map(|&p| {
            rel_err(
                &Fmm::new(
                    &pts,
                    &pts,
                    k,
                    2,
                    FmmConfig {
                        leaf_size: 0.5,
                        order: p,
                    },
                )
                .unwrap()
                .apply(&q)
                .unwrap()
                .pot,
                &d.pot,
            )
        })
        .collect();
    assert_monotone(&errs);
    assert!(errs[2] < 1e-6, "{errs:?}");
}

#[test]
fn cartesian_leaves_match_direct_sum() {
    let mut rng = Lcg(33);
    let pts: Vec<Vec3> = (0..600).map(|_| rng.point(0.25)).collect();
    let k = C64::new(2.0 * PI, 0.0);
    let q: Vec<C64> = (0..600).map(|_| rng.complex()).collect();
    let d = direct_sum(&pts, &pts, k, &q, 1);
    let flat = |g: &[[C64; 3]]| g.iter().flatten().copied().collect::<Vec<_>>();
    let errs: Vec<(f64, f64)> = [4, 8, 12]
        .iter()
        .map(|&p| {
            let fmm = Fmm::new(
                &pts,
                &pts,
                k,
                1,
                FmmConfig {
                    leaf_size: 0.0625,
                    order: p,
                },
            )
            .unwrap();
            assert_eq!(fmm.tree.regime_split_level, 1);
            let f = fmm.apply(&q).unwrap();
            (
                rel_err(&f.pot, &d.pot),
                rel_err(&flat(&f.grad), &flat(&d.grad)),
            )
        })
        .collect();
    assert_monotone(&errs.iter().map(|e| e.0).collect::<Vec<_>>());
    assert!(errs[2].0 < 1e-6 && errs[2].1 < 1e-6, "{errs:?}");
}

#[test]
fn centred_source_pattern_is_constant() {
    let grid = SphereGrid::new(9);
    let k = C64::new(3.0, 0.0);
    assert!(plane_waves(&grid, k, Vec3::zeros(), 1.0)
        .iter()
        .all(|v| (v - 1.0).norm() < 1e-15));
    let a = Vec3::new(0.1, -0.2, 0.3);
    let plus = plane_waves(&grid, k, a, 1.0);
    let minus = plane_waves(&grid, k, -a, 1.0);
    for (i, d) in grid.dirs.iter().enumerate() {
        let expect = 2.0 * (k.re * d.dot(&a)).cos();
        assert!((plus[i] + minus[i] - expect).norm() < 1e-14);
    }
}

#[test]
fn spectral_translation_converges() {
    let k = C64::new(2.0 * PI, 0.0);
    let x = Vec3::new(1.0, 0.0, 0.0);
    let (a, b) = (Vec3::new(0.2, 0.1, -0.15), Vec3::new(-0.1, 0.2, 0.2));
    let exact = green(k, x + a - b);
    let errs: Vec<f64> = (1..=6)
        .map(|digits| {
            let grid = SphereGrid::new(bandlimit(k.re, 0.5 * 3f64.sqrt(), digits));
            let t = translation(&grid, k, x).unwrap();
            let shift = plane_waves(&grid, k, a - b, -1.0);
            let s: C64 = (0..grid.len())
                .map(|i| grid.weights[i] * shift[i] * t[i])
                .sum();
            (s - exact).norm() / exact.norm()
        })
        .collect();
    assert_monotone(&errs);
    assert!(errs[5] < 1e-6, "{errs:?}");
    assert!(translation(&SphereGrid::new(4), k, Vec3::zeros()).is_err());
}

#[test]
fn cartesian_translation_converges() {
    let k = C64::new(2.0 * PI, 0.0);
    let w = 0.0625;
    let x = Vec3::new(2.0 * w, w, 0.0);
    let mut rng = Lcg(4);
    let pairs: Vec<(Vec3, Vec3)> = (0..40).map(|_| (rng.point(w), rng.point(w))).collect();
    let errs: Vec<f64> = (1..=13)
        .map(|p| {
            let t = Taylor::new(p);
            let d = t.derivatives(k, x);
            pairs
                .iter()
                .map(|&(a, b)| {
                    let mut m = vec![C64::new(0.0, 0.0); t.len()];
                    add_moments(&t, b, &[C64::new(1.0, 0.0)], 1, &mut m);
                    let mut l = vec![C64::new(0.0, 0.0); t.len()];
                    m2l(&t, &d, &m, 1, &mut l);
                    let (mut pot, mut grad) = ([C64::new(0.0, 0.0)], [[C64::new(0.0, 0.0); 3]]);
                    evaluate_local(&t, &l, a, 1, &mut pot, &mut grad);
                    let exact = green(k, x + a - b);
                    (pot[0] - exact).norm() / exact.norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    assert_monotone(&errs);
    assert!(errs[12] < 1e-6, "{errs:?}");
}

fn two_patch_setup() -> (PatchTable, usize, usize, KernelPair, f64) {
    let t = PatchTable::build(&shapes::limit_sphere(2, 1.0)).unwrap();
    let (a, b) = edge_neighbours(&t).unwrap();
    let shared: Vec<u32> = t
        .patch(a)
        .corners
        .iter()
        .filter(|c| t.patch(b).corners.contains(c))
        .copied()
        .collect();
    let m = t.mesh();
    let lam = 4.0 * (m.position(shared[0]) - m.position(shared[1])).norm();
    let k = 2.0 * PI / lam;
    (
        t,
        a,
        b,
        KernelPair::new(Wavenumber::real(k), Wavenumber::real(k)),
        lam,
    )
}

#[test]
fn two_patch_study_converges_monotonically() {
    let (t, a, b, kp, lam) = two_patch_setup();
    for frac in [0.125, 0.0625] {
        let rows =
            two_patch_study(&t, a, b, &kp, frac * lam, &(1..=10).collect::<Vec<_>>()).unwrap();
        let errs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        assert_monotone(&errs);
        assert!(errs[9] < 1e-6, "{frac}: {errs:?}");
        let report = error_vs_order_report(&rows);
        assert!(report.starts_with("p,error\n1,"));
        assert_eq!(report.lines().count(), 11);
    }
}

#[test]
fn fmm_operators_match_dense() {
    let t = PatchTable::build(&shapes::limit_sphere(0, 1.0)).unwrap();
    let lam = 0.5;
    let k = 2.0 * PI / lam;
    let sigma = loopbie::surface::mean_curvature_max(&t, 2).unwrap();
    let kp = KernelPair::new(Wavenumber::real(k), Wavenumber::regularizer(k, sigma));
    let disc = Discretization::new(t.clone(), QuadConfig::default(), lam).unwrap();
    let dense = OperatorSet::assemble(&disc, kp, None).unwrap();
    let n = 2 * t.num_vertices();
    let mut rng = Lcg(77);
    let x: Vec<C64> = (0..n).map(|_| rng.complex()).collect();
    let apply = |ops: &dyn Operators, op| {
        let mut y = vec![C64::new(0.0, 0.0); n];
        ops.apply(op, &x, &mut y).unwrap();
        y
    };
    let whole = FmmOperators::new(
        &disc,
        kp,
        None,
        FmmConfig {
            leaf_size: 10.0,
            order: 4,
        },
    )
    .unwrap();
    let fast = FmmOperators::new(
        &disc,
        kp,
        None,
        FmmConfig {
            leaf_size: 0.5 * lam,
            order: 10,
        },
    )
    .unwrap();
    assert!(fast.fmm.tree.depth() > 1);
    for op in [OpKind::T, OpKind::Tp, OpKind::K] {
        let reference = apply(&dense, op);
        assert!(rel_err(&apply(&whole, op), &reference) < 1e-13);
        let e = rel_err(&apply(&fast, op), &reference);
        assert!(e < 1e-6, "{op:?}: {e:e}");
    }
    let mut short = vec![C64::new(0.0, 0.0); n - 1];
    assert!(fast.apply(OpKind::T, &x[1..], &mut short).is_err());
}

#[test]
fn invalid_configurations_are_rejected() {
    let pts = sphere_points(10, 1);
    let k = C64::new(1.0, 0.0);
    assert!(Fmm::new(
        &pts,
        &pts,
        k,
        1,
        FmmConfig {
            leaf_size: 0.0,
            order: 4
        }
    )
    .is_err());
    assert!(Fmm::new(
        &pts,
        &pts,
        k,
        1,
        FmmConfig {
            leaf_size: 0.5,
            order: 0
        }
    )
    .is_err());
    assert!(Fmm::new(
        &pts,
        &pts,
        C64::new(1.0, 0.5),
        1,
        FmmConfig {
            leaf_size: 0.5,
            order: 4
        }
    )
    .is_err());
    let fmm = Fmm::new(
        &pts,
        &pts,
        k,
        1,
        FmmConfig {
            leaf_size: 0.5,
            order: 4,
        },
    )
    .unwrap();
    assert!(fmm.apply(&[C64::new(1.0, 0.0); 3]).is_err());
}
