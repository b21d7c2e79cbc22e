//! Quartic box-spline basis of a regular Loop patch.

use std::sync::OnceLock;

/// Number of monomials `v^a w^b` with `a + b <= 4`.
const NMON: usize = 15;

/// Monomial exponents in storage order.
fn monomials() -> &'static [(u32, u32); NMON] {
    static M: OnceLock<[(u32, u32); NMON]> = OnceLock::new();
    M.get_or_init(|| {
        let mut out = [(0, 0); NMON];
        let mut k = 0;
        for d in 0..=4 {
            for b in 0..=d {
                out[k] = (d - b, b);
                k += 1;
            }
        }
        out
    })
}

fn mon_index(a: u32, b: u32) -> usize {
    monomials()
        .iter()
        .position(|&m| m == (a, b))
        .expect("degree at most 4")
}

type Poly = [f64; NMON];

fn poly_mul(p: &Poly, q: &Poly) -> Poly {
    let mon = monomials();
    let mut out = [0.0; NMON];
    for (i, &(a1, b1)) in mon.iter().enumerate() {
        if p[i] == 0.0 {
            continue;
        }
        for (j, &(a2, b2)) in mon.iter().enumerate() {
            if q[j] != 0.0 && a1 + a2 + b1 + b2 <= 4 {
                out[mon_index(a1 + a2, b1 + b2)] += p[i] * q[j];
            }
        }
    }
    out
}

fn uvw_monomial(pu: u32, pv: u32, pw: u32) -> Poly {
    let mut one = [0.0; NMON];
    one[0] = 1.0;
    let mut u = [0.0; NMON];
    u[0] = 1.0;
    u[mon_index(1, 0)] = -1.0;
    u[mon_index(0, 1)] = -1.0;
    let mut v = [0.0; NMON];
    v[mon_index(1, 0)] = 1.0;
    let mut w = [0.0; NMON];
    w[mon_index(0, 1)] = 1.0;
    let mut r = one;
    for _ in 0..pu {
        r = poly_mul(&r, &u);
    }
    for _ in 0..pv {
        r = poly_mul(&r, &v);
    }
    for _ in 0..pw {
        r = poly_mul(&r, &w);
    }
    r
}

/// The twelve basis functions in the classic grid numbering, as
/// `(coefficient, power of u, power of v, power of w)` with `u = 1 - v - w`;
/// every function is divided by 12.
const TERMS: [&[(f64, u32, u32, u32)]; 12] = [
    &[(1.0, 4, 0, 0), (2.0, 3, 1, 0)],
    &[(1.0, 4, 0, 0), (2.0, 3, 0, 1)],
    &[
        (1.0, 4, 0, 0),
        (2.0, 3, 0, 1),
        (6.0, 3, 1, 0),
        (6.0, 2, 1, 1),
        (12.0, 2, 2, 0),
        (6.0, 1, 2, 1),
        (6.0, 1, 3, 0),
        (2.0, 0, 3, 1),
        (1.0, 0, 4, 0),
    ],
    &[
        (6.0, 4, 0, 0),
        (24.0, 3, 0, 1),
        (24.0, 2, 0, 2),
        (8.0, 1, 0, 3),
        (1.0, 0, 0, 4),
        (24.0, 3, 1, 0),
        (60.0, 2, 1, 1),
        (36.0, 1, 1, 2),
        (6.0, 0, 1, 3),
        (24.0, 2, 2, 0),
        (36.0, 1, 2, 1),
        (12.0, 0, 2, 2),
        (8.0, 1, 3, 0),
        (6.0, 0, 3, 1),
        (1.0, 0, 4, 0),
    ],
    &[
        (1.0, 4, 0, 0),
        (6.0, 3, 0, 1),
        (12.0, 2, 0, 2),
        (6.0, 1, 0, 3),
        (1.0, 0, 0, 4),
        (2.0, 3, 1, 0),
        (6.0, 2, 1, 1),
        (6.0, 1, 1, 2),
        (2.0, 0, 1, 3),
    ],
    &[(2.0, 1, 3, 0), (1.0, 0, 4, 0)],
    &[
        (1.0, 4, 0, 0),
        (6.0, 3, 0, 1),
        (12.0, 2, 0, 2),
        (6.0, 1, 0, 3),
        (1.0, 0, 0, 4),
        (8.0, 3, 1, 0),
        (36.0, 2, 1, 1),
        (36.0, 1, 1, 2),
        (8.0, 0, 1, 3),
        (24.0, 2, 2, 0),
        (60.0, 1, 2, 1),
        (24.0, 0, 2, 2),
        (24.0, 1, 3, 0),
        (24.0, 0, 3, 1),
        (6.0, 0, 4, 0),
    ],
    &[
        (1.0, 4, 0, 0),
        (8.0, 3, 0, 1),
        (24.0, 2, 0, 2),
        (24.0, 1, 0, 3),
        (6.0, 0, 0, 4),
        (6.0, 3, 1, 0),
        (36.0, 2, 1, 1),
        (60.0, 1, 1, 2),
        (24.0, 0, 1, 3),
        (12.0, 2, 2, 0),
        (36.0, 1, 2, 1),
        (24.0, 0, 2, 2),
        (6.0, 1, 3, 0),
        (8.0, 0, 3, 1),
        (1.0, 0, 4, 0),
    ],
    &[(2.0, 1, 0, 3), (1.0, 0, 0, 4)],
    &[(2.0, 0, 3, 1), (1.0, 0, 4, 0)],
    &[
        (2.0, 1, 0, 3),
        (1.0, 0, 0, 4),
        (6.0, 1, 1, 2),
        (6.0, 0, 1, 3),
        (6.0, 1, 2, 1),
        (12.0, 0, 2, 2),
        (2.0, 1, 3, 0),
        (6.0, 0, 3, 1),
        (1.0, 0, 4, 0),
    ],
    &[(1.0, 0, 0, 4), (2.0, 0, 1, 3)],
];

/// Grid label (0-based) of each position in the patch ring layout.
const RING_TO_GRID: [usize; 12] = [3, 6, 7, 4, 1, 0, 2, 5, 9, 10, 11, 8];

fn basis_polys() -> &'static [Poly; 12] {
    static P: OnceLock<[Poly; 12]> = OnceLock::new();
    P.get_or_init(|| {
        let mut out = [[0.0; NMON]; 12];
        for (r, &g) in RING_TO_GRID.iter().enumerate() {
            for &(c, pu, pv, pw) in TERMS[g] {
                let m = uvw_monomial(pu, pv, pw);
                for k in 0..NMON {
                    out[r][k] += c * m[k] / 12.0;
                }
            }
        }
        out
    })
}

/// Values and first and second parameter derivatives of the 12 regular basis
/// functions, in patch ring order: `[f, f_v, f_w, f_vv, f_vw, f_ww]`.
pub fn regular_basis(v: f64, w: f64) -> [[f64; 12]; 6] {
    let mon = monomials();
    // powers up to 4
    let mut pv = [1.0; 5];
    let mut pw = [1.0; 5];
    for k in 1..5 {
        pv[k] = pv[k - 1] * v;
        pw[k] = pw[k - 1] * w;
    }
    let p = |e: &[f64; 5], k: i64| if k < 0 { 0.0 } else { e[k as usize] };
    let mut mv = [[0.0; NMON]; 6];
    for (k, &(a, b)) in mon.iter().enumerate() {
        let (a, b) = (a as i64, b as i64);
        let af = a as f64;
        let bf = b as f64;
        mv[0][k] = p(&pv, a) * p(&pw, b);
        mv[1][k] = af * p(&pv, a - 1) * p(&pw, b);
        mv[2][k] = bf * p(&pv, a) * p(&pw, b - 1);
        mv[3][k] = af * (af - 1.0) * p(&pv, a - 2) * p(&pw, b);
        mv[4][k] = af * bf * p(&pv, a - 1) * p(&pw, b - 1);
        mv[5][k] = bf * (bf - 1.0) * p(&pv, a) * p(&pw, b - 2);
    }
    let polys = basis_polys();
    let mut out = [[0.0; 12]; 6];
    for (d, row) in out.iter_mut().enumerate() {
        for (i, poly) in polys.iter().enumerate() {
            row[i] = poly.iter().zip(&mv[d]).map(|(c, m)| c * m).sum();
        }
    }
    out
}
