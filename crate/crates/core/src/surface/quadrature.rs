//! Quadrature rules on the parameter triangle `{v, w >= 0, v + w <= 1}`.

use crate::{Error, Result};

/// Symmetric rule used inside each sub-triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseRule {
    /// Centroid, degree 1.
    One,
    /// Three interior points, degree 2.
    Three,
    /// Six points, degree 4.
    Six,
    /// Seven points, degree 5.
    Seven,
}

impl BaseRule {
    pub fn from_points(n: usize) -> Result<Self> {
        match n {
            1 => Ok(BaseRule::One),
            3 => Ok(BaseRule::Three),
            6 => Ok(BaseRule::Six),
            7 => Ok(BaseRule::Seven),
            _ => Err(Error::InvalidArgument(format!(
                "no {n}-point triangle rule"
            ))),
        }
    }

    pub fn num_points(self) -> usize {
        match self {
            BaseRule::One => 1,
            BaseRule::Three => 3,
            BaseRule::Six => 6,
            BaseRule::Seven => 7,
        }
    }

    /// Barycentric points `(v, w)` and weights summing to one.
    pub fn points(self) -> Vec<([f64; 2], f64)> {
        fn orbit(a: f64, wt: f64, out: &mut Vec<([f64; 2], f64)>) {
            let b = 1.0 - 2.0 * a;
            out.push(([a, a], wt));
            out.push(([b, a], wt));
            out.push(([a, b], wt));
        }
        let mut out = Vec::new();
        match self {
            BaseRule::One => out.push(([1.0 / 3.0, 1.0 / 3.0], 1.0)),
            BaseRule::Three => orbit(1.0 / 6.0, 1.0 / 3.0, &mut out),
            BaseRule::Six => {
                orbit(0.445_948_490_915_965, 0.223_381_589_678_011, &mut out);
                orbit(0.091_576_213_509_771, 0.109_951_743_655_322, &mut out);
            }
            BaseRule::Seven => {
                let s15 = 15f64.sqrt();
                out.push(([1.0 / 3.0, 1.0 / 3.0], 0.225));
                orbit((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0, &mut out);
                orbit((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0, &mut out);
            }
        }
        out
    }
}

/// Composite rule: the parameter triangle split `depth` times into 4^depth
/// sub-triangles, with the base rule in each.
#[derive(Debug, Clone)]
pub struct TriangleQuadrature {
    pub depth: u32,
    pub base: BaseRule,
    /// `(v, w)` nodes.
    pub points: Vec<[f64; 2]>,
    /// Weights summing to 1/2, the parameter area.
    pub weights: Vec<f64>,
}

/// Corners of the 4^depth sub-triangles.
pub fn subtriangles(depth: u32) -> Vec<[[f64; 2]; 3]> {
    let mut tris = vec![[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]];
    for _ in 0..depth {
        tris = tris.iter().flat_map(|t| split4(t)).collect();
    }
    tris
}

/// Midpoint split of a triangle into four.
pub fn split4(t: &[[f64; 2]; 3]) -> [[[f64; 2]; 3]; 4] {
    let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let (a, b, c) = (t[0], t[1], t[2]);
    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]
}

/// Signed area of a parameter triangle.
pub fn param_area(t: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]))
}

/// Maps the base rule into a sub-triangle.
pub fn rule_on(t: &[[f64; 2]; 3], base: BaseRule) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
    let area = param_area(t).abs();
    base.points().into_iter().map(move |([s, r], wt)| {
        let l0 = 1.0 - s - r;
        (
            [
                l0 * t[0][0] + s * t[1][0] + r * t[2][0],
                l0 * t[0][1] + s * t[1][1] + r * t[2][1],
            ],
            wt * area,
        )
    })
}

impl TriangleQuadrature {
    pub fn new(depth: u32, base: BaseRule) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for t in subtriangles(depth) {
            for (p, w) in rule_on(&t, base) {
                points.push(p);
                weights.push(w);
            }
        }
        TriangleQuadrature {
            depth,
            base,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|t| 0.5 * t).collect(),
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_monomial(a: u32, b: u32) -> f64 {
        // int_T v^a w^b = a! b! / (a + b + 2)!
        let f = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn base_rules_integrate_their_degree() {
        for (rule, deg) in [
            (BaseRule::One, 1),
            (BaseRule::Three, 2),
            (BaseRule::Six, 4),
            (BaseRule::Seven, 5),
        ] {
            let q = TriangleQuadrature::new(0, rule);
            for d in 0..=deg {
                for a in 0..=d {
                    let b = d - a;
                    let s: f64 = q
                        .points
                        .iter()
                        .zip(&q.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    assert!(
                        (s - exact_monomial(a, b)).abs() < 1e-14,
                        "{rule:?} v^{a} w^{b}"
                    );
                }
            }
        }
    }

    #[test]
    fn composite_rule_counts() {
        assert_eq!(TriangleQuadrature::new(2, BaseRule::Three).len(), 48);
        let q = TriangleQuadrature::new(3, BaseRule::Six);
        assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre01(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 0.1).abs() < 1e-15);
    }
}
