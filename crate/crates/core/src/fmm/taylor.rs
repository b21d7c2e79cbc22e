//! Cartesian Taylor expansions of the Helmholtz kernel for sub-wavelength boxes.

use std::f64::consts::PI;

use super::sphere::spherical_hankel2;
use crate::{Vec3, C64};

/// Multi-indices in graded order up to degree `2 p`, with the index tables
/// used by the translations. Moments and local coefficients use degree `p`.
#[derive(Debug, Clone)]
pub struct Taylor {
    pub p: usize,
    pub alpha: Vec<[usize; 3]>,
    /// Number of multi-indices of degree at most `p`.
    n_p: usize,
    lookup: Vec<usize>,
    /// `1 / alpha!`.
    pub inv_fact: Vec<f64>,
    /// `(beta, gamma, beta + gamma)` with `|beta|, |gamma| <= p`.
    pub pairs: Vec<(u32, u32, u32)>,
    /// `(mu, nu, mu + nu)` with `|mu + nu| <= p`.
    pub shifts: Vec<(u32, u32, u32)>,
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Taylor {
    pub fn new(p: usize) -> Self {
        let top = 2 * p;
        let mut alpha = Vec::new();
        for d in 0..=top {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    alpha.push([a, b, d - a - b]);
                }
            }
        }
        let n_p = alpha.iter().take_while(|a| a[0] + a[1] + a[2] <= p).count();
        let w = top + 1;
        let mut lookup = vec![usize::MAX; w * w * w];
        for (i, a) in alpha.iter().enumerate() {
            lookup[(a[0] * w + a[1]) * w + a[2]] = i;
        }
        let inv_fact = alpha
            .iter()
            .map(|a| 1.0 / (fact(a[0]) * fact(a[1]) * fact(a[2])))
            .collect();
        let mut t = Taylor {
            p,
            alpha,
            n_p,
            lookup,
            inv_fact,
            pairs: Vec::new(),
            shifts: Vec::new(),
        };
        for b in 0..n_p {
            for g in 0..n_p {
                let (x, y) = (t.alpha[b], t.alpha[g]);
                let s = t.index([x[0] + y[0], x[1] + y[1], x[2] + y[2]]) as u32;
                t.pairs.push((b as u32, g as u32, s));
                if (s as usize) < n_p {
                    t.shifts.push((b as u32, g as u32, s));
                }
            }
        }
        t
    }

    /// Number of moments or local coefficients per component.
    pub fn len(&self) -> usize {
        self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.n_p == 0
    }

    pub fn index(&self, a: [usize; 3]) -> usize {
        let w = 2 * self.p + 1;
        self.lookup[(a[0] * w + a[1]) * w + a[2]]
    }

    /// `v^alpha / alpha!` for every multi-index.
    pub fn monomials(&self, v: Vec3) -> Vec<f64> {
        let pw = |x: f64| {
            let mut out = vec![1.0; self.p + 1];
            for k in 1..=self.p {
                out[k] = out[k - 1] * x;
            }
            out
        };
        let (px, py, pz) = (pw(v.x), pw(v.y), pw(v.z));
        self.alpha[..self.n_p]
            .iter()
            .zip(&self.inv_fact)
            .map(|(a, f)| px[a[0]] * py[a[1]] * pz[a[2]] * f)
            .collect()
    }

    /// `prod (j kappa k)^alpha` for a direction `k` and complex factor `c = j kappa`.
    pub fn plane_monomials(&self, c: C64, k: Vec3) -> Vec<C64> {
        let pw = |x: f64| {
            let mut out = vec![C64::new(1.0, 0.0); self.p + 1];
            for i in 1..=self.p {
                out[i] = out[i - 1] * c * x;
            }
            out
        };
        let (px, py, pz) = (pw(k.x), pw(k.y), pw(k.z));
        self.alpha[..self.n_p]
            .iter()
            .map(|a| px[a[0]] * py[a[1]] * pz[a[2]])
            .collect()
    }

    /// Derivatives `d^alpha G(r)` of `exp(-j kappa |r|) / (4 pi |r|)` up to degree `2 p`.
    pub fn derivatives(&self, kappa: C64, r: Vec3) -> Vec<C64> {
        let p = 2 * self.p;
        let s = r.norm();
        let u = r / s;
        let ks = kappa * s;
        // F_n = (d / dt)^n of G(sqrt(2 t)) at unit distance, t = |u|^2 / 2.
        let h = spherical_hankel2(p.max(1), ks);
        let j = C64::new(0.0, 1.0);
        let f: Vec<C64> = (0..=p)
            .map(|n| -j * ks / (4.0 * PI) * (-ks * ks).powi(n as i32) * h[n] / ks.powi(n as i32))
            .collect();
        // e[i][a][m]: coefficient of h_i^a in (u_i h_i + h_i^2 / 2)^m / m!.
        let coef = |x: f64| -> Vec<Vec<f64>> {
            (0..=p)
                .map(|a| {
                    (0..=a)
                        .map(|m| {
                            if 2 * m < a {
                                0.0
                            } else {
                                let jj = a - m;
                                binom(m, jj) * x.powi((2 * m - a) as i32) * 0.5f64.powi(jj as i32)
                                    / fact(m)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let e = [coef(u.x), coef(u.y), coef(u.z)];
        self.alpha
            .iter()
            .zip(&self.inv_fact)
            .map(|(a, inv)| {
                let mut acc = C64::new(0.0, 0.0);
                for m0 in a[0].div_ceil(2)..=a[0] {
                    let c0 = e[0][a[0]][m0];
                    for m1 in a[1].div_ceil(2)..=a[1] {
                        let c01 = c0 * e[1][a[1]][m1];
                        for m2 in a[2].div_ceil(2)..=a[2] {
                            acc += f[m0 + m1 + m2] * (c01 * e[2][a[2]][m2]);
                        }
                    }
                }
                let d = a[0] + a[1] + a[2];
                acc / inv / s.powi(d as i32 + 1)
            })
            .collect()
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Adds `q (-b)^gamma / gamma!` for a source at offset `b` from the box centre.
pub fn add_moments(t: &Taylor, b: Vec3, q: &[C64], nc: usize, m: &mut [C64]) {
    let mono = t.monomials(-b);
    for (i, w) in mono.iter().enumerate() {
        for c in 0..nc {
            m[i * nc + c] += q[c] * *w;
        }
    }
}

/// Adds the moments about a centre moved by `s = new - old`.
pub fn shift_moments(t: &Taylor, m: &[C64], s: Vec3, nc: usize, out: &mut [C64]) {
    let mono = t.monomials(s);
    for &(mu, nu, g) in &t.shifts {
        let w = mono[nu as usize];
        for c in 0..nc {
            out[g as usize * nc + c] += m[mu as usize * nc + c] * w;
        }
    }
}

/// Local coefficients `L_beta += sum_gamma D_{beta + gamma} M_gamma`, `|beta|, |gamma| <= p`.
pub fn m2l(t: &Taylor, d: &[C64], m: &[C64], nc: usize, out: &mut [C64]) {
    for &(b, g, s) in &t.pairs {
        let dv = d[s as usize];
        for c in 0..nc {
            out[b as usize * nc + c] += dv * m[g as usize * nc + c];
        }
    }
}

/// Adds the local coefficients about a centre moved by `s = new - old`.
pub fn shift_local(t: &Taylor, l: &[C64], s: Vec3, nc: usize, out: &mut [C64]) {
    let mono = t.monomials(s);
    for &(mu, nu, g) in &t.shifts {
        let w = mono[nu as usize];
        for c in 0..nc {
            out[mu as usize * nc + c] += l[g as usize * nc + c] * w;
        }
    }
}

/// Potential and gradient of a local expansion at offset `a` from its centre.
pub fn evaluate_local(
    t: &Taylor,
    l: &[C64],
    a: Vec3,
    nc: usize,
    pot: &mut [C64],
    grad: &mut [[C64; 3]],
) {
    let mono = t.monomials(a);
    for (i, w) in mono.iter().enumerate() {
        for c in 0..nc {
            pot[c] += l[i * nc + c] * *w;
        }
    }
    for (i, al) in t.alpha[..t.n_p].iter().enumerate() {
        if al[0] + al[1] + al[2] == t.p {
            continue;
        }
        for dim in 0..3 {
            let mut up = *al;
            up[dim] += 1;
            let k = t.index(up);
            for c in 0..nc {
                grad[c][dim] += l[k * nc + c] * mono[i];
            }
        }
    }
}
