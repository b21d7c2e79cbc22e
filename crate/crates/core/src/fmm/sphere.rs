//! Plane-wave expansions on the unit sphere.

use std::f64::consts::PI;

use crate::surface::quadrature::gauss_legendre;
use crate::{Error, Result, Vec3, C64};

/// Spherical Hankel functions of the second kind `h_0..=h_n` at complex argument.
pub fn spherical_hankel2(n: usize, z: C64) -> Vec<C64> {
    let j = C64::new(0.0, 1.0);
    let e = (-j * z).exp();
    let mut h = vec![j * e / z, e * (j / (z * z) - 1.0 / z)];
    for k in 1..n {
        let next = h[k] * ((2 * k + 1) as f64) / z - h[k - 1];
        h.push(next);
    }
    h.truncate(n + 1);
    h
}

/// Legendre polynomials `P_0..=P_n` at `x`.
pub fn legendre(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0, x];
    for k in 1..n {
        p.push(((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64);
    }
    p.truncate(n + 1);
    p
}

/// Orthonormal associated Legendre functions, `out[m][n - m]` for `0 <= m <= n <= l`,
/// such that `P(n, m, cos theta) e^{i m phi}` are orthonormal on the sphere.
pub fn assoc_legendre(l: usize, x: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut out = Vec::with_capacity(l + 1);
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=l {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        let mut col = vec![pmm];
        if m < l {
            col.push((2.0 * m as f64 + 3.0).sqrt() * x * pmm);
        }
        for n in m + 2..=l {
            let (nf, mf) = (n as f64, m as f64);
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0))
                .sqrt();
            let v = a * (x * col[n - m - 1] - b * col[n - m - 2]);
            col.push(v);
        }
        out.push(col);
    }
    out
}

/// Gauss-Legendre by uniform sampling of the unit sphere, exact for spherical
/// polynomials of degree `2 l + 1`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub l: usize,
    pub mu: Vec<f64>,
    pub mu_weights: Vec<f64>,
    pub nphi: usize,
    /// Directions, `dirs[i * nphi + j]`.
    pub dirs: Vec<Vec3>,
    /// Quadrature weights summing to `4 pi`.
    pub weights: Vec<f64>,
    /// `legendre[i]` = orthonormal associated Legendre table at `mu[i]`.
    legendre: Vec<Vec<Vec<f64>>>,
}

impl SphereGrid {
    pub fn new(l: usize) -> Self {
        let (mu, mu_weights) = gauss_legendre(l + 1);
        let nphi = 2 * l + 2;
        let mut dirs = Vec::with_capacity(mu.len() * nphi);
        let mut weights = Vec::with_capacity(mu.len() * nphi);
        for (m, w) in mu.iter().zip(&mu_weights) {
            let st = (1.0 - m * m).max(0.0).sqrt();
            for j in 0..nphi {
                let (sp, cp) = (2.0 * PI * j as f64 / nphi as f64).sin_cos();
                dirs.push(Vec3::new(st * cp, st * sp, *m));
                weights.push(w * 2.0 * PI / nphi as f64);
            }
        }
        let legendre = mu.iter().map(|&m| assoc_legendre(l, m)).collect();
        SphereGrid {
            l,
            mu,
            mu_weights,
            nphi,
            dirs,
            weights,
            legendre,
        }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
}

/// Band-limited transfer of `nc`-component samples between two grids by a
/// spherical harmonic transform truncated at the smaller degree.
pub fn resample(from: &SphereGrid, to: &SphereGrid, data: &[C64], nc: usize) -> Vec<C64> {
    let lmin = from.l.min(to.l);
    let nm = 2 * lmin + 1;
    let zero = C64::new(0.0, 0.0);
    let twiddle = |nphi: usize, sign: f64| -> Vec<C64> {
        (0..nphi)
            .flat_map(|j| {
                (0..nm).map(move |mi| {
                    let m = mi as f64 - lmin as f64;
                    let a = sign * m * 2.0 * PI * j as f64 / nphi as f64;
                    C64::new(a.cos(), a.sin())
                })
            })
            .collect()
    };
    let fwd = twiddle(from.nphi, -1.0);
    let dphi = 2.0 * PI / from.nphi as f64;
    // coef[(mi * (lmin + 1) + n) * nc + c]
    let mut coef = vec![zero; nm * (lmin + 1) * nc];
    let mut row = vec![zero; nm * nc];
    for (i, w) in from.mu_weights.iter().enumerate() {
        row.iter_mut().for_each(|v| *v = zero);
        for j in 0..from.nphi {
            let src = &data[(i * from.nphi + j) * nc..(i * from.nphi + j + 1) * nc];
            for mi in 0..nm {
                let t = fwd[j * nm + mi];
                for c in 0..nc {
                    row[mi * nc + c] += src[c] * t;
                }
            }
        }
        let leg = &from.legendre[i];
        for mi in 0..nm {
            let m = (mi as i64 - lmin as i64).unsigned_abs() as usize;
            for n in m..=lmin {
                let p = leg[m][n - m] * w * dphi;
                for c in 0..nc {
                    coef[(mi * (lmin + 1) + n) * nc + c] += row[mi * nc + c] * p;
                }
            }
        }
    }
    let inv = twiddle(to.nphi, 1.0);
    let mut out = vec![zero; to.len() * nc];
    for i in 0..to.mu.len() {
        let leg = &to.legendre[i];
        row.iter_mut().for_each(|v| *v = zero);
        for mi in 0..nm {
            let m = (mi as i64 - lmin as i64).unsigned_abs() as usize;
            for n in m..=lmin {
                let p = leg[m][n - m];
                for c in 0..nc {
                    row[mi * nc + c] += coef[(mi * (lmin + 1) + n) * nc + c] * p;
                }
            }
        }
        for j in 0..to.nphi {
            let dst = &mut out[(i * to.nphi + j) * nc..(i * to.nphi + j + 1) * nc];
            for mi in 0..nm {
                let t = inv[j * nm + mi];
                for c in 0..nc {
                    dst[c] += row[mi * nc + c] * t;
                }
            }
        }
    }
    out
}

/// Excess-bandwidth rule `kappa d + 1.8 p^{2/3} (kappa d)^{1/3}` for a box of diagonal `d`.
pub fn bandlimit(kappa: f64, diagonal: f64, digits: usize) -> usize {
    let kd = kappa * diagonal;
    (kd + 1.8 * (digits as f64).powf(2.0 / 3.0) * kd.cbrt())
        .ceil()
        .max(1.0) as usize
}

/// Largest bandlimit whose translation operator at centre distance
/// `separation` keeps the cancellation error below `1e-6`.
pub fn stable_bandlimit(kappa: f64, separation: f64) -> usize {
    let h = spherical_hankel2(200, C64::new(kappa * separation, 0.0));
    let h0 = h[0].norm();
    (1..h.len())
        .take_while(|&n| f64::EPSILON * (2 * n + 1) as f64 * h[n].norm() <= 1e-6 * h0)
        .last()
        .unwrap_or(1)
}

/// Diagonal translation operator from a source centre to an observer centre at
/// offset `x`, including the factor `-j kappa / (16 pi^2)`, sampled on `grid`
/// and truncated at degree `grid.l`.
pub fn translation(grid: &SphereGrid, kappa: C64, x: Vec3) -> Result<Vec<C64>> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::InvalidArgument(
            "translation between coincident centres".into(),
        ));
    }
    let h = spherical_hankel2(grid.l, kappa * r);
    if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical(format!(
            "translation operator overflows at degree {}",
            grid.l
        )));
    }
    let mj = C64::new(0.0, -1.0);
    let pre = C64::new(0.0, -1.0) * kappa / (16.0 * PI * PI);
    let coef: Vec<C64> = (0..=grid.l)
        .map(|n| mj.powi(n as i32) * (2 * n + 1) as f64 * h[n] * pre)
        .collect();
    let xh = x / r;
    Ok(grid
        .dirs
        .iter()
        .map(|d| {
            legendre(grid.l, d.dot(&xh))
                .iter()
                .zip(&coef)
                .map(|(p, c)| c * p)
                .sum()
        })
        .collect())
}

/// `e^{s j kappa k.v}` at every grid direction.
pub fn plane_waves(grid: &SphereGrid, kappa: C64, v: Vec3, sign: f64) -> Vec<C64> {
    let j = C64::new(0.0, sign);
    grid.dirs
        .iter()
        .map(|d| (j * kappa * d.dot(&v)).exp())
        .collect()
}
