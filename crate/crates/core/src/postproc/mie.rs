//! Mie series for plane-wave scattering by a perfectly conducting sphere.
//!
//! Two independent evaluations are provided. `mie_far_field` follows the
//! scattering-amplitude form with `e^{-i w t}` Riccati-Bessel functions and
//! angular functions `pi_n`, `tau_n`, converted to `e^{+j w t}` at the end.
//! `mie_far_field_potentials` expands the fields in radial Debye potentials
//! directly under `e^{+j w t}` with second-kind Hankel functions and Legendre
//! polynomials.

use std::f64::consts::PI;

use crate::bie::PlaneWave;
use crate::{Error, Result, Vec3, C64};

/// Series truncation `ka + 4 (ka)^{1/3} + 10`.
pub fn mie_terms(ka: f64) -> usize {
    (ka + 4.0 * ka.cbrt() + 10.0).ceil() as usize
}

/// Spherical Bessel functions `j_0..=j_n` by normalized downward recurrence.
pub fn spherical_jn(n: usize, x: f64) -> Vec<f64> {
    let start = n + 20 + (40.0 * (n as f64 + x)).sqrt() as usize + x as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = (2 * k + 1) as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let scale = if j0.abs() >= j1.abs() {
        j0 / vals[0]
    } else {
        j1 / vals[1]
    };
    vals.truncate(n + 1);
    vals.iter_mut().for_each(|v| *v *= scale);
    vals
}

/// Spherical Bessel functions of the second kind `y_0..=y_n` by upward recurrence.
pub fn spherical_yn(n: usize, x: f64) -> Vec<f64> {
    let mut y = vec![-x.cos() / x, -x.cos() / (x * x) - x.sin() / x];
    for k in 1..n {
        let next = (2 * k + 1) as f64 / x * y[k] - y[k - 1];
        y.push(next);
    }
    y.truncate(n + 1);
    y
}

/// Coefficients `(a_n, b_n)`, `n = 1..=n_max`, in the `e^{-i w t}` convention.
pub fn pec_coefficients(x: f64, n_max: usize) -> Vec<(C64, C64)> {
    let j = spherical_jn(n_max, x);
    let y = spherical_yn(n_max, x);
    let psi: Vec<f64> = j.iter().map(|v| x * v).collect();
    let xi: Vec<C64> = j
        .iter()
        .zip(&y)
        .map(|(a, b)| C64::new(x * a, x * b))
        .collect();
    (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            let dpsi = psi[n - 1] - nf * psi[n] / x;
            let dxi = xi[n - 1] - xi[n] * (nf / x);
            (dpsi / dxi, psi[n] / xi[n])
        })
        .collect()
}

/// Local frame `(e1, e2, e3) = (polarization, k x e, direction)`.
fn frame(wave: &PlaneWave) -> (Vec3, Vec3, Vec3) {
    let e3 = wave.direction;
    let e1 = wave.polarization;
    (e1, e3.cross(&e1), e3)
}

/// Scattering angle and azimuth of `dir`, with the local unit vectors `theta`, `phi`.
fn angles(wave: &PlaneWave, dir: Vec3) -> (f64, f64, Vec3, Vec3) {
    let (e1, e2, e3) = frame(wave);
    let d = dir.normalize();
    let mu = d.dot(&e3).clamp(-1.0, 1.0);
    let (p1, p2) = (d.dot(&e1), d.dot(&e2));
    let phi = if p1.abs() + p2.abs() < 1e-14 {
        0.0
    } else {
        p2.atan2(p1)
    };
    let theta = mu.acos();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let th = ct * cp * e1 + ct * sp * e2 - st * e3;
    let ph = -sp * e1 + cp * e2;
    (mu, phi, th, ph)
}

fn combine(th: Vec3, ph: Vec3, et: C64, ep: C64) -> [C64; 3] {
    [
        th.x * et + ph.x * ep,
        th.y * et + ph.y * ep,
        th.z * et + ph.z * ep,
    ]
}

fn check(radius: f64, wave: &PlaneWave) -> Result<()> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(
            "sphere radius must be positive".into(),
        ));
    }
    PlaneWave::new(
        wave.direction,
        wave.polarization,
        wave.kappa,
        wave.amplitude,
    )
    .map(|_| ())
}

/// Far-field amplitudes `r e^{j k r} E^s` of a PEC sphere of `radius` centred at the origin.
pub fn mie_far_field(radius: f64, wave: &PlaneWave, directions: &[Vec3]) -> Result<Vec<[C64; 3]>> {
    check(radius, wave)?;
    let k = wave.kappa;
    let x = k * radius;
    let n_max = mie_terms(x);
    let coef = pec_coefficients(x, n_max);
    let jk = C64::new(0.0, k);
    Ok(directions
        .iter()
        .map(|&d| {
            let (mu, phi, th, ph) = angles(wave, d);
            let (mut pi_prev, mut pi) = (0.0, 1.0);
            let mut s1 = C64::new(0.0, 0.0);
            let mut s2 = C64::new(0.0, 0.0);
            for (i, &(a, b)) in coef.iter().enumerate() {
                let n = (i + 1) as f64;
                let tau = n * mu * pi - (n + 1.0) * pi_prev;
                let f = (2.0 * n + 1.0) / (n * (n + 1.0));
                s1 += f * (a * pi + b * tau);
                s2 += f * (a * tau + b * pi);
                let next = ((2.0 * n + 1.0) * mu * pi - (n + 1.0) * pi_prev) / n;
                pi_prev = pi;
                pi = next;
            }
            let et = phi.cos() * s2.conj() / jk * wave.amplitude;
            let ep = -phi.sin() * s1.conj() / jk * wave.amplitude;
            combine(th, ph, et, ep)
        })
        .collect())
}

/// Riccati-Bessel `J_n = x j_n` from logarithmic derivatives computed downward.
fn riccati_j(n_max: usize, x: f64) -> Vec<f64> {
    let start = n_max + 20 + (2.0 * x) as usize;
    let mut d = vec![0.0; start + 1];
    for n in (1..=start).rev() {
        let r = n as f64 / x;
        d[n - 1] = r - 1.0 / (d[n] + r);
    }
    let j0 = x.sin();
    let j1 = x.sin() / x - x.cos();
    let mut out = vec![0.0; n_max + 1];
    if j0.abs() >= j1.abs() {
        out[0] = j0;
        for n in 1..=n_max {
            out[n] = out[n - 1] / (d[n] + n as f64 / x);
        }
    } else {
        out[0] = j1 * (d[1] + 1.0 / x);
        out[1] = j1;
        for n in 2..=n_max {
            out[n] = out[n - 1] / (d[n] + n as f64 / x);
        }
    }
    out
}

/// Same amplitudes from the Debye potential expansion.
pub fn mie_far_field_potentials(
    radius: f64,
    wave: &PlaneWave,
    directions: &[Vec3],
) -> Result<Vec<[C64; 3]>> {
    check(radius, wave)?;
    let k = wave.kappa;
    let x = k * radius;
    let n_max = mie_terms(x);
    let jr = riccati_j(n_max, x);
    let mut yr = vec![-x.cos(), -x.cos() / x - x.sin()];
    for n in 1..n_max {
        let next = (2 * n + 1) as f64 / x * yr[n] - yr[n - 1];
        yr.push(next);
    }
    let h2: Vec<C64> = jr.iter().zip(&yr).map(|(a, b)| C64::new(*a, -*b)).collect();
    let j = C64::new(0.0, 1.0);
    let terms: Vec<(C64, C64)> = (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            let a = j.powi(-(n as i32)) * (2.0 * nf + 1.0) / (nf * (nf + 1.0));
            let dj = jr[n - 1] - nf * jr[n] / x;
            let dh = h2[n - 1] - h2[n] * (nf / x);
            let b = -a * dj / dh;
            let c = -a * jr[n] / h2[n];
            let jp = j.powi(n as i32 + 1);
            (jp * b, jp * c)
        })
        .collect();
    Ok(directions
        .iter()
        .map(|&d| {
            let (mu, phi, th, ph) = angles(wave, d);
            let (mut p_prev, mut p) = (1.0, mu);
            let (mut dp_prev, mut dp) = (0.0, 1.0);
            let mut et = C64::new(0.0, 0.0);
            let mut ep = C64::new(0.0, 0.0);
            for (i, &(b, c)) in terms.iter().enumerate() {
                let n = (i + 1) as f64;
                let dtheta = mu * dp - n * (n + 1.0) * p;
                et += b * dtheta - c * dp;
                ep += -b * dp + c * dtheta;
                let p_next = ((2.0 * n + 1.0) * mu * p - n * p_prev) / (n + 1.0);
                let dp_next = dp_prev + (2.0 * n + 1.0) * p;
                p_prev = p;
                p = p_next;
                dp_prev = dp;
                dp = dp_next;
            }
            let s = wave.amplitude / k;
            combine(th, ph, -et * phi.cos() * s, ep * phi.sin() * s)
        })
        .collect())
}

/// Scattering and extinction cross sections of a PEC sphere from the series.
pub fn mie_cross_sections(radius: f64, kappa: f64) -> (f64, f64) {
    let x = kappa * radius;
    let coef = pec_coefficients(x, mie_terms(x));
    let mut sca = 0.0;
    let mut ext = 0.0;
    for (i, (a, b)) in coef.iter().enumerate() {
        let w = (2 * i + 3) as f64;
        sca += w * (a.norm_sqr() + b.norm_sqr());
        ext += w * (a + b).re;
    }
    let f = 2.0 * PI / (kappa * kappa);
    (f * sca, f * ext)
}

/// Largest `|a_n| + |b_n|` among the last three retained terms relative to the largest term.
pub fn mie_tail(radius: f64, kappa: f64) -> f64 {
    let x = kappa * radius;
    let coef = pec_coefficients(x, mie_terms(x));
    let size = |c: &(C64, C64)| c.0.norm() + c.1.norm();
    let max = coef.iter().map(size).fold(0.0, f64::max);
    coef.iter().rev().take(3).map(size).fold(0.0, f64::max) / max
}
