//! Far fields, radar cross sections, the Mie reference and error metrics.
//!
//! Far-field amplitudes are `E_inf = lim r e^{j kappa r} E^s`, so that
//! `E_inf(x) = -(j kappa eta / 4 pi) int J_perp(r') e^{j kappa x.r'} dr'`
//! under the `e^{+j w t}` convention.

mod mie;

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

pub use mie::{
    mie_cross_sections, mie_far_field, mie_far_field_potentials, mie_tail, mie_terms,
    pec_coefficients, spherical_jn, spherical_yn,
};

use crate::bie::PlaneWave;
use crate::constants::ETA0;
use crate::mesh::PatchTable;
use crate::surface::{SampleTable, TriangleQuadrature};
use crate::{Error, Result, Vec3, C64};

/// Far-field amplitudes on a set of directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub directions: Vec<Vec3>,
    /// Cartesian components of `E_inf` per direction.
    pub e_inf: Vec<[C64; 3]>,
    /// Incident amplitude used to normalize the cross section.
    pub incident_amplitude: f64,
}

/// Polar and azimuthal angles of a unit vector.
pub fn spherical_angles(d: Vec3) -> (f64, f64) {
    let theta = d.z.clamp(-1.0, 1.0).acos();
    let phi = if d.x.abs() + d.y.abs() < 1e-14 {
        0.0
    } else {
        d.y.atan2(d.x)
    };
    (theta, phi)
}

/// Unit vectors `theta`, `phi` of the global spherical frame at `d`.
pub fn spherical_frame(d: Vec3) -> (Vec3, Vec3) {
    let (t, p) = spherical_angles(d);
    let (st, ct) = t.sin_cos();
    let (sp, cp) = p.sin_cos();
    (Vec3::new(ct * cp, ct * sp, -st), Vec3::new(-sp, cp, 0.0))
}

fn vdot(a: Vec3, e: &[C64; 3]) -> C64 {
    e[0] * a.x + e[1] * a.y + e[2] * a.z
}

fn vnorm(e: &[C64; 3]) -> f64 {
    e.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

impl FarFieldPattern {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// `(E_theta, E_phi)` of direction `i`.
    pub fn components(&self, i: usize) -> (C64, C64) {
        let (th, ph) = spherical_frame(self.directions[i]);
        (vdot(th, &self.e_inf[i]), vdot(ph, &self.e_inf[i]))
    }

    /// Bistatic cross section `4 pi |E_inf|^2 / |E_i|^2` in square metres.
    pub fn rcs(&self, i: usize) -> f64 {
        4.0 * PI * vnorm(&self.e_inf[i]).powi(2)
            / (self.incident_amplitude * self.incident_amplitude)
    }

    pub fn rcs_dbsm(&self, i: usize) -> f64 {
        10.0 * self.rcs(i).log10()
    }

    /// Largest `|x . E_inf| / |E_inf|`.
    pub fn max_radial_fraction(&self) -> f64 {
        self.directions
            .iter()
            .zip(&self.e_inf)
            .map(|(d, e)| {
                let n = vnorm(e);
                if n == 0.0 {
                    0.0
                } else {
                    vdot(*d, e).norm() / n
                }
            })
            .fold(0.0, f64::max)
    }

    /// Comma-separated rows `(theta_deg, phi_deg, sigma_dbsm, re_Etheta, im_Etheta, re_Ephi, im_Ephi)`
    /// after a `#` metadata line.
    pub fn write_csv(&self, w: &mut impl Write, metadata: &str) -> Result<()> {
        writeln!(w, "# {metadata}")?;
        writeln!(
            w,
            "theta_deg,phi_deg,sigma_dbsm,re_Etheta,im_Etheta,re_Ephi,im_Ephi"
        )?;
        for i in 0..self.len() {
            let (t, p) = spherical_angles(self.directions[i]);
            let (et, ep) = self.components(i);
            writeln!(
                w,
                "{:.6},{:.6},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
                t.to_degrees(),
                p.to_degrees(),
                self.rcs_dbsm(i),
                et.re,
                et.im,
                ep.re,
                ep.im
            )?;
        }
        Ok(())
    }
}

/// Directions of a constant-`phi` cut, `theta = 0, step, ..., 180` degrees.
pub fn phi_cut(phi_deg: f64, step_deg: f64) -> Result<Vec<Vec3>> {
    if !(step_deg > 0.0 && step_deg <= 180.0) {
        return Err(Error::InvalidArgument(
            "cut step must lie in (0, 180] degrees".into(),
        ));
    }
    let n = (180.0 / step_deg).round() as usize;
    let (sp, cp) = phi_deg.to_radians().sin_cos();
    Ok((0..=n)
        .map(|i| {
            let (st, ct) = (i as f64 * step_deg).min(180.0).to_radians().sin_cos();
            Vec3::new(st * cp, st * sp, ct)
        })
        .collect())
}

/// Far field radiated by the current with Loop coefficients `[a1, a2]`.
pub fn far_field(
    table: &PatchTable,
    rule: &TriangleQuadrature,
    coefficients: &[C64],
    kappa: f64,
    directions: &[Vec3],
    incident_amplitude: f64,
) -> Result<FarFieldPattern> {
    let nv = table.num_vertices();
    if coefficients.len() != 2 * nv {
        return Err(Error::InvalidArgument(format!(
            "expected {} coefficients, got {}",
            2 * nv,
            coefficients.len()
        )));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument("wavenumber must be positive".into()));
    }
    let samples = SampleTable::build(table, rule)?;
    let zero = C64::new(0.0, 0.0);
    let currents: Vec<(Vec3, [C64; 3])> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let s = samples.sample(table, i);
            let mut j = [zero; 3];
            for (g, &m) in s.grads.iter().zip(s.ring) {
                let r = s.normal.cross(g);
                let (a1, a2) = (coefficients[m as usize], coefficients[nv + m as usize]);
                for c in 0..3 {
                    j[c] += (a1 * g[c] + a2 * r[c]) * s.wj;
                }
            }
            (s.position, j)
        })
        .collect();
    let pref = C64::new(0.0, -kappa * ETA0 / (4.0 * PI));
    let e_inf = directions
        .par_iter()
        .map(|&d| {
            let d = d.normalize();
            let mut acc = [zero; 3];
            for (r, j) in &currents {
                let (s, c) = (kappa * d.dot(r)).sin_cos();
                let ph = C64::new(c, s);
                for (a, b) in acc.iter_mut().zip(j) {
                    *a += b * ph;
                }
            }
            let radial = vdot(d, &acc);
            [
                pref * (acc[0] - radial * d.x),
                pref * (acc[1] - radial * d.y),
                pref * (acc[2] - radial * d.z),
            ]
        })
        .collect();
    Ok(FarFieldPattern {
        directions: directions.to_vec(),
        e_inf,
        incident_amplitude,
    })
}

/// Mie reference pattern for a PEC sphere centred at the origin.
pub fn mie_reference(
    radius: f64,
    wave: &PlaneWave,
    directions: &[Vec3],
) -> Result<FarFieldPattern> {
    Ok(FarFieldPattern {
        directions: directions.to_vec(),
        e_inf: mie_far_field(radius, wave, directions)?,
        incident_amplitude: wave.amplitude,
    })
}

/// `max |E_calc - E_ref| / max |E_ref|` over a common direction grid.
pub fn far_field_error(calc: &FarFieldPattern, reference: &FarFieldPattern) -> Result<f64> {
    if calc.len() != reference.len()
        || calc
            .directions
            .iter()
            .zip(&reference.directions)
            .any(|(a, b)| (a.normalize() - b.normalize()).norm() > 1e-12)
    {
        return Err(Error::InvalidArgument("far-field grids differ".into()));
    }
    let diff = calc
        .e_inf
        .iter()
        .zip(&reference.e_inf)
        .map(|(a, b)| vnorm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]]))
        .fold(0.0, f64::max);
    let max = reference.e_inf.iter().map(vnorm).fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::InvalidArgument(
            "reference far field vanishes".into(),
        ));
    }
    Ok(diff / max)
}

/// Scattering cross section by integrating `|E_inf|^2` over the unit sphere with
/// a Gauss-Legendre rule in `cos theta` and the trapezoidal rule in `phi`.
pub fn scattered_power(
    field: impl Fn(&[Vec3]) -> Result<Vec<[C64; 3]>>,
    amplitude: f64,
    order: usize,
) -> Result<f64> {
    let (mu, w) = crate::surface::quadrature::gauss_legendre(order);
    let nphi = 2 * order;
    let mut dirs = Vec::with_capacity(order * nphi);
    let mut wts = Vec::with_capacity(order * nphi);
    for (m, wm) in mu.iter().zip(&w) {
        let st = (1.0 - m * m).max(0.0).sqrt();
        for k in 0..nphi {
            let (sp, cp) = (2.0 * PI * k as f64 / nphi as f64).sin_cos();
            dirs.push(Vec3::new(st * cp, st * sp, *m));
            wts.push(wm * 2.0 * PI / nphi as f64);
        }
    }
    let e = field(&dirs)?;
    Ok(e.iter()
        .zip(&wts)
        .map(|(f, w)| w * vnorm(f).powi(2))
        .sum::<f64>()
        / (amplitude * amplitude))
}

/// Extinction cross section from the forward amplitude, `-(4 pi / k) Im(e . E_inf(k)) / E0`.
pub fn extinction_from_forward(wave: &PlaneWave, forward: &[C64; 3]) -> f64 {
    -(4.0 * PI / wave.kappa) * vdot(wave.polarization, forward).im / wave.amplitude
}
