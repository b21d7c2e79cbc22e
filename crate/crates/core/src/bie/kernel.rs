use std::f64::consts::PI;

use crate::constants::ETA0;
use crate::{Error, Result, Vec3, C64};

/// Wavenumber in rad/m under the `e^{+jwt}` convention, so `Im(kappa) <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber {
    pub kappa: C64,
    pub is_regularizer: bool,
}

impl Wavenumber {
    pub fn real(kappa: f64) -> Self {
        Wavenumber {
            kappa: C64::new(kappa, 0.0),
            is_regularizer: false,
        }
    }

    /// Complexified wavenumber `kappa - j 0.4 sigma^{2/3} kappa^{1/3}` for maximum mean curvature `sigma`.
    pub fn regularizer(kappa: f64, sigma: f64) -> Self {
        let damp = 0.4 * sigma.abs().powf(2.0 / 3.0) * kappa.cbrt();
        Wavenumber {
            kappa: C64::new(kappa, -damp),
            is_regularizer: true,
        }
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.kappa.re
    }
}

/// `exp(-j kappa r) / (4 pi r)`.
#[inline(always)]
pub fn green_value(kappa: C64, r: f64) -> C64 {
    let decay = (kappa.im * r).exp() / (4.0 * PI * r);
    let (s, c) = (kappa.re * r).sin_cos();
    C64::new(c * decay, -s * decay)
}

/// Scalar `c` with `grad_r G = c (r - r')`, given `G` at distance `dist`.
#[inline(always)]
pub fn green_gradient_factor(kappa: C64, g: C64, dist: f64) -> C64 {
    let jkr = C64::new(-kappa.im * dist, kappa.re * dist);
    -(C64::new(1.0, 0.0) + jkr) * g / (dist * dist)
}

/// Green's function and its gradient with respect to `r`.
pub fn greens(r: Vec3, rp: Vec3, kappa: Wavenumber) -> Result<(C64, [C64; 3])> {
    let d = r - rp;
    let dist = d.norm();
    if dist == 0.0 || !dist.is_finite() {
        return Err(Error::InvalidArgument(
            "coincident points in Green's function".into(),
        ));
    }
    let g = green_value(kappa.kappa, dist);
    let c = green_gradient_factor(kappa.kappa, g, dist);
    Ok((g, [c * d.x, c * d.y, c * d.z]))
}

/// Prefactors of the mixed-potential EFIE form for one wavenumber.
#[derive(Debug, Clone, Copy)]
pub struct EfieFactors {
    /// `-j kappa eta`.
    pub vector: C64,
    /// `j eta / kappa`.
    pub scalar: C64,
}

impl EfieFactors {
    pub fn new(kappa: C64) -> Self {
        let j = C64::new(0.0, 1.0);
        EfieFactors {
            vector: -j * kappa * ETA0,
            scalar: j * ETA0 / kappa,
        }
    }
}

/// The two wavenumbers of a CC-CFIER system.
#[derive(Debug, Clone, Copy)]
pub struct KernelPair {
    pub main: Wavenumber,
    pub reg: Wavenumber,
    pub f_main: EfieFactors,
    pub f_reg: EfieFactors,
}

impl KernelPair {
    pub fn new(main: Wavenumber, reg: Wavenumber) -> Self {
        KernelPair {
            main,
            reg,
            f_main: EfieFactors::new(main.kappa),
            f_reg: EfieFactors::new(reg.kappa),
        }
    }
}
