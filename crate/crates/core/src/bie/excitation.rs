use crate::constants::ETA0;
use crate::mesh::PatchTable;
use crate::surface::SampleTable;
use crate::{Error, Result, Vec3, C64};

/// Incident plane wave `E = E0 e exp(-j kappa k.r)`, `H = k x E / eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub direction: Vec3,
    pub polarization: Vec3,
    pub kappa: f64,
    pub amplitude: f64,
}

impl PlaneWave {
    /// Checks that direction and polarization are orthonormal.
    pub fn new(direction: Vec3, polarization: Vec3, kappa: f64, amplitude: f64) -> Result<Self> {
        let ok = (direction.norm() - 1.0).abs() < 1e-12
            && (polarization.norm() - 1.0).abs() < 1e-12
            && direction.dot(&polarization).abs() < 1e-12;
        if !ok {
            return Err(Error::InvalidArgument(
                "plane wave direction and polarization must be orthonormal".into(),
            ));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidArgument(
                "plane wave wavenumber must be positive".into(),
            ));
        }
        Ok(PlaneWave {
            direction,
            polarization,
            kappa,
            amplitude,
        })
    }

    fn phase(&self, r: Vec3) -> C64 {
        let (s, c) = (self.kappa * self.direction.dot(&r)).sin_cos();
        C64::new(c, -s) * self.amplitude
    }

    /// Electric field components at `r`.
    pub fn e_field(&self, r: Vec3) -> [C64; 3] {
        let ph = self.phase(r);
        [
            ph * self.polarization.x,
            ph * self.polarization.y,
            ph * self.polarization.z,
        ]
    }

    /// Magnetic field components at `r`.
    pub fn h_field(&self, r: Vec3) -> [C64; 3] {
        let ph = self.phase(r) / ETA0;
        let h = self.direction.cross(&self.polarization);
        [ph * h.x, ph * h.y, ph * h.z]
    }
}

/// Tested excitations `V_T = <J, E>` and `V_K = <J, n x H>` in the `2 N_v` layout.
pub fn tested_excitation(
    table: &PatchTable,
    samples: &SampleTable,
    wave: &PlaneWave,
) -> (Vec<C64>, Vec<C64>) {
    let nv = table.num_vertices();
    let mut vt = vec![C64::new(0.0, 0.0); 2 * nv];
    let mut vk = vec![C64::new(0.0, 0.0); 2 * nv];
    for i in 0..samples.len() {
        let s = samples.sample(table, i);
        let e = wave.e_field(s.position);
        let h = wave.h_field(s.position);
        let n = s.normal;
        let nxh = [
            n.y * h[2] - n.z * h[1],
            n.z * h[0] - n.x * h[2],
            n.x * h[1] - n.y * h[0],
        ];
        for (g, &m) in s.grads.iter().zip(s.ring) {
            let r = n.cross(g);
            let m = m as usize;
            let d = |a: &Vec3, f: &[C64; 3]| f[0] * a.x + f[1] * a.y + f[2] * a.z;
            vt[m] += d(g, &e) * s.wj;
            vt[nv + m] += d(&r, &e) * s.wj;
            vk[m] += d(g, &nxh) * s.wj;
            vk[nv + m] += d(&r, &nxh) * s.wj;
        }
    }
    (vt, vk)
}
