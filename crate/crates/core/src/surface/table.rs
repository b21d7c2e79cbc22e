//! Precomputed limit-surface samples for every patch under one quadrature rule.

use rayon::prelude::*;

use super::eval::{basis_rows, point_geometry, surface_derivatives, MAX_RING};
use super::quadrature::TriangleQuadrature;
use crate::mesh::PatchTable;
use crate::{Error, Result, Vec3};

/// Flat storage of quadrature samples; sample `s` of patch `p` has global
/// index `patch_start[p] + s`, and its basis data lives at
/// `basis_start[i] .. basis_start[i] + ring_len`.
#[derive(Debug, Clone)]
pub struct SampleTable {
    pub patch_start: Vec<usize>,
    pub basis_start: Vec<usize>,
    pub patch_of: Vec<u32>,
    pub param: Vec<[f64; 2]>,
    pub position: Vec<Vec3>,
    pub normal: Vec<Vec3>,
    /// Quadrature weight times area element.
    pub wj: Vec<f64>,
    pub curvature: Vec<f64>,
    pub values: Vec<f64>,
    pub grads: Vec<Vec3>,
    pub laps: Vec<f64>,
}

/// Borrowed view of one sample.
#[derive(Debug, Clone, Copy)]
pub struct SampleRef<'a> {
    pub position: Vec3,
    pub normal: Vec3,
    pub wj: f64,
    pub ring: &'a [u32],
    pub values: &'a [f64],
    pub grads: &'a [Vec3],
    pub laps: &'a [f64],
}

struct PatchSamples {
    param: Vec<[f64; 2]>,
    position: Vec<Vec3>,
    normal: Vec<Vec3>,
    wj: Vec<f64>,
    curvature: Vec<f64>,
    values: Vec<f64>,
    grads: Vec<Vec3>,
    laps: Vec<f64>,
}

/// Samples one patch at the given parameter points (weights in parameter measure).
fn sample_patch(
    table: &PatchTable,
    patch: usize,
    points: &[[f64; 2]],
    weights: &[f64],
) -> Result<PatchSamples> {
    let p = table.patch(patch);
    let pts: Vec<Vec3> = p.ring.iter().map(|&i| table.mesh().position(i)).collect();
    let k = p.ring.len();
    let n = points.len();
    let mut out = PatchSamples {
        param: points.to_vec(),
        position: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
        wj: Vec::with_capacity(n),
        curvature: Vec::with_capacity(n),
        values: Vec::with_capacity(n * k),
        grads: Vec::with_capacity(n * k),
        laps: Vec::with_capacity(n * k),
    };
    let mut g = [Vec3::zeros(); MAX_RING];
    let mut l = [0.0; MAX_RING];
    for (pt, wt) in points.iter().zip(weights) {
        let rows = basis_rows(p.kind, pt[0], pt[1]);
        let geo = point_geometry(&rows, &pts, p.kind);
        if !(geo.jacobian > 0.0 && geo.jacobian.is_finite()) {
            return Err(Error::Numerical(format!(
                "degenerate parametrisation on patch {patch}"
            )));
        }
        surface_derivatives(&rows, &geo, &mut g, &mut l);
        out.position.push(geo.position);
        out.normal.push(geo.normal);
        out.wj.push(wt * geo.jacobian);
        out.curvature.push(geo.mean_curvature);
        out.values.extend_from_slice(rows.row(0));
        out.grads.extend_from_slice(&g[..k]);
        out.laps.extend_from_slice(&l[..k]);
    }
    Ok(out)
}

impl SampleTable {
    /// Samples every patch with the same rule.
    pub fn build(table: &PatchTable, rule: &TriangleQuadrature) -> Result<Self> {
        let per: Vec<PatchSamples> = (0..table.len())
            .into_par_iter()
            .map(|p| sample_patch(table, p, &rule.points, &rule.weights))
            .collect::<Result<_>>()?;
        Ok(Self::from_parts(table, per))
    }

    /// Samples patch `p` at custom parameter points.
    pub fn build_custom(
        table: &PatchTable,
        points: &[Vec<[f64; 2]>],
        weights: &[Vec<f64>],
    ) -> Result<Self> {
        let per: Vec<PatchSamples> = (0..table.len())
            .into_par_iter()
            .map(|p| sample_patch(table, p, &points[p], &weights[p]))
            .collect::<Result<_>>()?;
        Ok(Self::from_parts(table, per))
    }

    fn from_parts(table: &PatchTable, per: Vec<PatchSamples>) -> Self {
        let total: usize = per.iter().map(|p| p.wj.len()).sum();
        let mut t = SampleTable {
            patch_start: Vec::with_capacity(per.len() + 1),
            basis_start: Vec::with_capacity(total + 1),
            patch_of: Vec::with_capacity(total),
            param: Vec::with_capacity(total),
            position: Vec::with_capacity(total),
            normal: Vec::with_capacity(total),
            wj: Vec::with_capacity(total),
            curvature: Vec::with_capacity(total),
            values: Vec::new(),
            grads: Vec::new(),
            laps: Vec::new(),
        };
        for (p, s) in per.into_iter().enumerate() {
            t.patch_start.push(t.wj.len());
            let k = table.patch(p).ring.len();
            for i in 0..s.wj.len() {
                t.basis_start.push(t.values.len() + i * k);
                t.patch_of.push(p as u32);
            }
            t.param.extend(s.param);
            t.position.extend(s.position);
            t.normal.extend(s.normal);
            t.wj.extend(s.wj);
            t.curvature.extend(s.curvature);
            t.values.extend(s.values);
            t.grads.extend(s.grads);
            t.laps.extend(s.laps);
        }
        t.patch_start.push(t.wj.len());
        t.basis_start.push(t.values.len());
        t
    }

    pub fn len(&self) -> usize {
        self.wj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wj.is_empty()
    }

    /// Global sample indices of patch `p`.
    pub fn samples_of(&self, p: usize) -> std::ops::Range<usize> {
        self.patch_start[p]..self.patch_start[p + 1]
    }

    pub fn sample<'a>(&'a self, table: &'a PatchTable, i: usize) -> SampleRef<'a> {
        let ring = &table.patch(self.patch_of[i] as usize).ring;
        let b = self.basis_start[i];
        let k = ring.len();
        SampleRef {
            position: self.position[i],
            normal: self.normal[i],
            wj: self.wj[i],
            ring,
            values: &self.values[b..b + k],
            grads: &self.grads[b..b + k],
            laps: &self.laps[b..b + k],
        }
    }

    /// Total surface area.
    pub fn area(&self) -> f64 {
        self.wj.iter().sum()
    }
}
