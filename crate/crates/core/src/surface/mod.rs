//! Exact evaluation of the Loop limit surface and quadrature on it.

mod boxspline;
mod eval;
mod local;
pub mod quadrature;
mod table;

pub use boxspline::regular_basis;
pub use eval::{
    basis_rows, evaluate, point_geometry, subdivision_rows, surface_derivatives, BasisRows,
    PointGeometry, SurfaceSample, CORNER_CLAMP, MAX_RING,
};
pub use local::{IrregularScheme, MAX_VALENCE};
pub use quadrature::{BaseRule, TriangleQuadrature};
pub use table::{SampleRef, SampleTable};

use crate::mesh::PatchTable;
use crate::Result;

/// Surface area by quadrature.
pub fn surface_area(table: &PatchTable, rule: &TriangleQuadrature) -> Result<f64> {
    Ok(SampleTable::build(table, rule)?.area())
}

/// Largest absolute mean curvature over the nested grid of sub-triangle
/// vertices at `depth` (exact extraordinary corners excluded).
pub fn mean_curvature_max(table: &PatchTable, depth: u32) -> Result<f64> {
    let n = 1usize << depth;
    let mut pts = Vec::new();
    for i in 0..=n {
        for j in 0..=(n - i) {
            pts.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut best: f64 = 0.0;
    for (p, patch) in table.patches().iter().enumerate() {
        for pt in &pts {
            if matches!(patch.kind, crate::mesh::PatchKind::Irregular(_)) && pt[0] + pt[1] == 0.0 {
                continue;
            }
            let s = evaluate(table, p, pt[0], pt[1])?;
            best = best.max(s.mean_curvature.abs());
        }
    }
    Ok(best)
}
