use rayon::prelude::*;

use crate::mesh::PatchTable;
use crate::surface::quadrature::subtriangles;
use crate::surface::{
    basis_rows, point_geometry, surface_derivatives, BaseRule, SampleTable, TriangleQuadrature,
    MAX_RING,
};
use crate::{Error, Result, Vec3};

/// Quadrature settings for operator assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadConfig {
    /// Rule used on both sides of well-separated patch pairs.
    pub far_depth: u32,
    pub far_base: BaseRule,
    /// Observer rule for near pairs.
    pub near_depth: u32,
    pub near_base: BaseRule,
    /// Initial source cells for near pairs and the rule inside each cell.
    pub cell_depth: u32,
    pub cell_base: BaseRule,
    /// A cell is integrated directly when its distance exceeds `eta` times its radius.
    pub eta: f64,
    /// Deepest cell level; unresolved cells at this level use the cell rule on their four children.
    pub max_depth: u32,
    /// Gauss-Legendre order per direction of the Duffy rule.
    pub duffy_order: usize,
    /// A cell containing the observer gets a Duffy rule once every
    /// barycentric coordinate of the observer is at least this.
    pub self_margin: f64,
    /// Pairs with centre distance below this many wavelengths are near.
    pub near_wavelengths: f64,
    /// Pairs with centre distance below this many patch diameters are near.
    pub near_diameters: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            far_depth: 1,
            far_base: BaseRule::Three,
            near_depth: 2,
            near_base: BaseRule::Three,
            cell_depth: 2,
            cell_base: BaseRule::Six,
            eta: 3.0,
            max_depth: 5,
            duffy_order: 12,
            self_margin: 0.2,
            near_wavelengths: 0.15,
            near_diameters: 2.0,
        }
    }
}

impl QuadConfig {
    pub fn far_rule(&self) -> TriangleQuadrature {
        TriangleQuadrature::new(self.far_depth, self.far_base)
    }

    pub fn near_rule(&self) -> TriangleQuadrature {
        TriangleQuadrature::new(self.near_depth, self.near_base)
    }

    pub fn cell_rule(&self) -> TriangleQuadrature {
        TriangleQuadrature::new(self.cell_depth, self.cell_base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth < self.cell_depth || self.max_depth > 20 {
            return Err(Error::InvalidArgument(
                "max_depth must lie in [cell_depth, 20]".into(),
            ));
        }
        if self.eta <= 0.0 || self.duffy_order == 0 {
            return Err(Error::InvalidArgument(
                "eta and duffy_order must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Source data per basis function at a quadrature point, weighted by the
/// quadrature weight: `[grad xi (3), n x grad xi (3), lap xi]`.
pub type SourceVec = [f64; 7];

pub(crate) fn source_vec(wj: f64, n: Vec3, g: Vec3, lap: f64) -> SourceVec {
    let r = n.cross(&g);
    [
        wj * g.x,
        wj * g.y,
        wj * g.z,
        wj * r.x,
        wj * r.y,
        wj * r.z,
        wj * lap,
    ]
}

/// Source vectors for every sample and basis function of a table.
pub fn table_sources(table: &PatchTable, s: &SampleTable) -> Vec<SourceVec> {
    let mut out = Vec::with_capacity(s.values.len());
    for i in 0..s.len() {
        let smp = s.sample(table, i);
        for (g, l) in smp.grads.iter().zip(smp.laps) {
            out.push(source_vec(smp.wj, smp.normal, *g, *l));
        }
    }
    out
}

/// Geometry of one cell in the parameter triangle of a patch.
#[derive(Debug, Clone, Copy)]
pub struct CellShape {
    pub tri: [[f64; 2]; 3],
    pub centre: Vec3,
    pub radius: f64,
    pub corners: [Vec3; 3],
}

/// Points sampled on one patch at arbitrary parameters, with source vectors.
#[derive(Debug, Clone, Default)]
pub struct PointSet {
    pub position: Vec<Vec3>,
    pub source: Vec<SourceVec>,
}

/// Position only.
pub(crate) fn position_at(table: &PatchTable, patch: usize, v: f64, w: f64) -> Vec3 {
    let p = table.patch(patch);
    let rows = basis_rows(p.kind, v.max(0.0), w.max(0.0));
    let mut x = Vec3::zeros();
    for (c, &i) in rows.row(0).iter().zip(&p.ring) {
        x += *c * table.mesh().position(i);
    }
    x
}

/// Evaluates source data at parameter points with parameter-measure weights.
pub(crate) fn sample_points(
    table: &PatchTable,
    patch: usize,
    pts: &[([f64; 2], f64)],
    out: &mut PointSet,
) {
    let p = table.patch(patch);
    let ctrl: Vec<Vec3> = p.ring.iter().map(|&i| table.mesh().position(i)).collect();
    let mut g = [Vec3::zeros(); MAX_RING];
    let mut l = [0.0; MAX_RING];
    for &([v, w], wt) in pts {
        let rows = basis_rows(p.kind, v.max(0.0), w.max(0.0));
        let geo = point_geometry(&rows, &ctrl, p.kind);
        surface_derivatives(&rows, &geo, &mut g, &mut l);
        out.position.push(geo.position);
        let wj = wt * geo.jacobian;
        for i in 0..ctrl.len() {
            out.source.push(source_vec(wj, geo.normal, g[i], l[i]));
        }
    }
}

pub(crate) fn cell_shape(table: &PatchTable, patch: usize, tri: [[f64; 2]; 3]) -> CellShape {
    let c = [
        (tri[0][0] + tri[1][0] + tri[2][0]) / 3.0,
        (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0,
    ];
    let centre = position_at(table, patch, c[0], c[1]);
    let corners = [
        position_at(table, patch, tri[0][0], tri[0][1]),
        position_at(table, patch, tri[1][0], tri[1][1]),
        position_at(table, patch, tri[2][0], tri[2][1]),
    ];
    let radius = corners
        .iter()
        .map(|x| (x - centre).norm())
        .fold(0.0, f64::max);
    CellShape {
        tri,
        centre,
        radius,
        corners,
    }
}

/// Patch table with the sample tables and proximity data used by the operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub table: PatchTable,
    pub quad: QuadConfig,
    pub wavelength: f64,
    pub coarse: SampleTable,
    pub fine: SampleTable,
    pub cells: SampleTable,
    pub(crate) coarse_src: Vec<SourceVec>,
    pub(crate) cell_src: Vec<SourceVec>,
    /// Initial cell shapes, `cell_shapes[p * cells_per_patch + c]`.
    pub cell_shapes: Vec<CellShape>,
    pub centres: Vec<Vec3>,
    /// Bounding radius of each patch about its centre.
    pub radii: Vec<f64>,
    /// Sorted near lists (always containing the patch itself).
    pub near: Vec<Vec<u32>>,
}

impl Discretization {
    pub fn new(table: PatchTable, quad: QuadConfig, wavelength: f64) -> Result<Self> {
        quad.validate()?;
        if !(wavelength > 0.0) {
            return Err(Error::InvalidArgument("wavelength must be positive".into()));
        }
        let coarse = SampleTable::build(&table, &quad.far_rule())?;
        let fine = SampleTable::build(&table, &quad.near_rule())?;
        let cells = SampleTable::build(&table, &quad.cell_rule())?;
        let coarse_src = table_sources(&table, &coarse);
        let cell_src = table_sources(&table, &cells);
        let tris = subtriangles(quad.cell_depth);
        let cell_shapes: Vec<CellShape> = (0..table.len())
            .into_par_iter()
            .flat_map_iter(|p| {
                tris.iter()
                    .map(|t| cell_shape(&table, p, *t))
                    .collect::<Vec<_>>()
            })
            .collect();
        let centres: Vec<Vec3> = (0..table.len())
            .map(|p| position_at(&table, p, 1.0 / 3.0, 1.0 / 3.0))
            .collect();
        let per = tris.len();
        let radii: Vec<f64> = (0..table.len())
            .map(|p| {
                let c = centres[p];
                let mut r: f64 = 0.0;
                for s in &cell_shapes[p * per..(p + 1) * per] {
                    r = r.max((s.centre - c).norm() + s.radius);
                }
                for i in fine.samples_of(p) {
                    r = r.max((fine.position[i] - c).norm());
                }
                r
            })
            .collect();
        let near = near_lists(&table, &centres, &radii, &quad, wavelength);
        Ok(Discretization {
            table,
            quad,
            wavelength,
            coarse,
            fine,
            cells,
            coarse_src,
            cell_src,
            cell_shapes,
            centres,
            radii,
            near,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.table.num_vertices()
    }

    pub fn num_patches(&self) -> usize {
        self.table.len()
    }

    pub fn cells_per_patch(&self) -> usize {
        1 << (2 * self.quad.cell_depth)
    }

    pub fn is_near(&self, a: usize, b: usize) -> bool {
        self.near[a].binary_search(&(b as u32)).is_ok()
    }

    pub fn centre_distance(&self, a: usize, b: usize) -> f64 {
        (self.centres[a] - self.centres[b]).norm()
    }

    /// Coarse-table source vectors of sample `i`.
    pub fn coarse_sources(&self, i: usize) -> &[SourceVec] {
        let b = self.coarse.basis_start[i];
        &self.coarse_src[b..self.coarse.basis_start[i + 1]]
    }

    pub(crate) fn cell_sources(&self, i: usize) -> &[SourceVec] {
        let b = self.cells.basis_start[i];
        &self.cell_src[b..self.cells.basis_start[i + 1]]
    }

    /// Largest patch diameter.
    pub fn max_patch_diameter(&self) -> f64 {
        2.0 * self.radii.iter().cloned().fold(0.0, f64::max)
    }
}

fn near_lists(
    table: &PatchTable,
    centres: &[Vec3],
    radii: &[f64],
    quad: &QuadConfig,
    wavelength: f64,
) -> Vec<Vec<u32>> {
    let nv = table.num_vertices();
    let mut faces_of: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for (p, patch) in table.patches().iter().enumerate() {
        for &c in &patch.corners {
            faces_of[c as usize].push(p as u32);
        }
    }
    (0..table.len())
        .into_par_iter()
        .map(|a| {
            let mut list: Vec<u32> = Vec::new();
            for &c in &table.patch(a).corners {
                list.extend_from_slice(&faces_of[c as usize]);
            }
            for b in 0..table.len() {
                let lim = (quad.near_wavelengths * wavelength)
                    .max(quad.near_diameters * 2.0 * radii[a].max(radii[b]));
                if (centres[a] - centres[b]).norm() < lim {
                    list.push(b as u32);
                }
            }
            list.sort_unstable();
            list.dedup();
            list
        })
        .collect()
}
