//! Discretized boundary integral operators in the Loop current basis.
//!
//! Unknowns use the `2 N_v` layout: entry `l N_v + n` multiplies the current
//! `J^l_n`, with `J^1_n = grad xi_n` and `J^2_n = n x grad xi_n`. `T` blocks
//! hold the unrotated EFIE form `<J_n, E^s(J_m)>`, which is complex symmetric;
//! `K` holds `<J_n, J_m / 2 - K J_m>`.

mod assemble;
pub mod container;
mod excitation;
mod geometry;
mod kernel;
mod near;

use rayon::prelude::*;

pub use assemble::test_vecs as test_vectors;
pub use assemble::{
    accumulate, contract, dense_operators, localized_regularizer, near_field, pair_block,
    BlockSink, DenseOps, PairBlock, PairMode, Pot, SparseOps, TestVec, Want,
};
pub use excitation::{tested_excitation, PlaneWave};
pub use geometry::table_sources as source_vectors;
pub use geometry::{CellShape, Discretization, PointSet, QuadConfig, SourceVec};
pub use kernel::{green_gradient_factor, green_value, greens, EfieFactors, KernelPair, Wavenumber};
pub use near::{duffy_rule, CellTree};

use crate::lbo::{self, GramBlocks};
use crate::linalg::{CMat, Csr};
use crate::mesh::PatchTable;
use crate::surface::{SampleTable, TriangleQuadrature};
use crate::{Result, C64};

/// All four blocks of `<J^l_n, J^k_m>`, in the `2 N_v` layout.
pub fn current_overlap(table: &PatchTable, rule: &TriangleQuadrature) -> Result<Csr<f64>> {
    let samples = SampleTable::build(table, rule)?;
    let nv = table.num_vertices();
    let trip: Vec<(u32, u32, f64)> = (0..table.len())
        .into_par_iter()
        .flat_map_iter(|p| {
            let ring = &table.patch(p).ring;
            let k = ring.len();
            let mut loc = vec![0.0; 4 * k * k];
            for s in samples.samples_of(p) {
                let smp = samples.sample(table, s);
                let rot: Vec<_> = smp.grads.iter().map(|g| smp.normal.cross(g)).collect();
                for i in 0..k {
                    let fi = [smp.grads[i], rot[i]];
                    for j in 0..k {
                        let fj = [smp.grads[j], rot[j]];
                        for l in 0..2 {
                            for kk in 0..2 {
                                loc[((l * k + i) * 2 + kk) * k + j] += smp.wj * fi[l].dot(&fj[kk]);
                            }
                        }
                    }
                }
            }
            let mut out = Vec::with_capacity(4 * k * k);
            for l in 0..2 {
                for i in 0..k {
                    for kk in 0..2 {
                        for j in 0..k {
                            let r = (l * nv) as u32 + ring[i];
                            let c = (kk * nv) as u32 + ring[j];
                            out.push((r, c, loc[((l * k + i) * 2 + kk) * k + j]));
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(Csr::from_triplets(2 * nv, 2 * nv, trip))
}

/// Dense operator set of one scattering problem.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub nv: usize,
    pub kernels: KernelPair,
    pub t: CMat,
    /// `T` at the complexified wavenumber, restricted to `localization`.
    pub tp: CMat,
    /// MFIE operator including the identity term.
    pub k: CMat,
    pub gram: GramBlocks,
    pub localization: Option<f64>,
}

impl OperatorSet {
    /// Assembles every operator densely.
    pub fn assemble(
        disc: &Discretization,
        kernels: KernelPair,
        localization: Option<f64>,
    ) -> Result<Self> {
        let DenseOps { t, tp, mut k } = dense_operators(disc, &kernels, localization);
        let rule = lbo::default_rule();
        let overlap = current_overlap(&disc.table, &rule)?;
        for i in 0..overlap.rows {
            for (j, v) in overlap.row(i) {
                *k.at_mut(i, j) += C64::new(0.5 * v, 0.0);
            }
        }
        let gram = lbo::assemble_gram(&disc.table, &rule)?;
        check_finite(&t, "T")?;
        check_finite(&tp, "T'")?;
        check_finite(&k, "K")?;
        Ok(OperatorSet {
            nv: disc.num_vertices(),
            kernels,
            t,
            tp,
            k,
            gram,
            localization,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.nv
    }
}

fn check_finite(m: &CMat, name: &str) -> Result<()> {
    if let Some(i) = m
        .data
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(crate::Error::Numerical(format!(
            "non-finite {name} entry at ({}, {})",
            i / m.cols,
            i % m.cols
        )));
    }
    Ok(())
}
