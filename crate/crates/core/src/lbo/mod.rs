//! Laplace-Beltrami operator on the limit surface: stiffness and mass
//! matrices, the generalized eigenproblem, and the manifold harmonic transform.

mod eigen;
mod envelope;
mod mht;

use rayon::prelude::*;

use crate::linalg::Csr;
use crate::mesh::PatchTable;
use crate::surface::{BaseRule, SampleTable, TriangleQuadrature};
use crate::Result;

pub use eigen::{solve_dense, solve_lanczos, solve_pencil, DENSE_LIMIT};
pub use envelope::{rcm_order, EnvelopeLdl};
pub use mht::{
    complex_reconstruction_error, current_mht, current_mht_a_form, reconstruction_error, zero_mean, ManifoldHarmonics,
};

/// Default quadrature for the Laplace-Beltrami matrices.
pub fn default_rule() -> TriangleQuadrature {
    TriangleQuadrature::new(2, BaseRule::Six)
}

/// Stiffness `A_ij = <grad xi_i, grad xi_j>` and mass `B_ij = <xi_i, xi_j>`.
#[derive(Debug, Clone)]
pub struct LboMatrices {
    pub stiffness: Csr<f64>,
    pub mass: Csr<f64>,
}

/// Gram blocks of the two current families: `<J1_i, J1_j>` and `<J2_i, J2_j>`.
#[derive(Debug, Clone)]
pub struct GramBlocks {
    pub g11: Csr<f64>,
    pub g22: Csr<f64>,
}

type Local = (Vec<u32>, Vec<f64>, Vec<f64>, Vec<f64>);

fn local_matrices(table: &PatchTable, samples: &SampleTable, p: usize) -> Local {
    let ring = table.patch(p).ring.clone();
    let k = ring.len();
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k * k];
    let mut g2 = vec![0.0; k * k];
    for s in samples.samples_of(p) {
        let smp = samples.sample(table, s);
        let n = smp.normal;
        for i in 0..k {
            let gi = smp.grads[i];
            let ri = n.cross(&gi);
            for j in 0..k {
                a[i * k + j] += smp.wj * gi.dot(&smp.grads[j]);
                b[i * k + j] += smp.wj * smp.values[i] * smp.values[j];
                g2[i * k + j] += smp.wj * ri.dot(&n.cross(&smp.grads[j]));
            }
        }
    }
    (ring, a, b, g2)
}

fn scatter(n: usize, locals: &[Local], pick: impl Fn(&Local) -> &Vec<f64>) -> Csr<f64> {
    let mut trip = Vec::new();
    for l in locals {
        let k = l.0.len();
        let m = pick(l);
        for i in 0..k {
            for j in 0..k {
                trip.push((l.0[i], l.0[j], m[i * k + j]));
            }
        }
    }
    Csr::from_triplets(n, n, trip)
}

fn assemble_all(table: &PatchTable, rule: &TriangleQuadrature) -> Result<Vec<Local>> {
    let samples = SampleTable::build(table, rule)?;
    Ok((0..table.len())
        .into_par_iter()
        .map(|p| local_matrices(table, &samples, p))
        .collect())
}

/// Assembles the stiffness and mass matrices.
pub fn assemble(table: &PatchTable, rule: &TriangleQuadrature) -> Result<LboMatrices> {
    let locals = assemble_all(table, rule)?;
    let n = table.num_vertices();
    Ok(LboMatrices {
        stiffness: scatter(n, &locals, |l| &l.1),
        mass: scatter(n, &locals, |l| &l.2),
    })
}

/// Assembles both Gram blocks independently (they agree with the stiffness matrix).
pub fn assemble_gram(table: &PatchTable, rule: &TriangleQuadrature) -> Result<GramBlocks> {
    let locals = assemble_all(table, rule)?;
    let n = table.num_vertices();
    Ok(GramBlocks {
        g11: scatter(n, &locals, |l| &l.1),
        g22: scatter(n, &locals, |l| &l.3),
    })
}
