//! Iterative inversion of the current Gram matrix with constant-mode deflation.

use std::sync::atomic::{AtomicUsize, Ordering};

use super::gmres::{gmres, Diagonal, GmresConfig, LinearMap};
use crate::lbo::GramBlocks;
use crate::linalg::Csr;
use crate::{Error, Result, C64};

struct RealSparse<'a>(&'a Csr<f64>);

impl LinearMap for RealSparse<'_> {
    fn dim(&self) -> usize {
        self.0.rows
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.0.matvec_c(x, y);
        Ok(())
    }
}

/// Removes the mean of `r`, projecting it onto the range of a Gram block.
pub fn project_range(r: &mut [C64]) {
    let mean = r.iter().sum::<C64>() / r.len() as f64;
    r.iter_mut().for_each(|x| *x -= mean);
}

/// Removes the `B`-weighted mean of `x` given `w = B 1`.
pub fn remove_weighted_mean(x: &mut [C64], w: &[f64]) {
    let total: f64 = w.iter().sum();
    let mean = x.iter().zip(w).map(|(a, b)| a * b).sum::<C64>() / total;
    x.iter_mut().for_each(|a| *a -= mean);
}

/// Solver for `G y = r` with `G = blockdiag(G11, G22)` in the `2 N_v` layout.
/// Inputs are projected off constants, and solutions have zero `B`-mean in
/// each block.
#[derive(Debug)]
pub struct GramSolver {
    blocks: [Csr<f64>; 2],
    precond: [Diagonal; 2],
    mass_weights: Vec<f64>,
    pub config: GmresConfig,
    iterations: AtomicUsize,
    solves: AtomicUsize,
}

impl GramSolver {
    pub fn new(gram: &GramBlocks, mass: &Csr<f64>, tol: f64) -> Result<Self> {
        let nv = gram.g11.rows;
        if gram.g22.rows != nv || mass.rows != nv {
            return Err(Error::InvalidArgument(
                "Gram and mass matrices differ in size".into(),
            ));
        }
        let inv_diag = |m: &Csr<f64>| -> Result<Diagonal> {
            m.diagonal()
                .iter()
                .map(|&d| {
                    if d > 0.0 {
                        Ok(1.0 / d)
                    } else {
                        Err(Error::Numerical("non-positive Gram diagonal".into()))
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map(Diagonal)
        };
        let mut w = vec![0.0; nv];
        mass.matvec(&vec![1.0; nv], &mut w);
        Ok(GramSolver {
            precond: [inv_diag(&gram.g11)?, inv_diag(&gram.g22)?],
            blocks: [gram.g11.clone(), gram.g22.clone()],
            mass_weights: w,
            config: GmresConfig {
                tol,
                restart: 200,
                max_iter: 5000,
            },
            iterations: AtomicUsize::new(0),
            solves: AtomicUsize::new(0),
        })
    }

    pub fn nv(&self) -> usize {
        self.mass_weights.len()
    }

    /// `B 1`, the weights of the zero-mean gauge.
    pub fn mass_weights(&self) -> &[f64] {
        &self.mass_weights
    }

    /// Solves one block.
    pub fn solve_block(&self, block: usize, r: &[C64]) -> Result<Vec<C64>> {
        let mut rhs = r.to_vec();
        project_range(&mut rhs);
        let out = gmres(
            &RealSparse(&self.blocks[block]),
            &rhs,
            Some(&self.precond[block]),
            &self.config,
        )?
        .require_converged("Gram solve")?;
        self.iterations.fetch_add(out.iterations, Ordering::Relaxed);
        self.solves.fetch_add(1, Ordering::Relaxed);
        let mut x = out.x;
        remove_weighted_mean(&mut x, &self.mass_weights);
        Ok(x)
    }

    /// Solves both blocks of a `2 N_v` vector.
    pub fn solve(&self, r: &[C64]) -> Result<Vec<C64>> {
        let nv = self.nv();
        if r.len() != 2 * nv {
            return Err(Error::InvalidArgument(format!(
                "Gram solve expects length {}, got {}",
                2 * nv,
                r.len()
            )));
        }
        let mut out = self.solve_block(0, &r[..nv])?;
        out.extend(self.solve_block(1, &r[nv..])?);
        Ok(out)
    }

    /// Total inner iterations and solves so far.
    pub fn stats(&self) -> (usize, usize) {
        (
            self.iterations.load(Ordering::Relaxed),
            self.solves.load(Ordering::Relaxed),
        )
    }

    /// Makes each block of `x` zero-mean in the `B` inner product.
    pub fn deflate(&self, x: &mut [C64]) {
        let nv = self.nv();
        for blk in x.chunks_mut(nv) {
            remove_weighted_mean(blk, &self.mass_weights);
        }
    }
}
