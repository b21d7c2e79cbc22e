//! CC-CFIER in a truncated manifold harmonic basis.

use std::time::Instant;

use nalgebra::DMatrix;

use super::gmres::{gmres, GmresConfig};
use super::system::{apply_q, calderon_weight, SolveResult};
use crate::bie::OperatorSet;
use crate::lbo::ManifoldHarmonics;
use crate::linalg::CMat;
use crate::{Error, Result, C64};

/// Reduced system `Z_H y = V_H` with the map `S` back to one Loop block.
#[derive(Debug, Clone)]
pub struct MhSystem {
    pub z: CMat,
    pub rhs: Vec<C64>,
    /// `N_v x M` map from reduced to Loop coefficients, applied to both blocks.
    pub map: DMatrix<f64>,
    /// Diagonal of the reduced Gram matrix: ones when scaled, eigenvalues otherwise.
    pub gram: Vec<f64>,
}

impl MhSystem {
    pub fn modes(&self) -> usize {
        self.map.ncols()
    }

    /// Loop coefficients `[S y1, S y2]` of reduced coefficients `[y1, y2]`.
    pub fn to_loop(&self, y: &[C64]) -> Vec<C64> {
        let m = self.modes();
        let nv = self.map.nrows();
        let mut out = vec![C64::new(0.0, 0.0); 2 * nv];
        for blk in 0..2 {
            for (j, c) in y[blk * m..(blk + 1) * m].iter().enumerate() {
                for (i, s) in self.map.column(j).iter().enumerate() {
                    out[blk * nv + i] += c * s;
                }
            }
        }
        out
    }

    /// `Sᵀ` applied to both blocks of a Loop-space vector.
    pub fn restrict(&self, v: &[C64]) -> Vec<C64> {
        let nv = self.map.nrows();
        (0..2)
            .flat_map(|blk| {
                let part = &v[blk * nv..(blk + 1) * nv];
                self.map
                    .column_iter()
                    .map(move |col| col.iter().zip(part).map(|(s, x)| x * s).sum::<C64>())
            })
            .collect()
    }
}

fn block_map(s: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = s.shape();
    let mut out = DMatrix::zeros(2 * n, 2 * m);
    out.view_mut((0, 0), (n, m)).copy_from(s);
    out.view_mut((n, m), (n, m)).copy_from(s);
    out
}

fn scale_rows(d: &[f64], v: &mut [C64]) {
    let m = d.len();
    for (i, x) in v.iter_mut().enumerate() {
        *x /= d[i % m];
    }
}

/// Builds the reduced system from a basis without the constant mode. With
/// `scaled`, columns are divided by `sqrt(lambda)` so that the reduced Gram
/// matrix is the identity.
pub fn compress_mh(
    ops: &OperatorSet,
    basis: &ManifoldHarmonics,
    v_t: &[C64],
    v_k: &[C64],
    scaled: bool,
) -> Result<MhSystem> {
    let nv = ops.nv;
    if basis.basis.nrows() != nv || v_t.len() != 2 * nv || v_k.len() != 2 * nv {
        return Err(Error::InvalidArgument(
            "basis and operator sizes differ".into(),
        ));
    }
    let lmax = basis.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if basis.is_empty() || basis.eigenvalues.iter().any(|&l| !(l > 1e-10 * lmax)) {
        return Err(Error::InvalidArgument(
            "manifold harmonic basis contains a zero eigenvalue".into(),
        ));
    }
    let m = basis.len();
    let mut s = basis.basis.clone();
    let gram: Vec<f64> = if scaled {
        for (j, l) in basis.eigenvalues.iter().enumerate() {
            s.column_mut(j).scale_mut(1.0 / l.sqrt());
        }
        vec![1.0; m]
    } else {
        basis.eigenvalues.clone()
    };
    let big = block_map(&s);
    let k_h = ops.k.congruence(&big);
    let t_h = ops.t.congruence(&big);
    let tp_h = ops.tp.congruence(&big);
    let sys = MhSystem {
        z: CMat::zeros(0, 0),
        rhs: Vec::new(),
        map: s,
        gram,
    };
    let n = 2 * m;
    let cw = calderon_weight();
    let (qt_re, qt_im) = {
        let mut qt = CMat::zeros(n, n);
        for j in 0..n {
            let col: Vec<C64> = (0..n).map(|i| t_h.at(i, j)).collect();
            let mut c = apply_q(&col);
            scale_rows(&sys.gram, &mut c);
            for (i, v) in c.into_iter().enumerate() {
                *qt.at_mut(i, j) = v;
            }
        }
        qt.split()
    };
    let (tp_re, tp_im) = tp_h.split();
    let prod = CMat::from_parts(
        &(&tp_re * &qt_re - &tp_im * &qt_im),
        &(&tp_re * &qt_im + &tp_im * &qt_re),
    );
    let mut z = CMat::zeros(n, n);
    for j in 0..n {
        let col: Vec<C64> = (0..n).map(|i| prod.at(i, j)).collect();
        let qc = apply_q(&col);
        for i in 0..n {
            *z.at_mut(i, j) = (k_h.at(i, j) - cw * qc[i]) / sys.gram[i % m];
        }
    }
    let vt_h = sys.restrict(v_t);
    let vk_h = sys.restrict(v_k);
    let mut q = apply_q(&vt_h);
    scale_rows(&sys.gram, &mut q);
    let mut tq = vec![C64::new(0.0, 0.0); n];
    tp_h.matvec(&q, &mut tq);
    let tq = apply_q(&tq);
    let mut rhs: Vec<C64> = vk_h.iter().zip(&tq).map(|(k, t)| k + cw * t).collect();
    scale_rows(&sys.gram, &mut rhs);
    Ok(MhSystem { z, rhs, ..sys })
}

/// Solves the reduced system by GMRES and maps the result back to the Loop basis.
pub fn solve_mh(sys: &MhSystem, cfg: &GmresConfig) -> Result<SolveResult> {
    let start = Instant::now();
    let out = gmres(&sys.z, &sys.rhs, None, cfg)?.require_converged("manifold harmonic solve")?;
    Ok(SolveResult {
        coefficients: sys.to_loop(&out.x),
        reduced: Some(out.x),
        iterations: out.iterations,
        residual_history: out.residual_history,
        wall_time: start.elapsed().as_secs_f64(),
        gram_iterations: 0,
    })
}
