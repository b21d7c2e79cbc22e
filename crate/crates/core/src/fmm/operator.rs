//! Operator application with FMM far fields and precomputed near corrections.

use rayon::prelude::*;

use super::engine::{direct_sum, Fmm, FmmConfig, FmmField};
use crate::bie::{
    contract, current_overlap, localized_regularizer, near_field, Discretization, KernelPair,
    PairMode, Pot, Want,
};
use crate::lbo::{self, GramBlocks};
use crate::linalg::{cnorm, Csr};
use crate::mesh::PatchTable;
use crate::solver::{OpKind, Operators};
use crate::surface::{BaseRule, SampleTable, TriangleQuadrature};
use crate::{Error, Result, Vec3, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const NC: usize = 4;

/// `T`, `T'` and `K` applied through the FMM: far-rule interactions of all
/// sample pairs by the FMM, corrected on near patch pairs by the difference
/// between the accurate and the far-rule blocks.
pub struct FmmOperators<'a> {
    pub disc: &'a Discretization,
    pub kernels: KernelPair,
    pub fmm: Fmm,
    /// FMM at the complexified wavenumber when `T'` is not localized.
    pub fmm_reg: Option<Fmm>,
    pub near_t: Csr<C64>,
    pub near_tp: Csr<C64>,
    pub near_k: Csr<C64>,
    /// Sparse `T'` when localized.
    pub tp: Option<Csr<C64>>,
    /// `<J_n, J_m> / 2`.
    pub identity: Csr<f64>,
    pub gram: GramBlocks,
}

fn difference(mut a: Csr<C64>, b: &Csr<C64>) -> Csr<C64> {
    a.data.iter_mut().zip(&b.data).for_each(|(x, y)| *x -= y);
    a
}

impl<'a> FmmOperators<'a> {
    pub fn new(
        disc: &'a Discretization,
        kernels: KernelPair,
        localization: Option<f64>,
        config: FmmConfig,
    ) -> Result<Self> {
        let pts = &disc.coarse.position;
        let fmm = Fmm::new(pts, pts, kernels.main.kappa, NC, config)?;
        let full = localization.is_none();
        let want = Want {
            t: true,
            tp: full,
            k: true,
        };
        let acc = near_field(disc, &kernels, PairMode::Accurate, want);
        let coarse = near_field(disc, &kernels, PairMode::Coarse, want);
        let (tp, fmm_reg) = match localization {
            Some(r) => (Some(localized_regularizer(disc, &kernels, r)), None),
            None => (
                None,
                Some(Fmm::new(pts, pts, kernels.reg.kappa, NC, config)?),
            ),
        };
        let rule = lbo::default_rule();
        let mut identity = current_overlap(&disc.table, &rule)?;
        identity.data.iter_mut().for_each(|v| *v *= 0.5);
        Ok(FmmOperators {
            disc,
            kernels,
            fmm,
            fmm_reg,
            near_t: difference(acc.t, &coarse.t),
            near_tp: difference(acc.tp, &coarse.tp),
            near_k: difference(acc.k, &coarse.k),
            tp,
            identity,
            gram: lbo::assemble_gram(&disc.table, &rule)?,
        })
    }

    /// Vector and scalar source densities at every far-rule sample.
    fn charges(&self, x: &[C64]) -> Vec<C64> {
        let disc = self.disc;
        let nv = disc.num_vertices();
        let mut q = vec![ZERO; disc.coarse.len() * NC];
        q.par_chunks_mut(NC).enumerate().for_each(|(s, out)| {
            let ring = &disc.table.patch(disc.coarse.patch_of[s] as usize).ring;
            for (src, &m) in disc.coarse_sources(s).iter().zip(ring) {
                let (a1, a2) = (x[m as usize], x[nv + m as usize]);
                for c in 0..3 {
                    out[c] += a1 * src[c] + a2 * src[3 + c];
                }
                out[3] += a1 * src[6];
            }
        });
        q
    }

    /// Tests the sampled potentials against every basis function.
    fn test(&self, field: &FmmField, op: OpKind, y: &mut [C64]) {
        let disc = self.disc;
        let table = &disc.table;
        let nv = disc.num_vertices();
        let kp = &self.kernels;
        let want = match op {
            OpKind::T => Want {
                t: true,
                tp: false,
                k: false,
            },
            OpKind::Tp => Want {
                t: false,
                tp: true,
                k: false,
            },
            OpKind::K => Want {
                t: false,
                tp: false,
                k: true,
            },
        };
        let slot = match op {
            OpKind::T => 0,
            OpKind::Tp => 1,
            OpKind::K => 2,
        };
        let parts: Vec<Vec<C64>> = (0..table.len())
            .into_par_iter()
            .map(|p| {
                let ring = &table.patch(p).ring;
                let mut acc = vec![ZERO; 2 * ring.len()];
                for s in disc.coarse.samples_of(p) {
                    let f = &field.pot[s * NC..(s + 1) * NC];
                    let g = &field.grad[s * NC..(s + 1) * NC];
                    let mut pot = Pot::default();
                    match op {
                        OpKind::T | OpKind::Tp => {
                            let dst = if op == OpKind::T {
                                &mut pot.t
                            } else {
                                &mut pot.tp
                            };
                            dst[..3].copy_from_slice(&f[..3]);
                            dst[6] = f[3];
                        }
                        OpKind::K => {
                            pot.k[0] = g[2][1] - g[1][2];
                            pot.k[1] = g[0][2] - g[2][0];
                            pot.k[2] = g[1][0] - g[0][1];
                        }
                    }
                    for (i, tv) in crate::bie::test_vectors(table, &disc.coarse, s)
                        .iter()
                        .enumerate()
                    {
                        let c = contract(tv, &pot, kp, want)[slot];
                        acc[i] += c[0] + c[1];
                        acc[ring.len() + i] += c[2] + c[3];
                    }
                }
                acc
            })
            .collect();
        for (p, acc) in parts.iter().enumerate() {
            let ring = &table.patch(p).ring;
            for (i, &n) in ring.iter().enumerate() {
                y[n as usize] += acc[i];
                y[nv + n as usize] += acc[ring.len() + i];
            }
        }
    }
}

impl Operators for FmmOperators<'_> {
    fn nv(&self) -> usize {
        self.disc.num_vertices()
    }

    fn apply(&self, op: OpKind, x: &[C64], y: &mut [C64]) -> Result<()> {
        let n = 2 * self.nv();
        if x.len() != n || y.len() != n {
            return Err(Error::InvalidArgument("operator dimension mismatch".into()));
        }
        if let (OpKind::Tp, Some(tp)) = (op, &self.tp) {
            tp.matvec(x, y);
            return Ok(());
        }
        let (fmm, near) = match op {
            OpKind::T => (&self.fmm, &self.near_t),
            OpKind::Tp => (
                self.fmm_reg
                    .as_ref()
                    .expect("regularizer FMM without localization"),
                &self.near_tp,
            ),
            OpKind::K => (&self.fmm, &self.near_k),
        };
        near.matvec(x, y);
        if op == OpKind::K {
            let mut id = vec![ZERO; n];
            self.identity.matvec_c(x, &mut id);
            y.iter_mut().zip(id).for_each(|(a, b)| *a += b);
        }
        let field = fmm.apply(&self.charges(x))?;
        self.test(&field, op, y);
        Ok(())
    }
}

/// Two patches sharing an edge, for the controlled accuracy experiment.
pub fn edge_neighbours(table: &PatchTable) -> Result<(usize, usize)> {
    let c0 = table.patch(0).corners;
    (1..table.len())
        .find(|&b| {
            table
                .patch(b)
                .corners
                .iter()
                .filter(|c| c0.contains(c))
                .count()
                == 2
        })
        .map(|b| (0, b))
        .ok_or_else(|| Error::InvalidArgument("patch 0 has no edge neighbour".into()))
}

/// Interaction blocks (`T` then `K`) of two patches from a multi-component
/// potential evaluation; each source basis function and family is one component.
fn patch_blocks(
    table: &PatchTable,
    samples: &SampleTable,
    kp: &KernelPair,
    a: usize,
    b: usize,
    eval: impl Fn(&[Vec3], &[Vec3], &[C64], usize) -> Result<FmmField>,
) -> Result<Vec<C64>> {
    let kb = table.patch(b).ring.len();
    let nc = NC * 2 * kb;
    let srcs: Vec<Vec3> = samples.samples_of(b).map(|s| samples.position[s]).collect();
    let tgts: Vec<Vec3> = samples.samples_of(a).map(|s| samples.position[s]).collect();
    let sv = crate::bie::source_vectors(table, samples);
    let mut q = vec![ZERO; srcs.len() * nc];
    for (k, s) in samples.samples_of(b).enumerate() {
        let start = samples.basis_start[s];
        for j in 0..kb {
            let v = &sv[start + j];
            for fam in 0..2 {
                let base = k * nc + (fam * kb + j) * NC;
                for c in 0..3 {
                    q[base + c] = C64::new(v[3 * fam + c], 0.0);
                }
                if fam == 0 {
                    q[base + 3] = C64::new(v[6], 0.0);
                }
            }
        }
    }
    let field = eval(&srcs, &tgts, &q, nc)?;
    let ka = table.patch(a).ring.len();
    let mut blk = vec![ZERO; 2 * 4 * ka * kb];
    for (k, s) in samples.samples_of(a).enumerate() {
        let tvs = crate::bie::test_vectors(table, samples, s);
        for col in 0..2 * kb {
            let f = &field.pot[k * nc + col * NC..k * nc + (col + 1) * NC];
            let g = &field.grad[k * nc + col * NC..k * nc + (col + 1) * NC];
            let mut pot = Pot::default();
            pot.t[..3].copy_from_slice(&f[..3]);
            pot.t[6] = f[3];
            pot.k[0] = g[2][1] - g[1][2];
            pot.k[1] = g[0][2] - g[2][0];
            pot.k[2] = g[1][0] - g[0][1];
            let want = Want {
                t: true,
                tp: false,
                k: true,
            };
            for (i, tv) in tvs.iter().enumerate() {
                let c = contract(tv, &pot, kp, want);
                for l in 0..2 {
                    let row = (l * ka + i) * 2 * kb + col;
                    blk[row] += c[0][2 * l] + c[0][2 * l + 1];
                    blk[4 * ka * kb + row] += c[2][2 * l] + c[2][2 * l + 1];
                }
            }
        }
    }
    Ok(blk)
}

/// Relative l2 error of the FMM-evaluated interaction blocks of patches `a`
/// and `b` against the direct sum, for each expansion order. Both patches use
/// 16 sub-triangles with a 3-point rule.
pub fn two_patch_study(
    table: &PatchTable,
    a: usize,
    b: usize,
    kernels: &KernelPair,
    leaf_size: f64,
    orders: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let samples = SampleTable::build(table, &TriangleQuadrature::new(2, BaseRule::Three))?;
    let kappa = kernels.main.kappa;
    let reference = patch_blocks(table, &samples, kernels, a, b, |s, t, q, nc| {
        Ok(direct_sum(s, t, kappa, q, nc))
    })?;
    let norm = cnorm(&reference);
    orders
        .iter()
        .map(|&p| {
            let cfg = FmmConfig {
                leaf_size,
                order: p,
            };
            let blk = patch_blocks(table, &samples, kernels, a, b, |s, t, q, nc| {
                Fmm::new(s, t, kappa, nc, cfg)?.apply(q)
            })?;
            let diff: Vec<C64> = blk.iter().zip(&reference).map(|(x, y)| x - y).collect();
            Ok((p, cnorm(&diff) / norm))
        })
        .collect()
}

/// Comma-separated `(p, error)` table.
pub fn error_vs_order_report(rows: &[(usize, f64)]) -> String {
    let mut s = String::from("p,error\n");
    for (p, e) in rows {
        s.push_str(&format!("{p},{e:.6e}\n"));
    }
    s
}
