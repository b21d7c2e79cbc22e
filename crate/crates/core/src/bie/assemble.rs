//! Galerkin assembly of the EFIE and MFIE operator blocks.

use rayon::prelude::*;

use super::geometry::{Discretization, SourceVec};
use super::kernel::{green_gradient_factor, green_value, KernelPair};
use super::near::CellTree;
use crate::linalg::{CMat, Csr};
use crate::surface::SampleTable;
use crate::{Vec3, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Which operators an accumulation feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Want {
    pub t: bool,
    pub tp: bool,
    pub k: bool,
}

impl Want {
    pub const ALL: Want = Want {
        t: true,
        tp: true,
        k: true,
    };
}

/// Potentials of one source basis function at one observer point:
/// vector and scalar potentials for both wavenumbers and the magnetic field
/// of both current families.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pot {
    pub t: [C64; 7],
    pub tp: [C64; 7],
    pub k: [C64; 6],
}

#[inline(always)]
fn cross(a: Vec3, b: &[f64]) -> [f64; 3] {
    [
        a.y * b[2] - a.z * b[1],
        a.z * b[0] - a.x * b[2],
        a.x * b[1] - a.y * b[0],
    ]
}

/// Adds the field of one source point `y` into `pots[index(m)]` for each basis `m`.
#[inline(always)]
pub fn accumulate(
    x: Vec3,
    y: Vec3,
    src: &[SourceVec],
    kp: &KernelPair,
    want: Want,
    pots: &mut [Pot],
    index: impl Fn(usize) -> usize,
) {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 {
        return;
    }
    let g = green_value(kp.main.kappa, r);
    let gp = if want.tp {
        green_value(kp.reg.kappa, r)
    } else {
        ZERO
    };
    let ck = if want.k {
        green_gradient_factor(kp.main.kappa, g, r)
    } else {
        ZERO
    };
    for (m, s) in src.iter().enumerate() {
        let p = &mut pots[index(m)];
        if want.t {
            for c in 0..7 {
                p.t[c] += g * s[c];
            }
        }
        if want.tp {
            for c in 0..7 {
                p.tp[c] += gp * s[c];
            }
        }
        if want.k {
            let a = cross(d, &s[0..3]);
            let b = cross(d, &s[3..6]);
            for c in 0..3 {
                p.k[c] += ck * a[c];
                p.k[3 + c] += ck * b[c];
            }
        }
    }
}

/// Weighted test vectors of one basis function at one observer point.
#[derive(Debug, Clone, Copy)]
pub struct TestVec {
    g: [f64; 3],
    ng: [f64; 3],
    gxn: [f64; 3],
    lap: f64,
}

impl TestVec {
    pub fn new(wj: f64, n: Vec3, g: Vec3, lap: f64) -> Self {
        let ng = n.cross(&g);
        let gxn = g.cross(&n);
        TestVec {
            g: (wj * g).into(),
            ng: (wj * ng).into(),
            gxn: (wj * gxn).into(),
            lap: wj * lap,
        }
    }
}

/// Test vectors of every basis function at sample `i`.
pub fn test_vecs(table: &crate::mesh::PatchTable, s: &SampleTable, i: usize) -> Vec<TestVec> {
    let smp = s.sample(table, i);
    smp.grads
        .iter()
        .zip(smp.laps)
        .map(|(g, l)| TestVec::new(smp.wj, smp.normal, *g, *l))
        .collect()
}

#[inline(always)]
fn dot(a: &[f64; 3], b: &[C64]) -> C64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

/// The four `(l, k)` blocks `[11, 12, 21, 22]` of `T`, `T'` and `K` (PV part)
/// for one test/source pair.
#[inline(always)]
pub fn contract(tv: &TestVec, p: &Pot, kp: &KernelPair, want: Want) -> [[C64; 4]; 3] {
    let mut out = [[ZERO; 4]; 3];
    if want.t {
        let f = kp.f_main;
        out[0] = [
            f.vector * dot(&tv.g, &p.t[0..3]) + f.scalar * p.t[6] * tv.lap,
            f.vector * dot(&tv.g, &p.t[3..6]),
            f.vector * dot(&tv.ng, &p.t[0..3]),
            f.vector * dot(&tv.ng, &p.t[3..6]),
        ];
    }
    if want.tp {
        let f = kp.f_reg;
        out[1] = [
            f.vector * dot(&tv.g, &p.tp[0..3]) + f.scalar * p.tp[6] * tv.lap,
            f.vector * dot(&tv.g, &p.tp[3..6]),
            f.vector * dot(&tv.ng, &p.tp[0..3]),
            f.vector * dot(&tv.ng, &p.tp[3..6]),
        ];
    }
    if want.k {
        out[2] = [
            -dot(&tv.gxn, &p.k[0..3]),
            -dot(&tv.gxn, &p.k[3..6]),
            -dot(&tv.g, &p.k[0..3]),
            -dot(&tv.g, &p.k[3..6]),
        ];
    }
    out
}

/// Local interaction block of an observer patch `a` and a source patch `b`;
/// `ops[o][(l * ka + i) * 2kb + k * kb + j]`.
#[derive(Debug, Clone)]
pub struct PairBlock {
    pub a: usize,
    pub b: usize,
    pub ka: usize,
    pub kb: usize,
    pub want: Want,
    pub ops: [Vec<C64>; 3],
}

impl PairBlock {
    fn new(a: usize, b: usize, ka: usize, kb: usize, want: Want) -> Self {
        let n = 4 * ka * kb;
        let mk = |on: bool| if on { vec![ZERO; n] } else { Vec::new() };
        PairBlock {
            a,
            b,
            ka,
            kb,
            want,
            ops: [mk(want.t), mk(want.tp), mk(want.k)],
        }
    }

    #[inline]
    pub fn idx(&self, l: usize, i: usize, k: usize, j: usize) -> usize {
        (l * self.ka + i) * 2 * self.kb + k * self.kb + j
    }

    /// Block of the reversed pair under Galerkin reciprocity (`T` and `T'` only).
    fn transposed(&self) -> PairBlock {
        let mut t = PairBlock::new(
            self.b,
            self.a,
            self.kb,
            self.ka,
            Want {
                t: self.want.t,
                tp: self.want.tp,
                k: false,
            },
        );
        for o in 0..2 {
            if self.ops[o].is_empty() {
                continue;
            }
            for l in 0..2 {
                for i in 0..self.ka {
                    for k in 0..2 {
                        for j in 0..self.kb {
                            let v = self.ops[o][self.idx(l, i, k, j)];
                            let id = t.idx(k, j, l, i);
                            t.ops[o][id] = v;
                        }
                    }
                }
            }
        }
        t
    }

    fn symmetrize(&mut self) {
        debug_assert_eq!(self.a, self.b);
        for o in 0..2 {
            if self.ops[o].is_empty() {
                continue;
            }
            for l in 0..2 {
                for i in 0..self.ka {
                    for k in 0..2 {
                        for j in 0..self.kb {
                            let p = self.idx(l, i, k, j);
                            let q = self.idx(k, j, l, i);
                            if p < q {
                                let avg = 0.5 * (self.ops[o][p] + self.ops[o][q]);
                                self.ops[o][p] = avg;
                                self.ops[o][q] = avg;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Observer rule used for a pair block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    /// Fine observer points against adaptively refined source cells.
    Accurate,
    /// Far-rule points on both sides, skipping coincident points.
    Coarse,
}

/// Computes the interaction block of patches `a` (observer) and `b` (source).
pub fn pair_block(
    disc: &Discretization,
    kp: &KernelPair,
    a: usize,
    b: usize,
    mode: PairMode,
    want: Want,
) -> PairBlock {
    let table = &disc.table;
    let ring_a = &table.patch(a).ring;
    let ring_b = &table.patch(b).ring;
    let (ka, kb) = (ring_a.len(), ring_b.len());
    let mut blk = PairBlock::new(a, b, ka, kb, want);
    let mut pots = vec![Pot::default(); kb];
    let obs = match mode {
        PairMode::Accurate => &disc.fine,
        PairMode::Coarse => &disc.coarse,
    };
    let mut tree = CellTree::new(disc, b);
    for p in obs.samples_of(a) {
        pots.iter_mut().for_each(|x| *x = Pot::default());
        let x = obs.position[p];
        match mode {
            PairMode::Accurate => {
                let sp = if a == b { Some(obs.param[p]) } else { None };
                tree.integrate(x, sp, &mut |y, src| {
                    accumulate(x, y, src, kp, want, &mut pots, |m| m)
                });
            }
            PairMode::Coarse => {
                for q in disc.coarse.samples_of(b) {
                    if q != p || a != b {
                        accumulate(
                            x,
                            disc.coarse.position[q],
                            disc.coarse_sources(q),
                            kp,
                            want,
                            &mut pots,
                            |m| m,
                        );
                    }
                }
            }
        }
        let tvs = test_vecs(table, obs, p);
        for (i, tv) in tvs.iter().enumerate() {
            for (j, pot) in pots.iter().enumerate() {
                let c = contract(tv, pot, kp, want);
                for (o, vals) in c.iter().enumerate() {
                    if blk.ops[o].is_empty() {
                        continue;
                    }
                    for (lk, v) in vals.iter().enumerate() {
                        let id = blk.idx(lk / 2, i, lk % 2, j);
                        blk.ops[o][id] += *v;
                    }
                }
            }
        }
    }
    blk
}

/// Near blocks for all near pairs `(a, b)` with `a` in `patches`. `T` and `T'`
/// are computed once per unordered pair and mirrored; `K` in both directions.
fn near_blocks_for(
    disc: &Discretization,
    kp: &KernelPair,
    mode: PairMode,
    patches: &[usize],
    want: Want,
) -> Vec<PairBlock> {
    patches
        .par_iter()
        .flat_map_iter(|&a| {
            let mut out = Vec::new();
            for &b in &disc.near[a] {
                let b = b as usize;
                let upper = b >= a;
                let w = Want {
                    t: want.t && upper,
                    tp: want.tp && upper,
                    k: want.k,
                };
                if !(w.t || w.tp || w.k) {
                    continue;
                }
                let mut blk = pair_block(disc, kp, a, b, mode, w);
                if a == b {
                    blk.symmetrize();
                } else if upper && (w.t || w.tp) {
                    out.push(blk.transposed());
                }
                out.push(blk);
            }
            out
        })
        .collect()
}

/// Destination of scattered blocks.
pub trait BlockSink {
    fn add(&mut self, op: usize, row: usize, col: usize, v: C64);
}

fn scatter(disc: &Discretization, blk: &PairBlock, sink: &mut impl BlockSink) {
    let nv = disc.num_vertices();
    let ra = &disc.table.patch(blk.a).ring;
    let rb = &disc.table.patch(blk.b).ring;
    for o in 0..3 {
        if blk.ops[o].is_empty() {
            continue;
        }
        for l in 0..2 {
            for (i, &n) in ra.iter().enumerate() {
                for k in 0..2 {
                    for (j, &m) in rb.iter().enumerate() {
                        sink.add(
                            o,
                            l * nv + n as usize,
                            k * nv + m as usize,
                            blk.ops[o][blk.idx(l, i, k, j)],
                        );
                    }
                }
            }
        }
    }
}

/// Dense storage of the three operators.
#[derive(Debug, Clone)]
pub struct DenseOps {
    pub t: CMat,
    pub tp: CMat,
    pub k: CMat,
}

impl BlockSink for DenseOps {
    #[inline]
    fn add(&mut self, op: usize, row: usize, col: usize, v: C64) {
        let m = match op {
            0 => &mut self.t,
            1 => &mut self.tp,
            _ => &mut self.k,
        };
        *m.at_mut(row, col) += v;
    }
}

/// Sparse storage of the three operators on a fixed pattern.
#[derive(Debug, Clone)]
pub struct SparseOps {
    pub t: Csr<C64>,
    pub tp: Csr<C64>,
    pub k: Csr<C64>,
}

impl BlockSink for SparseOps {
    #[inline]
    fn add(&mut self, op: usize, row: usize, col: usize, v: C64) {
        let m = match op {
            0 => &mut self.t,
            1 => &mut self.tp,
            _ => &mut self.k,
        };
        sparse_add(m, row, col, v);
    }
}

/// One sparse operator receiving only operator index `.0`.
struct Single(usize, Csr<C64>);

impl BlockSink for Single {
    #[inline]
    fn add(&mut self, op: usize, row: usize, col: usize, v: C64) {
        if op == self.0 {
            sparse_add(&mut self.1, row, col, v);
        }
    }
}

#[inline]
fn sparse_add(m: &mut Csr<C64>, row: usize, col: usize, v: C64) {
    let r = m.indptr[row]..m.indptr[row + 1];
    let pos = m.indices[r.clone()]
        .binary_search(&(col as u32))
        .expect("entry in sparsity pattern");
    m.data[r.start + pos] += v;
}

/// Vertex-level sparsity pattern of patch-pair interactions, expanded to the
/// `2 N_v` block layout.
fn pattern(disc: &Discretization, pairs: impl Fn(usize) -> Vec<usize> + Sync) -> Csr<C64> {
    let nv = disc.num_vertices();
    let per_patch: Vec<Vec<(u32, u32)>> = (0..disc.num_patches())
        .into_par_iter()
        .map(|a| {
            let ra = &disc.table.patch(a).ring;
            let mut v = Vec::new();
            for b in pairs(a) {
                for &n in ra {
                    for &m in &disc.table.patch(b).ring {
                        v.push((n, m));
                    }
                }
            }
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for v in per_patch {
        for (n, m) in v {
            rows[n as usize].push(m);
        }
    }
    for r in &mut rows {
        r.sort_unstable();
        r.dedup();
    }
    let mut indptr = vec![0usize; 2 * nv + 1];
    let mut indices = Vec::new();
    for l in 0..2 {
        for (n, r) in rows.iter().enumerate() {
            for k in 0..2 {
                indices.extend(r.iter().map(|&m| (k * nv) as u32 + m));
            }
            indptr[l * nv + n + 1] = indices.len();
        }
    }
    let nnz = indices.len();
    Csr {
        rows: 2 * nv,
        cols: 2 * nv,
        indptr,
        indices,
        data: vec![ZERO; nnz],
    }
}

fn chunks(disc: &Discretization) -> Vec<Vec<usize>> {
    let n = disc.num_patches();
    let size = (4 * rayon::current_num_threads()).max(16);
    (0..n)
        .step_by(size)
        .map(|s| (s..(s + size).min(n)).collect())
        .collect()
}

/// Sparse near-field operators over all near pairs.
pub fn near_field(disc: &Discretization, kp: &KernelPair, mode: PairMode, want: Want) -> SparseOps {
    let pat = pattern(disc, |a| disc.near[a].iter().map(|&b| b as usize).collect());
    let mut ops = SparseOps {
        t: pat.clone(),
        tp: pat.clone(),
        k: pat,
    };
    for chunk in chunks(disc) {
        for blk in near_blocks_for(disc, kp, mode, &chunk, want) {
            scatter(disc, &blk, &mut ops);
        }
    }
    ops
}

/// Sparse `T'` over all patch pairs with centre distance at most `radius`:
/// far-rule quadrature for far pairs and the accurate rule for near pairs.
pub fn localized_regularizer(disc: &Discretization, kp: &KernelPair, radius: f64) -> Csr<C64> {
    let local = |a: usize| -> Vec<usize> {
        (0..disc.num_patches())
            .filter(|&b| disc.is_near(a, b) || disc.centre_distance(a, b) <= radius)
            .collect()
    };
    let mut out = Single(1, pattern(disc, local));
    let want = Want {
        t: false,
        tp: true,
        k: false,
    };
    for chunk in chunks(disc) {
        let blocks: Vec<PairBlock> = chunk
            .par_iter()
            .flat_map_iter(|&a| {
                let mut out = Vec::new();
                for b in a..disc.num_patches() {
                    let near = disc.is_near(a, b);
                    if !near && disc.centre_distance(a, b) > radius {
                        continue;
                    }
                    let mode = if near {
                        PairMode::Accurate
                    } else {
                        PairMode::Coarse
                    };
                    let mut blk = pair_block(disc, kp, a, b, mode, want);
                    if a == b {
                        blk.symmetrize();
                    } else {
                        out.push(blk.transposed());
                    }
                    out.push(blk);
                }
                out
            })
            .collect();
        for blk in &blocks {
            scatter(disc, blk, &mut out);
        }
    }
    out.1
}

/// Dense operators: far-rule quadrature for far pairs plus accurate near
/// blocks. `T'` is restricted to centre distances up to `tp_radius`.
pub fn dense_operators(disc: &Discretization, kp: &KernelPair, tp_radius: Option<f64>) -> DenseOps {
    let nv = disc.num_vertices();
    let n2 = 2 * nv;
    let mut ops = DenseOps {
        t: CMat::zeros(n2, n2),
        tp: CMat::zeros(n2, n2),
        k: CMat::zeros(n2, n2),
    };
    let table = &disc.table;
    for chunk in chunks(disc) {
        let rows: Vec<(usize, [Vec<C64>; 3])> = chunk
            .par_iter()
            .map(|&a| {
                let ka = table.patch(a).ring.len();
                let mut buf = [
                    vec![ZERO; 2 * ka * n2],
                    vec![ZERO; 2 * ka * n2],
                    vec![ZERO; 2 * ka * n2],
                ];
                let mut pots = vec![Pot::default(); nv];
                let far: Vec<(usize, bool)> = (0..disc.num_patches())
                    .filter(|&b| !disc.is_near(a, b))
                    .map(|b| (b, tp_radius.is_none_or(|r| disc.centre_distance(a, b) <= r)))
                    .collect();
                let any_tp = far.iter().any(|f| f.1);
                for p in disc.coarse.samples_of(a) {
                    pots.iter_mut().for_each(|x| *x = Pot::default());
                    let x = disc.coarse.position[p];
                    for &(b, with_tp) in &far {
                        let ring = &table.patch(b).ring;
                        let want = Want {
                            t: true,
                            tp: with_tp,
                            k: true,
                        };
                        for q in disc.coarse.samples_of(b) {
                            accumulate(
                                x,
                                disc.coarse.position[q],
                                disc.coarse_sources(q),
                                kp,
                                want,
                                &mut pots,
                                |m| ring[m] as usize,
                            );
                        }
                    }
                    let want = Want {
                        t: true,
                        tp: any_tp,
                        k: true,
                    };
                    let tvs = test_vecs(table, &disc.coarse, p);
                    for (i, tv) in tvs.iter().enumerate() {
                        for (m, pot) in pots.iter().enumerate() {
                            let c = contract(tv, pot, kp, want);
                            for (o, vals) in c.iter().enumerate() {
                                for (lk, v) in vals.iter().enumerate() {
                                    let (l, k) = (lk / 2, lk % 2);
                                    buf[o][(l * ka + i) * n2 + k * nv + m] += *v;
                                }
                            }
                        }
                    }
                }
                (a, buf)
            })
            .collect();
        for (a, buf) in rows {
            let ring = &table.patch(a).ring;
            let ka = ring.len();
            for (o, m) in [&mut ops.t, &mut ops.tp, &mut ops.k]
                .into_iter()
                .enumerate()
            {
                for l in 0..2 {
                    for (i, &n) in ring.iter().enumerate() {
                        let src = &buf[o][(l * ka + i) * n2..(l * ka + i + 1) * n2];
                        let dst =
                            &mut m.data[(l * nv + n as usize) * n2..(l * nv + n as usize + 1) * n2];
                        dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
                    }
                }
            }
        }
        for blk in near_blocks_for(disc, kp, PairMode::Accurate, &chunk, Want::ALL) {
            scatter(disc, &blk, &mut ops);
        }
    }
    ops
}
