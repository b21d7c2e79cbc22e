//! Wideband fast multipole evaluation of Helmholtz potentials and gradients.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use super::sphere::{bandlimit, plane_waves, resample, stable_bandlimit, translation, SphereGrid};
use super::taylor::{add_moments, evaluate_local, m2l, shift_local, shift_moments, Taylor};
use super::tree::{FmmTree, Regime};
use crate::{Error, Result, Vec3, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Tree and expansion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmmConfig {
    /// Leaf box edge in metres.
    pub leaf_size: f64,
    /// Expansion order: digits of the excess-bandwidth rule on spectral
    /// levels and Taylor degree on Cartesian levels.
    pub order: usize,
}

impl FmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.leaf_size > 0.0) {
            return Err(Error::InvalidArgument("leaf size must be positive".into()));
        }
        if self.order == 0 || self.order > 60 {
            return Err(Error::InvalidArgument(format!(
                "expansion order must lie in 1..=60, got {}",
                self.order
            )));
        }
        Ok(())
    }
}

/// Potentials and gradients at the targets, `nc` components each.
#[derive(Debug, Clone)]
pub struct FmmField {
    pub nc: usize,
    pub pot: Vec<C64>,
    /// `grad[t * nc + c]`.
    pub grad: Vec<[C64; 3]>,
}

enum Plan {
    Idle,
    Spectral {
        grid: SphereGrid,
        trans: HashMap<[i64; 3], Vec<C64>>,
        from_children: Option<Vec<Vec<C64>>>,
    },
    Cartesian {
        taylor: Taylor,
        derivs: HashMap<[i64; 3], Vec<C64>>,
    },
}

/// Prepared FMM for fixed sources, targets and wavenumber.
pub struct Fmm {
    pub tree: FmmTree,
    pub kappa: C64,
    pub config: FmmConfig,
    pub nc: usize,
    sources: Vec<Vec3>,
    targets: Vec<Vec3>,
    plans: Vec<Plan>,
    first: usize,
}

fn green_and_gradient(kappa: C64, d: Vec3) -> Option<(C64, C64)> {
    let r = d.norm();
    if r == 0.0 {
        return None;
    }
    let j = C64::new(0.0, 1.0);
    let g = (-j * kappa * r).exp() / (4.0 * PI * r);
    Some((g, -(1.0 + j * kappa * r) * g / (r * r)))
}

/// Direct evaluation `sum_s G(x_t - y_s) q_s` and its gradient, skipping coincident points.
pub fn direct_sum(
    sources: &[Vec3],
    targets: &[Vec3],
    kappa: C64,
    charges: &[C64],
    nc: usize,
) -> FmmField {
    let out: Vec<(Vec<C64>, Vec<[C64; 3]>)> = targets
        .par_iter()
        .map(|x| {
            let mut pot = vec![ZERO; nc];
            let mut grad = vec![[ZERO; 3]; nc];
            for (y, q) in sources.iter().zip(charges.chunks(nc)) {
                let d = x - y;
                if let Some((g, c)) = green_and_gradient(kappa, d) {
                    for k in 0..nc {
                        pot[k] += g * q[k];
                        for (i, gi) in grad[k].iter_mut().enumerate() {
                            *gi += c * d[i] * q[k];
                        }
                    }
                }
            }
            (pot, grad)
        })
        .collect();
    let mut f = FmmField {
        nc,
        pot: Vec::with_capacity(targets.len() * nc),
        grad: Vec::with_capacity(targets.len() * nc),
    };
    for (p, g) in out {
        f.pot.extend(p);
        f.grad.extend(g);
    }
    f
}

impl Fmm {
    pub fn new(
        sources: &[Vec3],
        targets: &[Vec3],
        kappa: C64,
        nc: usize,
        config: FmmConfig,
    ) -> Result<Self> {
        config.validate()?;
        if !(kappa.re > 0.0) || kappa.im > 0.0 {
            return Err(Error::InvalidArgument(
                "wavenumber must have positive real and non-positive imaginary part".into(),
            ));
        }
        let tree = FmmTree::build(sources, targets, config.leaf_size, 2.0 * PI / kappa.re)?;
        let first = tree.first_interaction_level().unwrap_or(tree.levels.len());
        let sorted =
            |pts: &[Vec3], order: &[usize]| order.iter().map(|&i| pts[i]).collect::<Vec<_>>();
        let (sources, targets) = (
            sorted(sources, &tree.source_order),
            sorted(targets, &tree.target_order),
        );
        let plans = (0..tree.levels.len())
            .into_par_iter()
            .map(|l| Self::plan(&tree, l, first, kappa, config.order))
            .collect::<Result<Vec<_>>>()?;
        Ok(Fmm {
            tree,
            kappa,
            config,
            nc,
            sources,
            targets,
            plans,
            first,
        })
    }

    fn plan(tree: &FmmTree, l: usize, first: usize, kappa: C64, order: usize) -> Result<Plan> {
        if l < first {
            return Ok(Plan::Idle);
        }
        let level = &tree.levels[l];
        let mut offsets: Vec<[i64; 3]> = level
            .boxes
            .iter()
            .flat_map(|b| {
                b.interaction.iter().map(move |&s| {
                    let c = level.boxes[s as usize].coord;
                    [b.coord[0] - c[0], b.coord[1] - c[1], b.coord[2] - c[2]]
                })
            })
            .collect();
        offsets.sort_unstable();
        offsets.dedup();
        let vec_of = |o: &[i64; 3]| Vec3::new(o[0] as f64, o[1] as f64, o[2] as f64) * level.size;
        match level.regime {
            Regime::Spectral => {
                let band = bandlimit(kappa.norm(), level.size * 3f64.sqrt(), order)
                    .min(stable_bandlimit(kappa.norm(), 2.0 * level.size));
                let grid = SphereGrid::new(band);
                let mut trans = HashMap::new();
                for o in &offsets {
                    trans.insert(*o, translation(&grid, kappa, vec_of(o))?);
                }
                let child_cartesian =
                    l + 1 < tree.levels.len() && tree.levels[l + 1].regime == Regime::Cartesian;
                let from_children = child_cartesian.then(|| {
                    let t = Taylor::new(order);
                    grid.dirs
                        .iter()
                        .map(|d| t.plane_monomials(C64::new(0.0, -1.0) * kappa, *d))
                        .collect()
                });
                Ok(Plan::Spectral {
                    grid,
                    trans,
                    from_children,
                })
            }
            Regime::Cartesian => {
                let taylor = Taylor::new(order);
                let derivs = offsets
                    .iter()
                    .map(|o| (*o, taylor.derivatives(kappa, vec_of(o))))
                    .collect();
                Ok(Plan::Cartesian { taylor, derivs })
            }
        }
    }

    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    fn expansion_len(&self, l: usize) -> usize {
        match &self.plans[l] {
            Plan::Idle => 0,
            Plan::Spectral { grid, .. } => grid.len() * self.nc,
            Plan::Cartesian { taylor, .. } => taylor.len() * self.nc,
        }
    }

    /// Potentials and gradients at the targets for charges `q[s * nc + c]`
    /// given in the original source order.
    pub fn apply(&self, charges: &[C64]) -> Result<FmmField> {
        let nc = self.nc;
        if charges.len() != self.sources.len() * nc {
            return Err(Error::InvalidArgument(format!(
                "expected {} charges, got {}",
                self.sources.len() * nc,
                charges.len()
            )));
        }
        let mut q = vec![ZERO; charges.len()];
        for (k, &i) in self.tree.source_order.iter().enumerate() {
            q[k * nc..(k + 1) * nc].copy_from_slice(&charges[i * nc..(i + 1) * nc]);
        }
        let depth = self.tree.depth();
        let nl = self.tree.levels.len();
        let mut multi: Vec<Vec<Vec<C64>>> = vec![Vec::new(); nl];
        if self.first <= depth {
            multi[depth] = self.leaf_multipoles(&q);
            for l in (self.first..depth).rev() {
                let m = self.upward(l, &multi[l + 1]);
                multi[l] = m;
            }
        }
        let mut local: Vec<Vec<Vec<C64>>> = vec![Vec::new(); nl];
        for l in self.first..nl {
            let mut loc = self.translate(l, &multi[l]);
            if l > self.first {
                self.downward(l, &local[l - 1], &mut loc);
            }
            local[l] = loc;
        }
        let leaf_local = if self.first <= depth {
            Some(&local[depth])
        } else {
            None
        };
        let per_leaf: Vec<(Vec<C64>, Vec<[C64; 3]>)> = self
            .tree
            .leaves()
            .par_iter()
            .enumerate()
            .map(|(bi, b)| self.leaf_fields(bi, b, &q, leaf_local))
            .collect();
        let nt = self.targets.len();
        let mut field = FmmField {
            nc,
            pot: vec![ZERO; nt * nc],
            grad: vec![[ZERO; 3]; nt * nc],
        };
        for (b, (pot, grad)) in self.tree.leaves().iter().zip(per_leaf) {
            for (k, t) in b.targets.clone().enumerate() {
                let orig = self.tree.target_order[t];
                field.pot[orig * nc..(orig + 1) * nc].copy_from_slice(&pot[k * nc..(k + 1) * nc]);
                field.grad[orig * nc..(orig + 1) * nc].copy_from_slice(&grad[k * nc..(k + 1) * nc]);
            }
        }
        Ok(field)
    }

    fn leaf_multipoles(&self, q: &[C64]) -> Vec<Vec<C64>> {
        let depth = self.tree.depth();
        let nc = self.nc;
        let len = self.expansion_len(depth);
        let jk = C64::new(0.0, 1.0) * self.kappa;
        self.tree.levels[depth]
            .boxes
            .par_iter()
            .map(|b| {
                let mut m = vec![ZERO; len];
                if b.sources.is_empty() {
                    return m;
                }
                match &self.plans[depth] {
                    Plan::Spectral { grid, .. } => {
                        for s in b.sources.clone() {
                            let y = self.sources[s] - b.centre;
                            for (i, d) in grid.dirs.iter().enumerate() {
                                let ph = (jk * d.dot(&y)).exp();
                                for c in 0..nc {
                                    m[i * nc + c] += q[s * nc + c] * ph;
                                }
                            }
                        }
                    }
                    Plan::Cartesian { taylor, .. } => {
                        for s in b.sources.clone() {
                            add_moments(
                                taylor,
                                self.sources[s] - b.centre,
                                &q[s * nc..(s + 1) * nc],
                                nc,
                                &mut m,
                            );
                        }
                    }
                    Plan::Idle => {}
                }
                m
            })
            .collect()
    }

    fn upward(&self, l: usize, child: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let nc = self.nc;
        let len = self.expansion_len(l);
        let level = &self.tree.levels[l];
        let clevel = &self.tree.levels[l + 1];
        level
            .boxes
            .par_iter()
            .map(|b| {
                let mut m = vec![ZERO; len];
                if b.sources.is_empty() {
                    return m;
                }
                for &ci in &b.children {
                    let cb = &clevel.boxes[ci as usize];
                    if cb.sources.is_empty() {
                        continue;
                    }
                    let cm = &child[ci as usize];
                    let s = cb.centre - b.centre;
                    match (&self.plans[l], &self.plans[l + 1]) {
                        (Plan::Cartesian { taylor, .. }, Plan::Cartesian { .. }) => {
                            shift_moments(taylor, cm, -s, nc, &mut m)
                        }
                        (
                            Plan::Spectral {
                                grid,
                                from_children: Some(mono),
                                ..
                            },
                            Plan::Cartesian { .. },
                        ) => {
                            let shift = plane_waves(grid, self.kappa, s, 1.0);
                            for (i, (row, ph)) in mono.iter().zip(&shift).enumerate() {
                                for c in 0..nc {
                                    let v: C64 = row
                                        .iter()
                                        .enumerate()
                                        .map(|(g, w)| w * cm[g * nc + c])
                                        .sum();
                                    m[i * nc + c] += v * ph;
                                }
                            }
                        }
                        (Plan::Spectral { grid, .. }, Plan::Spectral { grid: cgrid, .. }) => {
                            let up = resample(cgrid, grid, cm, nc);
                            let shift = plane_waves(grid, self.kappa, s, 1.0);
                            for (i, ph) in shift.iter().enumerate() {
                                for c in 0..nc {
                                    m[i * nc + c] += up[i * nc + c] * ph;
                                }
                            }
                        }
                        _ => unreachable!("expansion regimes coarsen upward"),
                    }
                }
                m
            })
            .collect()
    }

    fn translate(&self, l: usize, multi: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let nc = self.nc;
        let len = self.expansion_len(l);
        let level = &self.tree.levels[l];
        level
            .boxes
            .par_iter()
            .map(|b| {
                let mut loc = vec![ZERO; len];
                for &s in &b.interaction {
                    let sb = &level.boxes[s as usize];
                    let off = [
                        b.coord[0] - sb.coord[0],
                        b.coord[1] - sb.coord[1],
                        b.coord[2] - sb.coord[2],
                    ];
                    let m = &multi[s as usize];
                    match &self.plans[l] {
                        Plan::Spectral { trans, .. } => {
                            for (i, t) in trans[&off].iter().enumerate() {
                                for c in 0..nc {
                                    loc[i * nc + c] += t * m[i * nc + c];
                                }
                            }
                        }
                        Plan::Cartesian { taylor, derivs } => {
                            m2l(taylor, &derivs[&off], m, nc, &mut loc)
                        }
                        Plan::Idle => {}
                    }
                }
                loc
            })
            .collect()
    }

    fn downward(&self, l: usize, parent: &[Vec<C64>], loc: &mut [Vec<C64>]) {
        let nc = self.nc;
        let level = &self.tree.levels[l];
        let plevel = &self.tree.levels[l - 1];
        loc.par_iter_mut().zip(&level.boxes).for_each(|(out, b)| {
            if b.targets.is_empty() {
                return;
            }
            let pi = b.parent.unwrap() as usize;
            let pl = &parent[pi];
            let s = b.centre - plevel.boxes[pi].centre;
            match (&self.plans[l - 1], &self.plans[l]) {
                (Plan::Cartesian { .. }, Plan::Cartesian { taylor, .. }) => {
                    shift_local(taylor, pl, s, nc, out)
                }
                (
                    Plan::Spectral {
                        grid,
                        from_children: Some(mono),
                        ..
                    },
                    Plan::Cartesian { .. },
                ) => {
                    let shift = plane_waves(grid, self.kappa, s, -1.0);
                    for (i, (row, ph)) in mono.iter().zip(&shift).enumerate() {
                        let w = grid.weights[i] * ph;
                        for c in 0..nc {
                            let v = w * pl[i * nc + c];
                            for (g, mv) in row.iter().enumerate() {
                                out[g * nc + c] += v * mv;
                            }
                        }
                    }
                }
                (Plan::Spectral { grid: pgrid, .. }, Plan::Spectral { grid, .. }) => {
                    let shift = plane_waves(pgrid, self.kappa, s, -1.0);
                    let shifted: Vec<C64> = pl
                        .iter()
                        .enumerate()
                        .map(|(k, v)| v * shift[k / nc])
                        .collect();
                    let down = resample(pgrid, grid, &shifted, nc);
                    out.iter_mut().zip(down).for_each(|(o, d)| *o += d);
                }
                _ => unreachable!("expansion regimes refine downward"),
            }
        });
    }

    fn leaf_fields(
        &self,
        bi: usize,
        b: &super::tree::TreeBox,
        q: &[C64],
        local: Option<&Vec<Vec<C64>>>,
    ) -> (Vec<C64>, Vec<[C64; 3]>) {
        let nc = self.nc;
        let depth = self.tree.depth();
        let leaf = &self.tree.levels[depth];
        let nt = b.targets.len();
        let mut pot = vec![ZERO; nt * nc];
        let mut grad = vec![[ZERO; 3]; nt * nc];
        let jk = C64::new(0.0, 1.0) * self.kappa;
        for (k, t) in b.targets.clone().enumerate() {
            let x = self.targets[t];
            let (p, g) = (
                &mut pot[k * nc..(k + 1) * nc],
                &mut grad[k * nc..(k + 1) * nc],
            );
            if let Some(local) = local {
                let loc = &local[bi];
                let a = x - b.centre;
                match &self.plans[depth] {
                    Plan::Spectral { grid, .. } => {
                        for (i, d) in grid.dirs.iter().enumerate() {
                            let e = grid.weights[i] * (-jk * d.dot(&a)).exp();
                            let de = -jk * e;
                            for c in 0..nc {
                                let v = loc[i * nc + c];
                                p[c] += e * v;
                                for dim in 0..3 {
                                    g[c][dim] += de * d[dim] * v;
                                }
                            }
                        }
                    }
                    Plan::Cartesian { taylor, .. } => evaluate_local(taylor, loc, a, nc, p, g),
                    Plan::Idle => {}
                }
            }
            for &nb in &b.near {
                for s in leaf.boxes[nb as usize].sources.clone() {
                    let d = x - self.sources[s];
                    if let Some((gv, c)) = green_and_gradient(self.kappa, d) {
                        for cc in 0..nc {
                            let qv = q[s * nc + cc];
                            p[cc] += gv * qv;
                            for dim in 0..3 {
                                g[cc][dim] += c * d[dim] * qv;
                            }
                        }
                    }
                }
            }
        }
        (pot, grad)
    }
}
