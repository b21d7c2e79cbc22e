//! Octree over source and target points.

use std::collections::HashMap;
use std::fmt::Write;
use std::ops::Range;

use crate::{Error, Result, Vec3};

/// Regime of the expansions at one tree level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Sampled plane-wave patterns.
    Spectral,
    /// Cartesian Taylor moments.
    Cartesian,
}

#[derive(Debug, Clone)]
pub struct TreeBox {
    pub coord: [i64; 3],
    pub centre: Vec3,
    pub parent: Option<u32>,
    pub children: Vec<u32>,
    /// Range into the sorted sources.
    pub sources: Range<usize>,
    /// Range into the sorted targets.
    pub targets: Range<usize>,
    /// Well-separated source boxes at the same level.
    pub interaction: Vec<u32>,
    /// Adjacent source boxes, including the box itself; leaf level only.
    pub near: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct Level {
    pub size: f64,
    pub regime: Regime,
    pub boxes: Vec<TreeBox>,
    pub index: HashMap<[i64; 3], u32>,
}

#[derive(Debug, Clone)]
pub struct FmmTree {
    pub root_centre: Vec3,
    pub root_size: f64,
    pub leaf_size: f64,
    pub levels: Vec<Level>,
    /// `source_order[k]` = original index of the `k`-th sorted source.
    pub source_order: Vec<usize>,
    pub target_order: Vec<usize>,
    /// First level whose boxes are smaller than `0.2` wavelengths.
    pub regime_split_level: usize,
}

fn morton(c: [u64; 3], depth: usize) -> u64 {
    let mut key = 0u64;
    for b in (0..depth).rev() {
        for (d, v) in c.iter().enumerate() {
            key |= ((v >> b) & 1) << (3 * b + 2 - d);
        }
    }
    key
}

fn decode(key: u64, depth: usize) -> [i64; 3] {
    let mut c = [0i64; 3];
    for b in 0..depth {
        for (d, v) in c.iter_mut().enumerate() {
            *v |= (((key >> (3 * b + 2 - d)) & 1) as i64) << b;
        }
    }
    c
}

fn adjacent(a: [i64; 3], b: [i64; 3]) -> bool {
    (0..3).all(|d| (a[d] - b[d]).abs() <= 1)
}

impl FmmTree {
    /// Uniform octree with leaves of edge `leaf_size`; empty boxes are pruned.
    pub fn build(
        sources: &[Vec3],
        targets: &[Vec3],
        leaf_size: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if !(leaf_size > 0.0) || !(wavelength > 0.0) {
            return Err(Error::InvalidArgument(
                "leaf size and wavelength must be positive".into(),
            ));
        }
        if sources.is_empty() || targets.is_empty() {
            return Err(Error::InvalidArgument(
                "tree needs sources and targets".into(),
            ));
        }
        let all = || sources.iter().chain(targets);
        let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
        for p in all() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite point".into()));
            }
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let extent = (hi - lo).max() * (1.0 + 1e-9) + 1e-300;
        let mut depth = 0;
        while leaf_size * (1u64 << depth) as f64 <= extent {
            depth += 1;
        }
        let root_size = leaf_size * (1u64 << depth) as f64;
        let root_centre = 0.5 * (lo + hi);
        let origin = root_centre - Vec3::repeat(0.5 * root_size);
        let n = 1u64 << depth;
        let key = |p: &Vec3| {
            let c = [0, 1, 2]
                .map(|d| (((p[d] - origin[d]) / leaf_size).floor().max(0.0) as u64).min(n - 1));
            morton(c, depth)
        };
        let sort = |pts: &[Vec3]| {
            let mut idx: Vec<(u64, usize)> =
                pts.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
            idx.sort_unstable();
            idx
        };
        let skeys = sort(sources);
        let tkeys = sort(targets);
        let mut levels: Vec<Level> = Vec::with_capacity(depth + 1);
        for l in 0..=depth {
            let shift = 3 * (depth - l);
            let mut keys: Vec<u64> = skeys.iter().chain(&tkeys).map(|k| k.0 >> shift).collect();
            keys.sort_unstable();
            keys.dedup();
            let size = root_size / (1u64 << l) as f64;
            let range = |sorted: &[(u64, usize)], k: u64| {
                let a = sorted.partition_point(|s| (s.0 >> shift) < k);
                let b = sorted.partition_point(|s| (s.0 >> shift) <= k);
                a..b
            };
            let boxes: Vec<TreeBox> = keys
                .iter()
                .map(|&k| {
                    let coord = decode(k, l);
                    let centre = origin
                        + Vec3::new(
                            coord[0] as f64 + 0.5,
                            coord[1] as f64 + 0.5,
                            coord[2] as f64 + 0.5,
                        ) * size;
                    TreeBox {
                        coord,
                        centre,
                        parent: None,
                        children: Vec::new(),
                        sources: range(&skeys, k),
                        targets: range(&tkeys, k),
                        interaction: Vec::new(),
                        near: Vec::new(),
                    }
                })
                .collect();
            let index = boxes
                .iter()
                .enumerate()
                .map(|(i, b)| (b.coord, i as u32))
                .collect();
            let regime = if size >= 0.2 * wavelength {
                Regime::Spectral
            } else {
                Regime::Cartesian
            };
            levels.push(Level {
                size,
                regime,
                boxes,
                index,
            });
        }
        for l in 1..=depth {
            let (upper, lower) = levels.split_at_mut(l);
            let parents = &mut upper[l - 1];
            for (i, b) in lower[0].boxes.iter_mut().enumerate() {
                let pc = b.coord.map(|v| v >> 1);
                let p = parents.index[&pc];
                b.parent = Some(p);
                parents.boxes[p as usize].children.push(i as u32);
            }
        }
        for l in 1..=depth {
            let lists: Vec<Vec<u32>> = levels[l]
                .boxes
                .iter()
                .map(|b| {
                    if b.targets.is_empty() {
                        return Vec::new();
                    }
                    let parent = &levels[l - 1].boxes[b.parent.unwrap() as usize];
                    let mut list = Vec::new();
                    for d in neighbour_offsets() {
                        let c = [
                            parent.coord[0] + d[0],
                            parent.coord[1] + d[1],
                            parent.coord[2] + d[2],
                        ];
                        if let Some(&q) = levels[l - 1].index.get(&c) {
                            for &ch in &levels[l - 1].boxes[q as usize].children {
                                let cb = &levels[l].boxes[ch as usize];
                                if !cb.sources.is_empty() && !adjacent(cb.coord, b.coord) {
                                    list.push(ch);
                                }
                            }
                        }
                    }
                    list.sort_unstable();
                    list
                })
                .collect();
            for (b, list) in levels[l].boxes.iter_mut().zip(lists) {
                b.interaction = list;
            }
        }
        let leaf = &levels[depth];
        let near: Vec<Vec<u32>> = leaf
            .boxes
            .iter()
            .map(|b| {
                let mut list: Vec<u32> = neighbour_offsets()
                    .filter_map(|d| {
                        leaf.index
                            .get(&[b.coord[0] + d[0], b.coord[1] + d[1], b.coord[2] + d[2]])
                            .copied()
                    })
                    .filter(|&q| !leaf.boxes[q as usize].sources.is_empty())
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        for (b, list) in levels[depth].boxes.iter_mut().zip(near) {
            b.near = list;
        }
        let regime_split_level = levels
            .iter()
            .position(|l| l.regime == Regime::Cartesian)
            .unwrap_or(depth + 1);
        Ok(FmmTree {
            root_centre,
            root_size,
            leaf_size,
            levels,
            source_order: skeys.iter().map(|k| k.1).collect(),
            target_order: tkeys.iter().map(|k| k.1).collect(),
            regime_split_level,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn leaves(&self) -> &[TreeBox] {
        &self.levels[self.depth()].boxes
    }

    /// Coarsest level with a non-empty interaction list, if any.
    pub fn first_interaction_level(&self) -> Option<usize> {
        self.levels
            .iter()
            .position(|l| l.boxes.iter().any(|b| !b.interaction.is_empty()))
    }

    /// Key-value summary of the tree.
    pub fn stats(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "depth = {}", self.depth());
        let _ = writeln!(s, "root_size = {:.6e}", self.root_size);
        let _ = writeln!(s, "leaf_size = {:.6e}", self.leaf_size);
        let _ = writeln!(s, "sources = {}", self.source_order.len());
        let _ = writeln!(s, "targets = {}", self.target_order.len());
        let _ = writeln!(s, "regime_split_level = {}", self.regime_split_level);
        for (l, lev) in self.levels.iter().enumerate() {
            let inter: usize = lev.boxes.iter().map(|b| b.interaction.len()).sum();
            let regime = match lev.regime {
                Regime::Spectral => "spectral",
                Regime::Cartesian => "cartesian",
            };
            let _ = writeln!(
                s,
                "level{l} = boxes {} size {:.6e} {regime} interactions {inter}",
                lev.boxes.len(),
                lev.size
            );
        }
        s
    }
}

fn neighbour_offsets() -> impl Iterator<Item = [i64; 3]> {
    (-1..=1).flat_map(|a| (-1..=1).flat_map(move |b| (-1..=1).map(move |c| [a, b, c])))
}
