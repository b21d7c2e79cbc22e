//! Adaptive source integration for near and singular patch pairs.

use std::collections::HashMap;

use super::geometry::{cell_shape, sample_points, CellShape, Discretization, PointSet, SourceVec};
use crate::surface::quadrature::{gauss_legendre01, param_area, rule_on, split4};
use crate::Vec3;

/// Duffy rule on the parameter triangle `tri` with singular point `apex`.
/// Each sub-triangle from the apex to an edge is swept radially with the edge
/// parameterized by polar angle, so `1 / r` integrands become analytic.
/// Returns `(point, weight)` pairs in parameter measure.
pub fn duffy_rule(tri: &[[f64; 2]; 3], apex: [f64; 2], order: usize) -> Vec<([f64; 2], f64)> {
    let (x, w) = gauss_legendre01(order);
    let total = param_area(tri).abs();
    let mut out = Vec::with_capacity(3 * order * order);
    for e in 0..3 {
        let b1 = tri[e];
        let b2 = tri[(e + 1) % 3];
        let area = param_area(&[apex, b1, b2]).abs();
        if area <= 1e-14 * total {
            continue;
        }
        let edge = [b2[0] - b1[0], b2[1] - b1[1]];
        let len = edge[0].hypot(edge[1]);
        let dir = [edge[0] / len, edge[1] / len];
        let t1 = (b1[0] - apex[0]) * dir[0] + (b1[1] - apex[1]) * dir[1];
        let t2 = t1 + len;
        let foot = [b1[0] - t1 * dir[0], b1[1] - t1 * dir[1]];
        let d = (foot[0] - apex[0]).hypot(foot[1] - apex[1]);
        let (a1, a2) = ((t1 / d).atan(), (t2 / d).atan());
        for (s, ws) in x.iter().zip(&w) {
            let a = a1 + s * (a2 - a1);
            let ta = d * a.tan();
            let q = [foot[0] + ta * dir[0], foot[1] + ta * dir[1]];
            let jac = (a2 - a1) * d / (a.cos().powi(2) * len);
            for (u, wu) in x.iter().zip(&w) {
                let p = [
                    apex[0] + u * (q[0] - apex[0]),
                    apex[1] + u * (q[1] - apex[1]),
                ];
                out.push((p, 2.0 * area * u * wu * ws * jac));
            }
        }
    }
    out
}

fn barycentric(tri: &[[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let (e1, e2) = (
        [tri[1][0] - tri[0][0], tri[1][1] - tri[0][1]],
        [tri[2][0] - tri[0][0], tri[2][1] - tri[0][1]],
    );
    let r = [p[0] - tri[0][0], p[1] - tri[0][1]];
    let det = e1[0] * e2[1] - e2[0] * e1[1];
    let s = (r[0] * e2[1] - e2[0] * r[1]) / det;
    let t = (e1[0] * r[1] - r[0] * e1[1]) / det;
    [1.0 - s - t, s, t]
}

#[derive(Debug, Clone, Copy)]
struct Node {
    base: usize,
    extra: u32,
    path: u64,
}

impl Node {
    fn key(&self) -> u64 {
        self.base as u64 | (self.extra as u64) << 12 | self.path << 17
    }

    fn child(&self, c: u64) -> Node {
        Node {
            base: self.base,
            extra: self.extra + 1,
            path: self.path | c << (2 * self.extra),
        }
    }
}

/// Source cells of one patch, refined on demand and cached across observers.
pub struct CellTree<'a> {
    disc: &'a Discretization,
    patch: usize,
    cache: HashMap<u64, (CellShape, PointSet)>,
    scratch: PointSet,
}

impl<'a> CellTree<'a> {
    pub fn new(disc: &'a Discretization, patch: usize) -> Self {
        CellTree {
            disc,
            patch,
            cache: HashMap::new(),
            scratch: PointSet::default(),
        }
    }

    /// Feeds all source points of the patch to `sink`, refining cells near `x`.
    /// `self_param` is the parameter of `x` when it lies on this patch.
    pub fn integrate(
        &mut self,
        x: Vec3,
        self_param: Option<[f64; 2]>,
        sink: &mut dyn FnMut(Vec3, &[SourceVec]),
    ) {
        for base in 0..self.disc.cells_per_patch() {
            self.visit(
                Node {
                    base,
                    extra: 0,
                    path: 0,
                },
                x,
                self_param,
                sink,
            );
        }
    }

    fn shape(&mut self, node: Node) -> CellShape {
        if node.extra == 0 {
            return self.disc.cell_shapes[self.patch * self.disc.cells_per_patch() + node.base];
        }
        self.ensure(node);
        self.cache[&node.key()].0
    }

    fn ensure(&mut self, node: Node) {
        let key = node.key();
        if self.cache.contains_key(&key) {
            return;
        }
        let mut tri =
            self.disc.cell_shapes[self.patch * self.disc.cells_per_patch() + node.base].tri;
        for lvl in 0..node.extra {
            tri = split4(&tri)[((node.path >> (2 * lvl)) & 3) as usize];
        }
        let shape = cell_shape(&self.disc.table, self.patch, tri);
        let pts: Vec<_> = rule_on(&tri, self.disc.quad.cell_base).collect();
        let mut set = PointSet::default();
        sample_points(&self.disc.table, self.patch, &pts, &mut set);
        self.cache.insert(key, (shape, set));
    }

    fn visit(
        &mut self,
        node: Node,
        x: Vec3,
        self_param: Option<[f64; 2]>,
        sink: &mut dyn FnMut(Vec3, &[SourceVec]),
    ) {
        let shape = self.shape(node);
        let q = &self.disc.quad;
        let depth = q.cell_depth + node.extra;
        let inside = self_param
            .map(|p| (p, barycentric(&shape.tri, p)))
            .filter(|(_, b)| b.iter().all(|&c| c >= -1e-12));
        if let Some((p, b)) = inside {
            if b.iter().cloned().fold(1.0, f64::min) >= q.self_margin || depth >= q.max_depth {
                self.duffy(shape.tri, p, sink);
                return;
            }
        } else if (x - shape.centre).norm() > q.eta * shape.radius {
            let k = self.disc.table.patch(self.patch).ring.len();
            if node.extra == 0 {
                let npts = q.cell_base.num_points();
                let first = self.disc.cells.patch_start[self.patch] + node.base * npts;
                for i in first..first + npts {
                    sink(self.disc.cells.position[i], self.disc.cell_sources(i));
                }
            } else {
                let set = &self.cache[&node.key()].1;
                for (i, y) in set.position.iter().enumerate() {
                    sink(*y, &set.source[i * k..(i + 1) * k]);
                }
            }
            return;
        }
        if depth < q.max_depth {
            for c in 0..4 {
                self.visit(node.child(c), x, self_param, sink);
            }
            return;
        }
        for c in 0..4 {
            let child = node.child(c);
            self.ensure(child);
            let k = self.disc.table.patch(self.patch).ring.len();
            let set = &self.cache[&child.key()].1;
            for (i, y) in set.position.iter().enumerate() {
                sink(*y, &set.source[i * k..(i + 1) * k]);
            }
        }
    }

    fn duffy(
        &mut self,
        tri: [[f64; 2]; 3],
        apex: [f64; 2],
        sink: &mut dyn FnMut(Vec3, &[SourceVec]),
    ) {
        let rule = duffy_rule(&tri, apex, self.disc.quad.duffy_order);
        self.scratch.position.clear();
        self.scratch.source.clear();
        sample_points(&self.disc.table, self.patch, &rule, &mut self.scratch);
        let k = self.disc.table.patch(self.patch).ring.len();
        for (i, y) in self.scratch.position.iter().enumerate() {
            sink(*y, &self.scratch.source[i * k..(i + 1) * k]);
        }
    }
}
