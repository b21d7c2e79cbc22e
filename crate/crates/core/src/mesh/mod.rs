//! Triangular control meshes: validation, IO, Loop subdivision and patch rings.

mod io;
mod patch;
pub mod shapes;
mod subdivide;

use std::collections::HashMap;

use crate::{Error, Result, Vec3};

pub use io::{read_mesh, read_obj, read_off, write_obj, write_off};
pub use patch::{extract_ring, Patch, PatchKind, PatchTable};
pub use subdivide::{loop_beta, loop_subdivide};

/// Closed, consistently oriented, genus-0 triangle mesh with half-edge adjacency.
///
/// Half-edge `3 f + i` runs from corner `i` to corner `(i + 1) % 3` of face `f`.
#[derive(Debug, Clone)]
pub struct ControlMesh {
    positions: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    twin: Vec<u32>,
    vertex_edge: Vec<u32>,
    valence: Vec<u32>,
}

impl ControlMesh {
    /// Builds the mesh and checks that it is a closed orientable 2-manifold of genus 0.
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let nv = positions.len();
        if triangles.is_empty() {
            return Err(Error::NonManifold("mesh has no faces".into()));
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidArgument(
                "non-finite vertex coordinate".into(),
            ));
        }
        let mut seen_faces = HashMap::with_capacity(triangles.len());
        for (f, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v as usize >= nv) {
                return Err(Error::InvalidArgument(format!(
                    "face {f} references a missing vertex"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::NonManifold(format!("face {f} repeats a vertex")));
            }
            let mut key = *t;
            key.sort_unstable();
            if let Some(g) = seen_faces.insert(key, f) {
                return Err(Error::NonManifold(format!(
                    "faces {g} and {f} share all vertices"
                )));
            }
        }

        let mut undirected: HashMap<(u32, u32), u32> = HashMap::with_capacity(3 * triangles.len());
        for t in &triangles {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                *undirected.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if let Some((&(a, b), &c)) = undirected.iter().find(|(_, &c)| c != 2) {
            return Err(Error::NonManifold(format!(
                "edge ({a}, {b}) has {c} incident faces"
            )));
        }

        let mut directed: HashMap<(u32, u32), u32> = HashMap::with_capacity(3 * triangles.len());
        for (f, t) in triangles.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                if directed.insert((a, b), (3 * f + i) as u32).is_some() {
                    return Err(Error::InconsistentOrientation(a, b));
                }
            }
        }
        let mut twin = vec![0u32; 3 * triangles.len()];
        for (&(a, b), &h) in &directed {
            twin[h as usize] = directed[&(b, a)];
        }

        let mut vertex_edge = vec![u32::MAX; nv];
        let mut incident = vec![0u32; nv];
        for (f, t) in triangles.iter().enumerate() {
            for i in 0..3 {
                let v = t[i] as usize;
                incident[v] += 1;
                if vertex_edge[v] == u32::MAX {
                    vertex_edge[v] = (3 * f + i) as u32;
                }
            }
        }
        if let Some(v) = incident.iter().position(|&c| c == 0) {
            return Err(Error::NonManifold(format!(
                "vertex {v} is not used by any face"
            )));
        }

        let mut mesh = ControlMesh {
            positions,
            triangles,
            twin,
            vertex_edge,
            valence: incident.clone(),
        };
        for v in 0..nv {
            let fan = mesh.fan_len(v as u32);
            if fan != incident[v] as usize {
                return Err(Error::NonManifold(format!(
                    "vertex {v} has a disconnected face fan"
                )));
            }
            if fan < 3 {
                return Err(Error::NonManifold(format!("vertex {v} has valence {fan}")));
            }
        }
        mesh.valence = incident;

        if mesh.component_count() != 1 {
            return Err(Error::NonManifold(
                "mesh has more than one connected component".into(),
            ));
        }
        let chi = mesh.euler_characteristic();
        if chi != 2 {
            return Err(Error::NonzeroGenus(chi));
        }
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_faces(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        3 * self.triangles.len() / 2
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn position(&self, v: u32) -> Vec3 {
        self.positions[v as usize]
    }

    pub fn valence(&self, v: u32) -> u32 {
        self.valence[v as usize]
    }

    pub fn valences(&self) -> &[u32] {
        &self.valence
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    /// Replaces vertex positions, keeping connectivity.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Result<Self> {
        if positions.len() != self.positions.len() {
            return Err(Error::InvalidArgument(
                "position count does not match vertex count".into(),
            ));
        }
        let mut m = self.clone();
        m.positions = positions;
        Ok(m)
    }

    /// Applies `f` to every vertex position.
    pub fn map_positions(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        let mut m = self.clone();
        m.positions.iter_mut().for_each(|p| *p = f(*p));
        m
    }

    pub(crate) fn origin(&self, h: u32) -> u32 {
        self.triangles[h as usize / 3][h as usize % 3]
    }

    pub(crate) fn target(&self, h: u32) -> u32 {
        self.triangles[h as usize / 3][(h as usize + 1) % 3]
    }

    pub(crate) fn twin(&self, h: u32) -> u32 {
        self.twin[h as usize]
    }

    pub(crate) fn prev(h: u32) -> u32 {
        3 * (h / 3) + (h + 2) % 3
    }

    pub(crate) fn next(h: u32) -> u32 {
        3 * (h / 3) + (h + 1) % 3
    }

    /// Next outgoing half-edge counter-clockwise around the origin of `h`.
    pub(crate) fn ccw(&self, h: u32) -> u32 {
        self.twin(Self::prev(h))
    }

    /// Half-edge from `a` to `b`, if the edge exists.
    pub fn half_edge(&self, a: u32, b: u32) -> Option<u32> {
        let start = self.vertex_edge[a as usize];
        let mut h = start;
        loop {
            if self.target(h) == b {
                return Some(h);
            }
            h = self.ccw(h);
            if h == start {
                return None;
            }
        }
    }

    fn fan_len(&self, v: u32) -> usize {
        let start = self.vertex_edge[v as usize];
        let mut h = start;
        let mut n = 0;
        loop {
            n += 1;
            h = self.ccw(h);
            if h == start || n > self.triangles.len() {
                return n;
            }
        }
    }

    /// Neighbours of `v` in counter-clockwise order (seen from outside).
    pub fn one_ring(&self, v: u32) -> Vec<u32> {
        let start = self.vertex_edge[v as usize];
        let mut out = Vec::with_capacity(self.valence(v) as usize);
        let mut h = start;
        loop {
            out.push(self.target(h));
            h = self.ccw(h);
            if h == start {
                return out;
            }
        }
    }

    /// Canonical half-edge of every undirected edge (the one with the smaller index).
    pub fn edges(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.twin.len() as u32).filter(move |&h| h < self.twin(h))
    }

    fn component_count(&self) -> usize {
        let n = self.num_vertices();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s as u32];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for w in self.one_ring(v) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Mean length of all edges of the control polygon.
    pub fn mean_edge_length(&self) -> f64 {
        let (sum, n) = self.edges().fold((0.0, 0usize), |(s, n), h| {
            (
                s + (self.position(self.target(h)) - self.position(self.origin(h))).norm(),
                n + 1,
            )
        });
        sum / n as f64
    }

    /// Axis-aligned bounding box of the control points.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }
}
