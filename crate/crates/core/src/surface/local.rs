//! Per-valence subdivision matrices for patches with one extraordinary corner.
//!
//! Built symbolically: every local control point is a weight vector over the
//! `N + 6` ring points, and one Loop step of the local net yields both the
//! self-similar ring around the extraordinary vertex and the three regular
//! child patches.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::mesh::{extract_ring, loop_beta};

/// Largest supported valence of an extraordinary vertex.
pub const MAX_VALENCE: usize = 24;

type Weights = Vec<f64>;

struct LocalNet {
    points: Vec<Option<Weights>>,
    faces: Vec<[usize; 3]>,
}

impl LocalNet {
    fn third(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for f in &self.faces {
            for i in 0..3 {
                m.insert((f[i], f[(i + 1) % 3]), f[(i + 2) % 3]);
            }
        }
        m
    }

    fn subdivide(&self) -> (LocalNet, Vec<usize>, HashMap<(usize, usize), usize>) {
        let third = self.third();
        let k = self.points.iter().flatten().next().map_or(0, |w| w.len());
        let n = self.points.len();
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in third.keys() {
            neighbours[a].push(b);
        }
        let complete = |v: usize| -> bool {
            !neighbours[v].is_empty()
                && neighbours[v].iter().all(|&w| third.contains_key(&(w, v)))
                && neighbours[v].len() == self.faces.iter().filter(|f| f.contains(&v)).count()
        };
        let mut out: Vec<Option<Weights>> = Vec::new();
        let mut vmap = vec![usize::MAX; n];
        for v in 0..n {
            let Some(pv) = &self.points[v] else { continue };
            if !complete(v) || neighbours[v].iter().any(|&w| self.points[w].is_none()) {
                continue;
            }
            let val = neighbours[v].len();
            let beta = loop_beta(val);
            let mut w = vec![0.0; k];
            for i in 0..k {
                w[i] = (1.0 - val as f64 * beta) * pv[i];
            }
            for &nb in &neighbours[v] {
                let pn = self.points[nb].as_ref().expect("checked above");
                for i in 0..k {
                    w[i] += beta * pn[i];
                }
            }
            vmap[v] = out.len();
            out.push(Some(w));
        }
        let mut emap = HashMap::new();
        let mut keys: Vec<(usize, usize)> = third.keys().copied().filter(|&(a, b)| a < b).collect();
        keys.sort_unstable();
        for (a, b) in keys {
            let (Some(&c), Some(&d)) = (third.get(&(a, b)), third.get(&(b, a))) else {
                continue;
            };
            let pts = [a, b, c, d].map(|i| self.points[i].as_ref());
            if pts.iter().any(|p| p.is_none()) {
                continue;
            }
            let mut w = vec![0.0; k];
            for i in 0..k {
                w[i] = 0.375 * (pts[0].unwrap()[i] + pts[1].unwrap()[i])
                    + 0.125 * (pts[2].unwrap()[i] + pts[3].unwrap()[i]);
            }
            emap.insert((a, b), out.len());
            emap.insert((b, a), out.len());
            out.push(Some(w));
        }
        let mut faces = Vec::new();
        for f in &self.faces {
            let e = |i: usize| emap.get(&(f[i], f[(i + 1) % 3])).copied();
            let vx = |i: usize| Some(vmap[f[i]]).filter(|&x| x != usize::MAX);
            let cand = [
                [vx(0), e(0), e(2)],
                [vx(1), e(1), e(0)],
                [vx(2), e(2), e(1)],
                [e(0), e(1), e(2)],
            ];
            for c in cand {
                if let [Some(a), Some(b), Some(c)] = c {
                    faces.push([a, b, c]);
                }
            }
        }
        (LocalNet { points: out, faces }, vmap, emap)
    }
}

/// Child patch parameter map: child corners in the parent `(v, w)` domain.
#[derive(Debug, Clone, Copy)]
pub struct ChildMap {
    pub origin: [f64; 2],
    /// Inverse of the matrix with columns `Q_c - P_c`, `R_c - P_c`.
    pub inv: [[f64; 2]; 2],
}

impl ChildMap {
    fn new(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> Self {
        let (a, b, c, d) = (q[0] - p[0], r[0] - p[0], q[1] - p[1], r[1] - p[1]);
        let det = a * d - b * c;
        ChildMap {
            origin: p,
            inv: [[d / det, -b / det], [-c / det, a / det]],
        }
    }

    pub fn apply(&self, v: f64, w: f64) -> (f64, f64) {
        let (dv, dw) = (v - self.origin[0], w - self.origin[1]);
        (
            self.inv[0][0] * dv + self.inv[0][1] * dw,
            self.inv[1][0] * dv + self.inv[1][1] * dw,
        )
    }
}

/// Subdivision data for one valence.
pub struct IrregularScheme {
    pub valence: usize,
    /// Ring size `N + 6`.
    pub k: usize,
    /// Row-major `k x k` map from a ring to the ring of its extraordinary child.
    pub a: Vec<f64>,
    /// Row-major `12 x k` maps to the regular children (Q corner, R corner, centre).
    pub picks: [Vec<f64>; 3],
    pub maps: [ChildMap; 3],
}

fn base_net(n: usize) -> LocalNet {
    let k = n + 6;
    let points = (0..k)
        .map(|i| {
            let mut w = vec![0.0; k];
            w[i] = 1.0;
            Some(w)
        })
        .collect();
    let (p, q, r) = (0, 1, 2);
    let x = |i: usize| if i > n { 1 } else { i };
    let (q1, q2, q3, r1, r2) = (n + 1, n + 2, n + 3, n + 4, n + 5);
    let mut faces: Vec<[usize; 3]> = (1..=n).map(|i| [p, x(i), x(i + 1)]).collect();
    faces.extend([
        [q, n, q1],
        [q, q1, q2],
        [q, q2, q3],
        [q, q3, r],
        [r, q3, r1],
        [r, r1, r2],
        [r, r2, 3],
    ]);
    LocalNet { points, faces }
}

impl IrregularScheme {
    fn build(n: usize) -> Self {
        let k = n + 6;
        let net = base_net(n);
        let (child, vmap, emap) = net.subdivide();
        let third = child.third();
        let next = |v: usize, w: usize| third.get(&(v, w)).copied();
        let ring_weights = |corners: [usize; 3]| -> Vec<f64> {
            let ring = extract_ring(corners[0], corners[1], corners[2], next)
                .expect("local ring is complete");
            ring.iter()
                .flat_map(|&i| child.points[i].clone().expect("computed point"))
                .collect()
        };
        let (p, q, r) = (vmap[0], vmap[1], vmap[2]);
        let (epq, epr, eqr) = (emap[&(0, 1)], emap[&(0, 2)], emap[&(1, 2)]);
        let a = ring_weights([p, epq, epr]);
        assert_eq!(a.len(), k * k);
        let picks = [
            ring_weights([epq, q, eqr]),
            ring_weights([epr, eqr, r]),
            ring_weights([epq, eqr, epr]),
        ];
        let maps = [
            ChildMap::new([0.5, 0.0], [1.0, 0.0], [0.5, 0.5]),
            ChildMap::new([0.0, 0.5], [0.5, 0.5], [0.0, 1.0]),
            ChildMap::new([0.5, 0.0], [0.5, 0.5], [0.0, 0.5]),
        ];
        IrregularScheme {
            valence: n,
            k,
            a,
            picks,
            maps,
        }
    }

    /// Cached scheme for valence `n` (3 ..= MAX_VALENCE).
    pub fn get(n: usize) -> &'static IrregularScheme {
        static CACHE: OnceLock<Vec<OnceLock<IrregularScheme>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| (0..=MAX_VALENCE).map(|_| OnceLock::new()).collect());
        assert!(
            (3..=MAX_VALENCE).contains(&n),
            "valence {n} outside supported range"
        );
        cache[n].get_or_init(|| IrregularScheme::build(n))
    }
}
