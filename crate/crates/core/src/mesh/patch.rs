use super::{loop_subdivide, ControlMesh};
use crate::{Error, Result};

/// Whether a patch is a plain quartic box-spline patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchKind {
    Regular,
    /// First corner has the given valence (not 6); the other two are regular.
    Irregular(u32),
}

/// One limit-surface patch: a control triangle and its one-ring of control points.
///
/// Ring layout for a patch with corners `(P, Q, R)` (counter-clockwise) and
/// `N` the valence of `P`:
/// `[P, x1 = Q, x2 = R, x3 .. xN, q1, q2, q3, r1, r2]`
/// where `x_i` are the neighbours of `P` counter-clockwise from `Q`,
/// `q1..q3` are the further neighbours of `Q` continuing counter-clockwise
/// after `xN` (so `q3` is opposite `P` across edge `QR`) and `r1, r2` are the
/// further neighbours of `R` counter-clockwise after `q3`.
/// Parameter `(v, w)` places `P` at `(0, 0)`, `Q` at `(1, 0)`, `R` at `(0, 1)`.
#[derive(Debug, Clone)]
pub struct Patch {
    pub face: u32,
    pub corners: [u32; 3],
    pub ring: Vec<u32>,
    pub kind: PatchKind,
}

impl Patch {
    /// Valence of the first corner.
    pub fn valence(&self) -> usize {
        self.ring.len() - 6
    }
}

/// Counter-clockwise ring around a patch given a "next neighbour" oracle.
///
/// `next(v, w)` must return the neighbour of `v` following `w`
/// counter-clockwise, or `None` if the fan around `v` is incomplete.
pub fn extract_ring(
    p: usize,
    q: usize,
    r: usize,
    next: impl Fn(usize, usize) -> Option<usize>,
) -> Option<Vec<usize>> {
    let mut ring = vec![p, q];
    let mut cur = q;
    loop {
        let nx = next(p, cur)?;
        if nx == q {
            break;
        }
        if ring.len() > 64 {
            return None;
        }
        ring.push(nx);
        cur = nx;
    }
    let n = ring.len() - 1;
    let xn = ring[n];
    // fan of Q from R: R, P, xN, q1, q2, q3
    if next(q, r)? != p || next(q, p)? != xn {
        return None;
    }
    let q1 = next(q, xn)?;
    let q2 = next(q, q1)?;
    let q3 = next(q, q2)?;
    if next(q, q3)? != r {
        return None;
    }
    // fan of R from P: P, Q, q3, r1, r2, x3
    if next(r, p)? != q || next(r, q)? != q3 {
        return None;
    }
    let r1 = next(r, q3)?;
    let r2 = next(r, r1)?;
    if n >= 3 && next(r, r2)? != ring[3] {
        return None;
    }
    ring.extend([q1, q2, q3, r1, r2]);
    Some(ring)
}

/// Patch decomposition of a control mesh.
#[derive(Debug, Clone)]
pub struct PatchTable {
    mesh: ControlMesh,
    patches: Vec<Patch>,
    presubdivided: bool,
}

impl PatchTable {
    /// Builds one patch per face. If a face has more than one extraordinary
    /// corner the mesh is subdivided once first, which leaves at most one per face.
    pub fn build(mesh: &ControlMesh) -> Result<Self> {
        let needs = mesh
            .triangles()
            .iter()
            .any(|t| t.iter().filter(|&&v| mesh.valence(v) != 6).count() > 1);
        let (mesh, presubdivided) = if needs {
            (loop_subdivide(mesh)?, true)
        } else {
            (mesh.clone(), false)
        };
        let next = |v: usize, w: usize| -> Option<usize> {
            let h = mesh.half_edge(v as u32, w as u32)?;
            Some(mesh.target(mesh.ccw(h)) as usize)
        };
        let mut patches = Vec::with_capacity(mesh.num_faces());
        for (f, t) in mesh.triangles().iter().enumerate() {
            let irregular: Vec<usize> = (0..3).filter(|&i| mesh.valence(t[i]) != 6).collect();
            let start = match irregular.as_slice() {
                [] => (0..3).min_by_key(|&i| t[i]).unwrap_or(0),
                [i] => *i,
                _ => {
                    return Err(Error::Numerical(
                        "face with two extraordinary corners after subdivision".into(),
                    ))
                }
            };
            let corners = [t[start], t[(start + 1) % 3], t[(start + 2) % 3]];
            let ring = extract_ring(
                corners[0] as usize,
                corners[1] as usize,
                corners[2] as usize,
                next,
            )
            .ok_or_else(|| Error::NonManifold(format!("cannot build the one-ring of face {f}")))?;
            let val = mesh.valence(corners[0]);
            patches.push(Patch {
                face: f as u32,
                corners,
                ring: ring.into_iter().map(|v| v as u32).collect(),
                kind: if val == 6 {
                    PatchKind::Regular
                } else {
                    PatchKind::Irregular(val)
                },
            });
        }
        Ok(PatchTable {
            mesh,
            patches,
            presubdivided,
        })
    }

    /// The control mesh the patches refer to (subdivided once if that was needed).
    pub fn mesh(&self) -> &ControlMesh {
        &self.mesh
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn patch(&self, i: usize) -> &Patch {
        &self.patches[i]
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn presubdivided(&self) -> bool {
        self.presubdivided
    }

    pub fn num_vertices(&self) -> usize {
        self.mesh.num_vertices()
    }
}
