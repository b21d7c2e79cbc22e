use super::ControlMesh;
use crate::{Result, Vec3};

/// Loop vertex weight for a vertex of valence `n`.
pub fn loop_beta(n: usize) -> f64 {
    let c = 0.375 + 0.25 * (2.0 * std::f64::consts::PI / n as f64).cos();
    (0.625 - c * c) / n as f64
}

/// One step of Loop subdivision.
///
/// Old vertices keep their indices; the edge point of the canonical half-edge
/// `h` (see [`ControlMesh::edges`]) gets index `V + rank(h)`.
pub fn loop_subdivide(mesh: &ControlMesh) -> Result<ControlMesh> {
    let nv = mesh.num_vertices();
    let mut edge_index = vec![u32::MAX; 3 * mesh.num_faces()];
    let mut positions: Vec<Vec3> = Vec::with_capacity(nv + mesh.num_edges());

    for v in 0..nv as u32 {
        let ring = mesh.one_ring(v);
        let n = ring.len();
        let beta = loop_beta(n);
        let sum: Vec3 = ring.iter().map(|&w| mesh.position(w)).sum();
        positions.push(mesh.position(v) * (1.0 - n as f64 * beta) + sum * beta);
    }
    for h in mesh.edges() {
        let t = mesh.twin(h);
        let idx = positions.len() as u32;
        edge_index[h as usize] = idx;
        edge_index[t as usize] = idx;
        let a = mesh.position(mesh.origin(h));
        let b = mesh.position(mesh.target(h));
        let c = mesh.position(mesh.target(ControlMesh::next(h)));
        let d = mesh.position(mesh.target(ControlMesh::next(t)));
        positions.push((a + b) * 0.375 + (c + d) * 0.125);
    }

    let mut tris = Vec::with_capacity(4 * mesh.num_faces());
    for (f, t) in mesh.triangles().iter().enumerate() {
        let e = |i: usize| edge_index[3 * f + i];
        let (ab, bc, ca) = (e(0), e(1), e(2));
        tris.push([t[0], ab, ca]);
        tris.push([t[1], bc, ab]);
        tris.push([t[2], ca, bc]);
        tris.push([ab, bc, ca]);
    }
    ControlMesh::new(positions, tris)
}
