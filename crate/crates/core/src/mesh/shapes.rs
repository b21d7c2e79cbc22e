//! Built-in control meshes used by tests, examples and the shipped assets.

use std::collections::HashMap;

use super::ControlMesh;
use crate::{Result, Vec3};

/// Regular icosahedron with vertices on the unit sphere.
pub fn icosahedron() -> ControlMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let pos = raw
        .iter()
        .map(|p| Vec3::new(p[0], p[1], p[2]).normalize())
        .collect();
    let tris = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    ControlMesh::new(pos, tris).expect("icosahedron is a valid mesh")
}

/// Regular tetrahedron with vertices on the unit sphere.
pub fn tetrahedron() -> ControlMesh {
    let s = 1.0 / 3f64.sqrt();
    let pos = vec![
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ];
    let tris = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    ControlMesh::new(pos, tris).expect("tetrahedron is a valid mesh")
}

/// Octahedron with vertices on the unit sphere.
pub fn octahedron() -> ControlMesh {
    let pos = vec![
        Vec3::x(),
        -Vec3::x(),
        Vec3::y(),
        -Vec3::y(),
        Vec3::z(),
        -Vec3::z(),
    ];
    let tris = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    ControlMesh::new(pos, tris).expect("octahedron is a valid mesh")
}

/// Icosahedron with each face split `level` times by edge midpoints pushed to the unit sphere.
/// Level 3 has 642 vertices and 1280 faces.
pub fn icosphere(level: usize) -> ControlMesh {
    let base = icosahedron();
    let mut pos: Vec<Vec3> = base.positions().to_vec();
    let mut tris: Vec<[u32; 3]> = base.triangles().to_vec();
    for _ in 0..level {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut out = Vec::with_capacity(4 * tris.len());
        for t in &tris {
            let mut m = [0u32; 3];
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                m[i] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    pos.push(((pos[a as usize] + pos[b as usize]) * 0.5).normalize());
                    (pos.len() - 1) as u32
                });
            }
            out.push([t[0], m[0], m[2]]);
            out.push([t[1], m[1], m[0]]);
            out.push([t[2], m[2], m[1]]);
            out.push([m[0], m[1], m[2]]);
        }
        tris = out;
    }
    ControlMesh::new(pos, tris).expect("icosphere is a valid mesh")
}

/// Triangulated torus (genus 1); rejected by mesh validation.
pub fn torus_triangles(n_major: usize, n_minor: usize) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let (rmaj, rmin) = (1.0, 0.35);
    let mut pos = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n_major as f64;
        for j in 0..n_minor {
            let b = 2.0 * std::f64::consts::PI * j as f64 / n_minor as f64;
            let r = rmaj + rmin * b.cos();
            pos.push(Vec3::new(r * a.cos(), r * a.sin(), rmin * b.sin()));
        }
    }
    let id = |i: usize, j: usize| ((i % n_major) * n_minor + j % n_minor) as u32;
    let mut tris = Vec::new();
    for i in 0..n_major {
        for j in 0..n_minor {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (pos, tris)
}

/// Loop limit position of every control vertex.
pub fn limit_positions(mesh: &ControlMesh) -> Vec<Vec3> {
    (0..mesh.num_vertices() as u32)
        .map(|v| {
            let ring = mesh.one_ring(v);
            let n = ring.len();
            let gamma = limit_gamma(n);
            let sum: Vec3 = ring.iter().map(|&w| mesh.position(w)).sum();
            mesh.position(v) * (1.0 - n as f64 * gamma) + sum * gamma
        })
        .collect()
}

/// Weight of each neighbour in the Loop limit-position mask.
pub fn limit_gamma(n: usize) -> f64 {
    1.0 / (3.0 / (8.0 * super::loop_beta(n)) + n as f64)
}

/// Moves control points so that the limit position of every vertex equals `targets`.
pub fn fit_limit_positions(mesh: &ControlMesh, targets: &[Vec3]) -> Result<ControlMesh> {
    let mut m = mesh.with_positions(targets.to_vec())?;
    for _ in 0..500 {
        let lim = limit_positions(&m);
        let mut worst: f64 = 0.0;
        let pos: Vec<Vec3> = m
            .positions()
            .iter()
            .zip(lim.iter().zip(targets))
            .map(|(x, (l, t))| {
                worst = worst.max((t - l).norm());
                x + (t - l)
            })
            .collect();
        m = m.with_positions(pos)?;
        if worst < 1e-15 * (1.0 + targets[0].norm()) {
            break;
        }
    }
    Ok(m)
}

/// Icosphere whose limit surface interpolates a sphere of `radius` at every vertex.
pub fn limit_sphere(level: usize, radius: f64) -> ControlMesh {
    let base = icosphere(level);
    let targets: Vec<Vec3> = base.positions().iter().map(|p| p * radius).collect();
    fit_limit_positions(&base, &targets).expect("fit keeps the vertex count")
}

/// Rounded cube with surface bumps, built on an icosphere so all valences are 5 or 6.
/// `size` is the approximate edge length of the cube.
pub fn bumpy_cube(level: usize, size: f64) -> ControlMesh {
    let base = icosphere(level);
    base.map_positions(|d| {
        let p = 6.0;
        let r = (d.x.abs().powf(p) + d.y.abs().powf(p) + d.z.abs().powf(p)).powf(-1.0 / p);
        let bump = 1.0
            + 0.05 * (4.0 * d.x).sin() * (4.0 * d.y).sin() * (4.0 * d.z).sin()
            + 0.03 * (5.0 * d.x + 1.0).cos() * (5.0 * d.y).cos();
        d * (0.5 * size * r * bump)
    })
}
