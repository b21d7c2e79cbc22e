//! Regenerates the meshes in `assets/`. Run from the workspace root.

use std::path::Path;

use loopbie::mesh::{shapes, write_obj, write_off};

fn main() -> std::io::Result<()> {
    let dir = Path::new("assets");
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("icosahedron.off"), write_off(&shapes::icosahedron()))?;
    std::fs::write(dir.join("tetrahedron.off"), write_off(&shapes::tetrahedron()))?;
    for (level, n) in [(1, 42), (2, 162), (3, 642)] {
        std::fs::write(dir.join(format!("sphere_{n}.obj")), write_obj(&shapes::limit_sphere(level, 1.0)))?;
    }
    std::fs::write(dir.join("bumpy_cube_162.obj"), write_obj(&shapes::bumpy_cube(2, 1.0)))?;
    std::fs::write(dir.join("bumpy_cube_642.obj"), write_obj(&shapes::bumpy_cube(3, 1.0)))?;
    let (points, triangles) = shapes::torus_triangles(12, 6);
    let torus: String = points
        .iter()
        .map(|v| format!("v {} {} {}\n", v.x, v.y, v.z))
        .chain(triangles.iter().map(|f| format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1)))
        .collect();
    std::fs::write(dir.join("torus.obj"), torus)
}
