use loopbie::mesh::{shapes, write_obj, write_off, ControlMesh};
fn main() {
    let dir = std::path::Path::new("assets");
    std::fs::write(dir.join("icosahedron.off"), write_off(&shapes::icosahedron())).unwrap();
    std::fs::write(dir.join("tetrahedron.off"), write_off(&shapes::tetrahedron())).unwrap();
    for (l, n) in [(1, 42), (2, 162), (3, 642)] {
        std::fs::write(dir.join(format!("sphere_{n}.obj")), write_obj(&shapes::limit_sphere(l, 1.0))).unwrap();
    }
    std::fs::write(dir.join("bumpy_cube_162.obj"), write_obj(&shapes::bumpy_cube(2, 1.0))).unwrap();
    std::fs::write(dir.join("bumpy_cube_642.obj"), write_obj(&shapes::bumpy_cube(3, 1.0))).unwrap();
    let (p, t) = shapes::torus_triangles(12, 6);
    let torus: String = p.iter().map(|v| format!("v {} {} {}\n", v.x, v.y, v.z)).chain(t.iter().map(|f| format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1))).collect();
    std::fs::write(dir.join("torus.obj"), torus).unwrap();
    let _ = ControlMesh::new;
}
