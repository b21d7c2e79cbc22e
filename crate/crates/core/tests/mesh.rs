use loopbie::mesh::{self, shapes, ControlMesh, PatchKind, PatchTable};
use loopbie::{Error, Vec3};
use proptest::prelude::*;

fn signed_volume(m: &ControlMesh) -> f64 {
    m.triangles()
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| m.position(i));
            a.dot(&b.cross(&c)) / 6.0
        })
        .sum()
}

#[test]
fn builtin_shapes_are_valid_and_outward() {
    for m in [
        shapes::icosahedron(),
        shapes::tetrahedron(),
        shapes::octahedron(),
        shapes::icosphere(2),
    ] {
        assert_eq!(m.euler_characteristic(), 2);
        assert!(signed_volume(&m) > 0.0);
    }
    let ico = shapes::icosahedron();
    assert_eq!(
        (ico.num_vertices(), ico.num_edges(), ico.num_faces()),
        (12, 30, 20)
    );
    assert!(ico.valences().iter().all(|&v| v == 5));
    let s = shapes::icosphere(3);
    assert_eq!((s.num_vertices(), s.num_faces()), (642, 1280));
}

#[test]
fn subdivision_counts_and_orientation() {
    let ico = shapes::icosahedron();
    let s = mesh::loop_subdivide(&ico).unwrap();
    assert_eq!(s.num_vertices(), 12 + 30);
    assert_eq!(s.num_faces(), 80);
    assert!(signed_volume(&s) > 0.0);
    let s2 = mesh::loop_subdivide(&s).unwrap();
    assert_eq!(s2.num_vertices(), 162);
}

#[test]
fn subdivided_icosahedron_patch_census() {
    let s = mesh::loop_subdivide(&shapes::icosahedron()).unwrap();
    let t = PatchTable::build(&s).unwrap();
    assert!(!t.presubdivided());
    let irregular = t
        .patches()
        .iter()
        .filter(|p| matches!(p.kind, PatchKind::Irregular(5)))
        .count();
    let regular = t
        .patches()
        .iter()
        .filter(|p| p.kind == PatchKind::Regular)
        .count();
    assert_eq!((irregular, regular), (60, 20));
    assert!(t
        .patches()
        .iter()
        .all(|p| p.ring.len() == if p.kind == PatchKind::Regular { 12 } else { 11 }));
}

#[test]
fn coarse_meshes_are_presubdivided() {
    for m in [shapes::icosahedron(), shapes::tetrahedron()] {
        let t = PatchTable::build(&m).unwrap();
        assert!(t.presubdivided());
        assert_eq!(t.len(), 4 * m.num_faces());
    }
}

#[test]
fn regular_ring_follows_the_grid_layout() {
    let m = shapes::icosphere(2);
    let t = PatchTable::build(&m).unwrap();
    let p = t
        .patches()
        .iter()
        .find(|p| p.kind == PatchKind::Regular)
        .unwrap();
    let r = &p.ring;
    let mut uniq = r.clone();
    uniq.sort_unstable();
    uniq.dedup();
    assert_eq!(uniq.len(), 12);
    let mesh = t.mesh();
    let ring_p = mesh.one_ring(r[0]);
    let start = ring_p.iter().position(|&x| x == r[1]).unwrap();
    for i in 0..6 {
        assert_eq!(ring_p[(start + i) % 6], r[1 + i]);
    }
    // q3 is opposite P across QR, r1 and r2 neighbour R
    let ring_q = mesh.one_ring(r[1]);
    assert!(ring_q.contains(&r[7]) && ring_q.contains(&r[8]) && ring_q.contains(&r[9]));
    let ring_r = mesh.one_ring(r[2]);
    assert!(ring_r.contains(&r[9]) && ring_r.contains(&r[10]) && ring_r.contains(&r[11]));
}

#[test]
fn rejects_genus_one() {
    let (pos, tris) = shapes::torus_triangles(12, 8);
    assert!(matches!(
        ControlMesh::new(pos, tris),
        Err(Error::NonzeroGenus(0))
    ));
}

#[test]
fn rejects_flipped_face() {
    let m = shapes::icosahedron();
    let mut tris = m.triangles().to_vec();
    tris[3].swap(0, 1);
    assert!(matches!(
        ControlMesh::new(m.positions().to_vec(), tris),
        Err(Error::InconsistentOrientation(..))
    ));
}

#[test]
fn rejects_open_and_degenerate_meshes() {
    let m = shapes::icosahedron();
    let mut tris = m.triangles().to_vec();
    tris.pop();
    assert!(matches!(
        ControlMesh::new(m.positions().to_vec(), tris),
        Err(Error::NonManifold(_))
    ));
    let pos = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
    assert!(matches!(
        ControlMesh::new(pos, vec![[0, 1, 2], [0, 2, 1]]),
        Err(Error::NonManifold(_))
    ));
}

#[test]
fn rejects_bowtie_vertex() {
    // two octahedra glued at a single vertex
    let a = shapes::octahedron();
    let mut pos = a.positions().to_vec();
    let mut tris = a.triangles().to_vec();
    let off = pos.len() as u32;
    for p in a.positions().iter().skip(1) {
        pos.push(p + Vec3::new(2.0, 0.0, 0.0));
    }
    let remap = |i: u32| {
        if i == 1 {
            0
        } else if i == 0 {
            off
        } else {
            off + i - 1
        }
    };
    // second copy: its vertex 1 (at -x + 2) coincides with vertex 0 of the first
    let mut extra = vec![Vec3::new(1.0, 0.0, 0.0) + Vec3::new(2.0, 0.0, 0.0)];
    pos.append(&mut extra);
    let last = pos.len() as u32 - 1;
    for t in a.triangles() {
        tris.push(t.map(|i| if i == 0 { last } else { remap(i) }));
    }
    let r = ControlMesh::new(pos, tris);
    assert!(matches!(r, Err(Error::NonManifold(_))), "{r:?}");
}

#[test]
fn obj_and_off_round_trip() {
    let m = shapes::icosphere(1);
    let obj = mesh::read_obj(&mesh::write_obj(&m)).unwrap();
    let off = mesh::read_off(&mesh::write_off(&m)).unwrap();
    for other in [obj, off] {
        assert_eq!(other.triangles(), m.triangles());
        for (a, b) in other.positions().iter().zip(m.positions()) {
            assert_eq!(a, b);
        }
    }
}

#[test]
fn parse_errors_report_lines() {
    let r = mesh::read_obj("v 0 0 0\nv 1 0 x\n");
    assert!(matches!(r, Err(Error::Parse { line: 2, .. })));
    assert!(matches!(
        mesh::read_obj("v 0 0 0\nf 1 2 3 4\n"),
        Err(Error::Parse { line: 2, .. })
    ));
}

#[test]
fn limit_sphere_vertices_lie_on_sphere() {
    let m = shapes::limit_sphere(2, 0.7);
    for p in shapes::limit_positions(&m) {
        assert!((p.norm() - 0.7).abs() < 1e-13);
    }
}

proptest! {
    #[test]
    fn subdivision_commutes_with_affine_maps(a in prop::array::uniform9(-2.0f64..2.0), t in prop::array::uniform3(-5.0f64..5.0)) {
        let mat = nalgebra::Matrix3::from_row_slice(&a);
        let tr = Vec3::new(t[0], t[1], t[2]);
        let m = shapes::icosahedron();
        let lhs = mesh::loop_subdivide(&m.map_positions(|p| mat * p + tr)).unwrap();
        let rhs = mesh::loop_subdivide(&m).unwrap().map_positions(|p| mat * p + tr);
        for (x, y) in lhs.positions().iter().zip(rhs.positions()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }
}
