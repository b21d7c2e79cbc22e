use super::boxspline::regular_basis;
use super::local::{IrregularScheme, MAX_VALENCE};
use crate::mesh::shapes::limit_gamma;
use crate::mesh::{PatchKind, PatchTable};
use crate::{Error, Result, Vec3};

/// Largest ring length handled by the stack buffers.
pub const MAX_RING: usize = MAX_VALENCE + 6;

/// Parameter distance from an extraordinary corner below which the limit masks are used.
pub const CORNER_CLAMP: f64 = 1e-12;

/// Basis values and parameter derivatives over a patch ring:
/// rows are `f, f_v, f_w, f_vv, f_vw, f_ww`.
#[derive(Clone, Copy)]
pub struct BasisRows {
    pub len: usize,
    pub rows: [[f64; MAX_RING]; 6],
    /// Position and normal come from the limit masks (exact extraordinary corner).
    pub at_corner: bool,
}

impl BasisRows {
    pub fn row(&self, d: usize) -> &[f64] {
        &self.rows[d][..self.len]
    }
}

fn check_param(v: f64, w: f64) -> Result<()> {
    let tol = 1e-13;
    if !(v >= -tol && w >= -tol && v + w <= 1.0 + tol) {
        return Err(Error::InvalidArgument(format!(
            "parameter ({v}, {w}) outside the patch"
        )));
    }
    Ok(())
}

/// Basis rows of a patch whose first corner has valence `n`, evaluated by
/// repeated local subdivision (valid for `n = 6` too).
pub fn subdivision_rows(n: usize, v: f64, w: f64) -> BasisRows {
    let s = IrregularScheme::get(n);
    let k = s.k;
    let t = v + w;
    let mut out = BasisRows {
        len: k,
        rows: [[0.0; MAX_RING]; 6],
        at_corner: false,
    };
    let (v, w) = if t < CORNER_CLAMP {
        out.at_corner = true;
        let (dv, dw) = if t > 0.0 { (v / t, w / t) } else { (0.5, 0.5) };
        (dv * CORNER_CLAMP, dw * CORNER_CLAMP)
    } else {
        (v, w)
    };
    let mut level = 1;
    let mut scale = 1.0;
    while (v + w) * scale <= 0.5 {
        scale *= 2.0;
        level += 1;
    }
    let (vs, ws) = (v * scale, w * scale);
    let child = if vs >= 0.5 {
        0
    } else if ws >= 0.5 {
        1
    } else {
        2
    };
    let map = s.maps[child];
    let (vc, wc) = map.apply(vs, ws);
    let reg = regular_basis(vc.clamp(0.0, 1.0), wc.clamp(0.0, 1.0));
    // d(vc, wc)/d(v, w)
    let j = [
        [map.inv[0][0] * scale, map.inv[0][1] * scale],
        [map.inv[1][0] * scale, map.inv[1][1] * scale],
    ];
    let mut r = [[0.0; 12]; 6];
    for i in 0..12 {
        r[0][i] = reg[0][i];
        let (fc, gc) = (reg[1][i], reg[2][i]);
        r[1][i] = fc * j[0][0] + gc * j[1][0];
        r[2][i] = fc * j[0][1] + gc * j[1][1];
        let h = [[reg[3][i], reg[4][i]], [reg[4][i], reg[5][i]]];
        let hv = |a: usize, b: usize| {
            let mut acc = 0.0;
            for c in 0..2 {
                for d in 0..2 {
                    acc += j[c][a] * h[c][d] * j[d][b];
                }
            }
            acc
        };
        r[3][i] = hv(0, 0);
        r[4][i] = hv(0, 1);
        r[5][i] = hv(1, 1);
    }
    let pick = &s.picks[child];
    let mut cur = [[0.0; MAX_RING]; 6];
    for d in 0..6 {
        for i in 0..12 {
            let c = r[d][i];
            if c != 0.0 {
                let row = &pick[i * k..(i + 1) * k];
                for (x, y) in cur[d][..k].iter_mut().zip(row) {
                    *x += c * y;
                }
            }
        }
    }
    for _ in 1..level {
        let mut nxt = [[0.0; MAX_RING]; 6];
        for d in 0..6 {
            for i in 0..k {
                let c = cur[d][i];
                if c != 0.0 {
                    let row = &s.a[i * k..(i + 1) * k];
                    for (x, y) in nxt[d][..k].iter_mut().zip(row) {
                        *x += c * y;
                    }
                }
            }
        }
        cur = nxt;
    }
    out.rows = cur;
    if out.at_corner {
        let gamma = limit_gamma(n);
        out.rows[0] = [0.0; MAX_RING];
        out.rows[0][0] = 1.0 - n as f64 * gamma;
        for i in 1..=n {
            out.rows[0][i] = gamma;
        }
    }
    out
}

/// Basis rows for any patch at parameter `(v, w)`.
pub fn basis_rows(kind: PatchKind, v: f64, w: f64) -> BasisRows {
    match kind {
        PatchKind::Regular => {
            let reg = regular_basis(v, w);
            let mut out = BasisRows {
                len: 12,
                rows: [[0.0; MAX_RING]; 6],
                at_corner: false,
            };
            for d in 0..6 {
                out.rows[d][..12].copy_from_slice(&reg[d]);
            }
            out
        }
        PatchKind::Irregular(n) => subdivision_rows(n as usize, v, w),
    }
}

/// Tangent masks at an extraordinary corner: weights over `x1 .. xN`.
fn corner_normal(ring_pts: &[Vec3], n: usize) -> Vec3 {
    let mut t1 = Vec3::zeros();
    let mut t2 = Vec3::zeros();
    for i in 0..n {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        t1 += ring_pts[1 + i] * a.cos();
        t2 += ring_pts[1 + i] * a.sin();
    }
    t1.cross(&t2).normalize()
}

/// Geometry of the limit surface at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    pub position: Vec3,
    pub d_v: Vec3,
    pub d_w: Vec3,
    pub d_vv: Vec3,
    pub d_vw: Vec3,
    pub d_ww: Vec3,
    pub normal: Vec3,
    /// Area element `|x_v x x_w|`.
    pub jacobian: f64,
    /// Inverse metric `[g^vv, g^vw, g^ww]`.
    pub inv_metric: [f64; 3],
    pub mean_curvature: f64,
}

/// Surface quantities derived from basis rows and ring control points.
pub fn point_geometry(rows: &BasisRows, pts: &[Vec3], kind: PatchKind) -> PointGeometry {
    let comb = |d: usize| -> Vec3 { rows.row(d).iter().zip(pts).map(|(c, p)| p * *c).sum() };
    let position = comb(0);
    let (d_v, d_w) = (comb(1), comb(2));
    let (d_vv, d_vw, d_ww) = (comb(3), comb(4), comb(5));
    let cross = d_v.cross(&d_w);
    let jacobian = cross.norm();
    let mut normal = cross / jacobian;
    if rows.at_corner {
        if let PatchKind::Irregular(n) = kind {
            normal = corner_normal(pts, n as usize);
        }
    }
    let (e, f, g) = (d_v.dot(&d_v), d_v.dot(&d_w), d_w.dot(&d_w));
    let det = e * g - f * f;
    let inv_metric = [g / det, -f / det, e / det];
    let (l, m, nn) = (d_vv.dot(&normal), d_vw.dot(&normal), d_ww.dot(&normal));
    let mean_curvature = (l * g - 2.0 * m * f + nn * e) / (2.0 * det);
    PointGeometry {
        position,
        d_v,
        d_w,
        d_vv,
        d_vw,
        d_ww,
        normal,
        jacobian,
        inv_metric,
        mean_curvature,
    }
}

/// Surface gradient and Laplace-Beltrami value of every ring basis function.
pub fn surface_derivatives(
    rows: &BasisRows,
    geo: &PointGeometry,
    grads: &mut [Vec3],
    laps: &mut [f64],
) {
    let [gvv, gvw, gww] = geo.inv_metric;
    // tangent dual vectors a^v, a^w
    let av = geo.d_v * gvv + geo.d_w * gvw;
    let aw = geo.d_v * gvw + geo.d_w * gww;
    // Christoffel symbols contracted with the inverse metric: c^gamma = g^{ab} Gamma^gamma_ab
    let s = geo.d_vv * gvv + geo.d_vw * (2.0 * gvw) + geo.d_ww * gww;
    let (cv, cw) = (s.dot(&av), s.dot(&aw));
    for i in 0..rows.len {
        let (fv, fw) = (rows.rows[1][i], rows.rows[2][i]);
        grads[i] = av * fv + aw * fw;
        let second = gvv * rows.rows[3][i] + 2.0 * gvw * rows.rows[4][i] + gww * rows.rows[5][i];
        laps[i] = second - cv * fv - cw * fw;
    }
}

/// Everything known about the limit surface at one parameter point of a patch.
#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub patch: usize,
    pub param: (f64, f64),
    pub position: Vec3,
    pub d_u: Vec3,
    pub d_v: Vec3,
    pub normal: Vec3,
    pub jacobian: f64,
    pub mean_curvature: f64,
    /// Global control-point index of each ring entry.
    pub ring: Vec<u32>,
    pub basis_values: Vec<f64>,
    pub basis_surface_gradients: Vec<Vec3>,
    pub basis_surface_laplacians: Vec<f64>,
}

/// Evaluates the limit surface of patch `patch` at `(v, w)`.
pub fn evaluate(table: &PatchTable, patch: usize, v: f64, w: f64) -> Result<SurfaceSample> {
    check_param(v, w)?;
    let p = table
        .patches()
        .get(patch)
        .ok_or_else(|| Error::InvalidArgument(format!("patch {patch} out of range")))?;
    if let PatchKind::Irregular(n) = p.kind {
        if n as usize > MAX_VALENCE {
            return Err(Error::InvalidArgument(format!(
                "valence {n} exceeds {MAX_VALENCE}"
            )));
        }
    }
    let pts: Vec<Vec3> = p.ring.iter().map(|&i| table.mesh().position(i)).collect();
    let rows = basis_rows(p.kind, v.max(0.0), w.max(0.0));
    let geo = point_geometry(&rows, &pts, p.kind);
    if !(geo.jacobian > 0.0) || !geo.jacobian.is_finite() {
        return Err(Error::Numerical(format!(
            "degenerate surface parametrisation on patch {patch}"
        )));
    }
    let k = rows.len;
    let mut grads = vec![Vec3::zeros(); k];
    let mut laps = vec![0.0; k];
    surface_derivatives(&rows, &geo, &mut grads, &mut laps);
    Ok(SurfaceSample {
        patch,
        param: (v, w),
        position: geo.position,
        d_u: geo.d_v,
        d_v: geo.d_w,
        normal: geo.normal,
        jacobian: geo.jacobian,
        mean_curvature: geo.mean_curvature,
        ring: p.ring.clone(),
        basis_values: rows.row(0).to_vec(),
        basis_surface_gradients: grads,
        basis_surface_laplacians: laps,
    })
}
