use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::envelope::{rcm_order, EnvelopeLdl};
use super::mht::ManifoldHarmonics;
use crate::linalg::Csr;
use crate::{Error, Result};

/// Largest vertex count handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 4000;

/// Flips each column so that its largest-magnitude entry is positive.
fn fix_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Smallest `m` eigenpairs of `A h = lambda B h` by Cholesky reduction.
pub fn solve_dense(a: &Csr<f64>, b: &Csr<f64>, m: usize) -> Result<ManifoldHarmonics> {
    let n = a.rows;
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "requested {m} eigenpairs of a {n}-dimensional pencil"
        )));
    }
    let chol = b
        .to_dense()
        .cholesky()
        .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&a.to_dense())
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order[..m].iter().map(|&i| eig.eigenvalues[i]).collect();
    let v = DMatrix::from_fn(n, m, |r, c| eig.eigenvectors[(r, order[c])]);
    let mut h = l
        .transpose()
        .solve_upper_triangular(&v)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    fix_signs(&mut h);
    Ok(ManifoldHarmonics::new(values, h))
}

fn b_dot(b: &Csr<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut bx = vec![0.0; x.len()];
    b.matvec(x, &mut bx);
    bx.iter().zip(y).map(|(p, q)| p * q).sum()
}

/// Smallest `m` eigenpairs by shift-invert Lanczos, computed in bands of
/// `band` pairs; each band uses a new shift just above the last accepted
/// eigenvalue and works in the B-orthogonal complement of the accepted vectors.
pub fn solve_lanczos(
    a: &Csr<f64>,
    b: &Csr<f64>,
    m: usize,
    band: usize,
) -> Result<ManifoldHarmonics> {
    let n = a.rows;
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "requested {m} eigenpairs of a {n}-dimensional pencil"
        )));
    }
    let band = band.max(1);
    let perm = rcm_order(a);
    let scale = (0..n).map(|i| a.get(i, i) / b.get(i, i)).sum::<f64>() / n as f64;
    let mut found_vals: Vec<f64> = Vec::with_capacity(m);
    let mut found_vecs: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut shift = -1e-2 * scale;
    let mut stalls = 0;
    while found_vals.len() < m {
        let want = band.min(m - found_vals.len());
        let shifted = shifted_matrix(a, b, shift);
        let ldl = EnvelopeLdl::factor(&shifted, perm.clone())?;
        let dim = (3 * want + 30).min(n - found_vals.len());
        let (vals, vecs) = lanczos_band(&ldl, b, shift, dim, &found_vecs, found_vals.len() as u64)?;
        let mut accepted = 0;
        for (lam, vec) in vals.into_iter().zip(vecs) {
            if accepted == want {
                break;
            }
            found_vals.push(lam);
            found_vecs.push(vec);
            accepted += 1;
        }
        if accepted == 0 {
            stalls += 1;
            if stalls > 3 {
                return Err(Error::NotConverged(
                    "Lanczos band produced no converged eigenpairs".into(),
                ));
            }
            shift += 1e-3 * scale;
            continue;
        }
        let top = found_vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        shift = top + 1e-2 * top.abs().max(1e-3 * scale);
    }
    let mut order: Vec<usize> = (0..found_vals.len()).collect();
    order.sort_by(|&i, &j| found_vals[i].total_cmp(&found_vals[j]));
    let values: Vec<f64> = order[..m].iter().map(|&i| found_vals[i]).collect();
    let mut h = DMatrix::from_fn(n, m, |r, c| found_vecs[order[c]][r]);
    fix_signs(&mut h);
    Ok(ManifoldHarmonics::new(values, h))
}

fn shifted_matrix(a: &Csr<f64>, b: &Csr<f64>, shift: f64) -> Csr<f64> {
    let mut trip = Vec::with_capacity(a.nnz() + b.nnz());
    for i in 0..a.rows {
        for (j, v) in a.row(i) {
            trip.push((i as u32, j as u32, v));
        }
        for (j, v) in b.row(i) {
            trip.push((i as u32, j as u32, -shift * v));
        }
    }
    Csr::from_triplets(a.rows, a.cols, trip)
}

/// One Lanczos run on `(A - sigma B)^{-1} B` restricted to the B-complement of `locked`.
/// Returns the leading converged eigenpairs in ascending order.
fn lanczos_band(
    ldl: &EnvelopeLdl,
    b: &Csr<f64>,
    shift: f64,
    dim: usize,
    locked: &[Vec<f64>],
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = b.rows;
    let project = |x: &mut Vec<f64>| {
        for _ in 0..2 {
            let mut bx = vec![0.0; n];
            b.matvec(x, &mut bx);
            for y in locked {
                let c: f64 = y.iter().zip(&bx).map(|(p, q)| p * q).sum();
                x.iter_mut().zip(y).for_each(|(xi, yi)| *xi -= c * yi);
            }
        }
    };
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let mut q0: Vec<f64> = (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect();
    project(&mut q0);
    let nrm = b_dot(b, &q0, &q0).sqrt();
    q0.iter_mut().for_each(|x| *x /= nrm);
    let mut basis: Vec<Vec<f64>> = vec![q0];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..dim {
        let mut bq = vec![0.0; n];
        b.matvec(&basis[j], &mut bq);
        let mut r = ldl.solve(&bq);
        project(&mut r);
        let mut a_j = 0.0;
        for pass in 0..2 {
            let mut br = vec![0.0; n];
            b.matvec(&r, &mut br);
            for (i, q) in basis.iter().enumerate() {
                let c: f64 = q.iter().zip(&br).map(|(p, s)| p * s).sum();
                if pass == 0 && i == j {
                    a_j = c;
                }
                r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
            }
        }
        alpha.push(a_j);
        let bj = b_dot(b, &r, &r).sqrt();
        beta.push(bj);
        if j + 1 == dim || bj < 1e-14 * a_j.abs().max(1e-300) {
            break;
        }
        r.iter_mut().for_each(|x| *x /= bj);
        basis.push(r);
    }
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let resid_scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut pairs: Vec<(f64, bool, Vec<f64>)> = Vec::new();
    for i in 0..k {
        let theta = eig.eigenvalues[i];
        let s = eig.eigenvectors.column(i);
        let resid = (beta[k - 1] * s[k - 1]).abs();
        if theta.abs() < 1e-6 * resid_scale {
            continue;
        }
        let converged = resid <= 1e-11 * theta.abs();
        let lam = shift + 1.0 / theta;
        let sv: DVector<f64> = s.into();
        let mut x = vec![0.0; n];
        for (c, q) in sv.iter().zip(&basis) {
            x.iter_mut().zip(q).for_each(|(xi, qi)| *xi += c * qi);
        }
        let nrm = b_dot(b, &x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
        pairs.push((lam, converged, x));
    }
    // ascending eigenvalue; only the converged prefix is usable
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(pairs
        .into_iter()
        .take_while(|p| p.1)
        .map(|p| (p.0, p.2))
        .unzip())
}

/// Dense solver up to [`DENSE_LIMIT`] vertices, banded shift-invert Lanczos above.
pub fn solve_pencil(a: &Csr<f64>, b: &Csr<f64>, m: usize) -> Result<ManifoldHarmonics> {
    if a.rows <= DENSE_LIMIT {
        solve_dense(a, b, m)
    } else {
        solve_lanczos(a, b, m, 64)
    }
}
