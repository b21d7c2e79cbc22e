//! Envelope (profile) LDLᵀ factorization with reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use crate::linalg::Csr;
use crate::{Error, Result};

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
pub fn rcm_order(m: &Csr<f64>) -> Vec<usize> {
    let n = m.rows;
    let deg: Vec<usize> = (0..n).map(|i| m.indptr[i + 1] - m.indptr[i]).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !seen[i])
            .min_by_key(|&i| deg[i])
            .expect("unvisited vertex");
        // walk to a pseudo-peripheral vertex
        let mut root = start;
        for _ in 0..4 {
            let levels = bfs_levels(m, root, &seen);
            let far = levels.last().expect("non-empty");
            let cand = *far
                .iter()
                .min_by_key(|&&i| deg[i])
                .expect("non-empty level");
            if cand == root {
                break;
            }
            root = cand;
        }
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = m.row(v).map(|(j, _)| j).filter(|&j| !seen[j]).collect();
            nb.sort_by_key(|&j| (deg[j], j));
            for j in nb {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(m: &Csr<f64>, root: usize, blocked: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = blocked.to_vec();
    seen[root] = true;
    let mut levels = vec![vec![root]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().expect("non-empty") {
            for (j, _) in m.row(v) {
                if !seen[j] {
                    seen[j] = true;
                    next.push(j);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

/// `P M Pᵀ = L D Lᵀ` with `L` stored row-wise over its envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl EnvelopeLdl {
    /// Factors the symmetric matrix `m` (no pivoting).
    pub fn factor(m: &Csr<f64>, perm: Vec<usize>) -> Result<Self> {
        let n = m.rows;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for (j, _) in m.row(old) {
                let jn = inv[j];
                if jn < i {
                    first[i] = first[i].min(jn);
                }
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let fi = first[i];
            let old = perm[i];
            for v in &mut w[fi..=i] {
                *v = 0.0;
            }
            for (j, a) in m.row(old) {
                let jn = inv[j];
                if jn <= i {
                    w[jn] += a;
                }
            }
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let lj = &lower[start[j]..start[j + 1]];
                let mut s = w[j];
                for k in lo..j {
                    s -= w[k] * lj[k - fj];
                }
                w[j] = s;
            }
            let mut d = w[i];
            let li = start[i];
            for j in fi..i {
                let l = w[j] / diag[j];
                d -= w[j] * l;
                lower[li + j - fi] = l;
            }
            if !(d.abs() > 1e-300) || !d.is_finite() {
                return Err(Error::Numerical(format!(
                    "zero pivot at row {i} in envelope factorization"
                )));
            }
            diag[i] = d;
        }
        Ok(EnvelopeLdl {
            perm,
            first,
            start,
            lower,
            diag,
        })
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let li = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = li.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = y[i];
            let li = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, l) in li.iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Number of negative pivots (inertia of the factored matrix).
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }
}
