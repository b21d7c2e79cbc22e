//! Small dense and sparse matrix containers used across the solver.

use std::ops::AddAssign;

use num_complex::Complex64 as C64;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub data: Vec<T>,
}

impl<T: Copy + Default + AddAssign> Csr<T> {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed in input order.
    pub fn from_triplets(rows: usize, cols: usize, mut trip: Vec<(u32, u32, T)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data: Vec<T> = Vec::with_capacity(trip.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *data.last_mut().expect("entry exists") += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Csr {
            rows,
            cols,
            indptr,
            indices,
            data,
        }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |k| (self.indices[k] as usize, self.data[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.data[r.start + k],
            Err(_) => T::default(),
        }
    }
}

impl Csr<f64> {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    pub fn matvec_c(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            *yi = self.row(i).map(|(j, a)| x[j] * a).sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Largest absolute entry of `self - other` (same shape required).
    pub fn max_abs_diff(&self, other: &Csr<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - other.get(i, j)).abs());
            }
            for (j, v) in other.row(i) {
                worst = worst.max((v - self.get(i, j)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Csr<C64> {
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    /// `y += self * x`.
    pub fn matvec_add(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            *yi += self.row(i).map(|(j, a)| a * x[j]).sum::<C64>();
        }
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn transpose(&self) -> CMat {
        let mut t = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.at_mut(j, i) = self.at(i, j);
            }
        }
        t
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self - other`.
    pub fn diff_norm(&self, other: &CMat) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Adds a sparse matrix in place.
    pub fn add_sparse(&mut self, s: &Csr<C64>) {
        for i in 0..s.rows {
            for (j, v) in s.row(i) {
                *self.at_mut(i, j) += v;
            }
        }
    }

    /// Real and imaginary parts as real dense matrices.
    pub fn split(&self) -> (nalgebra::DMatrix<f64>, nalgebra::DMatrix<f64>) {
        let re = nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j).re);
        let im = nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j).im);
        (re, im)
    }

    pub fn from_parts(re: &nalgebra::DMatrix<f64>, im: &nalgebra::DMatrix<f64>) -> Self {
        let mut m = CMat::zeros(re.nrows(), re.ncols());
        for i in 0..m.rows {
            for j in 0..m.cols {
                *m.at_mut(i, j) = C64::new(re[(i, j)], im[(i, j)]);
            }
        }
        m
    }

    /// `Sᵀ M S` for a real `S`.
    pub fn congruence(&self, s: &nalgebra::DMatrix<f64>) -> CMat {
        let (re, im) = self.split();
        let st = s.transpose();
        CMat::from_parts(&(&st * re * s), &(&st * im * s))
    }
}

pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
