use nalgebra::DMatrix;

use crate::linalg::Csr;
use crate::{Error, Result, C64};

/// B-orthonormal Laplace-Beltrami eigenbasis, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct ManifoldHarmonics {
    pub eigenvalues: Vec<f64>,
    /// `N_v x M`, column `m` is the eigenvector of `eigenvalues[m]`.
    pub basis: DMatrix<f64>,
}

impl ManifoldHarmonics {
    pub fn new(eigenvalues: Vec<f64>, basis: DMatrix<f64>) -> Self {
        ManifoldHarmonics { eigenvalues, basis }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Keeps the first `m` modes.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.len());
        ManifoldHarmonics {
            eigenvalues: self.eigenvalues[..m].to_vec(),
            basis: self.basis.columns(0, m).into_owned(),
        }
    }

    /// Drops the constant mode (the first, with eigenvalue zero) and keeps `m` more.
    pub fn nonconstant(&self, m: usize) -> Self {
        let m = m.min(self.len().saturating_sub(1));
        ManifoldHarmonics {
            eigenvalues: self.eigenvalues[1..1 + m].to_vec(),
            basis: self.basis.columns(1, m).into_owned(),
        }
    }

    /// Spectral coefficients `Hᵀ B f`.
    pub fn forward(&self, b: &Csr<f64>, f: &[f64]) -> Vec<f64> {
        let mut bf = vec![0.0; f.len()];
        b.matvec(f, &mut bf);
        (0..self.len())
            .map(|m| {
                self.basis
                    .column(m)
                    .iter()
                    .zip(&bf)
                    .map(|(h, x)| h * x)
                    .sum()
            })
            .collect()
    }

    /// Synthesis `H c`.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.basis.nrows();
        let mut out = vec![0.0; n];
        for (m, c) in coeffs.iter().enumerate().take(self.len()) {
            for (o, h) in out.iter_mut().zip(self.basis.column(m).iter()) {
                *o += c * h;
            }
        }
        out
    }

    /// Largest entry of `|Hᵀ B H - I|`.
    pub fn b_orthonormality_error(&self, b: &Csr<f64>) -> f64 {
        let bh = b.to_dense() * &self.basis;
        let g = self.basis.transpose() * bh;
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - e).abs());
            }
        }
        worst
    }

    /// Largest entry of `|Hᵀ A H - Lambda|`.
    pub fn a_diagonal_error(&self, a: &Csr<f64>) -> f64 {
        let ah = a.to_dense() * &self.basis;
        let g = self.basis.transpose() * ah;
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let e = if i == j { self.eigenvalues[i] } else { 0.0 };
                worst = worst.max((g[(i, j)] - e).abs());
            }
        }
        worst
    }
}

/// Removes the B-weighted mean: `f - (1ᵀ B f / 1ᵀ B 1) 1`.
pub fn zero_mean(b: &Csr<f64>, f: &[f64]) -> Vec<f64> {
    let mut bf = vec![0.0; f.len()];
    b.matvec(f, &mut bf);
    let num: f64 = bf.iter().sum();
    let den: f64 = b.data.iter().sum();
    f.iter().map(|x| x - num / den).collect()
}

fn check_len(h: &ManifoldHarmonics, n: usize) -> Result<()> {
    if h.basis.nrows() != n {
        return Err(Error::InvalidArgument(format!(
            "coefficient length {n} does not match basis rows {}",
            h.basis.nrows()
        )));
    }
    Ok(())
}

/// Manifold harmonic coefficients of a current from its two potentials,
/// `v_m = sqrt(lambda_m) h_mᵀ B a` (zero for the constant mode).
pub fn current_mht(
    h: &ManifoldHarmonics,
    b: &Csr<f64>,
    a1: &[f64],
    a2: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(h, a1.len())?;
    check_len(h, a2.len())?;
    let scale = |c: Vec<f64>| -> Vec<f64> {
        c.into_iter()
            .zip(&h.eigenvalues)
            .map(|(x, &l)| x * l.max(0.0).sqrt())
            .collect()
    };
    Ok((scale(h.forward(b, a1)), scale(h.forward(b, a2))))
}

/// Same coefficients through the stiffness form, `v_m = h_mᵀ A a / sqrt(lambda_m)`.
pub fn current_mht_a_form(
    h: &ManifoldHarmonics,
    a: &Csr<f64>,
    a1: &[f64],
    a2: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(h, a1.len())?;
    check_len(h, a2.len())?;
    let coef = |x: &[f64]| -> Vec<f64> {
        let mut ax = vec![0.0; x.len()];
        a.matvec(x, &mut ax);
        (0..h.len())
            .map(|m| {
                let l = h.eigenvalues[m];
                if l <= 1e-12 * h.eigenvalues.last().copied().unwrap_or(1.0).abs() {
                    0.0
                } else {
                    h.basis
                        .column(m)
                        .iter()
                        .zip(&ax)
                        .map(|(p, q)| p * q)
                        .sum::<f64>()
                        / l.sqrt()
                }
            })
            .collect()
    };
    Ok((coef(a1), coef(a2)))
}

/// Relative error in the current norm of the `m`-mode reconstruction of the
/// current with potentials `(a1, a2)`. The current norm is the stiffness form
/// of the potentials, and both sides are compared with zero B-mean.
pub fn reconstruction_error(
    h: &ManifoldHarmonics,
    stiffness: &Csr<f64>,
    mass: &Csr<f64>,
    a1: &[f64],
    a2: &[f64],
    m: usize,
) -> Result<f64> {
    potentials_error(h, stiffness, mass, &[a1, a2], m)
}

/// Same error for a complex current `[a1, a2]` in the `2 N_v` layout; real and
/// imaginary parts enter the norm separately.
pub fn complex_reconstruction_error(
    h: &ManifoldHarmonics,
    stiffness: &Csr<f64>,
    mass: &Csr<f64>,
    coefficients: &[C64],
    m: usize,
) -> Result<f64> {
    let nv = h.basis.nrows();
    if coefficients.len() != 2 * nv {
        return Err(Error::InvalidArgument(format!(
            "expected {} coefficients, got {}",
            2 * nv,
            coefficients.len()
        )));
    }
    let parts: Vec<Vec<f64>> = coefficients
        .chunks(nv)
        .flat_map(|c| [c.iter().map(|z| z.re).collect(), c.iter().map(|z| z.im).collect()])
        .collect();
    let refs: Vec<&[f64]> = parts.iter().map(|v| v.as_slice()).collect();
    potentials_error(h, stiffness, mass, &refs, m)
}

fn potentials_error(
    h: &ManifoldHarmonics,
    stiffness: &Csr<f64>,
    mass: &Csr<f64>,
    potentials: &[&[f64]],
    m: usize,
) -> Result<f64> {
    for a in potentials {
        check_len(h, a.len())?;
    }
    let sub = h.nonconstant(m);
    let energy = |x: &[f64]| -> f64 {
        let mut ax = vec![0.0; x.len()];
        stiffness.matvec(x, &mut ax);
        ax.iter().zip(x).map(|(p, q)| p * q).sum()
    };
    let mut err = 0.0;
    let mut total = 0.0;
    for a in potentials {
        let z = zero_mean(mass, a);
        let rec = sub.inverse(&sub.forward(mass, &z));
        let diff: Vec<f64> = z.iter().zip(&rec).map(|(p, q)| p - q).collect();
        let diff = zero_mean(mass, &diff);
        err += energy(&diff).max(0.0);
        total += energy(&z).max(0.0);
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok((err / total).sqrt())
}
