//! Restarted complex GMRES with right preconditioning.

use crate::linalg::{cdot, cnorm, CMat, Csr};
use crate::{Error, Result, C64};

/// A linear map on complex vectors.
pub trait LinearMap: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()>;
}

impl LinearMap for CMat {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.matvec(x, y);
        Ok(())
    }
}

impl LinearMap for Csr<C64> {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        self.matvec(x, y);
        Ok(())
    }
}

/// Identity map of a given size.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearMap for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        y.copy_from_slice(x);
        Ok(())
    }
}

/// Diagonal scaling `y = d .* x`.
#[derive(Debug, Clone)]
pub struct Diagonal(pub Vec<f64>);

impl LinearMap for Diagonal {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.0) {
            *yi = xi * d;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    /// Relative residual tolerance `|b - A x| / |b|`.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            tol: 1e-5,
            restart: 200,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    /// Relative residual after each iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl GmresOutcome {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }

    /// Error unless converged.
    pub fn require_converged(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged(format!(
                "{what}: relative residual {:.3e} after {} iterations",
                self.final_residual(),
                self.iterations
            )))
        }
    }
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    if na == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = (na * na + b.norm_sqr()).sqrt();
    (na / r, (a / na) * b.conj() / r)
}

/// Solves `A x = b` with right preconditioner `M` (`A M z = b`, `x = M z`).
pub fn gmres(
    map: &dyn LinearMap,
    rhs: &[C64],
    precond: Option<&dyn LinearMap>,
    cfg: &GmresConfig,
) -> Result<GmresOutcome> {
    let n = map.dim();
    if rhs.len() != n || precond.is_some_and(|m| m.dim() != n) {
        return Err(Error::InvalidArgument(format!(
            "gmres dimension mismatch: map {n}, rhs {}",
            rhs.len()
        )));
    }
    if !(cfg.tol > 0.0) || cfg.restart == 0 {
        return Err(Error::InvalidArgument(
            "gmres needs a positive tolerance and restart".into(),
        ));
    }
    let zero = C64::new(0.0, 0.0);
    let bnorm = cnorm(rhs);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x,
            iterations: 0,
            residual_history: vec![0.0],
            converged: true,
        });
    }
    let mut history = vec![1.0];
    let mut iterations = 0;
    let mut r = rhs.to_vec();
    let mut w = vec![zero; n];
    let mut z = vec![zero; n];
    loop {
        let beta = cnorm(&r);
        if beta / bnorm <= cfg.tol {
            return Ok(GmresOutcome {
                x,
                iterations,
                residual_history: history,
                converged: true,
            });
        }
        if iterations >= cfg.max_iter {
            return Ok(GmresOutcome {
                x,
                iterations,
                residual_history: history,
                converged: false,
            });
        }
        let m = cfg.restart.min(cfg.max_iter - iterations);
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|c| c / beta).collect()];
        let mut h: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, C64)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k = 0;
        while k < m {
            match precond {
                Some(p) => {
                    p.apply(&v[k], &mut z)?;
                    map.apply(&z, &mut w)?;
                }
                None => map.apply(&v[k], &mut w)?,
            }
            let mut col = vec![zero; k + 2];
            for _ in 0..2 {
                for (j, vj) in v.iter().enumerate() {
                    let c = cdot(vj, &w);
                    col[j] += c;
                    w.iter_mut().zip(vj).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let hn = cnorm(&w);
            col[k + 1] = C64::new(hn, 0.0);
            for (j, &(c, s)) in cs.iter().enumerate() {
                let t = c * col[j] + s * col[j + 1];
                col[j + 1] = -s.conj() * col[j] + c * col[j + 1];
                col[j] = t;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            col[k] = c * col[k] + s * col[k + 1];
            col[k + 1] = zero;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            cs.push((c, s));
            h.push(col);
            iterations += 1;
            k += 1;
            let res = g[k].norm() / bnorm;
            history.push(res);
            if res <= cfg.tol || hn <= 1e-14 * beta {
                break;
            }
            v.push(w.iter().map(|c| c / hn).collect());
        }
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut upd = vec![zero; n];
        for (yi, vi) in y.iter().zip(&v) {
            upd.iter_mut().zip(vi).for_each(|(u, a)| *u += yi * a);
        }
        if let Some(p) = precond {
            p.apply(&upd, &mut z)?;
            std::mem::swap(&mut upd, &mut z);
        }
        x.iter_mut().zip(&upd).for_each(|(a, b)| *a += b);
        map.apply(&x, &mut w)?;
        r.iter_mut()
            .zip(rhs)
            .zip(&w)
            .for_each(|((ri, bi), wi)| *ri = bi - wi);
    }
}
