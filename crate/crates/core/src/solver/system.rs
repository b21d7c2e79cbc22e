//! Loop-space scattering systems: CC-CFIER and the classical CFIE family.

use std::time::Instant;

use super::gmres::{gmres, GmresConfig, LinearMap};
use super::gram::{project_range, GramSolver};
use crate::bie::OperatorSet;
use crate::constants::ETA0;
use crate::{Error, Result, C64};

/// The three operators of a scattering problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    /// EFIE operator at the real wavenumber.
    T,
    /// EFIE operator at the complexified wavenumber.
    Tp,
    /// MFIE operator including the identity term.
    K,
}

/// Backend applying the operators in the `2 N_v` layout.
pub trait Operators: Sync {
    fn nv(&self) -> usize;
    fn apply(&self, op: OpKind, x: &[C64], y: &mut [C64]) -> Result<()>;
}

impl Operators for OperatorSet {
    fn nv(&self) -> usize {
        self.nv
    }

    fn apply(&self, op: OpKind, x: &[C64], y: &mut [C64]) -> Result<()> {
        let m = match op {
            OpKind::T => &self.t,
            OpKind::Tp => &self.tp,
            OpKind::K => &self.k,
        };
        if x.len() != m.cols || y.len() != m.rows {
            return Err(Error::InvalidArgument("operator dimension mismatch".into()));
        }
        m.matvec(x, y);
        Ok(())
    }
}

/// Integral equation formulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formulation {
    CcCfier,
    /// `alpha EFIE + (1 - alpha) eta MFIE`.
    Cfie(f64),
    Efie,
    Mfie,
}

impl Formulation {
    /// EFIE weight of the combined formulations.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            Formulation::CcCfier => None,
            Formulation::Cfie(a) => Some(*a),
            Formulation::Efie => Some(1.0),
            Formulation::Mfie => Some(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub gmres_tol_outer: f64,
    pub gmres_tol_gram: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// Localization radius of `T'` in wavelengths; `None` keeps every interaction.
    pub localization_wavelengths: Option<f64>,
    pub formulation: Formulation,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            gmres_tol_outer: 1e-5,
            gmres_tol_gram: 1e-11,
            restart: 200,
            max_iter: 1000,
            localization_wavelengths: Some(1.25),
            formulation: Formulation::CcCfier,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gmres_tol_outer > 0.0 && self.gmres_tol_gram > 0.0) {
            return Err(Error::InvalidArgument(
                "GMRES tolerances must be positive".into(),
            ));
        }
        if self.restart == 0 || self.max_iter == 0 {
            return Err(Error::InvalidArgument(
                "restart and max_iter must be positive".into(),
            ));
        }
        if let Formulation::Cfie(a) = self.formulation {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "CFIE alpha must lie in (0, 1), got {a}"
                )));
            }
        }
        if self.localization_wavelengths.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::InvalidArgument(
                "localization radius must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn outer(&self) -> GmresConfig {
        GmresConfig {
            tol: self.gmres_tol_outer,
            restart: self.restart,
            max_iter: self.max_iter,
        }
    }
}

/// Solution of a scattering system.
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Loop coefficients of both current families, `[a1, a2]` in the `2 N_v` layout.
    pub coefficients: Vec<C64>,
    /// Coefficients in the reduced space, for compressed solves.
    pub reduced: Option<Vec<C64>>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub wall_time: f64,
    /// Inner Gram iterations summed over all solves.
    pub gram_iterations: usize,
}

impl SolveResult {
    pub fn nv(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn a1(&self) -> &[C64] {
        &self.coefficients[..self.nv()]
    }

    pub fn a2(&self) -> &[C64] {
        &self.coefficients[self.nv()..]
    }
}

/// `Q (a, b) = (b, -a)`.
pub fn apply_q(x: &[C64]) -> Vec<C64> {
    let nv = x.len() / 2;
    x[nv..]
        .iter()
        .copied()
        .chain(x[..nv].iter().map(|v| -v))
        .collect()
}

fn apply_op(ops: &dyn Operators, op: OpKind, x: &[C64]) -> Result<Vec<C64>> {
    let mut y = vec![C64::new(0.0, 0.0); x.len()];
    ops.apply(op, x, &mut y)?;
    Ok(y)
}

/// Weight of the Calderon term; the EFIE operators enter normalized by `eta`.
pub fn calderon_weight() -> f64 {
    2.0 / (ETA0 * ETA0)
}

/// `Z = G^-1 (K - c Q T' G^-1 Q T)` with `T` stored unrotated and `c = 2 / eta^2`.
pub struct CcCfierMap<'a> {
    pub ops: &'a dyn Operators,
    pub gram: &'a GramSolver,
}

impl CcCfierMap<'_> {
    /// `K x - c Q T' G^-1 Q T x` before the outer Gram solve.
    pub fn unscaled(&self, x: &[C64]) -> Result<Vec<C64>> {
        let tx = apply_op(self.ops, OpKind::T, x)?;
        let ginv = self.gram.solve(&apply_q(&tx))?;
        let tp = apply_q(&apply_op(self.ops, OpKind::Tp, &ginv)?);
        let kx = apply_op(self.ops, OpKind::K, x)?;
        let c = calderon_weight();
        Ok(kx.iter().zip(&tp).map(|(k, t)| k - c * t).collect())
    }

    /// `G^-1 (V_K + c Q T' G^-1 Q V_T)`.
    pub fn rhs(&self, v_t: &[C64], v_k: &[C64]) -> Result<Vec<C64>> {
        let ginv = self.gram.solve(&apply_q(v_t))?;
        let tp = apply_q(&apply_op(self.ops, OpKind::Tp, &ginv)?);
        let c = calderon_weight();
        let r: Vec<C64> = v_k.iter().zip(&tp).map(|(k, t)| k + c * t).collect();
        self.gram.solve(&r)
    }
}

impl LinearMap for CcCfierMap<'_> {
    fn dim(&self) -> usize {
        2 * self.ops.nv()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        let mut xd = x.to_vec();
        self.gram.deflate(&mut xd);
        let z = self.gram.solve(&self.unscaled(&xd)?)?;
        y.copy_from_slice(&z);
        Ok(())
    }
}

/// `-alpha T + (1 - alpha) eta K`, with constant modes removed from input and output.
pub struct CombinedMap<'a> {
    pub ops: &'a dyn Operators,
    pub alpha: f64,
}

impl CombinedMap<'_> {
    pub fn rhs(&self, v_t: &[C64], v_k: &[C64]) -> Vec<C64> {
        let mut r: Vec<C64> = v_t
            .iter()
            .zip(v_k)
            .map(|(t, k)| self.alpha * t + (1.0 - self.alpha) * ETA0 * k)
            .collect();
        deflate_halves(&mut r);
        r
    }
}

fn deflate_halves(r: &mut [C64]) {
    let nv = r.len() / 2;
    let (a, b) = r.split_at_mut(nv);
    project_range(a);
    project_range(b);
}

impl LinearMap for CombinedMap<'_> {
    fn dim(&self) -> usize {
        2 * self.ops.nv()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        let mut xd = x.to_vec();
        deflate_halves(&mut xd);
        let zero = C64::new(0.0, 0.0);
        y.iter_mut().for_each(|v| *v = zero);
        if self.alpha != 0.0 {
            let t = apply_op(self.ops, OpKind::T, &xd)?;
            y.iter_mut().zip(&t).for_each(|(a, b)| *a -= self.alpha * b);
        }
        if self.alpha != 1.0 {
            let k = apply_op(self.ops, OpKind::K, &xd)?;
            y.iter_mut()
                .zip(&k)
                .for_each(|(a, b)| *a += (1.0 - self.alpha) * ETA0 * b);
        }
        deflate_halves(y);
        Ok(())
    }
}

/// Solves for the surface current in the Loop basis.
pub fn solve_loop(
    ops: &dyn Operators,
    gram: &GramSolver,
    v_t: &[C64],
    v_k: &[C64],
    cfg: &SystemConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = 2 * ops.nv();
    if v_t.len() != n || v_k.len() != n || gram.nv() != ops.nv() {
        return Err(Error::InvalidArgument(
            "excitation and operator sizes differ".into(),
        ));
    }
    let start = Instant::now();
    let before = gram.stats().0;
    let (out, mut x) = match cfg.formulation.alpha() {
        None => {
            let map = CcCfierMap { ops, gram };
            let rhs = map.rhs(v_t, v_k)?;
            let out = gmres(&map, &rhs, None, &cfg.outer())?.require_converged("CC-CFIER solve")?;
            let x = out.x.clone();
            (out, x)
        }
        Some(alpha) => {
            let map = CombinedMap { ops, alpha };
            let rhs = map.rhs(v_t, v_k);
            let out = gmres(&map, &rhs, None, &cfg.outer())?.require_converged("CFIE solve")?;
            let x = out.x.clone();
            (out, x)
        }
    };
    gram.deflate(&mut x);
    Ok(SolveResult {
        coefficients: x,
        reduced: None,
        iterations: out.iterations,
        residual_history: out.residual_history,
        wall_time: start.elapsed().as_secs_f64(),
        gram_iterations: gram.stats().0 - before,
    })
}
