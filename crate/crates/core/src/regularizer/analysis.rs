//! Proximal operator of `β ↦ ‖Dᵀβ‖₁` through its dual
//! `min_{‖v‖_∞ ≤ γ} ½‖β − D v‖²`, solved by accelerated projected gradient.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Subspace, DEFAULT_RANK_TOL};
use crate::simplex;

pub const ANALYSIS_PROX_TOL: f64 = 1e-9;
pub const ANALYSIS_PROX_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisProxOptions {
    /// Stop when the projected-gradient fixed-point residual drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Snap the dual solution onto its identified face and keep the result
    /// when it passes the exact optimality check.
    pub polish: bool,
}

impl Default for AnalysisProxOptions {
    fn default() -> Self {
        Self { tol: ANALYSIS_PROX_TOL, max_iter: ANALYSIS_PROX_MAX_ITER, polish: true }
    }
}

pub(super) fn prox(
    d: &DMatrix<f64>,
    beta: &DVector<f64>,
    gamma: f64,
    opts: &AnalysisProxOptions,
) -> Result<DVector<f64>> {
    let q = d.ncols();
    let lip = linalg::operator_norm(d).powi(2);
    if lip == 0.0 {
        return Ok(beta.clone());
    }
    let step = 1.0 / lip;
    let clip = |x: f64| x.clamp(-gamma, gamma);

    let mut v = DVector::<f64>::zeros(q);
    let mut y = v.clone();
    let mut t = 1.0f64;
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let grad = -d.tr_mul(&(beta - d * &y));
        let v_next = (&y - grad * step).map(clip);
        residual = (&v_next - &y).norm();
        // gradient-based adaptive restart
        let restart = (&y - &v_next).dot(&(&v_next - &v)) > 0.0;
        let t_next = if restart { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
        y = if restart { v_next.clone() } else { &v_next + (&v_next - &v) * ((t - 1.0) / t_next) };
        v = v_next;
        t = t_next;
        if residual <= opts.tol {
            break;
        }
    }
    let out = beta - d * &v;
    if opts.polish {
        if let Some(polished) = polish(d, beta, gamma, &out) {
            return Ok(polished);
        }
    }
    if residual > opts.tol {
        return Err(Error::Solver { what: "analysis prox dual solver", residual });
    }
    Ok(out)
}

/// Re-solves the prox exactly on the face identified by `approx`:
/// with cosupport `I` and signs `s` on `S`, the candidate is
/// `P_{ker D_Iᵀ}(β − γ D_S s)`. It is returned only if it certifies its own
/// optimality, i.e. `(β − out)/γ = D_S s + D_I u` with `‖u‖_∞ ≤ 1`.
fn polish(d: &DMatrix<f64>, beta: &DVector<f64>, gamma: f64, approx: &DVector<f64>) -> Option<DVector<f64>> {
    let z = d.tr_mul(approx);
    let scale = beta.amax().max(1.0);
    let face_tol = 1e-6 * scale;
    let (cosupport, support): (Vec<usize>, Vec<usize>) = (0..z.len()).partition(|&i| z[i].abs() <= face_tol);
    let signs: Vec<f64> = support.iter().map(|&i| z[i].signum()).collect();

    let mut anchor = DVector::<f64>::zeros(beta.len());
    for (&i, &s) in support.iter().zip(&signs) {
        anchor += d.column(i) * s;
    }
    let d_i = d.select_columns(cosupport.iter());
    let tangent = Subspace::left_null_space(&d_i, DEFAULT_RANK_TOL);
    let candidate = linalg::project(&(beta - &anchor * gamma), &tangent).ok()?;

    let zc = d.tr_mul(&candidate);
    if support.iter().zip(&signs).any(|(&i, &s)| zc[i] * s <= 0.0) {
        return None;
    }
    let rhs = (beta - &candidate) / gamma - &anchor;
    let u = linalg::pseudoinverse(&d_i, DEFAULT_RANK_TOL) * &rhs;
    let fit = (&d_i * &u - &rhs).amax();
    if fit > 1e-9 * scale / gamma.min(1.0) {
        return None;
    }
    if u.iter().any(|x| x.abs() > 1.0 + 1e-10) {
        // the least-norm coefficients are not the only ones when D_I has a kernel
        let range = Subspace::span(&d_i, DEFAULT_RANK_TOL);
        let a = range.basis().tr_mul(&d_i);
        let b = range.basis().tr_mul(&rhs);
        match simplex::min_linf_solution(&a, &b) {
            Ok(Some((c, _))) if c <= 1.0 + 1e-10 => {}
            _ => return None,
        }
    }
    if (&candidate - approx).norm() > 1e-4 * scale {
        return None;
    }
    Some(candidate)
}
