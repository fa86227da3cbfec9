//! Forward-Backward splitting for
//! `min_β E(β, θ) = J(β) + (1/2μ)⟨Γβ, β⟩ − (1/μ)⟨β, u⟩ + (1/2μ)⟨Γ⁺u, u⟩`
//! with manifold-identification tracking.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::linalg::{self, SymmetricOperator, DEFAULT_RANK_TOL};
use crate::regularizer::{AnalysisProxOptions, ModelDescriptor, Regularizer, DEFAULT_ZERO_TOL};

/// Tolerance on `‖u − ΓΓ⁺u‖` for the range condition `u ∈ Im(Γ)`.
pub const RANGE_TOL: f64 = 1e-8;

/// `θ = (μ, u, Γ) = (λ/n, Xᵀy/n, XᵀX/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalParameters {
    pub mu: f64,
    pub u: DVector<f64>,
    pub gamma: SymmetricOperator,
}

impl CanonicalParameters {
    pub fn new(mu: f64, u: DVector<f64>, gamma: SymmetricOperator) -> Result<Self> {
        check_dim(gamma.dim(), u.len())?;
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(invalid(format!("mu must be finite and >= 0, got {mu}")));
        }
        Ok(Self { mu, u, gamma })
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(mu, self.u.clone(), self.gamma.clone())
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `‖u − ΓΓ⁺u‖`, zero when `u ∈ Im(Γ)`.
    pub fn range_residual(&self) -> f64 {
        let z = linalg::pseudoinverse(self.gamma.matrix(), DEFAULT_RANK_TOL) * &self.u;
        (&self.u - self.gamma.matrix() * z).norm()
    }

    fn require_positive_mu(&self) -> Result<()> {
        if self.mu > 0.0 {
            Ok(())
        } else {
            Err(invalid("mu = 0 (the constrained problem) is not supported"))
        }
    }
}

/// Pre-factored objective `E(·, θ)`.
///
/// The quadratic part is evaluated as `(1/2μ)⟨Γ(β − z), β − z⟩ − (1/μ)⟨β, u − Γz⟩`
/// with `z = Γ⁺u`, which is algebraically identical to the expanded form and
/// avoids cancellation between its large terms.
pub struct Objective<'a> {
    theta: &'a CanonicalParameters,
    spec: &'a Regularizer,
    z: DVector<f64>,
    u_perp: DVector<f64>,
}

impl<'a> Objective<'a> {
    pub fn new(theta: &'a CanonicalParameters, spec: &'a Regularizer) -> Result<Self> {
        theta.require_positive_mu()?;
        if let Some(p) = spec.dim() {
            check_dim(p, theta.dim())?;
        }
        let z = linalg::pseudoinverse(theta.gamma.matrix(), DEFAULT_RANK_TOL) * &theta.u;
        let u_perp = &theta.u - theta.gamma.matrix() * &z;
        Ok(Self { theta, spec, z, u_perp })
    }

    pub fn value(&self, beta: &DVector<f64>) -> Result<f64> {
        check_dim(self.theta.dim(), beta.len())?;
        let d = beta - &self.z;
        let quad = d.dot(&(self.theta.gamma.matrix() * &d));
        let mu = self.theta.mu;
        Ok(self.spec.value(beta)? + quad / (2.0 * mu) - beta.dot(&self.u_perp) / mu)
    }
}

/// `E(β, θ)`, constant term included.
pub fn objective(theta: &CanonicalParameters, spec: &Regularizer, beta: &DVector<f64>) -> Result<f64> {
    Objective::new(theta, spec)?.value(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    /// `1.8 / ‖Γ‖`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub step: StepSize,
    pub max_iter: usize,
    /// Stop once `‖β_{k+1} − β_k‖ ≤ fp_tol · max(1, ‖β_k‖)`.
    pub fp_tol: f64,
    pub trace_models: bool,
    pub zero_tol: f64,
    pub analysis: AnalysisProxOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            step: StepSize::Auto,
            max_iter: 100_000,
            fp_tol: 1e-10,
            trace_models: false,
            zero_tol: DEFAULT_ZERO_TOL,
            analysis: AnalysisProxOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub beta: DVector<f64>,
    /// Number of forward-backward steps taken.
    pub iterations: usize,
    pub fp_residual: f64,
    pub objective: f64,
    pub converged: bool,
    pub step: f64,
    /// First index `k` from which the descriptor of `β_k` stays equal to the
    /// final one; `None` for non-converged runs.
    pub identification_iter: Option<usize>,
    /// Descriptors of `β_0, β_1, …` when tracing is enabled.
    pub model_trace: Option<Vec<ModelDescriptor>>,
    /// `E(β_k, θ)` for every iterate when tracing is enabled.
    pub objective_trace: Option<Vec<f64>>,
    /// `max_k (E(β_{k+1}) − E(β_k))`, clamped at zero.
    pub max_objective_increase: f64,
    pub final_model: ModelDescriptor,
}

/// JSON-facing summary of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub identification_iter: Option<usize>,
    pub converged: bool,
    pub fp_residual: f64,
    pub step: f64,
}

impl SolveResult {
    pub fn record(&self) -> SolveRecord {
        SolveRecord {
            beta: self.beta.iter().copied().collect(),
            iterations: self.iterations,
            objective: self.objective,
            identification_iter: self.identification_iter,
            converged: self.converged,
            fp_residual: self.fp_residual,
            step: self.step,
        }
    }
}

fn resolve_step(theta: &CanonicalParameters, step: StepSize) -> Result<f64> {
    let norm = linalg::spectral_norm(&theta.gamma);
    match step {
        StepSize::Auto => Ok(if norm > 0.0 { 1.8 / norm } else { 1.0 }),
        StepSize::Fixed(tau) => {
            if tau > 0.0 && (norm == 0.0 || tau < 2.0 / norm) {
                Ok(tau)
            } else {
                Err(invalid(format!("step {tau} outside (0, 2/‖Γ‖) with ‖Γ‖ = {norm}")))
            }
        }
    }
}

/// `β_{k+1} = Prox_{τμJ}(β_k + τ(u − Γβ_k))`, starting from `beta_init`
/// (zero when `None`).
pub fn forward_backward(
    theta: &CanonicalParameters,
    spec: &Regularizer,
    opts: &SolveOptions,
    beta_init: Option<&DVector<f64>>,
) -> Result<SolveResult> {
    let energy = Objective::new(theta, spec)?;
    let tau = resolve_step(theta, opts.step)?;
    let p = theta.dim();
    let mut beta = match beta_init {
        Some(b) => {
            check_dim(p, b.len())?;
            b.clone()
        }
        None => DVector::zeros(p),
    };
    let gamma = theta.gamma.matrix();
    let threshold = tau * theta.mu;

    let mut current_model = spec.descriptor(&beta, opts.zero_tol)?;
    let mut last_change = 0usize;
    let mut model_trace = opts.trace_models.then(|| vec![current_model.clone()]);
    let mut obj = energy.value(&beta)?;
    let mut objective_trace = opts.trace_models.then(|| vec![obj]);
    let mut max_increase = 0.0f64;
    let mut fp_residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..opts.max_iter {
        let forward = &beta + (&theta.u - gamma * &beta) * tau;
        let next = spec.prox_with(&forward, threshold, &opts.analysis)?;
        fp_residual = (&next - &beta).norm();
        let scale = beta.norm().max(1.0);

        let next_obj = energy.value(&next)?;
        max_increase = max_increase.max(next_obj - obj);
        obj = next_obj;

        let model = spec.descriptor(&next, opts.zero_tol)?;
        if model != current_model {
            current_model = model;
            last_change = k + 1;
        }
        if let Some(trace) = model_trace.as_mut() {
            trace.push(current_model.clone());
        }
        if let Some(trace) = objective_trace.as_mut() {
            trace.push(obj);
        }
        beta = next;
        iterations = k + 1;
        if fp_residual <= opts.fp_tol * scale {
            converged = true;
            break;
        }
    }

    Ok(SolveResult {
        beta,
        iterations,
        fp_residual,
        objective: obj,
        converged,
        step: tau,
        identification_iter: converged.then_some(last_change),
        model_trace,
        objective_trace,
        max_objective_increase: max_increase,
        final_model: current_model,
    })
}

/// Solves a descending sequence of `μ` values sharing `(u, Γ)`, warm-starting
/// each solve from the previous solution.
pub fn solve_path(
    thetas: &[CanonicalParameters],
    spec: &Regularizer,
    opts: &SolveOptions,
) -> Result<Vec<Result<SolveResult>>> {
    if let Some(first) = thetas.first() {
        for w in thetas.windows(2) {
            if w[1].mu > w[0].mu {
                return Err(invalid("regularization path must have descending mu"));
            }
        }
        if thetas.iter().any(|t| t.u != first.u || t.gamma != first.gamma) {
            return Err(invalid("regularization path must share u and Gamma"));
        }
    }
    let mut out = Vec::with_capacity(thetas.len());
    let mut warm: Option<DVector<f64>> = None;
    for theta in thetas {
        let res = forward_backward(theta, spec, opts, warm.as_ref());
        if let Ok(r) = &res {
            warm = Some(r.beta.clone());
        }
        out.push(res);
    }
    Ok(out)
}
