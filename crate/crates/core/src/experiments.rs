//! Monte-Carlo harness:
//! - noise sweeps on a fixed certified design
//! - sample-size sweeps with fresh Gaussian designs
//! - sharpness runs on uncertified instances
//! - identification profiles of the Forward-Backward iterates

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{linearized_precertificate, Certificate, Tolerances};
use crate::error::{invalid, Error, Result};
use crate::linalg::SymmetricOperator;
use crate::problems::{
    canonical_parameters, correlation_noise, sample_design, sample_noise, sample_signal, DesignSpec,
    ProblemInstance, SignalSpec,
};
use crate::regularizer::{MembershipStatus, ModelDescriptor, Regularizer};
use crate::solver::{forward_backward, CanonicalParameters, SolveOptions, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NoiseStability,
    Consistency,
    Sharpness,
    IdentificationProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    NoiseLevels(Vec<f64>),
    SampleSizes(Vec<usize>),
    MuValues(Vec<f64>),
}

impl Sweep {
    fn len(&self) -> usize {
        match self {
            Sweep::NoiseLevels(v) | Sweep::MuValues(v) => v.len(),
            Sweep::SampleSizes(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuRule {
    Fixed(f64),
    /// `μ = c·σ`; `c = None` means `2 / certificate margin`.
    Proportional { c: Option<f64> },
    /// `μ_n = c·n^(−γ)` with `0 < γ < 1/2`.
    Power { c: f64, gamma: f64 },
}

impl MuRule {
    pub const DEFAULT_POWER: MuRule = MuRule::Power { c: 1.0, gamma: 0.25 };

    fn validate(&self) -> Result<()> {
        match *self {
            MuRule::Fixed(mu) if !(mu > 0.0 && mu.is_finite()) => {
                Err(invalid(format!("fixed mu must be positive, got {mu}")))
            }
            MuRule::Proportional { c: Some(c) } if !(c > 0.0 && c.is_finite()) => {
                Err(invalid(format!("proportional constant must be positive, got {c}")))
            }
            MuRule::Power { c, gamma } => {
                if !(c > 0.0 && c.is_finite()) {
                    Err(invalid(format!("power constant must be positive, got {c}")))
                } else if !(gamma > 0.0 && gamma < 0.5) {
                    Err(invalid(format!("power exponent must lie in (0, 1/2), got {gamma}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn mu(&self, sigma: f64, n: usize, margin: Option<f64>) -> Result<f64> {
        match *self {
            MuRule::Fixed(mu) => Ok(mu),
            MuRule::Proportional { c: Some(c) } => Ok(c * sigma),
            MuRule::Proportional { c: None } => match margin {
                Some(m) if m > 0.0 => Ok(2.0 / m * sigma),
                _ => Err(invalid("default proportional rule needs a positive certificate margin")),
            },
            MuRule::Power { c, gamma } => Ok(c * (n as f64).powf(-gamma)),
        }
    }
}

/// Pre-screening of the fixed instance: draws are retried with successive
/// seeds until the certificate is interior with at least `min_margin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenOptions {
    pub min_margin: f64,
    pub max_attempts: usize,
}

impl Default for ScreenOptions {
    fn default() -> Self {
        Self { min_margin: 0.0, max_attempts: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub regularizer: Regularizer,
    pub design: DesignSpec,
    pub signal: SignalSpec,
    pub sweep: Sweep,
    /// Noise level for sweeps that do not vary it.
    pub noise_sigma: f64,
    pub mu_rule: MuRule,
    pub trials: usize,
    pub base_seed: u64,
    pub solver: SolveOptions,
    pub tolerances: Tolerances,
    pub screen: Option<ScreenOptions>,
    /// Worker threads for trials; `None` uses every available core.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.sweep.len() == 0 {
            return Err(invalid("sweep is empty"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma)));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        self.mu_rule.validate()?;
        match &self.sweep {
            Sweep::NoiseLevels(s) if s.iter().any(|&x| !(x >= 0.0 && x.is_finite())) => {
                Err(invalid("noise levels must be finite and >= 0"))
            }
            Sweep::MuValues(m) if m.iter().any(|&x| !(x > 0.0 && x.is_finite())) => {
                Err(invalid("mu values must be positive"))
            }
            Sweep::SampleSizes(n) if n.contains(&0) => Err(invalid("sample sizes must be positive")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    pub sigma: f64,
    pub mu: f64,
    pub identified: bool,
    pub boundary_flag: bool,
    /// `‖β_θ − β0‖`.
    pub error_norm: f64,
    /// `‖ε‖ = ‖Xᵀw/n‖`.
    pub eps_norm: f64,
    pub identification_iter: Option<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub certificate_margin: Option<f64>,
    pub max_objective_increase: f64,
    /// Fraction of iterates from `identification_iter` on whose descriptor
    /// equals the model of `β0`; only for identification profiles.
    pub post_identification_match: Option<f64>,
}

impl TrialRecord {
    pub fn error_ratio(&self) -> Option<f64> {
        (self.eps_norm > 0.0).then(|| self.error_norm / self.eps_norm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileStats {
    pub median_identification_iter: Option<f64>,
    pub max_identification_iter: Option<usize>,
    pub min_post_identification_match: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub sweep_value: f64,
    pub sigma: f64,
    pub mu: f64,
    pub n: usize,
    pub trials: usize,
    pub identified: usize,
    pub identification_rate: f64,
    pub non_converged: usize,
    pub boundary_fraction: f64,
    pub mean_error_ratio: Option<f64>,
    pub max_error_ratio: Option<f64>,
    pub mean_identification_iter: Option<f64>,
    /// Trials with a finite identification iteration.
    pub finite_identification_iters: usize,
    pub max_objective_increase: f64,
    /// Whether the noiseless solve lands in the model of `β0` (sharpness runs).
    pub noiseless_identified: Option<bool>,
    pub profile: Option<ProfileStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub kind: ExperimentKind,
    /// Seed of the fixed instance, if any.
    pub instance_seed: Option<u64>,
    pub certificate_margin: Option<f64>,
    pub certificate_status: Option<MembershipStatus>,
    pub warnings: Vec<String>,
    pub points: Vec<SummaryPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: SummaryTable,
}

fn trial_seed(base: u64, point: usize, trial: usize) -> u64 {
    base.wrapping_add(point as u64 * 1_000_000 + trial as u64)
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn margin_of(cert: &Option<Certificate>) -> Option<f64> {
    cert.as_ref().map(|c| c.verdict.margin)
}

struct FixedInstance {
    x: DMatrix<f64>,
    gamma: SymmetricOperator,
    beta0: DVector<f64>,
    model0: ModelDescriptor,
    certificate: Option<Certificate>,
    seed: u64,
}

fn certify(gamma: &SymmetricOperator, beta0: &DVector<f64>, config: &ExperimentConfig) -> Result<Option<Certificate>> {
    match linearized_precertificate(gamma, beta0, &config.regularizer, &config.tolerances) {
        Ok(c) => Ok(Some(c)),
        Err(Error::NotInjective { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn fixed_instance(config: &ExperimentConfig) -> Result<FixedInstance> {
    let attempts = config.screen.map_or(1, |s| s.max_attempts.max(1));
    for attempt in 0..attempts {
        let seed = config.base_seed.wrapping_add(attempt as u64);
        let x = sample_design(&config.design, seed)?;
        let beta0 = sample_signal(&config.signal, x.ncols(), seed)?;
        let gamma = SymmetricOperator::gram(&x);
        let certificate = certify(&gamma, &beta0, config)?;
        let accepted = match (&config.screen, &certificate) {
            (None, _) => true,
            (Some(s), Some(c)) => c.verdict.status == MembershipStatus::Interior && c.verdict.margin > s.min_margin,
            (Some(_), None) => false,
        };
        if accepted {
            let model0 = config.regularizer.descriptor(&beta0, config.tolerances.zero_tol)?;
            return Ok(FixedInstance { x, gamma, beta0, model0, certificate, seed });
        }
    }
    let min = config.screen.map_or(0.0, |s| s.min_margin);
    Err(invalid(format!("no instance with certificate margin > {min} in {attempts} attempts")))
}

struct TrialInput<'a> {
    seed: u64,
    sigma: f64,
    theta: CanonicalParameters,
    inst: &'a ProblemInstance,
    model0: &'a ModelDescriptor,
    certificate_margin: Option<f64>,
    boundary: bool,
}

fn run_trial(input: TrialInput<'_>, config: &ExperimentConfig, opts: &SolveOptions) -> Result<TrialRecord> {
    let res: SolveResult = forward_backward(&input.theta, &config.regularizer, opts, None)?;
    let identified = res.converged && res.final_model.same_model(input.model0)?;
    let post_identification_match = match (&res.model_trace, res.identification_iter) {
        (Some(trace), Some(k)) if opts.trace_models => {
            let tail = &trace[k..];
            let hits = tail.iter().filter(|d| *d == input.model0).count();
            Some(hits as f64 / tail.len() as f64)
        }
        _ => None,
    };
    Ok(TrialRecord {
        seed: input.seed,
        n: input.inst.n(),
        sigma: input.sigma,
        mu: input.theta.mu,
        identified,
        boundary_flag: input.boundary,
        error_norm: (&res.beta - &input.inst.beta0).norm(),
        eps_norm: correlation_noise(input.inst).norm(),
        identification_iter: res.identification_iter,
        converged: res.converged,
        iterations: res.iterations,
        certificate_margin: input.certificate_margin,
        max_objective_increase: res.max_objective_increase,
        post_identification_match,
    })
}

fn summarize(sweep_value: f64, sigma: f64, mu: f64, n: usize, records: &[TrialRecord]) -> SummaryPoint {
    let trials = records.len();
    let identified = records.iter().filter(|r| r.identified).count();
    let ratios: Vec<f64> = records.iter().filter_map(TrialRecord::error_ratio).collect();
    let iters: Vec<usize> = records.iter().filter_map(|r| r.identification_iter).collect();
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let iters_f: Vec<f64> = iters.iter().map(|&k| k as f64).collect();
    let profile = records.iter().any(|r| r.post_identification_match.is_some()).then(|| {
        let mut sorted = iters.clone();
        sorted.sort_unstable();
        let median = (!sorted.is_empty()).then(|| {
            let m = sorted.len() / 2;
            if sorted.len() % 2 == 1 {
                sorted[m] as f64
            } else {
                0.5 * (sorted[m - 1] + sorted[m]) as f64
            }
        });
        ProfileStats {
            median_identification_iter: median,
            max_identification_iter: sorted.last().copied(),
            min_post_identification_match: records
                .iter()
                .filter_map(|r| r.post_identification_match)
                .reduce(f64::min),
        }
    });
    SummaryPoint {
        sweep_value,
        sigma,
        mu,
        n,
        trials,
        identified,
        identification_rate: identified as f64 / trials.max(1) as f64,
        non_converged: records.iter().filter(|r| !r.converged).count(),
        boundary_fraction: records.iter().filter(|r| r.boundary_flag).count() as f64 / trials.max(1) as f64,
        mean_error_ratio: mean(&ratios),
        max_error_ratio: ratios.iter().copied().reduce(f64::max),
        mean_identification_iter: mean(&iters_f),
        finite_identification_iters: iters.len(),
        max_objective_increase: records.iter().map(|r| r.max_objective_increase).fold(0.0, f64::max),
        noiseless_identified: None,
        profile,
    }
}

/// Trials on one fixed `(X, β0)` with fresh noise, one sweep point per
/// `(sweep_value, σ, μ)` triple.
fn fixed_design_run(
    config: &ExperimentConfig,
    points: impl FnOnce(&FixedInstance) -> Result<Vec<(f64, f64, f64)>>,
    trace: bool,
    noiseless: bool,
) -> Result<(Vec<TrialRecord>, SummaryTable, FixedInstance)> {
    let fixed = fixed_instance(config)?;
    let points = points(&fixed)?;
    let opts = SolveOptions { trace_models: trace || config.solver.trace_models, ..config.solver.clone() };
    let n = fixed.x.nrows();
    let margin = margin_of(&fixed.certificate);
    let boundary = fixed.certificate.as_ref().is_some_and(|c| c.verdict.status == MembershipStatus::Boundary);
    let pool = thread_pool(config.threads)?;

    let mut records = Vec::new();
    let mut summary_points = Vec::new();
    for (pi, &(sweep_value, sigma, mu)) in points.iter().enumerate() {
        let point_records = pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|t| -> Result<TrialRecord> {
                    let seed = trial_seed(config.base_seed, pi, t);
                    let w = sample_noise(n, sigma, seed)?;
                    let inst = ProblemInstance::assemble(fixed.x.clone(), fixed.beta0.clone(), w, seed)?;
                    let u = inst.x.tr_mul(&inst.y) / n as f64;
                    let theta = CanonicalParameters::new(mu, u, fixed.gamma.clone())?;
                    let input = TrialInput {
                        seed,
                        sigma,
                        theta,
                        inst: &inst,
                        model0: &fixed.model0,
                        certificate_margin: margin,
                        boundary,
                    };
                    run_trial(input, config, &opts)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut point = summarize(sweep_value, sigma, mu, n, &point_records);
        if noiseless {
            let u = fixed.gamma.matrix() * &fixed.beta0;
            let theta = CanonicalParameters::new(mu, u, fixed.gamma.clone())?;
            let res = forward_backward(&theta, &config.regularizer, &config.solver, None)?;
            point.noiseless_identified = Some(res.converged && res.final_model.same_model(&fixed.model0)?);
        }
        summary_points.push(point);
        records.extend(point_records);
    }
    let summary = SummaryTable {
        kind: config.kind,
        instance_seed: Some(fixed.seed),
        certificate_margin: margin,
        certificate_status: fixed.certificate.as_ref().map(|c| c.verdict.status),
        warnings: Vec::new(),
        points: summary_points,
    };
    Ok((records, summary, fixed))
}

fn noise_points(config: &ExperimentConfig, margin: Option<f64>, n: usize) -> Result<Vec<(f64, f64, f64)>> {
    match &config.sweep {
        Sweep::NoiseLevels(sigmas) => sigmas
            .iter()
            .map(|&s| Ok((s, s, config.mu_rule.mu(s, n, margin)?)))
            .collect(),
        _ => Err(invalid("this experiment needs a noise_levels sweep")),
    }
}

fn noise_run(config: &ExperimentConfig, trace: bool) -> Result<ExperimentOutput> {
    config.validate()?;
    if !matches!(config.sweep, Sweep::NoiseLevels(_)) {
        return Err(invalid("this experiment needs a noise_levels sweep"));
    }
    let points = |f: &FixedInstance| noise_points(config, margin_of(&f.certificate), f.x.nrows());
    let (records, summary, _) = fixed_design_run(config, points, trace, false)?;
    Ok(ExperimentOutput { records, summary })
}

/// Noise sweep on one certified design: identification rate and
/// `‖β_θ − β0‖ / ‖ε‖` per noise level.
pub fn noise_stability_sweep(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    noise_run(config, false)
}

/// Same trials as [`noise_stability_sweep`] with model tracing on, reporting
/// when the iterates settle on their final model.
pub fn identification_profile(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    noise_run(config, true)
}

/// Runs on an instance expected to fail the irrepresentable condition. The
/// sweep is over μ at fixed `noise_sigma`; each point also reports one
/// noiseless solve.
pub fn sharpness_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    if matches!(config.sweep, Sweep::SampleSizes(_)) {
        return Err(invalid("sharpness needs a mu_values or noise_levels sweep"));
    }
    let points = |f: &FixedInstance| match &config.sweep {
        Sweep::MuValues(mus) => Ok(mus.iter().map(|&m| (m, config.noise_sigma, m)).collect()),
        _ => noise_points(config, margin_of(&f.certificate), f.x.nrows()),
    };
    let (records, mut summary, fixed) = fixed_design_run(config, points, false, true)?;
    match &fixed.certificate {
        Some(c) if c.verdict.status == MembershipStatus::Interior => summary.warnings.push(format!(
            "instance is certified interior (margin {:.6e}); the sharpness regime does not apply",
            c.verdict.margin
        )),
        None => summary.warnings.push("restricted injectivity fails on the instance".into()),
        _ => {}
    }
    Ok(ExperimentOutput { records, summary })
}

/// Sample-size sweep with a fresh Gaussian design and noise per trial and
/// `μ_n = c·n^(−γ)`.
pub fn consistency_sweep(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let sizes = match &config.sweep {
        Sweep::SampleSizes(n) => n.clone(),
        _ => return Err(invalid("consistency needs a sample_sizes sweep")),
    };
    let covariance = match &config.design {
        DesignSpec::GaussianRows { covariance, .. } => covariance.clone(),
        DesignSpec::Explicit { .. } => return Err(invalid("consistency needs a gaussian_rows design")),
    };
    if !matches!(config.mu_rule, MuRule::Power { .. }) {
        return Err(invalid("consistency needs the power mu rule"));
    }
    let p = covariance.dim();
    let beta0 = sample_signal(&config.signal, p, config.base_seed)?;
    let model0 = config.regularizer.descriptor(&beta0, config.tolerances.zero_tol)?;
    let population = certify(&covariance, &beta0, config)?;
    let pool = thread_pool(config.threads)?;

    let mut records = Vec::new();
    let mut points = Vec::new();
    for (pi, &n) in sizes.iter().enumerate() {
        let design = config.design.with_rows(n)?;
        let mu = config.mu_rule.mu(config.noise_sigma, n, None)?;
        let point_records = pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|t| -> Result<TrialRecord> {
                    let seed = trial_seed(config.base_seed, pi, t);
                    let x = sample_design(&design, seed)?;
                    let w = sample_noise(n, config.noise_sigma, seed)?;
                    let inst = ProblemInstance::assemble(x, beta0.clone(), w, seed)?;
                    let theta = canonical_parameters(&inst, mu * n as f64)?.with_mu(mu)?;
                    let cert = certify(&theta.gamma, &beta0, config)?;
                    let input = TrialInput {
                        seed,
                        sigma: config.noise_sigma,
                        boundary: cert.as_ref().is_some_and(|c| c.verdict.status == MembershipStatus::Boundary),
                        certificate_margin: margin_of(&cert),
                        theta,
                        inst: &inst,
                        model0: &model0,
                    };
                    run_trial(input, config, &config.solver)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        points.push(summarize(n as f64, config.noise_sigma, mu, n, &point_records));
        records.extend(point_records);
    }
    let summary = SummaryTable {
        kind: config.kind,
        instance_seed: None,
        certificate_margin: margin_of(&population),
        certificate_status: population.as_ref().map(|c| c.verdict.status),
        warnings: Vec::new(),
        points,
    };
    Ok(ExperimentOutput { records, summary })
}

/// Dispatches on `config.kind`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match config.kind {
        ExperimentKind::NoiseStability => noise_stability_sweep(config),
        ExperimentKind::Consistency => consistency_sweep(config),
        ExperimentKind::Sharpness => sharpness_experiment(config),
        ExperimentKind::IdentificationProfile => identification_profile(config),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub const RECORD_COLUMNS: &str = "seed,n,sigma,mu,identified,boundary_flag,error_norm,eps_norm,error_ratio,\
identification_iter,converged,iterations,certificate_margin,max_objective_increase,post_identification_match";

impl ExperimentOutput {
    /// One row per trial; floats with 17 significant digits.
    pub fn records_csv(&self) -> String {
        let mut out = String::from(RECORD_COLUMNS);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.seed,
                r.n,
                fmt_f(r.sigma),
                fmt_f(r.mu),
                r.identified,
                r.boundary_flag,
                fmt_f(r.error_norm),
                fmt_f(r.eps_norm),
                fmt_opt(r.error_ratio().map(fmt_f)),
                fmt_opt(r.identification_iter),
                r.converged,
                r.iterations,
                fmt_opt(r.certificate_margin.map(fmt_f)),
                fmt_f(r.max_objective_increase),
                fmt_opt(r.post_identification_match.map(fmt_f)),
            );
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    /// Long format `sweep_value,rate,mean_ratio`.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("sweep_value,rate,mean_ratio\n");
        for p in &self.summary.points {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f(p.sweep_value),
                fmt_f(p.identification_rate),
                fmt_opt(p.mean_error_ratio.map(fmt_f))
            );
        }
        out
    }

    /// Writes the three output files into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let files = [
            ("records.csv", self.records_csv()),
            ("summary.json", self.summary_json()),
            ("plot.csv", self.plot_csv()),
        ];
        let mut paths = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{design_from_covariance, SignalKind};

    fn three_variable(beta0: &[f64]) -> ExperimentConfig {
        let cov = SymmetricOperator::new(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.0, 0.6, 0.0, 1.0, 0.6, 0.6, 0.6, 1.0],
        ))
        .unwrap();
        ExperimentConfig {
            kind: ExperimentKind::Sharpness,
            regularizer: Regularizer::L1,
            design: DesignSpec::Explicit { matrix: design_from_covariance(&cov, 50).unwrap() },
            signal: SignalSpec::explicit(DVector::from_column_slice(beta0)),
            sweep: Sweep::MuValues(vec![1e-2, 1e-3]),
            noise_sigma: 1e-4,
            mu_rule: MuRule::Proportional { c: None },
            trials: 10,
            base_seed: 7,
            solver: SolveOptions::default(),
            tolerances: Tolerances::default(),
            screen: None,
            threads: Some(2),
        }
    }

    fn identity_noise(sigmas: Vec<f64>, mu_rule: MuRule, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            kind: ExperimentKind::NoiseStability,
            design: DesignSpec::Explicit { matrix: DMatrix::identity(4, 4) },
            signal: SignalSpec::explicit(DVector::from_column_slice(&[1.0, -2.0, 0.0, 0.0])),
            sweep: Sweep::NoiseLevels(sigmas),
            mu_rule,
            trials,
            screen: Some(ScreenOptions::default()),
            ..three_variable(&[1.0, 0.0, 0.0])
        }
    }

    #[test]
    fn noiseless_identity_design_has_bias_mu() {
        // Γ = I/4, so each active coordinate is shrunk by 4μ
        let out = noise_stability_sweep(&identity_noise(vec![0.0], MuRule::Fixed(0.05), 1)).unwrap();
        let r = &out.records[0];
        assert!(r.identified && r.converged);
        assert_eq!(r.eps_norm, 0.0);
        assert!((r.error_norm - 0.2 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.error_ratio(), None);
    }

    #[test]
    fn identity_design_profile_identifies_at_first_step() {
        let cfg = ExperimentConfig {
            kind: ExperimentKind::IdentificationProfile,
            ..identity_noise(vec![1e-3], MuRule::Proportional { c: None }, 5)
        };
        let out = identification_profile(&cfg).unwrap();
        for r in &out.records {
            assert_eq!(r.identification_iter, Some(1));
            assert_eq!(r.post_identification_match, Some(1.0));
        }
        let prof = out.summary.points[0].profile.as_ref().unwrap();
        assert_eq!(prof.max_identification_iter, Some(1));
    }

    #[test]
    fn sharpness_dichotomy() {
        let out = sharpness_experiment(&three_variable(&[1.0, 1.0, 0.0])).unwrap();
        assert!(out.summary.warnings.is_empty());
        assert!((out.summary.certificate_margin.unwrap() + 0.2).abs() < 1e-9);
        for p in &out.summary.points {
            assert!(p.identification_rate <= 0.1);
            assert_eq!(p.noiseless_identified, Some(false));
        }

        let out = sharpness_experiment(&three_variable(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(out.summary.warnings.len(), 1);
        for p in &out.summary.points {
            assert!(p.identification_rate >= 0.9);
            assert_eq!(p.noiseless_identified, Some(true));
        }
    }

    #[test]
    fn single_trial_is_deterministic() {
        let cfg = identity_noise(vec![1e-2], MuRule::Proportional { c: None }, 1);
        let a = noise_stability_sweep(&cfg).unwrap();
        let b = noise_stability_sweep(&ExperimentConfig { threads: Some(1), ..cfg }).unwrap();
        assert_eq!(a.records.len(), 1);
        assert_eq!(a.records_csv(), b.records_csv());
    }

    #[test]
    fn consistency_validation() {
        let base = ExperimentConfig {
            kind: ExperimentKind::Consistency,
            regularizer: Regularizer::L1,
            design: DesignSpec::GaussianRows { covariance: SymmetricOperator::identity(6), n: 10 },
            signal: SignalSpec::new(SignalKind::Sparse { support_size: 2 }),
            sweep: Sweep::SampleSizes(vec![50, 200]),
            noise_sigma: 0.5,
            mu_rule: MuRule::DEFAULT_POWER,
            trials: 8,
            ..three_variable(&[1.0, 0.0, 0.0])
        };
        let out = consistency_sweep(&base).unwrap();
        assert_eq!(out.records.len(), 16);
        assert!((out.summary.points[1].mu - 200f64.powf(-0.25)).abs() < 1e-15);

        let bad = ExperimentConfig { mu_rule: MuRule::Power { c: 1.0, gamma: 0.6 }, ..base.clone() };
        assert!(consistency_sweep(&bad).is_err());
        let bad = ExperimentConfig { trials: 0, ..base.clone() };
        assert!(consistency_sweep(&bad).is_err());
        let bad = ExperimentConfig { sweep: Sweep::NoiseLevels(vec![0.1]), ..base };
        assert!(consistency_sweep(&bad).is_err());
    }

    #[test]
    fn outputs_are_well_formed() {
        let out = noise_stability_sweep(&identity_noise(vec![1e-2, 1e-3], MuRule::Proportional { c: None }, 3))
            .unwrap();
        let csv = out.records_csv();
        assert_eq!(csv.lines().count(), 7);
        let cols = RECORD_COLUMNS.split(',').count();
        assert!(csv.lines().all(|l| l.split(',').count() == cols));
        assert_eq!(out.plot_csv().lines().count(), 3);
        let v: serde_json::Value = serde_json::from_str(&out.summary_json()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 2);
        assert_eq!(v["kind"], "noise_stability");
    }
}
