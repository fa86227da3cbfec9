//! `partsmooth certify|solve|experiment --config FILE [--out DIR]`.
//!
//! Exit codes of `certify`:
//! - 0: stable
//! - 2: certificate outside
//! - 3: certificate in the boundary band
//! - 4: restricted injectivity fails
//!
//! Every command returns 1 on configuration or IO errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::certificate::{check_model_stability, dual_certificate_at_solution};
use crate::config::{ConfigFile, ProblemSection};
use crate::error::{Error, Result};
use crate::experiments::{run_experiment, SummaryPoint};
use crate::linalg::SymmetricOperator;
use crate::problems::{generate_instance, ProblemInstance};
use crate::regularizer::{MembershipStatus, ModelDescriptor, Regularizer};
use crate::solver::{forward_backward, CanonicalParameters, SolveRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_OUTSIDE: i32 = 2;
pub const EXIT_BOUNDARY: i32 = 3;
pub const EXIT_NOT_INJECTIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "partsmooth", version, about = "Model consistency for partly smooth regularizers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the linearized pre-certificate at beta0 and check the
    /// irrepresentable condition.
    Certify(RunArgs),
    /// Solve the penalized least-squares problem by Forward-Backward.
    Solve(RunArgs),
    /// Run a Monte-Carlo experiment.
    Experiment(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the experiment base seed or the problem seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the number of experiment trials.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifyStatus {
    Interior,
    Boundary,
    Outside,
    NotInjective,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyOutput {
    pub status: CertifyStatus,
    pub stable: bool,
    pub margin: Option<f64>,
    pub tangent_residual: Option<f64>,
    pub smallest_singular: Option<f64>,
    pub subspace_dim: Option<usize>,
    pub eta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessCheck {
    pub status: MembershipStatus,
    pub margin: f64,
    pub tangent_residual: f64,
    pub injective: bool,
    pub unique: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutput {
    #[serde(flatten)]
    pub result: SolveRecord,
    pub mu: f64,
    pub final_model: ModelDescriptor,
    pub max_objective_increase: f64,
    /// `null` when μ = 0.
    pub uniqueness: Option<UniquenessCheck>,
}

fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn missing(what: &str) -> Error {
    Error::Config(format!("missing {what}"))
}

fn generated_instance(cfg: &ConfigFile, base: &Path, reg: &Regularizer, seed: Option<u64>) -> Result<ProblemInstance> {
    let design = cfg.design.as_ref().ok_or_else(|| missing("problem data or [design] section"))?.build(base)?;
    let signal = cfg.signal.as_ref().ok_or_else(|| missing("[signal] section"))?.build(reg)?;
    let problem = cfg.problem.clone().unwrap_or_default();
    let seed = seed.or(problem.seed).unwrap_or(0);
    generate_instance(&design, &signal, problem.noise_sigma.unwrap_or(0.0), seed)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let body = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&path, body)?;
    Ok(path)
}

pub fn run_certify(args: &RunArgs) -> Result<i32> {
    let (cfg, base) = ConfigFile::load(&args.config)?;
    let reg = cfg.regularizer.build(&base)?;
    let problem = cfg.problem.clone().unwrap_or_default();
    let (gamma, beta0) = match (&problem.gamma, &problem.x) {
        (Some(g), _) => (SymmetricOperator::new(g.load(&base)?)?, problem.beta0.as_deref().map(vector)),
        (None, Some(x)) => (SymmetricOperator::gram(&x.load(&base)?), problem.beta0.as_deref().map(vector)),
        (None, None) => {
            let inst = generated_instance(&cfg, &base, &reg, args.seed)?;
            let beta0 = problem.beta0.as_deref().map(vector).unwrap_or(inst.beta0.clone());
            (SymmetricOperator::gram(&inst.x), Some(beta0))
        }
    };
    let beta0 = beta0.ok_or_else(|| missing("problem.beta0"))?;

    let (output, code) = match check_model_stability(&gamma, &beta0, &reg, &cfg.tolerances) {
        Ok(report) => {
            let rec = report.certificate.record();
            let (status, code) = match rec.status {
                MembershipStatus::Interior => (CertifyStatus::Interior, EXIT_OK),
                MembershipStatus::Boundary => (CertifyStatus::Boundary, EXIT_BOUNDARY),
                MembershipStatus::Outside => (CertifyStatus::Outside, EXIT_OUTSIDE),
            };
            let out = CertifyOutput {
                status,
                stable: report.stable,
                margin: Some(rec.margin),
                tangent_residual: Some(rec.tangent_residual),
                smallest_singular: rec.smallest_singular,
                subspace_dim: Some(rec.subspace_dim),
                eta: Some(rec.eta),
            };
            (out, code)
        }
        Err(Error::NotInjective { smallest_singular }) => {
            let out = CertifyOutput {
                status: CertifyStatus::NotInjective,
                stable: false,
                margin: None,
                tangent_residual: None,
                smallest_singular: Some(smallest_singular),
                subspace_dim: None,
                eta: None,
            };
            (out, EXIT_NOT_INJECTIVE)
        }
        Err(e) => return Err(e),
    };
    let path = write_json(&args.out, "certificate.json", &output)?;
    if !args.quiet {
        let margin = output.margin.map_or("n/a".to_string(), |m| format!("{m:.6e}"));
        println!("status={:?} margin={margin} -> {}", output.status, path.display());
    }
    Ok(code)
}

fn solve_parameters(
    cfg: &ConfigFile,
    base: &Path,
    reg: &Regularizer,
    seed: Option<u64>,
) -> Result<CanonicalParameters> {
    let p: ProblemSection = cfg.problem.clone().unwrap_or_default();
    let from_data = |x: DMatrix<f64>, y: DVector<f64>| -> Result<CanonicalParameters> {
        let n = x.nrows();
        if y.len() != n {
            return Err(Error::Dimension { expected: n, found: y.len() });
        }
        let mu = match (p.lambda, p.mu) {
            (Some(l), _) => l / n as f64,
            (None, Some(mu)) => mu,
            (None, None) => return Err(missing("problem.lambda or problem.mu")),
        };
        CanonicalParameters::new(mu, x.tr_mul(&y) / n as f64, SymmetricOperator::gram(&x))
    };
    if let Some(g) = &p.gamma {
        let gamma = SymmetricOperator::new(g.load(base)?)?;
        let u = p.u.as_deref().ok_or_else(|| missing("problem.u"))?;
        let mu = p.mu.ok_or_else(|| missing("problem.mu"))?;
        CanonicalParameters::new(mu, vector(u), gamma)
    } else if let Some(x) = &p.x {
        let y = p.y.as_deref().ok_or_else(|| missing("problem.y"))?;
        from_data(x.load(base)?, vector(y))
    } else {
        let inst = generated_instance(cfg, base, reg, seed)?;
        from_data(inst.x, inst.y)
    }
}

pub fn run_solve(args: &RunArgs) -> Result<i32> {
    let (cfg, base) = ConfigFile::load(&args.config)?;
    let reg = cfg.regularizer.build(&base)?;
    let theta = solve_parameters(&cfg, &base, &reg, args.seed)?;
    let opts = cfg.solver.build();
    let res = forward_backward(&theta, &reg, &opts, None)?;
    let uniqueness = if theta.mu > 0.0 {
        let c = dual_certificate_at_solution(&theta, &res.beta, &reg, &cfg.tolerances)?;
        Some(UniquenessCheck {
            status: c.verdict.status,
            margin: c.verdict.margin,
            tangent_residual: c.verdict.tangent_residual,
            injective: c.injectivity.holds,
            unique: c.unique,
        })
    } else {
        None
    };
    let output = SolveOutput {
        result: res.record(),
        mu: theta.mu,
        final_model: res.final_model.clone(),
        max_objective_increase: res.max_objective_increase,
        uniqueness,
    };
    let path = write_json(&args.out, "solve.json", &output)?;
    if !args.quiet {
        println!(
            "converged={} iterations={} objective={:.6e} -> {}",
            res.converged,
            res.iterations,
            res.objective,
            path.display()
        );
    }
    Ok(EXIT_OK)
}

fn point_line(p: &SummaryPoint) -> String {
    let ratio = p.mean_error_ratio.map_or("n/a".to_string(), |r| format!("{r:.4e}"));
    format!(
        "sweep_value={:.4e} mu={:.4e} n={} trials={} rate={:.3} mean_ratio={ratio} boundary={:.3} non_converged={}",
        p.sweep_value, p.mu, p.n, p.trials, p.identification_rate, p.boundary_fraction, p.non_converged
    )
}

pub fn run_experiment_command(args: &RunArgs) -> Result<i32> {
    let (cfg, base) = ConfigFile::load(&args.config)?;
    let mut exp = cfg.experiment_config(&base)?;
    if let Some(seed) = args.seed {
        exp.base_seed = seed;
    }
    if let Some(trials) = args.trials {
        exp.trials = trials;
    }
    let out = run_experiment(&exp)?;
    out.write_all(&args.out)?;
    if !args.quiet {
        for w in &out.summary.warnings {
            eprintln!("warning: {w}");
        }
        for p in &out.summary.points {
            println!("{}", point_line(p));
        }
    }
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Certify(a) => run_certify(a),
        Command::Solve(a) => run_solve(a),
        Command::Experiment(a) => run_experiment_command(a),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
