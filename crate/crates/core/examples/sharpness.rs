//! When the irrepresentable condition fails the lasso never finds the true
//! support, however small the noise and the regularization.

use nalgebra::{DMatrix, DVector};
use partsmooth::certificate::Tolerances;
use partsmooth::experiments::{sharpness_experiment, ExperimentConfig, ExperimentKind, MuRule, Sweep};
use partsmooth::linalg::SymmetricOperator;
use partsmooth::problems::{design_from_covariance, DesignSpec, SignalSpec};
use partsmooth::regularizer::Regularizer;
use partsmooth::solver::SolveOptions;

fn main() -> partsmooth::Result<()> {
    let cov = SymmetricOperator::new(DMatrix::from_row_slice(
        3,
        3,
        &[1.0, 0.0, 0.6, 0.0, 1.0, 0.6, 0.6, 0.6, 1.0],
    ))?;
    for beta0 in [[1.0, 1.0, 0.0], [1.0, 0.0, 0.0]] {
        let config = ExperimentConfig {
            kind: ExperimentKind::Sharpness,
            regularizer: Regularizer::L1,
            design: DesignSpec::Explicit { matrix: design_from_covariance(&cov, 50)? },
            signal: SignalSpec::explicit(DVector::from_column_slice(&beta0)),
            sweep: Sweep::MuValues(vec![1e-1, 1e-2, 1e-3]),
            noise_sigma: 1e-4,
            mu_rule: MuRule::Proportional { c: None },
            trials: 50,
            base_seed: 1,
            solver: SolveOptions::default(),
            tolerances: Tolerances::default(),
            screen: None,
            threads: None,
        };
        let out = sharpness_experiment(&config)?;
        println!("β0 = {beta0:?}, certificate margin {:+.3}", out.summary.certificate_margin.unwrap());
        for w in &out.summary.warnings {
            println!("  note: {w}");
        }
        for p in &out.summary.points {
            println!(
                "  mu = {:.0e}: identification rate {:.2}, noiseless solve identified: {:?}",
                p.mu,
                p.identification_rate,
                p.noiseless_identified.unwrap()
            );
        }
    }
    Ok(())
}
