//! Sample-size sweep with `μ_n = n^(−1/4)`: the probability of recovering the
//! support grows with `n`.

use partsmooth::certificate::Tolerances;
use partsmooth::experiments::{consistency_sweep, ExperimentConfig, ExperimentKind, MuRule, Sweep};
use partsmooth::linalg::SymmetricOperator;
use partsmooth::problems::{DesignSpec, SignalKind, SignalSpec};
use partsmooth::regularizer::Regularizer;
use partsmooth::solver::SolveOptions;

fn main() -> partsmooth::Result<()> {
    let config = ExperimentConfig {
        kind: ExperimentKind::Consistency,
        regularizer: Regularizer::L1,
        design: DesignSpec::GaussianRows { covariance: SymmetricOperator::identity(20), n: 100 },
        signal: SignalSpec::new(SignalKind::Sparse { support_size: 3 }),
        sweep: Sweep::SampleSizes(vec![25, 100, 400, 1600]),
        noise_sigma: 1.0,
        mu_rule: MuRule::DEFAULT_POWER,
        trials: 50,
        base_seed: 1,
        solver: SolveOptions::default(),
        tolerances: Tolerances::default(),
        screen: None,
        threads: None,
    };
    let out = consistency_sweep(&config)?;
    for p in &out.summary.points {
        println!("n = {:>5}  mu = {:.4}  identification rate = {:.2}", p.n, p.mu, p.identification_rate);
    }
    print!("{}", out.plot_csv());
    Ok(())
}
