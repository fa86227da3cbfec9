//! Nuclear-norm regression: an 8×8 rank-2 matrix from 220 Gaussian
//! measurements. Identification means the estimate has rank exactly 2.

use partsmooth::certificate::{check_model_stability, Tolerances};
use partsmooth::linalg::SymmetricOperator;
use partsmooth::problems::{canonical_parameters, generate_instance, DesignSpec, SignalKind, SignalSpec};
use partsmooth::regularizer::Regularizer;
use partsmooth::solver::{forward_backward, SolveOptions};

fn main() -> partsmooth::Result<()> {
    let spec = Regularizer::nuclear(8)?;
    let design = DesignSpec::GaussianRows { covariance: SymmetricOperator::identity(64), n: 220 };
    let signal = SignalSpec::new(SignalKind::LowRank { rank: 2 });
    let inst = generate_instance(&design, &signal, 1e-3, 1)?;
    let theta0 = canonical_parameters(&inst, 0.0)?;

    let report = check_model_stability(&theta0.gamma, &inst.beta0, &spec, &Tolerances::default())?;
    let margin = report.certificate.verdict.margin;
    println!("certificate: {:?}, margin {margin:.4}, dim T = {}", report.certificate.verdict.status, report.certificate.subspace_dim);

    let mu = 2.0 * 1e-3 / margin.max(1e-3);
    let res = forward_backward(&theta0.with_mu(mu)?, &spec, &SolveOptions::default(), None)?;
    println!("mu = {mu:.3e}: {:?} after {} iterations", res.final_model, res.iterations);
    println!("relative error {:.3e}", (&res.beta - &inst.beta0).norm() / inst.beta0.norm());
    Ok(())
}
