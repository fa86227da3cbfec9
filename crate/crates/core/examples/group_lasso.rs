//! Group lasso: the certificate and the solver work block by block.

use partsmooth::certificate::{check_model_stability, Tolerances};
use partsmooth::linalg::SymmetricOperator;
use partsmooth::problems::{canonical_parameters, generate_instance, DesignSpec, SignalKind, SignalSpec};
use partsmooth::regularizer::Regularizer;
use partsmooth::solver::{forward_backward, SolveOptions};

fn main() -> partsmooth::Result<()> {
    let spec = Regularizer::contiguous_groups(&[3; 8])?;
    let Regularizer::GroupL1L2 { groups } = &spec else { unreachable!() };
    let design = DesignSpec::GaussianRows { covariance: SymmetricOperator::identity(24), n: 150 };
    let signal = SignalSpec::new(SignalKind::GroupSparse { groups: groups.clone(), active_groups: 2 });
    let inst = generate_instance(&design, &signal, 1e-2, 4)?;
    let theta = canonical_parameters(&inst, 0.0)?;

    let report = check_model_stability(&theta.gamma, &inst.beta0, &spec, &Tolerances::default())?;
    println!("certificate margin {:.4} ({:?})", report.certificate.verdict.margin, report.certificate.verdict.status);
    let mu = 0.05;
    let res = forward_backward(&theta.with_mu(mu)?, &spec, &SolveOptions::default(), None)?;
    println!("true model:      {:?}", spec.descriptor(&inst.beta0, 1e-8)?);
    println!("estimated model: {:?}", res.final_model);
    Ok(())
}
