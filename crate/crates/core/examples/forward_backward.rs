//! Forward-Backward on a random lasso instance: the iterates settle on the
//! support of the solution after finitely many steps.

use partsmooth::certificate::{dual_certificate_at_solution, Tolerances};
use partsmooth::linalg::SymmetricOperator;
use partsmooth::problems::{canonical_parameters, generate_instance, DesignSpec, SignalKind, SignalSpec};
use partsmooth::regularizer::Regularizer;
use partsmooth::solver::{forward_backward, SolveOptions};

fn main() -> partsmooth::Result<()> {
    let design = DesignSpec::GaussianRows { covariance: SymmetricOperator::identity(30), n: 120 };
    let signal = SignalSpec::new(SignalKind::Sparse { support_size: 4 });
    let inst = generate_instance(&design, &signal, 0.05, 7)?;
    let theta = canonical_parameters(&inst, 0.1 * inst.n() as f64)?;

    let opts = SolveOptions { trace_models: true, ..SolveOptions::default() };
    let res = forward_backward(&theta, &Regularizer::L1, &opts, None)?;
    println!("converged = {} after {} iterations (step {:.3})", res.converged, res.iterations, res.step);
    println!("objective = {:.8}, largest increase = {:.1e}", res.objective, res.max_objective_increase);
    println!("final model: {:?}", res.final_model);
    println!("identified from iteration {:?}", res.identification_iter);

    let trace = res.model_trace.as_ref().expect("tracing was on");
    for (k, d) in trace.iter().enumerate().take(8) {
        println!("  β_{k}: {d:?}");
    }

    let cert = dual_certificate_at_solution(&theta, &res.beta, &Regularizer::L1, &Tolerances::default())?;
    println!("dual certificate margin {:+.4}, unique minimizer: {}", cert.verdict.margin, cert.unique);
    Ok(())
}
