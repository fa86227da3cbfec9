//! 1-D total variation as an analysis regularizer: a noisy piecewise
//! constant signal is denoised and its jump set recovered.

use nalgebra::DVector;
use partsmooth::certificate::{check_model_stability, Tolerances};
use partsmooth::linalg::SymmetricOperator;
use partsmooth::regularizer::{Regularizer, DEFAULT_ZERO_TOL};
use partsmooth::solver::{forward_backward, CanonicalParameters, SolveOptions};

fn main() -> partsmooth::Result<()> {
    let beta0 = DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 2.0, 2.0, 2.0, 2.0]);
    let p = beta0.len();
    let spec = Regularizer::total_variation_1d(p)?;
    let gamma = SymmetricOperator::identity(p);

    let report = check_model_stability(&gamma, &beta0, &spec, &Tolerances::default())?;
    println!("jumps of β0: {:?}", spec.descriptor(&beta0, DEFAULT_ZERO_TOL)?);
    println!("certificate: {:?}, margin {:.4}", report.certificate.verdict.status, report.certificate.verdict.margin);

    let wiggle = DVector::from_fn(p, |i, _| 0.01 * ((i * 7 % 5) as f64 - 2.0));
    let theta = CanonicalParameters::new(0.05, &beta0 + wiggle, gamma)?;
    let res = forward_backward(&theta, &spec, &SolveOptions::default(), None)?;
    println!("denoised: {:.3?}", res.beta.as_slice());
    println!("jumps of the estimate: {:?}", res.final_model);
    Ok(())
}
