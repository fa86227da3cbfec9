//! The linearized pre-certificate `η = Γ Γ_T⁺ e` for the lasso on three
//! hand-checkable designs.

use nalgebra::{DMatrix, DVector};
use partsmooth::certificate::{check_model_stability, Tolerances};
use partsmooth::linalg::SymmetricOperator;
use partsmooth::regularizer::Regularizer;

fn main() -> partsmooth::Result<()> {
    let cases = [
        ("identity design", DMatrix::identity(3, 3), vec![1.0, -2.0, 0.0]),
        ("correlated pair", DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]), vec![1.0, 0.0]),
        (
            "three variables",
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.6, 0.0, 1.0, 0.6, 0.6, 0.6, 1.0]),
            vec![1.0, 1.0, 0.0],
        ),
        (
            "three variables, single support",
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.6, 0.0, 1.0, 0.6, 0.6, 0.6, 1.0]),
            vec![1.0, 0.0, 0.0],
        ),
    ];
    for (name, gamma, beta0) in cases {
        let gamma = SymmetricOperator::new(gamma)?;
        let report =
            check_model_stability(&gamma, &DVector::from_vec(beta0), &Regularizer::L1, &Tolerances::default())?;
        let c = &report.certificate;
        println!(
            "{name:<32} η = {:?}  margin = {:+.3}  {:?}  stable = {}",
            c.eta.as_slice(),
            c.verdict.margin,
            c.verdict.status,
            report.stable
        );
    }
    Ok(())
}
