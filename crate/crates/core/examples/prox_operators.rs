//! Proximal operators of the four regularizers, each checked against its
//! own subdifferential: `(β − prox)/γ` must lie in `∂J(prox)`.

use nalgebra::{DMatrix, DVector};
use partsmooth::regularizer::{Regularizer, DEFAULT_ZERO_TOL};

fn main() -> partsmooth::Result<()> {
    let specs = [
        ("l1", Regularizer::L1, DVector::from_vec(vec![2.0, -0.5, 0.3, -3.0])),
        ("group", Regularizer::contiguous_groups(&[2, 2])?, DVector::from_vec(vec![3.0, 4.0, 0.3, -0.2])),
        ("nuclear", Regularizer::nuclear(2)?, DVector::from_vec(vec![3.0, 1.0, 0.5, 2.0])),
        ("tv1d", Regularizer::total_variation_1d(4)?, DVector::from_vec(vec![1.0, 1.2, 3.0, 2.9])),
        (
            "analysis",
            Regularizer::analysis(DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 1.0, 0.0, -1.0, 0.5, 0.5]))?,
            DVector::from_vec(vec![0.4, -1.0, 2.0, 0.1]),
        ),
    ];
    let gamma = 0.5;
    for (name, spec, beta) in specs {
        let out = spec.prox(&beta, gamma)?;
        let geom = spec.model(&out, DEFAULT_ZERO_TOL)?;
        let verdict = spec.ri_membership(&geom, &((&beta - &out) / gamma), 1e-6)?;
        println!(
            "{name:>8}: J(β) = {:.4}  J(prox) = {:.4}  optimality = {:?} (residual {:.1e})",
            spec.value(&beta)?,
            spec.value(&out)?,
            verdict.status,
            verdict.tangent_residual
        );
        println!("          prox = {:?}", out.as_slice());
    }
    Ok(())
}
