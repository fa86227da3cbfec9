//! Linearized pre-certificate `η_Γ = Γ Γ_T⁺ e`, the irrepresentable condition
//! and post-solve uniqueness checks.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{self, Injectivity, SymmetricOperator, DEFAULT_INJECTIVITY_TOL, DEFAULT_RANK_TOL};
use crate::regularizer::{
    CertificateVerdict, MembershipStatus, ModelGeometry, Regularizer, DEFAULT_ZERO_TOL,
};
use crate::solver::CanonicalParameters;

/// Default half-width of the boundary band around a zero margin.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub zero_tol: f64,
    pub margin_tol: f64,
    pub injectivity_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_tol: DEFAULT_ZERO_TOL,
            margin_tol: DEFAULT_MARGIN_TOL,
            injectivity_tol: DEFAULT_INJECTIVITY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub eta: DVector<f64>,
    pub verdict: CertificateVerdict,
    pub injectivity: Injectivity,
    pub subspace_dim: usize,
    pub geometry: ModelGeometry,
}

/// JSON-facing certificate summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub eta: Vec<f64>,
    pub margin: f64,
    pub status: MembershipStatus,
    pub tangent_residual: f64,
    /// `null` in JSON for the trivial subspace.
    pub smallest_singular: Option<f64>,
    pub subspace_dim: usize,
}

impl Certificate {
    pub fn record(&self) -> CertificateRecord {
        CertificateRecord {
            eta: self.eta.iter().copied().collect(),
            margin: self.verdict.margin,
            status: self.verdict.status,
            tangent_residual: self.verdict.tangent_residual,
            smallest_singular: self
                .injectivity
                .smallest_singular
                .is_finite()
                .then_some(self.injectivity.smallest_singular),
            subspace_dim: self.subspace_dim,
        }
    }
}

/// `(Γ_T)⁺ x` for `x ∈ T`, computed in basis coordinates of `T`.
fn restricted_solve(gamma: &SymmetricOperator, geom: &ModelGeometry, x: &DVector<f64>) -> DVector<f64> {
    let b = geom.tangent.basis();
    let a = b.tr_mul(&(gamma.matrix() * b));
    let coeffs = linalg::pseudoinverse(&a, DEFAULT_RANK_TOL) * b.tr_mul(x);
    b * coeffs
}

/// Computes `η_Γ = Γ (Γ_T)⁺ e` at the model of `β0` and classifies it
/// against `ri(∂J(β0))`. Fails with [`Error::NotInjective`] when
/// `ker(Γ) ∩ T ≠ {0}`.
pub fn linearized_precertificate(
    gamma: &SymmetricOperator,
    beta0: &DVector<f64>,
    spec: &Regularizer,
    tols: &Tolerances,
) -> Result<Certificate> {
    check_dim(gamma.dim(), beta0.len())?;
    let geometry = spec.model(beta0, tols.zero_tol)?;
    let injectivity = linalg::restricted_injectivity(gamma, &geometry.tangent, tols.injectivity_tol)?;
    if !injectivity.holds {
        return Err(Error::NotInjective { smallest_singular: injectivity.smallest_singular });
    }
    let eta = gamma.matrix() * restricted_solve(gamma, &geometry, &geometry.model_vector);
    let verdict = spec.ri_membership(&geometry, &eta, tols.margin_tol)?;
    Ok(Certificate { eta, verdict, injectivity, subspace_dim: geometry.tangent.dim(), geometry })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Injectivity holds and the certificate is strictly interior.
    pub stable: bool,
    /// The certificate sits in the boundary band; neither stability nor
    /// instability can be concluded.
    pub inconclusive: bool,
    pub certificate: Certificate,
}

/// The irrepresentable condition: `ker(Γ) ∩ T = {0}` and `η_Γ ∈ ri(∂J(β0))`.
pub fn check_model_stability(
    gamma: &SymmetricOperator,
    beta0: &DVector<f64>,
    spec: &Regularizer,
    tols: &Tolerances,
) -> Result<StabilityReport> {
    let certificate = linearized_precertificate(gamma, beta0, spec, tols)?;
    let status = certificate.verdict.status;
    Ok(StabilityReport {
        stable: status == MembershipStatus::Interior,
        inconclusive: status == MembershipStatus::Boundary,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCertificate {
    /// `η_θ = (u − Γβ)/μ`.
    pub eta: DVector<f64>,
    pub verdict: CertificateVerdict,
    pub injectivity: Injectivity,
    /// Interior dual certificate together with restricted injectivity at `T_β`:
    /// `β` is the unique minimizer.
    pub unique: bool,
}

/// Dual certificate of a candidate solution `β` of `(P_θ)`.
pub fn dual_certificate_at_solution(
    theta: &CanonicalParameters,
    beta: &DVector<f64>,
    spec: &Regularizer,
    tols: &Tolerances,
) -> Result<SolutionCertificate> {
    if !(theta.mu > 0.0) {
        return Err(invalid("dual certificate requires mu > 0"));
    }
    check_dim(theta.dim(), beta.len())?;
    let eta = (&theta.u - theta.gamma.matrix() * beta) / theta.mu;
    let geom = spec.model(beta, tols.zero_tol)?;
    let verdict = spec.ri_membership(&geom, &eta, tols.margin_tol)?;
    let injectivity = linalg::restricted_injectivity(&theta.gamma, &geom.tangent, tols.injectivity_tol)?;
    let unique = injectivity.holds && verdict.status == MembershipStatus::Interior;
    Ok(SolutionCertificate { eta, verdict, injectivity, unique })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn sym(n: usize, rows: &[f64]) -> SymmetricOperator {
        SymmetricOperator::new(DMatrix::from_row_slice(n, n, rows)).unwrap()
    }

    fn three_variable() -> SymmetricOperator {
        sym(3, &[1.0, 0.0, 0.6, 0.0, 1.0, 0.6, 0.6, 0.6, 1.0])
    }

    #[test]
    fn identity_design() {
        let c = linearized_precertificate(
            &SymmetricOperator::identity(3),
            &v(&[1.0, -2.0, 0.0]),
            &Regularizer::L1,
            &Tolerances::default(),
        )
        .unwrap();
        assert!((&c.eta - v(&[1.0, -1.0, 0.0])).amax() < 1e-12);
        assert_eq!(c.verdict.status, MembershipStatus::Interior);
        assert!((c.verdict.margin - 1.0).abs() < 1e-12);
        assert_eq!(c.subspace_dim, 2);
    }

    #[test]
    fn correlated_pair() {
        let g = sym(2, &[1.0, 0.5, 0.5, 1.0]);
        let c = linearized_precertificate(&g, &v(&[1.0, 0.0]), &Regularizer::L1, &Tolerances::default())
            .unwrap();
        assert!((&c.eta - v(&[1.0, 0.5])).amax() < 1e-12);
        assert!((c.verdict.margin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn three_variable_construction_is_outside() {
        let g = three_variable();
        assert!(g.is_psd(0.0));
        let c = linearized_precertificate(&g, &v(&[1.0, 1.0, 0.0]), &Regularizer::L1, &Tolerances::default())
            .unwrap();
        assert!((&c.eta - v(&[1.0, 1.0, 1.2])).amax() < 1e-12);
        assert_eq!(c.verdict.status, MembershipStatus::Outside);
        assert!((c.verdict.margin + 0.2).abs() < 1e-12);

        let r = check_model_stability(&g, &v(&[1.0, 0.0, 0.0]), &Regularizer::L1, &Tolerances::default())
            .unwrap();
        assert!(r.stable);
        assert!((r.certificate.verdict.margin - 0.4).abs() < 1e-12);
    }

    #[test]
    fn stability_verdicts() {
        let t = Tolerances::default();
        let r = check_model_stability(&SymmetricOperator::identity(3), &v(&[1.0, -2.0, 0.0]), &Regularizer::L1, &t)
            .unwrap();
        assert!(r.stable && !r.inconclusive);

        let r = check_model_stability(&three_variable(), &v(&[1.0, 1.0, 0.0]), &Regularizer::L1, &t).unwrap();
        assert!(!r.stable && !r.inconclusive);

        // ρ = 1 makes η₂ = 1 exactly: boundary
        let g = sym(2, &[1.0, 1.0, 1.0, 1.0]);
        let r = check_model_stability(&g, &v(&[1.0, 0.0]), &Regularizer::L1, &t).unwrap();
        assert!(!r.stable && r.inconclusive);

        let g = SymmetricOperator::from_diagonal(&[1.0, 0.0]);
        match check_model_stability(&g, &v(&[0.0, 1.0]), &Regularizer::L1, &t) {
            Err(Error::NotInjective { smallest_singular }) => assert!(smallest_singular < 1e-12),
            other => panic!("expected injectivity failure, got {other:?}"),
        }
    }

    #[test]
    fn eta_properties_on_nuclear() {
        let x = DMatrix::from_fn(30, 9, |i, j| (((i * 13 + j * 5) % 17) as f64 - 8.0) / 6.0);
        let g = SymmetricOperator::gram(&x);
        let spec = Regularizer::nuclear(3).unwrap();
        let beta0 = v(&[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let t = Tolerances::default();
        let c = linearized_precertificate(&g, &beta0, &spec, &t).unwrap();
        // P_T η = e
        let pt = linalg::project(&c.eta, &c.geometry.tangent).unwrap();
        assert!((pt - &c.geometry.model_vector).amax() < 1e-8);
        // η ∈ Im(Γ)
        let gp = linalg::pseudoinverse(g.matrix(), DEFAULT_RANK_TOL);
        assert!((g.matrix() * gp * &c.eta - &c.eta).amax() < 1e-8);
        // scaling invariance
        let c2 = linearized_precertificate(&g.scaled(7.5), &beta0, &spec, &t).unwrap();
        assert!((&c2.eta - &c.eta).amax() < 1e-10);
    }

    #[test]
    fn dual_certificate_examples() {
        let theta = CanonicalParameters::new(0.1, v(&[1.0, 0.0]), SymmetricOperator::identity(2)).unwrap();
        let t = Tolerances::default();
        let s = dual_certificate_at_solution(&theta, &v(&[0.9, 0.0]), &Regularizer::L1, &t).unwrap();
        assert!((&s.eta - v(&[1.0, 0.0])).amax() < 1e-12);
        assert_eq!(s.verdict.status, MembershipStatus::Interior);
        assert!(s.unique);

        let s = dual_certificate_at_solution(&theta, &v(&[1.0, 0.0]), &Regularizer::L1, &t).unwrap();
        assert_eq!(s.verdict.status, MembershipStatus::Outside);
        assert!((s.verdict.tangent_residual - 1.0).abs() < 1e-12);
        assert!(!s.unique);

        let t0 = theta.with_mu(0.0).unwrap();
        assert!(dual_certificate_at_solution(&t0, &v(&[0.9, 0.0]), &Regularizer::L1, &t).is_err());
    }
}
