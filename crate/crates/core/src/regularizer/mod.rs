//! Partly smooth regularizers with their model geometry at a point and
//! relative-interior tests on `∂J(β)`.
//!
//! Matrix-valued variables (nuclear norm) are vectorized column-major: entry
//! `(i, j)` of a `p0 × p0` matrix lives at index `i + j·p0`.

mod analysis;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{self, Subspace, DEFAULT_RANK_TOL};
use crate::simplex;

pub use analysis::{AnalysisProxOptions, ANALYSIS_PROX_MAX_ITER, ANALYSIS_PROX_TOL};

/// Magnitude below which entries, block norms, singular values or analysis
/// coefficients count as zero when extracting a model.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Which regularizer `J`, together with its structural parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    /// `Σ |β_i|`.
    L1,
    /// `Σ_b ‖β_b‖₂` over a partition of the coordinates (0-based indices).
    GroupL1L2 { groups: Vec<Vec<usize>> },
    /// Nuclear norm of a square `side × side` matrix.
    Nuclear { side: usize },
    /// `‖Dᵀβ‖₁` for a `p × q` analysis operator `D`.
    AnalysisL1 { operator: DMatrix<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    L1,
    GroupL1L2,
    Nuclear,
    AnalysisL1,
}

/// Discrete identity of the model manifold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelDescriptor {
    Support(Vec<usize>),
    GroupSupport(Vec<usize>),
    Rank(usize),
    Cosupport(Vec<usize>),
}

impl ModelDescriptor {
    pub fn kind(&self) -> RegularizerKind {
        match self {
            ModelDescriptor::Support(_) => RegularizerKind::L1,
            ModelDescriptor::GroupSupport(_) => RegularizerKind::GroupL1L2,
            ModelDescriptor::Rank(_) => RegularizerKind::Nuclear,
            ModelDescriptor::Cosupport(_) => RegularizerKind::AnalysisL1,
        }
    }

    /// Exact equality of the discrete data; descriptors of different kinds
    /// cannot be compared.
    pub fn same_model(&self, other: &ModelDescriptor) -> Result<bool> {
        if self.kind() != other.kind() {
            return Err(invalid(format!(
                "cannot compare {:?} descriptor with {:?} descriptor",
                self.kind(),
                other.kind()
            )));
        }
        Ok(self == other)
    }
}

pub fn same_model(d1: &ModelDescriptor, d2: &ModelDescriptor) -> Result<bool> {
    d1.same_model(d2)
}

/// Kind-specific data needed by [`Regularizer::ri_membership`].
#[derive(Debug, Clone, PartialEq)]
enum GeometryExtra {
    None,
    /// Leading singular vectors of the rank-`r` part.
    Nuclear { u: DMatrix<f64>, v: DMatrix<f64> },
    /// `D_S sign(Dᵀβ)_S` for the analysis support `S`.
    Analysis { anchor: DVector<f64> },
}

/// The model of a point: its descriptor plus the pair `(T, e)` with `e ∈ T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGeometry {
    pub descriptor: ModelDescriptor,
    pub tangent: Subspace,
    pub model_vector: DVector<f64>,
    extra: GeometryExtra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipStatus {
    Interior,
    Boundary,
    Outside,
}

/// Outcome of testing `η ∈ ri(∂J(β))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateVerdict {
    pub status: MembershipStatus,
    /// `1 −` (off-model dual norm of `η`); positive for interior points.
    pub margin: f64,
    /// `‖P_T η − e‖`.
    pub tangent_residual: f64,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    sign(x) * (x.abs() - t).max(0.0)
}

impl Regularizer {
    /// A group regularizer; `groups` must partition `0..p` exactly.
    pub fn group(groups: Vec<Vec<usize>>) -> Result<Self> {
        let p: usize = groups.iter().map(Vec::len).sum();
        let mut seen = vec![false; p];
        for g in &groups {
            if g.is_empty() {
                return Err(invalid("groups must be non-empty"));
            }
            for &i in g {
                if i >= p || seen[i] {
                    return Err(invalid(format!("groups do not partition 0..{p} (index {i})")));
                }
                seen[i] = true;
            }
        }
        Ok(Regularizer::GroupL1L2 { groups })
    }

    /// Contiguous groups of the given sizes.
    pub fn contiguous_groups(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let groups = sizes
            .iter()
            .map(|&s| {
                let g: Vec<usize> = (start..start + s).collect();
                start += s;
                g
            })
            .collect();
        Self::group(groups)
    }

    pub fn nuclear(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(invalid("matrix side must be positive"));
        }
        Ok(Regularizer::Nuclear { side })
    }

    pub fn analysis(operator: DMatrix<f64>) -> Result<Self> {
        if operator.ncols() == 0 || operator.nrows() == 0 {
            return Err(invalid("analysis operator needs at least one row and column"));
        }
        if operator.iter().any(|x| !x.is_finite()) {
            return Err(invalid("analysis operator has non-finite entries"));
        }
        Ok(Regularizer::AnalysisL1 { operator })
    }

    /// 1-D anisotropic total variation on `R^p`: `Dᵀβ = (β_{i+1} − β_i)_i`.
    pub fn total_variation_1d(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(invalid("total variation needs p >= 2"));
        }
        let mut d = DMatrix::<f64>::zeros(p, p - 1);
        for i in 0..p - 1 {
            d[(i, i)] = -1.0;
            d[(i + 1, i)] = 1.0;
        }
        Self::analysis(d)
    }

    pub fn kind(&self) -> RegularizerKind {
        match self {
            Regularizer::L1 => RegularizerKind::L1,
            Regularizer::GroupL1L2 { .. } => RegularizerKind::GroupL1L2,
            Regularizer::Nuclear { .. } => RegularizerKind::Nuclear,
            Regularizer::AnalysisL1 { .. } => RegularizerKind::AnalysisL1,
        }
    }

    /// Ambient dimension `p` when the regularizer fixes it.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Regularizer::L1 => None,
            Regularizer::GroupL1L2 { groups } => Some(groups.iter().map(Vec::len).sum()),
            Regularizer::Nuclear { side } => Some(side * side),
            Regularizer::AnalysisL1 { operator } => Some(operator.nrows()),
        }
    }

    fn check(&self, v: &DVector<f64>) -> Result<()> {
        if let Some(p) = self.dim() {
            check_dim(p, v.len())?;
        }
        Ok(())
    }

    fn as_matrix(side: usize, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(side, side, v.as_slice())
    }

    pub fn value(&self, beta: &DVector<f64>) -> Result<f64> {
        self.check(beta)?;
        Ok(match self {
            Regularizer::L1 => beta.iter().map(|x| x.abs()).sum(),
            Regularizer::GroupL1L2 { groups } => groups
                .iter()
                .map(|g| g.iter().map(|&i| beta[i] * beta[i]).sum::<f64>().sqrt())
                .sum(),
            Regularizer::Nuclear { side } => linalg::svd(&Self::as_matrix(*side, beta)).singular_values.sum(),
            Regularizer::AnalysisL1 { operator } => {
                operator.tr_mul(beta).iter().map(|x| x.abs()).sum()
            }
        })
    }

    /// `Prox_{γJ}(β) = argmin ½‖β − β'‖² + γ J(β')`.
    pub fn prox(&self, beta: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        self.prox_with(beta, gamma, &AnalysisProxOptions::default())
    }

    /// As [`Regularizer::prox`], with explicit inner-solver settings for the
    /// analysis regularizer (ignored by the closed-form kinds).
    pub fn prox_with(
        &self,
        beta: &DVector<f64>,
        gamma: f64,
        opts: &AnalysisProxOptions,
    ) -> Result<DVector<f64>> {
        self.check(beta)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("prox parameter must be finite and >= 0, got {gamma}")));
        }
        if gamma == 0.0 {
            return Ok(beta.clone());
        }
        Ok(match self {
            Regularizer::L1 => beta.map(|x| soft_threshold(x, gamma)),
            Regularizer::GroupL1L2 { groups } => {
                let mut out = beta.clone();
                for g in groups {
                    let norm = g.iter().map(|&i| beta[i] * beta[i]).sum::<f64>().sqrt();
                    let shrink = if norm > gamma { 1.0 - gamma / norm } else { 0.0 };
                    for &i in g {
                        out[i] = beta[i] * shrink;
                    }
                }
                out
            }
            Regularizer::Nuclear { side } => {
                let mut svd = linalg::svd(&Self::as_matrix(*side, beta));
                svd.singular_values.apply(|s| *s = (*s - gamma).max(0.0));
                DVector::from_column_slice(svd.recompose().as_slice())
            }
            Regularizer::AnalysisL1 { operator } => analysis::prox(operator, beta, gamma, opts)?,
        })
    }

    /// Model descriptor only, without building the tangent subspace.
    pub fn descriptor(&self, beta: &DVector<f64>, zero_tol: f64) -> Result<ModelDescriptor> {
        self.check(beta)?;
        Ok(match self {
            Regularizer::L1 => ModelDescriptor::Support(
                (0..beta.len()).filter(|&i| beta[i].abs() > zero_tol).collect(),
            ),
            Regularizer::GroupL1L2 { groups } => ModelDescriptor::GroupSupport(
                groups
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| g.iter().map(|&i| beta[i] * beta[i]).sum::<f64>().sqrt() > zero_tol)
                    .map(|(k, _)| k)
                    .collect(),
            ),
            Regularizer::Nuclear { side } => ModelDescriptor::Rank(
                linalg::svd(&Self::as_matrix(*side, beta))
                    .singular_values
                    .iter()
                    .filter(|&&s| s > zero_tol)
                    .count(),
            ),
            Regularizer::AnalysisL1 { operator } => {
                let z = operator.tr_mul(beta);
                ModelDescriptor::Cosupport((0..z.len()).filter(|&i| z[i].abs() <= zero_tol).collect())
            }
        })
    }

    /// Descriptor of `β` together with `T_β` and `e_β`.
    pub fn model(&self, beta: &DVector<f64>, zero_tol: f64) -> Result<ModelGeometry> {
        self.check(beta)?;
        let p = beta.len();
        match self {
            Regularizer::L1 => {
                let support: Vec<usize> = (0..p).filter(|&i| beta[i].abs() > zero_tol).collect();
                let mut e = DVector::zeros(p);
                for &i in &support {
                    e[i] = sign(beta[i]);
                }
                Ok(ModelGeometry {
                    tangent: Subspace::coordinate(p, &support),
                    descriptor: ModelDescriptor::Support(support),
                    model_vector: e,
                    extra: GeometryExtra::None,
                })
            }
            Regularizer::GroupL1L2 { groups } => {
                let mut active = Vec::new();
                let mut coords = Vec::new();
                let mut e = DVector::zeros(p);
                for (k, g) in groups.iter().enumerate() {
                    let norm = g.iter().map(|&i| beta[i] * beta[i]).sum::<f64>().sqrt();
                    if norm > zero_tol {
                        active.push(k);
                        for &i in g {
                            coords.push(i);
                            e[i] = beta[i] / norm;
                        }
                    }
                }
                coords.sort_unstable();
                Ok(ModelGeometry {
                    tangent: Subspace::coordinate(p, &coords),
                    descriptor: ModelDescriptor::GroupSupport(active),
                    model_vector: e,
                    extra: GeometryExtra::None,
                })
            }
            Regularizer::Nuclear { side } => {
                let side = *side;
                let svd = linalg::svd(&Self::as_matrix(side, beta));
                let u = &svd.u;
                let v = svd.v_t.transpose();
                let rank = svd.singular_values.iter().filter(|&&s| s > zero_tol).count();
                // {U Aᵀ + B Vᵀ} is spanned by the orthonormal family u_i v_jᵀ with i < r or j < r.
                let dim = side * side - (side - rank) * (side - rank);
                let mut basis = DMatrix::<f64>::zeros(p, dim);
                let mut col = 0;
                for j in 0..side {
                    for i in 0..side {
                        if i < rank || j < rank {
                            let outer = u.column(i) * v.column(j).transpose();
                            basis.column_mut(col).copy_from_slice(outer.as_slice());
                            col += 1;
                        }
                    }
                }
                let ur = u.columns(0, rank).into_owned();
                let vr = v.columns(0, rank).into_owned();
                let e = &ur * vr.transpose();
                Ok(ModelGeometry {
                    descriptor: ModelDescriptor::Rank(rank),
                    tangent: Subspace::from_orthonormal(basis)?,
                    model_vector: DVector::from_column_slice(e.as_slice()),
                    extra: GeometryExtra::Nuclear { u: ur, v: vr },
                })
            }
            Regularizer::AnalysisL1 { operator } => {
                let z = operator.tr_mul(beta);
                let mut cosupport = Vec::new();
                let mut anchor = DVector::zeros(p);
                for i in 0..z.len() {
                    if z[i].abs() <= zero_tol {
                        cosupport.push(i);
                    } else {
                        anchor += operator.column(i) * sign(z[i]);
                    }
                }
                let d_i = operator.select_columns(cosupport.iter());
                let tangent = Subspace::left_null_space(&d_i, DEFAULT_RANK_TOL);
                let e = linalg::project(&anchor, &tangent)?;
                Ok(ModelGeometry {
                    descriptor: ModelDescriptor::Cosupport(cosupport),
                    tangent,
                    model_vector: e,
                    extra: GeometryExtra::Analysis { anchor },
                })
            }
        }
    }

    /// Tests `η ∈ ri(∂J(β))` at the geometry of `β`, reporting the margin to
    /// the relative boundary.
    pub fn ri_membership(
        &self,
        geom: &ModelGeometry,
        eta: &DVector<f64>,
        tol: f64,
    ) -> Result<CertificateVerdict> {
        self.check(eta)?;
        check_dim(geom.tangent.ambient_dim(), eta.len())?;
        let pt_eta = linalg::project(eta, &geom.tangent)?;
        let tangent_residual = (&pt_eta - &geom.model_vector).norm();
        let margin = match (self, &geom.descriptor, &geom.extra) {
            (Regularizer::L1, ModelDescriptor::Support(support), _) => {
                let mut on = vec![false; eta.len()];
                support.iter().for_each(|&i| on[i] = true);
                let off = (0..eta.len()).filter(|&i| !on[i]).map(|i| eta[i].abs()).fold(0.0, f64::max);
                1.0 - off
            }
            (Regularizer::GroupL1L2 { groups }, ModelDescriptor::GroupSupport(active), _) => {
                let mut on = vec![false; groups.len()];
                active.iter().for_each(|&k| on[k] = true);
                let off = groups
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| !on[*k])
                    .map(|(_, g)| g.iter().map(|&i| eta[i] * eta[i]).sum::<f64>().sqrt())
                    .fold(0.0, f64::max);
                1.0 - off
            }
            (Regularizer::Nuclear { side }, ModelDescriptor::Rank(_), GeometryExtra::Nuclear { u, v }) => {
                let h = Self::as_matrix(*side, eta);
                let id = DMatrix::<f64>::identity(*side, *side);
                let pu = &id - u * u.transpose();
                let pv = &id - v * v.transpose();
                1.0 - linalg::operator_norm(&(pu * h * pv))
            }
            (
                Regularizer::AnalysisL1 { operator },
                ModelDescriptor::Cosupport(cosupport),
                GeometryExtra::Analysis { anchor },
            ) => {
                if cosupport.is_empty() {
                    1.0
                } else {
                    // Only the T⊥ = Im(D_I) component of η − anchor can be absorbed by D_I u_I.
                    let r = eta - anchor;
                    let r_perp = &r - linalg::project(&r, &geom.tangent)?;
                    let d_i = operator.select_columns(cosupport.iter());
                    let range = Subspace::span(&d_i, DEFAULT_RANK_TOL);
                    let a = range.basis().tr_mul(&d_i);
                    let b = range.basis().tr_mul(&r_perp);
                    match simplex::min_linf_solution(&a, &b)? {
                        Some((c, _)) => 1.0 - c,
                        None => {
                            return Ok(CertificateVerdict {
                                status: MembershipStatus::Outside,
                                margin: f64::NEG_INFINITY,
                                tangent_residual,
                            })
                        }
                    }
                }
            }
            _ => return Err(Error::InvalidInput("geometry does not match regularizer kind".into())),
        };
        let status = if tangent_residual > tol || margin < -tol {
            MembershipStatus::Outside
        } else if margin > tol {
            MembershipStatus::Interior
        } else {
            MembershipStatus::Boundary
        };
        Ok(CertificateVerdict { status, margin, tangent_residual })
    }
}

#[cfg(test)]
mod tests;
