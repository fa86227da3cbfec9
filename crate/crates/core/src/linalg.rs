//! Dense linear-algebra primitives on top of nalgebra, with subspaces stored
//! by orthonormal basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};

/// Relative singular-value cutoff used by [`pseudoinverse`] and rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Absolute threshold on the smallest singular value of `Γ·basis(T)`.
pub const DEFAULT_INJECTIVITY_TOL: f64 = 1e-8;

const ORTHONORMAL_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-10;
const SVD_CHECK_TOL: f64 = 1e-11;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Thin SVD `A = U diag(s) Vᵀ` keeping `min(m, n)` singular triplets in
/// decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

impl Svd {
    pub fn recompose(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&self.singular_values) * &self.v_t
    }

    fn transposed(self) -> Self {
        Svd { u: self.v_t.transpose(), singular_values: self.singular_values, v_t: self.u.transpose() }
    }

    fn is_valid_for(&self, a: &DMatrix<f64>) -> bool {
        let k = self.singular_values.len();
        let scale = a.amax().max(1.0);
        let sorted = self.singular_values.as_slice().windows(2).all(|w| w[0] >= w[1]);
        let orth_u = (self.u.tr_mul(&self.u) - DMatrix::<f64>::identity(k, k)).amax();
        let orth_v = (&self.v_t * self.v_t.transpose() - DMatrix::<f64>::identity(k, k)).amax();
        sorted
            && orth_u <= SVD_CHECK_TOL
            && orth_v <= SVD_CHECK_TOL
            && (self.recompose() - a).amax() <= SVD_CHECK_TOL * scale
    }
}

fn nalgebra_svd(a: &DMatrix<f64>) -> Option<Svd> {
    let svd = SVD::new(a.clone(), true, true);
    let out = Svd { u: svd.u?, singular_values: svd.singular_values, v_t: svd.v_t? };
    out.is_valid_for(a).then_some(out)
}

/// One-sided Jacobi SVD for `m ≥ n`.
fn jacobi_svd_tall(a: &DMatrix<f64>) -> Svd {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dot(&w.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, i)], mat[(r, j)]);
                        mat[(r, i)] = c * x - s * y;
                        mat[(r, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let smax = norms.iter().copied().fold(0.0, f64::max);

    let mut u = DMatrix::<f64>::zeros(m, n);
    let mut filled = Vec::new();
    for (col, &k) in order.iter().enumerate() {
        if norms[k] > f64::EPSILON * smax && norms[k] > 0.0 {
            u.set_column(col, &(w.column(k) / norms[k]));
            filled.push(col);
        }
    }
    // complete U with standard basis directions orthogonal to what is there
    let mut basis: Vec<DVector<f64>> = filled.iter().map(|&c| u.column(c).into_owned()).collect();
    for col in 0..n {
        if filled.contains(&col) {
            continue;
        }
        let best = (0..m)
            .map(|e| {
                let mut x = DVector::<f64>::zeros(m);
                x[e] = 1.0;
                for _ in 0..2 {
                    for b in &basis {
                        x -= b * b.dot(&x);
                    }
                }
                x
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("m >= n > 0");
        let best = best.normalize();
        u.set_column(col, &best);
        basis.push(best);
    }
    Svd {
        u,
        singular_values: DVector::from_iterator(n, order.iter().map(|&k| norms[k])),
        v_t: v.select_columns(order.iter()).transpose(),
    }
}

/// SVD that verifies nalgebra's factorization and falls back to one-sided
/// Jacobi when it is inaccurate, which happens on some rank-deficient inputs.
pub fn svd(a: &DMatrix<f64>) -> Svd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        let k = m.min(n);
        return Svd { u: DMatrix::zeros(m, k), singular_values: DVector::zeros(k), v_t: DMatrix::zeros(k, n) };
    }
    let at = a.transpose();
    if let Some(s) = nalgebra_svd(a) {
        return s;
    }
    if let Some(s) = nalgebra_svd(&at) {
        return s.transposed();
    }
    if m >= n {
        jacobi_svd_tall(a)
    } else {
        jacobi_svd_tall(&at).transposed()
    }
}

/// A linear subspace of `R^p`, stored as a `p × d` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal (checked to `1e-10`).
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        let d = basis.ncols();
        let gram = basis.transpose() * &basis;
        let err = (gram - DMatrix::<f64>::identity(d, d)).amax();
        if err > ORTHONORMAL_TOL {
            return Err(invalid(format!("basis is not orthonormal (error {err:.3e})")));
        }
        Ok(Self { basis })
    }

    /// The span of the columns of `vectors`, orthonormalized through an SVD.
    pub fn span(vectors: &DMatrix<f64>, rank_tol: f64) -> Self {
        let p = vectors.nrows();
        if vectors.ncols() == 0 || p == 0 {
            return Self::trivial(p);
        }
        let svd = svd(vectors);
        let u = svd.u;
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| smax > 0.0 && svd.singular_values[i] > rank_tol * smax)
            .collect();
        Self { basis: u.select_columns(keep.iter()) }
    }

    /// `{v : Aᵀ v = 0}` for a `p × m` matrix `A`.
    pub fn left_null_space(a: &DMatrix<f64>, rank_tol: f64) -> Self {
        let p = a.nrows();
        if a.ncols() == 0 {
            return Self::full(p);
        }
        // Pad to at least p columns so the SVD returns a complete U.
        let cols = a.ncols().max(p);
        let mut padded = DMatrix::<f64>::zeros(p, cols);
        padded.view_mut((0, 0), (p, a.ncols())).copy_from(a);
        let svd = svd(&padded);
        let u = svd.u;
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..p)
            .filter(|&i| smax == 0.0 || svd.singular_values[i] <= rank_tol * smax)
            .collect();
        Self { basis: u.select_columns(keep.iter()) }
    }

    /// The coordinate subspace `span{e_i : i ∈ indices}`.
    pub fn coordinate(p: usize, indices: &[usize]) -> Self {
        let mut basis = DMatrix::<f64>::zeros(p, indices.len());
        for (col, &i) in indices.iter().enumerate() {
            basis[(i, col)] = 1.0;
        }
        Self { basis }
    }

    pub fn trivial(p: usize) -> Self {
        Self { basis: DMatrix::zeros(p, 0) }
    }

    pub fn full(p: usize) -> Self {
        Self { basis: DMatrix::identity(p, p) }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// The orthogonal projector `P_T = B Bᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn complement(&self) -> Self {
        Self::left_null_space(&self.basis, DEFAULT_RANK_TOL)
    }
}

/// A real symmetric `p × p` matrix, typically a covariance `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    entries: DMatrix<f64>,
}

impl SymmetricOperator {
    /// Accepts a square matrix whose asymmetry is at most `1e-10` and stores
    /// its symmetric part.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(invalid(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(invalid("operator has non-finite entries"));
        }
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(invalid(format!("operator is not symmetric (error {asym:.3e})")));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(Self { entries: sym })
    }

    /// `XᵀX / n` for an `n × p` design.
    pub fn gram(x: &DMatrix<f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let g = x.tr_mul(x) / n;
        let sym = (&g + g.transpose()) * 0.5;
        Self { entries: sym }
    }

    pub fn identity(p: usize) -> Self {
        Self { entries: DMatrix::identity(p, p) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self { entries: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { entries: &self.entries * c }
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        if self.dim() == 0 {
            return DVector::zeros(0);
        }
        SymmetricEigen::new(self.entries.clone()).eigenvalues
    }

    /// Checks positive semidefiniteness: every eigenvalue `≥ -tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.eigenvalues().iter().all(|&l| l >= -tol)
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), v.len())?;
        Ok(&self.entries * v)
    }
}

/// `P_T v = B (Bᵀ v)`.
pub fn project(v: &DVector<f64>, t: &Subspace) -> Result<DVector<f64>> {
    check_dim(t.ambient_dim(), v.len())?;
    let coeffs = t.basis.tr_mul(v);
    Ok(&t.basis * coeffs)
}

/// `Γ_T = P_T Γ P_T` as a full `p × p` matrix.
pub fn restricted_operator(gamma: &SymmetricOperator, t: &Subspace) -> Result<SymmetricOperator> {
    check_dim(gamma.dim(), t.ambient_dim())?;
    let b = &t.basis;
    let inner = b.tr_mul(&(gamma.matrix() * b));
    let full = b * inner * b.transpose();
    let sym = (&full + full.transpose()) * 0.5;
    Ok(SymmetricOperator { entries: sym })
}

/// Moore–Penrose pseudoinverse through the SVD; singular values at or below
/// `rank_tol · σ_max` are treated as zero.
pub fn pseudoinverse(a: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(n, m);
    }
    let Svd { u, singular_values, v_t } = svd(a);
    let smax = singular_values.max();
    let mut out = DMatrix::<f64>::zeros(n, m);
    if smax == 0.0 {
        return out;
    }
    for (i, &s) in singular_values.iter().enumerate() {
        if s > rank_tol * smax {
            out += (v_t.row(i).transpose() / s) * u.column(i).transpose();
        }
    }
    out
}

/// Outcome of the restricted injectivity test `ker(Γ) ∩ T = {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Injectivity {
    pub holds: bool,
    /// Smallest singular value of `Γ·basis(T)`; `+∞` for the trivial subspace.
    pub smallest_singular: f64,
}

pub fn restricted_injectivity(
    gamma: &SymmetricOperator,
    t: &Subspace,
    tol: f64,
) -> Result<Injectivity> {
    check_dim(gamma.dim(), t.ambient_dim())?;
    if t.dim() == 0 {
        return Ok(Injectivity { holds: true, smallest_singular: f64::INFINITY });
    }
    let gb = gamma.matrix() * &t.basis;
    let smin = svd(&gb).singular_values.min();
    Ok(Injectivity { holds: smin > tol, smallest_singular: smin })
}

/// `‖Γ‖`: the largest absolute eigenvalue of a symmetric operator.
pub fn spectral_norm(gamma: &SymmetricOperator) -> f64 {
    gamma.eigenvalues().amax()
}

/// Largest singular value of an arbitrary matrix.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    svd(a).singular_values.max()
}

/// `‖P_{T1} − P_{T2}‖` in operator norm.
pub fn subspace_distance(t1: &Subspace, t2: &Subspace) -> Result<f64> {
    check_dim(t1.ambient_dim(), t2.ambient_dim())?;
    if t1.ambient_dim() == 0 {
        return Ok(0.0);
    }
    let diff = t1.projector() - t2.projector();
    Ok(SymmetricEigen::new(diff).eigenvalues.amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn line(x: f64, y: f64) -> Subspace {
        Subspace::span(&DMatrix::from_column_slice(2, 1, &[x, y]), DEFAULT_RANK_TOL)
    }

    #[test]
    fn project_examples() {
        let v = DVector::from_vec(vec![3.0, 4.0]);
        let e1 = Subspace::coordinate(2, &[0]);
        assert_eq!(project(&v, &e1).unwrap(), DVector::from_vec(vec![3.0, 0.0]));
        assert_eq!(project(&v, &Subspace::full(2)).unwrap(), v);

        // hand oracle: b bᵀ v with b = (1,1)/√2 gives (0.5, 0.5)
        let diag = line(1.0, 1.0);
        let out = project(&DVector::from_vec(vec![1.0, 0.0]), &diag).unwrap();
        assert!(close(out[0], 0.5, 1e-14) && close(out[1], 0.5, 1e-14));

        let bad = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(project(&bad, &e1).is_err());
    }

    #[test]
    fn restricted_operator_examples() {
        let e1 = Subspace::coordinate(2, &[0]);
        let r = restricted_operator(&SymmetricOperator::identity(2), &e1).unwrap();
        assert_eq!(r.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));

        for rho in [-0.9, 0.0, 0.3, 0.99] {
            let g = SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
                .unwrap();
            let r = restricted_operator(&g, &e1).unwrap();
            assert_eq!(r.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        }

        let r = restricted_operator(&SymmetricOperator::identity(3), &Subspace::trivial(3)).unwrap();
        assert_eq!(r.matrix(), &DMatrix::zeros(3, 3));
        assert!(restricted_operator(&SymmetricOperator::identity(3), &e1).is_err());
    }

    #[test]
    fn pseudoinverse_examples() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let pd = pseudoinverse(&d, DEFAULT_RANK_TOL);
        assert!((pd - DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0])).amax() < 1e-15);

        let i4 = DMatrix::<f64>::identity(4, 4);
        assert!((pseudoinverse(&i4, DEFAULT_RANK_TOL) - &i4).amax() < 1e-15);

        let ones = DMatrix::from_element(2, 2, 1.0);
        let po = pseudoinverse(&ones, DEFAULT_RANK_TOL);
        assert!((&ones * &po * &ones - &ones).amax() < 1e-12);
        assert!((po - DMatrix::from_element(2, 2, 0.25)).amax() < 1e-12);

        assert_eq!(pseudoinverse(&DMatrix::zeros(2, 3), DEFAULT_RANK_TOL), DMatrix::zeros(3, 2));
    }

    #[test]
    fn injectivity_examples() {
        let any = line(0.3, -0.7);
        let inj = restricted_injectivity(&SymmetricOperator::identity(2), &any, 1e-8).unwrap();
        assert!(inj.holds && close(inj.smallest_singular, 1.0, 1e-12));

        let g = SymmetricOperator::from_diagonal(&[1.0, 0.0]);
        let inj = restricted_injectivity(&g, &Subspace::coordinate(2, &[1]), 1e-8).unwrap();
        assert!(!inj.holds && inj.smallest_singular.abs() < 1e-15);

        let g = SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        let inj = restricted_injectivity(&g, &Subspace::coordinate(2, &[0]), 1e-8).unwrap();
        assert!(inj.holds && close(inj.smallest_singular, 1.25f64.sqrt(), 1e-12));

        let inj = restricted_injectivity(&g, &Subspace::trivial(2), 1e-8).unwrap();
        assert!(inj.holds && inj.smallest_singular.is_infinite());
    }

    #[test]
    fn spectral_norm_examples() {
        assert!(close(spectral_norm(&SymmetricOperator::identity(5)), 1.0, 1e-12));
        assert!(close(spectral_norm(&SymmetricOperator::from_diagonal(&[3.0, 1.0])), 3.0, 1e-12));
        let g = SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        assert!(close(spectral_norm(&g), 1.5, 1e-12));
    }

    #[test]
    fn subspace_distance_examples() {
        let e1 = Subspace::coordinate(2, &[0]);
        let e2 = Subspace::coordinate(2, &[1]);
        assert!(subspace_distance(&e1, &e1).unwrap() < 1e-15);
        assert!(close(subspace_distance(&e1, &e2).unwrap(), 1.0, 1e-12));
        let d = subspace_distance(&e1, &line(1.0, 1.0)).unwrap();
        assert!(close(d, std::f64::consts::FRAC_PI_4.sin(), 1e-12));
        assert!(subspace_distance(&e1, &Subspace::trivial(3)).is_err());
    }

    #[test]
    fn symmetric_operator_validation() {
        assert!(SymmetricOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0])).is_err());
        assert!(SymmetricOperator::new(DMatrix::zeros(2, 3)).is_err());
        let indefinite = SymmetricOperator::from_diagonal(&[1.0, -1.0]);
        assert!(!indefinite.is_psd(1e-8));
        assert!(Subspace::from_orthonormal(DMatrix::from_column_slice(2, 1, &[1.0, 1.0])).is_err());
    }

    #[test]
    fn null_space_and_complement() {
        let a = DMatrix::from_column_slice(3, 1, &[-1.0, 1.0, 0.0]);
        let ker = Subspace::left_null_space(&a, DEFAULT_RANK_TOL);
        assert_eq!(ker.dim(), 2);
        assert!((a.transpose() * ker.basis()).amax() < 1e-14);
        let c = ker.complement();
        assert_eq!(c.dim(), 1);
        assert!(subspace_distance(&c, &Subspace::span(&a, DEFAULT_RANK_TOL)).unwrap() < 1e-12);
    }

    fn matrix_strategy(max: usize) -> impl Strategy<Value = DMatrix<f64>> {
        (1..=max, 1..=max).prop_flat_map(|(m, n)| {
            proptest::collection::vec(-3.0f64..3.0, m * n)
                .prop_map(move |data| DMatrix::from_vec(m, n, data))
        })
    }

    /// Random subspace of dimension `d ≤ p` together with a vector of `R^p`.
    fn subspace_and_vector() -> impl Strategy<Value = (Subspace, DVector<f64>)> {
        (1usize..8).prop_flat_map(|p| {
            (0..=p).prop_flat_map(move |d| {
                (
                    proptest::collection::vec(-1.0f64..1.0, p * d),
                    proptest::collection::vec(-5.0f64..5.0, p),
                )
                    .prop_map(move |(b, v)| {
                        (
                            Subspace::span(&DMatrix::from_vec(p, d, b), DEFAULT_RANK_TOL),
                            DVector::from_vec(v),
                        )
                    })
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn penrose_identities(a in matrix_strategy(20)) {
            let ap = pseudoinverse(&a, DEFAULT_RANK_TOL);
            let scale = a.amax().max(1.0);
            prop_assert!((&a * &ap * &a - &a).amax() <= 1e-8 * scale);
            prop_assert!((&ap * &a * &ap - &ap).amax() <= 1e-8 * ap.amax().max(1.0));
            let aap = &a * &ap;
            let apa = &ap * &a;
            prop_assert!((&aap - aap.transpose()).amax() <= 1e-8);
            prop_assert!((&apa - apa.transpose()).amax() <= 1e-8);
        }

        #[test]
        fn projection_is_idempotent((t, v) in subspace_and_vector()) {
            let once = project(&v, &t).unwrap();
            let twice = project(&once, &t).unwrap();
            prop_assert!((&twice - &once).amax() <= 1e-10);
        }

        #[test]
        fn restricted_operator_matches_naive(
            (t, _) in subspace_and_vector(),
            seed in proptest::collection::vec(-1.0f64..1.0, 64),
        ) {
            let p = t.ambient_dim();
            let a = DMatrix::from_fn(p, p, |i, j| seed[(i * 8 + j) % 64]);
            let g = SymmetricOperator::gram(&a);
            let pt = t.projector();
            let naive = &pt * g.matrix() * &pt;
            let fast = restricted_operator(&g, &t).unwrap();
            prop_assert!((fast.matrix() - naive).amax() <= 1e-12);
        }

        #[test]
        fn spectral_norm_matches_eigen_oracle(a in matrix_strategy(12)) {
            let g = SymmetricOperator::gram(&a);
            // oracle: largest singular value of X squared over n
            let sv = a.singular_values().max();
            let oracle = sv * sv / a.nrows() as f64;
            prop_assert!((spectral_norm(&g) - oracle).abs() <= 1e-8 * oracle.max(1.0));
        }
    }

    // rank 3; nalgebra's SVD::new returns a factorization off by 2e-2 here
    const RANK_DEFICIENT: [f64; 25] = [
        -2.113062986183796, -0.24071375648588156, -0.4899883402824942, 1.1642928939240196, -0.8036827891569049,
        -0.8475696801927173, 2.059139387645917, -0.5845777759965548, -0.4548314357727227, -1.1708075498353279,
        -1.8030422609889685, 0.5086344148254852, -0.519435582500143, 0.6715335365299997, -1.0597602369498185,
        1.16122227292005, 1.4770671580511552, 0.21829443911752175, -1.3315288145616013, -0.7408659749961102,
        -0.2851275908486035, -1.5964607475795, 0.43501365787015495, 0.6918840989861857, -0.2435910236800387,
    ];

    #[test]
    fn svd_is_verified_on_rank_deficient_input() {
        let a = DMatrix::from_column_slice(5, 5, &RANK_DEFICIENT);
        let s = svd(&a);
        assert!(s.is_valid_for(&a));
        assert_eq!(s.singular_values.iter().filter(|&&x| x > 1e-10).count(), 3);
    }

    #[test]
    fn jacobi_matches_definition() {
        let a = DMatrix::from_column_slice(5, 5, &RANK_DEFICIENT);
        let s = jacobi_svd_tall(&a);
        assert!(s.is_valid_for(&a));
        let wide = DMatrix::from_fn(3, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let s = jacobi_svd_tall(&wide.transpose()).transposed();
        assert!(s.is_valid_for(&wide));
        let zero = DMatrix::<f64>::zeros(4, 2);
        assert!(jacobi_svd_tall(&zero).is_valid_for(&zero));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn svd_of_low_rank_products(
            m in 1usize..9, n in 1usize..9, k in 0usize..5,
            seed in proptest::collection::vec(-1.0f64..1.0, 128),
        ) {
            let k = k.min(m).min(n);
            let l = DMatrix::from_fn(m, k, |i, j| seed[(i * 8 + j) % 128]);
            let r = DMatrix::from_fn(k, n, |i, j| seed[(64 + i * 8 + j) % 128]);
            let a = l * r;
            let s = svd(&a);
            prop_assert!(s.is_valid_for(&a));
            let j = if m >= n { jacobi_svd_tall(&a) } else { jacobi_svd_tall(&a.transpose()).transposed() };
            prop_assert!(j.is_valid_for(&a));
            prop_assert!((&j.singular_values - &s.singular_values).amax() <= 1e-10 * a.amax().max(1.0));
        }
    }
}
