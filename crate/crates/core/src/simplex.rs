//! Dense two-phase tableau simplex for small linear programs in standard form
//! `min cᵀx  s.t.  A x = b, x ≥ 0`, with Bland's anti-cycling rule.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    // rows: constraints, last column: rhs
    t: DMatrix<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[(row, col)];
        let ncols = self.t.ncols();
        for j in 0..ncols {
            self.t[(row, j)] /= piv;
        }
        for i in 0..self.t.nrows() {
            if i == row {
                continue;
            }
            let f = self.t[(i, col)];
            if f != 0.0 {
                for j in 0..ncols {
                    let v = self.t[(row, j)];
                    self.t[(i, j)] -= f * v;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs the simplex loop on reduced costs `cost` restricted to `allowed` columns.
    fn optimize(&mut self, cost: &[f64], allowed: usize, max_iter: usize) -> Result<bool> {
        let m = self.t.nrows();
        let rhs = self.t.ncols() - 1;
        for _ in 0..max_iter {
            // reduced cost r_j = c_j − c_Bᵀ B⁻¹ A_j
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j];
                for i in 0..m {
                    r -= cost[self.basis[i]] * self.t[(i, j)];
                }
                if r < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[(i, col)];
                if a > PIVOT_TOL {
                    let ratio = self.t[(i, rhs)] / a;
                    match leaving {
                        None => leaving = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || ((ratio - lr).abs() <= 1e-14 && self.basis[i] < self.basis[li])
                            {
                                leaving = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return Ok(false),
            }
        }
        Err(Error::Solver { what: "simplex", residual: f64::NAN })
    }
}

/// Solves `min cᵀx s.t. A x = b, x ≥ 0`.
pub fn solve_standard(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<LpOutcome> {
    let (m, n) = a.shape();
    check_dim(m, b.len())?;
    check_dim(n, c.len())?;
    let max_iter = 50 * (m + n).max(10);

    // Phase I tableau: [A | I_art | b] with non-negative rhs.
    let mut t = DMatrix::<f64>::zeros(m, n + m + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, n + m)] = sign * b[i];
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect() };
    let mut phase1 = vec![0.0; n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = 1.0;
    }
    tab.optimize(&phase1, n + m, max_iter)?;
    let infeas: f64 = (0..m)
        .filter(|&i| tab.basis[i] >= n)
        .map(|i| tab.t[(i, n + m)])
        .sum();
    let scale = b.amax().max(1.0);
    if infeas > FEAS_TOL * scale {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut keep_rows = Vec::with_capacity(m);
    for i in 0..m {
        if tab.basis[i] >= n {
            let col = (0..n).find(|&j| tab.t[(i, j)].abs() > 1e-9);
            if let Some(j) = col {
                tab.pivot(i, j);
                keep_rows.push(i);
            }
        } else {
            keep_rows.push(i);
        }
    }
    let rhs_col = n + m;
    let mut t2 = DMatrix::<f64>::zeros(keep_rows.len(), n + 1);
    let mut basis2 = Vec::with_capacity(keep_rows.len());
    for (r, &i) in keep_rows.iter().enumerate() {
        for j in 0..n {
            t2[(r, j)] = tab.t[(i, j)];
        }
        t2[(r, n)] = tab.t[(i, rhs_col)];
        basis2.push(tab.basis[i]);
    }
    let mut tab2 = Tableau { t: t2, basis: basis2 };
    let cost: Vec<f64> = c.iter().copied().collect();
    if !tab2.optimize(&cost, n, max_iter)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = DVector::<f64>::zeros(n);
    for (r, &j) in tab2.basis.iter().enumerate() {
        x[j] = tab2.t[(r, n)].max(0.0);
    }
    let value = c.dot(&x);
    Ok(LpOutcome::Optimal { x, value })
}

/// `min ‖u‖_∞ s.t. A u = b`; `None` when the system is inconsistent.
pub fn min_linf_solution(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Option<(f64, DVector<f64>)>> {
    let (k, m) = a.shape();
    check_dim(k, b.len())?;
    if m == 0 {
        return Ok(if b.amax() <= FEAS_TOL { Some((0.0, DVector::zeros(0))) } else { None });
    }
    // variables: u⁺ (m), u⁻ (m), t, slack (m)
    let nvar = 3 * m + 1;
    let t_col = 2 * m;
    let mut lp_a = DMatrix::<f64>::zeros(k + m, nvar);
    let mut lp_b = DVector::<f64>::zeros(k + m);
    for r in 0..k {
        for j in 0..m {
            lp_a[(r, j)] = a[(r, j)];
            lp_a[(r, m + j)] = -a[(r, j)];
        }
        lp_b[r] = b[r];
    }
    for i in 0..m {
        let r = k + i;
        lp_a[(r, i)] = 1.0;
        lp_a[(r, m + i)] = 1.0;
        lp_a[(r, t_col)] = -1.0;
        lp_a[(r, t_col + 1 + i)] = 1.0;
    }
    let mut cost = DVector::<f64>::zeros(nvar);
    cost[t_col] = 1.0;
    match solve_standard(&lp_a, &lp_b, &cost)? {
        LpOutcome::Optimal { x, .. } => {
            let u = DVector::from_fn(m, |i, _| x[i] - x[m + i]);
            Ok(Some((u.amax(), u)))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Solver { what: "simplex (unbounded ∞-norm LP)", residual: f64::NAN }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_lp() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 1.0, 0.0, 3.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![4.0, 6.0]);
        let c = DVector::from_vec(vec![-1.0, -1.0, 0.0, 0.0]);
        match solve_standard(&a, &b, &c).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
                assert!((value + 2.8).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let c = DVector::from_vec(vec![0.0]);
        assert_eq!(solve_standard(&a, &b, &c).unwrap(), LpOutcome::Infeasible);

        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let b = DVector::from_vec(vec![0.0]);
        let c = DVector::from_vec(vec![-1.0, 0.0]);
        assert_eq!(solve_standard(&a, &b, &c).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let c = DVector::from_vec(vec![1.0, 2.0]);
        match solve_standard(&a, &b, &c).unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn linf_identity_system() {
        let a = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![0.3, -0.9, 0.1]);
        let (v, u) = min_linf_solution(&a, &b).unwrap().unwrap();
        assert!((v - 0.9).abs() < 1e-12);
        assert!((u - b).amax() < 1e-12);
    }

    proptest! {
        // Single equation aᵀu = b has optimum |b| / ‖a‖₁ (all |u_i| equal, signs of a).
        #[test]
        fn linf_single_row_closed_form(
            a in proptest::collection::vec(-2.0f64..2.0, 1..8),
            b in -3.0f64..3.0,
        ) {
            let l1: f64 = a.iter().map(|x| x.abs()).sum();
            prop_assume!(l1 > 1e-3);
            let m = a.len();
            let am = DMatrix::from_row_slice(1, m, &a);
            let (v, u) = min_linf_solution(&am, &DVector::from_vec(vec![b])).unwrap().unwrap();
            prop_assert!((v - b.abs() / l1).abs() <= 1e-9);
            prop_assert!(((&am * &u)[0] - b).abs() <= 1e-9);
        }
    }
}
