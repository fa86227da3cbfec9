use super::*;
use proptest::prelude::*;

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn diag2(a: f64, b: f64) -> DVector<f64> {
    // column-major 2×2
    v(&[a, 0.0, 0.0, b])
}

/// Brute-force minimizer of `½(b − x)² + γ|x|` on a fine grid.
fn scalar_prox_oracle(b: f64, gamma: f64) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let mut x = -6.0;
    while x <= 6.0 {
        let f = 0.5 * (b - x) * (b - x) + gamma * x.abs();
        if f < best.0 {
            best = (f, x);
        }
        x += 1e-4;
    }
    best.1
}

#[test]
fn value_examples() {
    assert_eq!(Regularizer::L1.value(&v(&[3.0, -4.0, 0.0])).unwrap(), 7.0);
    let g = Regularizer::group(vec![vec![0, 1], vec![2]]).unwrap();
    assert!((g.value(&v(&[3.0, 4.0, -2.0])).unwrap() - 7.0).abs() < 1e-14);
    let nuc = Regularizer::nuclear(2).unwrap();
    assert!((nuc.value(&diag2(2.0, 1.0)).unwrap() - 3.0).abs() < 1e-12);
    assert!(g.value(&v(&[1.0, 2.0])).is_err());
    assert!(nuc.value(&v(&[1.0, 2.0, 3.0])).is_err());
}

#[test]
fn prox_examples() {
    let out = Regularizer::L1.prox(&v(&[3.0, -0.5, 0.0]), 1.0).unwrap();
    for (i, b) in [3.0, -0.5, 0.0].into_iter().enumerate() {
        assert!((out[i] - scalar_prox_oracle(b, 1.0)).abs() < 1e-3);
    }
    assert_eq!(out, v(&[2.0, 0.0, 0.0]));

    let g = Regularizer::group(vec![vec![0, 1]]).unwrap();
    let out = g.prox(&v(&[3.0, 4.0]), 1.0).unwrap();
    assert!((out - v(&[2.4, 3.2])).amax() < 1e-14);

    let nuc = Regularizer::nuclear(2).unwrap();
    let out = nuc.prox(&diag2(3.0, 1.0), 2.0).unwrap();
    assert!((out - diag2(1.0, 0.0)).amax() < 1e-12);

    let beta = v(&[1.0, -2.0, 0.5, 3.0]);
    let specs = [
        Regularizer::L1,
        Regularizer::contiguous_groups(&[2, 2]).unwrap(),
        Regularizer::nuclear(2).unwrap(),
        Regularizer::total_variation_1d(4).unwrap(),
    ];
    for spec in &specs {
        assert_eq!(spec.prox(&beta, 0.0).unwrap(), beta);
        assert!(spec.prox(&beta, -0.1).is_err());
    }
}

#[test]
fn tv_prox_constant_signal_is_fixed() {
    let tv = Regularizer::total_variation_1d(5).unwrap();
    let beta = v(&[2.0; 5]);
    let out = tv.prox(&beta, 0.7).unwrap();
    assert!((out - beta).amax() < 1e-12);
}

#[test]
fn tv_prox_small_jump_is_flattened() {
    // plateaus of length 2 each move by γ/2 toward each other, merging at γ = 1
    let tv = Regularizer::total_variation_1d(4).unwrap();
    let beta = v(&[0.0, 0.0, 1.0, 1.0]);
    let out = tv.prox(&beta, 1.0).unwrap();
    assert!((out - v(&[0.5; 4])).amax() < 1e-9);
    let out = tv.prox(&beta, 0.25).unwrap();
    assert!((out - v(&[0.125, 0.125, 0.875, 0.875])).amax() < 1e-9);
}

#[test]
fn model_examples() {
    let g = Regularizer::L1.model(&v(&[1.0, -2.0, 0.0]), 1e-9).unwrap();
    assert_eq!(g.descriptor, ModelDescriptor::Support(vec![0, 1]));
    assert_eq!(g.tangent, Subspace::coordinate(3, &[0, 1]));
    assert_eq!(g.model_vector, v(&[1.0, -1.0, 0.0]));

    let nuc = Regularizer::nuclear(2).unwrap();
    let g = nuc.model(&diag2(5.0, 0.0), DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(g.descriptor, ModelDescriptor::Rank(1));
    assert_eq!(g.tangent.dim(), 3);
    assert!((g.model_vector.clone().abs() - diag2(1.0, 0.0)).amax() < 1e-12);
    // tangent of the rank-1 manifold at e11 is everything except e22
    let e22 = diag2(0.0, 1.0);
    assert!(linalg::project(&e22, &g.tangent).unwrap().norm() < 1e-12);

    let tv = Regularizer::total_variation_1d(3).unwrap();
    let g = tv.model(&v(&[2.0, 2.0, 5.0]), DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(g.descriptor, ModelDescriptor::Cosupport(vec![0]));
    let expected = Subspace::span(
        &DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
        DEFAULT_RANK_TOL,
    );
    assert!(linalg::subspace_distance(&g.tangent, &expected).unwrap() < 1e-12);

    // degenerate β = 0
    let g = nuc.model(&v(&[0.0; 4]), DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(g.descriptor, ModelDescriptor::Rank(0));
    assert_eq!(g.tangent.dim(), 0);
    let g = Regularizer::L1.model(&v(&[0.0; 3]), DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(g.descriptor, ModelDescriptor::Support(vec![]));
}

#[test]
fn ri_membership_examples() {
    let geom = Regularizer::L1.model(&v(&[1.0, -2.0, 0.0]), 1e-9).unwrap();
    let r = Regularizer::L1.ri_membership(&geom, &v(&[1.0, -1.0, 0.0]), 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Interior);
    assert!((r.margin - 1.0).abs() < 1e-14);

    let r = Regularizer::L1.ri_membership(&geom, &v(&[1.0, -1.0, 1.2]), 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Outside);
    assert!((r.margin + 0.2).abs() < 1e-14);

    let r = Regularizer::L1.ri_membership(&geom, &v(&[1.0, -1.0, 0.5]), 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Interior);
    assert!((r.margin - 0.5).abs() < 1e-14);

    let r = Regularizer::L1.ri_membership(&geom, &v(&[1.0, -1.0, 1.0]), 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Boundary);

    let r = Regularizer::L1.ri_membership(&geom, &v(&[0.5, -1.0, 0.0]), 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Outside);
    assert!((r.tangent_residual - 0.5).abs() < 1e-14);

    let nuc = Regularizer::nuclear(2).unwrap();
    let geom = nuc.model(&diag2(5.0, 0.0), DEFAULT_ZERO_TOL).unwrap();
    let eta = geom.model_vector.clone() + diag2(0.0, 0.3);
    let r = nuc.ri_membership(&geom, &eta, 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Interior);
    assert!((r.margin - 0.7).abs() < 1e-12);

    // mismatched geometry
    assert!(nuc.ri_membership(&Regularizer::L1.model(&v(&[1.0; 4]), 1e-8).unwrap(), &eta, 1e-6).is_err());
}

#[test]
fn analysis_membership_matches_l1_on_identity() {
    let id = Regularizer::analysis(DMatrix::identity(4, 4)).unwrap();
    let beta = v(&[1.0, 0.0, -2.0, 0.0]);
    let geom = id.model(&beta, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(geom.descriptor, ModelDescriptor::Cosupport(vec![1, 3]));
    let eta = v(&[1.0, 0.3, -1.0, -0.8]);
    let r = id.ri_membership(&geom, &eta, 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Interior);
    assert!((r.margin - 0.2).abs() < 1e-10);
    let eta = v(&[1.0, 0.3, -1.0, -1.5]);
    let r = id.ri_membership(&geom, &eta, 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Outside);
    assert!((r.margin + 0.5).abs() < 1e-10);
}

#[test]
fn tv_membership_via_lp() {
    // β = (2,2,5): cosupport {0}, S = {1}, anchor = D e_1 = (0,-1,1).
    // ∂J(β) = {(0,-1,1) + u(-1,1,0) : |u| ≤ 1}.
    let tv = Regularizer::total_variation_1d(3).unwrap();
    let geom = tv.model(&v(&[2.0, 2.0, 5.0]), DEFAULT_ZERO_TOL).unwrap();
    let eta = v(&[-0.4, -0.6, 1.0]);
    let r = tv.ri_membership(&geom, &eta, 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Interior);
    assert!((r.margin - 0.6).abs() < 1e-10, "{r:?}");
    let eta = v(&[-1.5, 0.5, 1.0]);
    let r = tv.ri_membership(&geom, &eta, 1e-6).unwrap();
    assert_eq!(r.status, MembershipStatus::Outside);
    assert!((r.margin + 0.5).abs() < 1e-10);
}

#[test]
fn same_model_examples() {
    let a = ModelDescriptor::Support(vec![0, 1]);
    assert!(same_model(&a, &ModelDescriptor::Support(vec![0, 1])).unwrap());
    assert!(!same_model(&a, &ModelDescriptor::Support(vec![0, 1, 2])).unwrap());
    assert!(same_model(&ModelDescriptor::Rank(2), &ModelDescriptor::Rank(2)).unwrap());
    assert!(same_model(&a, &ModelDescriptor::Rank(2)).is_err());
}

#[test]
fn group_validation() {
    assert!(Regularizer::group(vec![vec![0, 1], vec![1]]).is_err());
    assert!(Regularizer::group(vec![vec![0, 2]]).is_err());
    assert!(Regularizer::group(vec![vec![]]).is_err());
    assert!(Regularizer::nuclear(0).is_err());
    assert!(Regularizer::analysis(DMatrix::zeros(3, 0)).is_err());
}

// ---- property tests --------------------------------------------------------

fn specs() -> Vec<Regularizer> {
    let mut d = DMatrix::<f64>::zeros(6, 4);
    let vals = [0.3, -1.2, 0.8, 0.5, -0.4, 1.1, 0.9, -0.7, 0.2, 1.4, -0.6, 0.1];
    for (k, x) in vals.iter().cycle().take(24).enumerate() {
        d[(k % 6, k / 6)] = *x * if k % 5 == 0 { -1.0 } else { 1.0 };
    }
    vec![
        Regularizer::L1,
        Regularizer::contiguous_groups(&[2, 1, 3]).unwrap(),
        Regularizer::nuclear(3).unwrap(),
        Regularizer::analysis(d).unwrap(),
    ]
}

fn dim_of(spec: &Regularizer) -> usize {
    spec.dim().unwrap_or(6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn prox_is_nonexpansive(
        a in proptest::collection::vec(-3.0f64..3.0, 9),
        b in proptest::collection::vec(-3.0f64..3.0, 9),
        gamma in 0.05f64..2.0,
    ) {
        for spec in specs() {
            let p = dim_of(&spec);
            let va = v(&a[..p]);
            let vb = v(&b[..p]);
            let pa = spec.prox(&va, gamma).unwrap();
            let pb = spec.prox(&vb, gamma).unwrap();
            prop_assert!((pa - pb).norm() <= (&va - &vb).norm() + 1e-9);
        }
    }

    #[test]
    fn value_is_positively_homogeneous(
        a in proptest::collection::vec(-3.0f64..3.0, 9),
        c in -4.0f64..4.0,
    ) {
        for spec in specs() {
            let p = dim_of(&spec);
            let va = v(&a[..p]);
            let lhs = spec.value(&(&va * c)).unwrap();
            let rhs = c.abs() * spec.value(&va).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
        }
    }

    #[test]
    fn model_vector_lies_in_tangent(a in proptest::collection::vec(-3.0f64..3.0, 9)) {
        for spec in specs() {
            let p = dim_of(&spec);
            let mut beta = v(&a[..p]);
            // sparsify so that non-trivial models occur
            for i in 0..p { if i % 3 == 1 { beta[i] = 0.0; } }
            let geom = spec.model(&beta, DEFAULT_ZERO_TOL).unwrap();
            let pe = linalg::project(&geom.model_vector, &geom.tangent).unwrap();
            prop_assert!((pe - &geom.model_vector).amax() <= 1e-10);
            match (&spec, &geom.descriptor) {
                (Regularizer::L1, ModelDescriptor::Support(s)) => {
                    for &i in s { prop_assert!((geom.model_vector[i].abs() - 1.0).abs() < 1e-15); }
                }
                (Regularizer::GroupL1L2 { groups }, ModelDescriptor::GroupSupport(act)) => {
                    for &k in act {
                        let n: f64 = groups[k].iter().map(|&i| geom.model_vector[i].powi(2)).sum::<f64>().sqrt();
                        prop_assert!((n - 1.0).abs() < 1e-12);
                    }
                }
                (Regularizer::Nuclear { side }, ModelDescriptor::Rank(r)) => {
                    let e = DMatrix::from_column_slice(*side, *side, geom.model_vector.as_slice());
                    let sv = crate::linalg::svd(&e).singular_values;
                    let ones = sv.iter().filter(|&&s| (s - 1.0).abs() < 1e-10).count();
                    let zeros = sv.iter().filter(|&&s| s.abs() < 1e-10).count();
                    prop_assert_eq!(ones, *r);
                    prop_assert_eq!(ones + zeros, *side);
                    prop_assert_eq!(geom.tangent.dim(), side * side - (side - r) * (side - r));
                }
                _ => {}
            }
        }
    }

    #[test]
    fn singleton_groups_reduce_to_l1(
        a in proptest::collection::vec(-3.0f64..3.0, 7),
        gamma in 0.05f64..2.0,
    ) {
        let mut beta = v(&a);
        beta[2] = 0.0;
        let g = Regularizer::contiguous_groups(&[1; 7]).unwrap();
        let l1 = Regularizer::L1;
        prop_assert!((g.value(&beta).unwrap() - l1.value(&beta).unwrap()).abs() <= 1e-12);
        prop_assert!((g.prox(&beta, gamma).unwrap() - l1.prox(&beta, gamma).unwrap()).amax() <= 1e-12);
        let gg = g.model(&beta, DEFAULT_ZERO_TOL).unwrap();
        let gl = l1.model(&beta, DEFAULT_ZERO_TOL).unwrap();
        match (&gg.descriptor, &gl.descriptor) {
            (ModelDescriptor::GroupSupport(x), ModelDescriptor::Support(y)) => prop_assert_eq!(x, y),
            _ => prop_assert!(false),
        }
        prop_assert!((&gg.model_vector - &gl.model_vector).amax() <= 1e-12);
        let eta = beta.map(|x| (x / 3.5).clamp(-1.0, 1.0)) + &gl.model_vector * 0.0;
        let rg = g.ri_membership(&gg, &eta, 1e-6).unwrap();
        let rl = l1.ri_membership(&gl, &eta, 1e-6).unwrap();
        prop_assert_eq!(rg.status, rl.status);
        prop_assert!((rg.margin - rl.margin).abs() <= 1e-12);
    }
}
