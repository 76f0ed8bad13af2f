use super::*;
use crate::opcore::{classify, OperatorClass};
use crate::random::{
    dress_quadruple, dressed_data_set, random_contraction, random_isometry, random_omega,
    random_open_ball_parameters, random_strict_data_set, random_unitary, seeded, OmegaRegime,
};
use crate::redheffer::SchurParameter;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn r(x: f64) -> OperatorMatrix {
    OperatorMatrix::from_real(1, 1, &[x])
}

fn scalar_omega() -> UnderlyingContraction {
    let h = 3f64.sqrt() / 2.0;
    UnderlyingContraction::new(r(h), r(0.5), r(1.0), &tol()).unwrap()
}

fn omega(seed: u64, t: usize, a: usize, f: usize, regime: OmegaRegime) -> UnderlyingContraction {
    random_omega(&mut seeded(seed), t, a, f, regime).unwrap()
}

fn central(data: &LiftingDataSet) -> ContractiveInterpolant {
    let t = tol();
    let w = underlying_contraction(data, &t).unwrap();
    let phi = phi_coeffs(&w, &t).unwrap();
    let d = phi.dims();
    interpolant(data, &phi, &SchurParameter::zero(d.param_in, d.param_out), &t).unwrap()
}

#[test]
fn validate_classical_shape() {
    let mut rng = seeded(1);
    let w = random_unitary(&mut rng, 3);
    let q = random_unitary(&mut rng, 3);
    let a = w.scale(C64::new(0.5, 0.0));
    let tp = &(&w * &q) * &w.adjoint();
    let data = LiftingDataSet::new(a, tp, OperatorMatrix::identity(3), q, 4).unwrap();
    assert!(validate(&data, &tol()).pass());
}

#[test]
fn validate_shifted_embeddings() {
    let n = 4;
    let mut shift = linalg::zeros(n, n);
    let mut r_emb = linalg::zeros(n, n - 1);
    let mut q_emb = linalg::zeros(n, n - 1);
    for j in 0..n - 1 {
        shift[(j + 1, j)] = linalg::one();
        r_emb[(j, j)] = linalg::one();
        q_emb[(j + 1, j)] = linalg::one();
    }
    let a = OperatorMatrix::identity(n).scale(C64::new(0.5, 0.0));
    let data = LiftingDataSet::new(a, shift.into(), r_emb.into(), q_emb.into(), 3).unwrap();
    let rep = validate(&data, &tol());
    assert!(rep.pass(), "{:?}", rep);
}

#[test]
fn validate_detects_order_violation() {
    let data = LiftingDataSet::new(
        r(0.5),
        r(0.0),
        r(1.0),
        r(0.0),
        2,
    )
    .unwrap();
    let rep = validate(&data, &tol());
    assert!(!rep.pass());
    assert!(!rep.get("intertwining:order").unwrap().pass);
    assert!(rep.get("intertwining:identity").unwrap().pass);
}

#[test]
fn schaffer_examples() {
    let t = tol();
    let mut rng = seeded(2);
    let iso = random_isometry(&mut rng, 3, 3);
    let u = schaffer_lifting(&iso, 4, &t).unwrap().assemble();
    assert_eq!(u.shape(), (3, 3));
    assert!(u.distance(&iso) < 1e-15);

    let u = schaffer_lifting(&r(0.0), 2, &t).unwrap().assemble();
    assert_eq!(u.shape(), (4, 4));
    let leading = linalg::sub(&u, 0, 0, 4, 3);
    assert!(linalg::isometry_defect(&leading) < 1e-15);
    assert!(u.column(3).norm() == 0.0);

    let tp = random_contraction(&mut rng, 3, 3, 0.7);
    let u = schaffer_lifting(&tp, 3, &t).unwrap();
    assert_eq!(&u.top_left, tp.as_matrix());
    assert!(linalg::norm(&u.top_right) == 0.0);
}

#[test]
fn underlying_contraction_with_zero_a() {
    let t = tol();
    let mut rng = seeded(3);
    let q = random_isometry(&mut rng, 3, 2);
    let data = LiftingDataSet::new(
        OperatorMatrix::zeros(2, 3),
        random_contraction(&mut rng, 2, 2, 0.6),
        OperatorMatrix::from(q.as_matrix().clone()),
        q.clone(),
        2,
    )
    .unwrap();
    assert!(validate(&data, &t).pass());
    let w = underlying_contraction(&data, &t).unwrap();
    assert!(linalg::norm(&w.omega1) < 1e-15);
    assert_eq!(w.f_dim(), 2);
    let image = w.f_embedding.adjoint() * q.as_matrix();
    assert!(linalg::norm(&(w.omega2.as_matrix() * image - q.as_matrix())) < 1e-12);
}

#[test]
fn underlying_contraction_round_trip() {
    let t = tol();
    let regimes = [
        OmegaRegime::Contraction { norm: 0.8 },
        OmegaRegime::Isometric { state_norm: 0.6 },
    ];
    for seed in 0..20 {
        let w = omega(seed, 2, 3, 1 + (seed as usize % 3), regimes[seed as usize % 2]);
        let back = underlying_contraction(&omega_to_data_set(&w, 4), &t).unwrap();
        assert!(back.distance(&w) <= 1e-10, "seed {}", seed);
    }
}

#[test]
fn underlying_contraction_of_strict_data() {
    let t = tol();
    let mut rng = seeded(4);
    for _ in 0..5 {
        let data = random_strict_data_set(&mut rng, 2, 5, 2, 0.8, 0.7, 0.1, 4).unwrap();
        assert!(validate(&data, &t).pass());
        let w = underlying_contraction(&data, &t).unwrap();
        let class = classify(&w.stacked(), &t).unwrap();
        assert!(class.is_contractive());
    }
}

#[test]
fn underlying_contraction_reports_inconsistency() {
    let mut rng = seeded(5);
    let data = LiftingDataSet::new(
        random_contraction(&mut rng, 2, 3, 0.5),
        random_contraction(&mut rng, 2, 2, 0.5),
        OperatorMatrix::from(random_contraction(&mut rng, 3, 1, 0.5).into_matrix()),
        OperatorMatrix::zeros(3, 1),
        2,
    )
    .unwrap();
    assert!(matches!(
        underlying_contraction(&data, &tol()),
        Err(Error::InconsistentData { .. })
    ));
}

#[test]
fn omega_data_set_examples() {
    let t = tol();
    let data = omega_to_data_set(&scalar_omega(), 3);
    assert_eq!((data.h_dim(), data.h_prime_dim(), data.h0_dim()), (2, 1, 1));
    let rep = validate(&data, &t);
    assert!(rep.checks.iter().all(|c| c.residual == 0.0), "{:?}", rep);
    assert_eq!(classify(&data.a, &t).unwrap(), OperatorClass::CoIsometry);

    let empty = UnderlyingContraction::new(
        OperatorMatrix::zeros(1, 0),
        OperatorMatrix::zeros(2, 0),
        OperatorMatrix::zeros(2, 0),
        &t,
    )
    .unwrap();
    let data = omega_to_data_set(&empty, 3);
    assert_eq!(data.h0_dim(), 0);
    assert!(validate(&data, &t).pass());
}

#[test]
fn phi_coefficients_match_closed_forms() {
    let t = tol();
    for seed in 0..6 {
        let w = omega(10 + seed, 2, 3, 1 + seed as usize % 3, OmegaRegime::Contraction { norm: 0.9 });
        let q = phi_coeffs(&w, &t).unwrap();
        for lam in sample_points() {
            let a = q.eval(lam).unwrap();
            let b = phi_closed_form(&w, lam, &t).unwrap();
            for (x, y) in [
                (&a.psi11, &b.psi11),
                (&a.psi12, &b.psi12),
                (&a.psi21, &b.psi21),
                (&a.psi22, &b.psi22),
            ] {
                assert!(linalg::norm(&(x - y)) < 1e-12);
            }
        }
    }
}

#[test]
fn phi_with_trivial_g() {
    let t = tol();
    let w = omega(20, 2, 2, 2, OmegaRegime::Contraction { norm: 0.7 });
    let q = phi_coeffs(&w, &t).unwrap();
    assert_eq!(q.dims().param_in, 0);
    let lam = C64::new(0.3, 0.3);
    let res = linalg::try_inverse(
        &(linalg::identity(2) - w.omega2_on_defect() * lam),
        1e-13,
    )
    .unwrap();
    let expect = w.omega1_on_defect() * res;
    assert!(linalg::norm(&(q.eval(lam).unwrap().psi22 - expect)) < 1e-13);
}

#[test]
fn phi_with_trivial_f() {
    let t = tol();
    let w = UnderlyingContraction::new(
        OperatorMatrix::zeros(1, 0),
        OperatorMatrix::zeros(2, 0),
        OperatorMatrix::zeros(2, 0),
        &t,
    )
    .unwrap();
    let q = phi_coeffs(&w, &t).unwrap();
    let g = w.g_embedding();
    for lam in sample_points() {
        let v = q.eval(lam).unwrap();
        assert!(linalg::norm(&(&v.psi12 - g.adjoint())) < 1e-15);
        assert!(linalg::norm(&v.psi22) == 0.0);
        let dstar = w.star_defect(&t).unwrap();
        let dj = dstar.defect_operator.as_matrix() * dstar.embedding.as_matrix();
        let expect = g.adjoint() * linalg::sub(&dj, 1, 0, 2, dj.ncols()) * lam;
        assert!(linalg::norm(&(&v.psi11 - expect)) < 1e-15);
    }
}

#[test]
fn phi_scalar_example() {
    let t = tol();
    let q = phi_coeffs(&scalar_omega(), &t).unwrap();
    let h = 3f64.sqrt() / 2.0;
    let lam = C64::new(0.4, -0.1);
    let v = q.eval(lam).unwrap().psi22[(0, 0)];
    assert!((v - C64::new(h, 0.0) / (C64::new(1.0, 0.0) - lam / 2.0)).norm() < 1e-15);
    let [_, _, _, c22] = q.taylor(40);
    let mut energy = 0.0;
    for (n, c) in c22.iter().enumerate() {
        assert!((c[(0, 0)].re - h * 0.5f64.powi(n as i32)).abs() < 1e-15);
        energy += c[(0, 0)].norm_sqr();
    }
    assert!((energy - 1.0).abs() < 1e-15);
}

#[test]
fn central_interpolant_uses_psi22() {
    let t = tol();
    let w = omega(30, 2, 3, 2, OmegaRegime::Contraction { norm: 0.8 });
    let data = omega_to_data_set(&w, 5);
    let b = central(&data);
    let phi = phi_coeffs(&w, &t).unwrap();
    let g22 = crate::redheffer::coefficient_matrix(&phi, 5).g22;
    assert!(b.gamma.distance(g22.operator()) < 1e-12);
}

#[test]
fn isometric_a_gives_trivial_interpolant() {
    let t = tol();
    let mut rng = seeded(31);
    let a = random_unitary(&mut rng, 2);
    let q = random_unitary(&mut rng, 2);
    let tp = &(&a * &q) * &a.adjoint();
    let data = LiftingDataSet::new(a.clone(), tp, OperatorMatrix::identity(2), q, 3).unwrap();
    let b = central(&data);
    assert!(b.matrix().distance(&a) < 1e-15);
    assert!(verify_interpolant(&b, &data, &t).unwrap().pass());
}

#[test]
fn interpolants_verify_on_generated_data() {
    let t = tol();
    let mut rng = seeded(32);
    let mut sets = Vec::new();
    for i in 0..3 {
        let w = random_omega(&mut rng, 2, 3, 1 + i, OmegaRegime::Contraction { norm: 0.85 }).unwrap();
        sets.push(dressed_data_set(&mut rng, &w, 6));
    }
    sets.push(random_strict_data_set(&mut rng, 2, 5, 2, 0.8, 0.7, 0.1, 6).unwrap());
    for data in &sets {
        let w = underlying_contraction(data, &t).unwrap();
        let phi = phi_coeffs(&w, &t).unwrap();
        let d = phi.dims();
        let mut params = vec![SchurParameter::zero(d.param_in, d.param_out)];
        params.extend(random_open_ball_parameters(&mut rng, d.param_in, d.param_out, 6, 0.95));
        for v in &params {
            let b = interpolant(data, &phi, v, &t).unwrap();
            let rep = verify_interpolant(&b, data, &t).unwrap();
            assert!(rep.pass(), "{:?}", rep);
        }
    }
}

#[test]
fn zero_gamma_fails_shift_identity() {
    let t = tol();
    let w = omega(33, 2, 3, 2, OmegaRegime::Contraction { norm: 0.8 });
    let data = omega_to_data_set(&w, 4);
    let mut b = central(&data);
    assert!(b.gamma.norm() > 0.1);
    b.gamma = TruncatedHardyOperator::from_matrix(
        linalg::zeros(b.gamma.nrows(), b.gamma.ncols()),
        b.gamma.degree(),
        b.gamma.domain(),
        b.gamma.codomain_dim(),
    );
    let rep = verify_interpolant(&b, &data, &t).unwrap();
    assert!(rep.get("interpolation:projection").unwrap().pass);
    assert!(!rep.get("interpolation:shift").unwrap().pass);
}

#[test]
fn omega_b_inherits_isometry() {
    let t = tol();
    let mut rng = seeded(34);
    let w = random_omega(&mut rng, 2, 3, 2, OmegaRegime::Isometric { state_norm: 0.4 }).unwrap();
    let data = omega_to_data_set(&w, 24);
    let phi = phi_coeffs(&w, &t).unwrap();
    let d = phi.dims();
    for v in random_open_ball_parameters(&mut rng, d.param_in, d.param_out, 4, 0.9) {
        let b = interpolant(&data, &phi, &v, &t).unwrap();
        let wb = omega_b(&data, &b, &t).unwrap();
        assert!(wb.class.is_isometric());
    }
}

#[test]
fn omega_b_is_contractive() {
    let t = tol();
    let mut rng = seeded(35);
    let w = random_omega(&mut rng, 2, 3, 2, OmegaRegime::Contraction { norm: 0.8 }).unwrap();
    let data = omega_to_data_set(&w, 6);
    let phi = phi_coeffs(&w, &t).unwrap();
    let d = phi.dims();
    for v in random_open_ball_parameters(&mut rng, d.param_in, d.param_out, 4, 0.9) {
        let b = interpolant(&data, &phi, &v, &t).unwrap();
        let wb = omega_b(&data, &b, &t).unwrap();
        assert!(wb.omega.norm() <= 1.0 + 1e-9);
        assert!(!wb.class.is_isometric());
    }
}

#[test]
fn omega_b_empty_for_isometric_gamma() {
    let t = tol();
    let w = omega(36, 2, 2, 2, OmegaRegime::Isometric { state_norm: 0.3 });
    let data = omega_to_data_set(&w, 16);
    let b = central(&data);
    let wb = omega_b(&data, &b, &t).unwrap();
    assert_eq!(wb.defect_rank, 0);
    assert_eq!(wb.f_embedding.ncols(), 0);
}

#[test]
fn singleton_examples() {
    let t = tol();
    let w = omega(37, 2, 2, 2, OmegaRegime::Contraction { norm: 0.8 });
    assert_eq!(w.g_dim(), 0);
    let data = omega_to_data_set(&w, 5);
    assert!(singleton_check(&data, &central(&data), &t).unwrap().singleton);

    let empty = UnderlyingContraction::new(
        OperatorMatrix::zeros(1, 0),
        OperatorMatrix::zeros(2, 0),
        OperatorMatrix::zeros(2, 0),
        &t,
    )
    .unwrap();
    let data = omega_to_data_set(&empty, 3);
    let verdict = singleton_check(&data, &central(&data), &t).unwrap();
    assert!(!verdict.singleton);
    assert_eq!((verdict.f_b_rank, verdict.defect_rank), (0, 2));

    let data = omega_to_data_set(&scalar_omega(), 8);
    assert!(singleton_check(&data, &central(&data), &t).unwrap().singleton);
}

#[test]
fn density_examples() {
    let t = tol();
    let q = phi_coeffs(&omega(38, 2, 2, 2, OmegaRegime::Contraction { norm: 0.8 }), &t).unwrap();
    let rep = density_diagnostic(&q, 4, &t);
    assert!(rep.dense.iter().all(|&d| d));
    assert!(rep.ranks.iter().all(|&r| r == 0));

    let empty = UnderlyingContraction::new(
        OperatorMatrix::zeros(1, 0),
        OperatorMatrix::zeros(1, 0),
        OperatorMatrix::zeros(1, 0),
        &t,
    )
    .unwrap();
    let rep = density_diagnostic(&phi_coeffs(&empty, &t).unwrap(), 4, &t);
    assert_eq!(rep.ranks, vec![1; 5]);
    assert_eq!(rep.dense, vec![true, false, false, false, false]);
    assert!(rep.contains_constants.iter().all(|&c| c));

    let mut rng = seeded(39);
    let w = crate::random::random_isometric_omega_with_radius(&mut rng, 2, 2, 1, 0.3, 0.8).unwrap();
    let rep = density_diagnostic(&phi_coeffs(&w, &t).unwrap(), 5, &t);
    assert!(rep.dense[0]);
    assert!(rep.ranks.iter().all(|&r| r <= 2));
    assert!(rep.dense[2..].iter().all(|&d| !d));
    assert!(rep.contains_constants.iter().all(|&c| c));
    assert!(rep.backward_shift_invariant.iter().all(|&c| c));
}

#[test]
fn inverse_on_normal_form() {
    let t = tol();
    for seed in 0..5 {
        let w = omega(40 + seed, 2, 3, 1 + seed as usize % 3, OmegaRegime::Contraction { norm: 0.8 });
        let q = phi_coeffs(&w, &t).unwrap();
        let inv = inverse_construction(&q, 4, &t).unwrap();
        assert!(inv.omega.distance(&w) < 1e-9);
        assert!(inv.relation_residual < 1e-9);
        assert!(inv.psi.distance(&OperatorMatrix::identity(w.g_dim())) < 1e-9);
        assert!(inv.phi.distance(&OperatorMatrix::identity(q.dims().param_out)) < 1e-9);
        assert!(validate(&inv.data, &t).pass());
    }
}

#[test]
fn inverse_absorbs_unitaries() {
    let t = tol();
    let mut rng = seeded(50);
    let w = random_omega(&mut rng, 2, 3, 1, OmegaRegime::Contraction { norm: 0.8 }).unwrap();
    let base = phi_coeffs(&w, &t).unwrap();
    let d = base.dims();
    let psi = random_unitary(&mut rng, d.param_in);
    let phi = random_unitary(&mut rng, d.param_out);
    let q = dress_quadruple(&base, &psi, &phi, &t).unwrap();
    let inv = inverse_construction(&q, 4, &t).unwrap();
    assert!(inv.omega.distance(&w) < 1e-9);
    assert!(inv.relation_residual < 1e-9);
    assert!(inv.psi.distance(&psi) < 1e-9);
    assert!(inv.phi.distance(&phi) < 1e-9);
    assert!(inv.phi_is_unitary(&t));
}

#[test]
fn inverse_with_enlarged_input_space() {
    let t = tol();
    let mut rng = seeded(51);
    let w = random_omega(&mut rng, 2, 3, 2, OmegaRegime::Contraction { norm: 0.8 }).unwrap();
    let base = phi_coeffs(&w, &t).unwrap();
    let d = base.dims();
    let phi = random_isometry(&mut rng, d.param_out + 2, d.param_out).adjoint();
    let q = dress_quadruple(&base, &OperatorMatrix::identity(d.param_in), &phi, &t).unwrap();
    let inv = inverse_construction(&q, 4, &t).unwrap();
    assert!(inv.relation_residual < 1e-9);
    assert!(!inv.phi_is_unitary(&t));
    assert!(linalg::coisometry_defect(&inv.phi) < 1e-9);
    let kernel = linalg::kernel_basis(&inv.phi, t.rank_tol, 1.0);
    assert_eq!(kernel.ncols(), 2);
    for lam in sample_points() {
        let v = q.eval(lam).unwrap();
        assert!(linalg::norm(&(&v.psi11 * &kernel)) < 1e-9);
        assert!(linalg::norm(&(&v.psi21 * &kernel)) < 1e-9);
    }
}

#[test]
fn inverse_rejects_non_coisometric_input() {
    let t = tol();
    let mut rng = seeded(52);
    let sys = crate::random::random_contractive_system(&mut rng, 2, 2, 2, 0.5);
    let mut d = sys.feed_op().as_matrix().clone();
    d.row_mut(0).fill(C64::new(0.0, 0.0));
    let sys = LinearSystem::new(
        sys.state_op().clone(),
        sys.input_op().clone(),
        sys.output_op().clone(),
        d.into(),
        &t,
    )
    .unwrap();
    let q = RedhefferQuadruple::new(sys, 1, &t).unwrap();
    assert!(matches!(
        inverse_construction(&q, 2, &t),
        Err(Error::NotCoisometric { .. })
    ));
}

/// `ω'` with `ω1' = ω1 Θ_F` and `ω2' = Θ^* ω2 Θ_F` for `Θ = Θ_F ⊕ I_G`.
fn conjugated(w: &UnderlyingContraction, theta_f: &OperatorMatrix) -> (UnderlyingContraction, Mat) {
    let f = w.f_embedding.as_matrix();
    let g = w.g_embedding();
    let theta = f * theta_f.as_matrix() * f.adjoint() + &g * g.adjoint();
    let other = UnderlyingContraction::new(
        OperatorMatrix::from(w.omega1.as_matrix() * theta_f.as_matrix()),
        OperatorMatrix::from(theta.adjoint() * w.omega2.as_matrix() * theta_f.as_matrix()),
        w.f_embedding.clone(),
        &tol(),
    )
    .unwrap();
    (other, theta)
}

#[test]
fn equivalence_examples() {
    let t = tol();
    let mut rng = seeded(60);
    let w = crate::random::random_isometric_omega_with_radius(&mut rng, 2, 3, 2, 0.3, 0.8).unwrap();
    let eq = omega_equivalence(&w, &w, &t).unwrap().unwrap();
    assert!(eq.theta.distance(&OperatorMatrix::identity(3)) < 1e-9);
    assert!(eq.unitary_coefficients);

    let theta_f = random_unitary(&mut rng, 2);
    let (other, theta) = conjugated(&w, &theta_f);
    let eq = omega_equivalence(&w, &other, &t).unwrap().unwrap();
    assert!(linalg::norm(&(eq.theta.as_matrix() - &theta)) < 1e-9);
    assert!(eq.reducing_residual < 1e-9);
    assert!(eq.omega1_residual < 1e-9);
    assert!(eq.theta_reading_residual < 1e-9);

    let unrelated = crate::random::random_isometric_omega_with_radius(&mut rng, 2, 3, 2, 0.3, 0.8).unwrap();
    assert!(omega_equivalence(&w, &unrelated, &t).unwrap().is_none());
}
