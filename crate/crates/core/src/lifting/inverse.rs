use alloc::vec::Vec;

use super::{omega_to_data_set, phi_coeffs, LiftingDataSet, UnderlyingContraction};
use crate::error::{Error, Result};
use crate::math;
use crate::opcore::linalg::{self, Mat};
use crate::opcore::{douglas_solve, parrott_coisometry_solve, OperatorMatrix, ToleranceConfig, C64};
use crate::redheffer::RedhefferQuadruple;
use crate::systems::{strong_stability, unitary_equivalence, LinearSystem};

/// Ten deterministic points inside the disc of radius 0.9, starting at 0.
pub fn sample_points() -> Vec<C64> {
    (0..10)
        .map(|k| {
            let r = 0.09 * k as f64;
            let theta = 2.399963229728653 * k as f64;
            C64::new(r * math::cos(theta), r * math::sin(theta))
        })
        .collect()
}

/// A data set reproducing a given quadruple, with the unitary `ψ: E → G` and
/// the co-isometry `φ: E' → D_{ω*}` relating the two coefficient quadruples.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseConstruction {
    pub data: LiftingDataSet,
    pub omega: UnderlyingContraction,
    pub psi: OperatorMatrix,
    pub phi: OperatorMatrix,
    /// Largest deviation in `[ψ 0; 0 I] Ψ(λ) = Φ(λ) [φ 0; 0 I]` over
    /// [`sample_points`].
    pub relation_residual: f64,
    /// The input coefficient matrix is unitary: isometric system matrix with
    /// a strongly stable state operator.
    pub unitary_input: bool,
    /// `‖φ^*φ - I‖`.
    pub phi_isometry_defect: f64,
}

impl InverseConstruction {
    pub fn phi_is_unitary(&self, tol: &ToleranceConfig) -> bool {
        self.phi_isometry_defect <= tol.check_tol
            && linalg::coisometry_defect(&self.phi) <= tol.check_tol
    }
}

/// Builds a lifting data set whose coefficient quadruple equals `psi` up to
/// a unitary on `E` and a co-isometry on `E'`.
pub fn inverse_construction(
    psi: &RedhefferQuadruple,
    degree: usize,
    tol: &ToleranceConfig,
) -> Result<InverseConstruction> {
    let sys = psi.realization();
    let sysmat = sys.system_matrix();
    let coiso = linalg::coisometry_defect(&sysmat);
    if coiso > tol.check_tol {
        return Err(Error::NotCoisometric { defect: coiso });
    }
    let dims = psi.dims();
    let (u, e, y, ep) = (dims.state, dims.param_in, dims.output, dims.param_out);
    let c = sys.output_op().as_matrix();
    let c1 = linalg::sub(c, 0, 0, e, u);
    let c2 = linalg::sub(c, e, 0, y, u);
    let d2 = linalg::sub(sys.feed_op(), e, 0, y, ep);
    let c1_defect = linalg::coisometry_defect(&c1);
    if c1_defect > tol.check_tol {
        return Err(Error::KernelExtraction { defect: c1_defect });
    }
    let f_emb = linalg::kernel_basis(&c1, tol.rank_tol, 1.0);
    let g_emb = linalg::complement_basis(&f_emb, u);
    let omega = UnderlyingContraction::new(
        (&c2 * &f_emb).into(),
        (sys.state_op().as_matrix() * &f_emb).into(),
        f_emb.into(),
        tol,
    )?;
    let dstar = omega.star_defect(tol)?;
    let column = linalg::vstack(ep, &[&d2, sys.input_op().as_matrix()]);
    let phi = parrott_coisometry_solve(&dstar, &column.into(), tol)?;
    let psi_map = OperatorMatrix::from((&c1 * &g_emb).adjoint());
    let unitary_psi = linalg::isometry_defect(&psi_map).max(linalg::coisometry_defect(&psi_map));
    if unitary_psi > tol.check_tol {
        return Err(Error::KernelExtraction { defect: unitary_psi });
    }
    let normal = phi_coeffs(&omega, tol)?;
    let relation_residual = relation_residual(psi, &normal, &psi_map, &phi)?;
    let unitary_input = linalg::isometry_defect(&sysmat) <= tol.check_tol
        && strong_stability(sys.state_op(), tol).0;
    Ok(InverseConstruction {
        data: omega_to_data_set(&omega, degree),
        phi_isometry_defect: linalg::isometry_defect(&phi),
        omega,
        psi: psi_map,
        phi,
        relation_residual,
        unitary_input,
    })
}

fn relation_residual(
    given: &RedhefferQuadruple,
    normal: &RedhefferQuadruple,
    psi: &Mat,
    phi: &Mat,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for lambda in sample_points() {
        let p = given.eval(lambda)?;
        let f = normal.eval(lambda)?;
        let devs = [
            linalg::norm(&(psi * &p.psi11 - &f.psi11 * phi)),
            linalg::norm(&(psi * &p.psi12 - &f.psi12)),
            linalg::norm(&(&p.psi21 - &f.psi21 * phi)),
            linalg::norm(&(&p.psi22 - &f.psi22)),
        ];
        worst = devs.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

/// A unitary `Θ` on `D_A` reducing `F` that relates two underlying
/// contractions, with the residuals of both readings of the intertwining
/// relation for `ω2`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEquivalence {
    pub theta: OperatorMatrix,
    /// `max(‖(I - P_F) Θ P_F‖, ‖(I - P_F) Θ^* P_F‖)`.
    pub reducing_residual: f64,
    /// `‖ω1 Π_F Θ - ω1' Π_F‖`.
    pub omega1_residual: f64,
    /// `‖ω2 Π_F Θ - Θ ω2' Π_F‖`.
    pub theta_reading_residual: f64,
    /// `‖ω2 Π_F Θ^* - Θ^* ω2' Π_F‖`.
    pub adjoint_reading_residual: f64,
    /// Both coefficient matrices are unitary (isometric `ω`, strongly stable
    /// state operator).
    pub unitary_coefficients: bool,
}

/// Decides whether `ω` and `ω'` are unitarily equivalent through their
/// coefficient realizations; returns `None` when the realizations have
/// different transfer data.
pub fn omega_equivalence(
    omega: &UnderlyingContraction,
    other: &UnderlyingContraction,
    tol: &ToleranceConfig,
) -> Result<Option<OmegaEquivalence>> {
    if omega.t_dim() != other.t_dim() || omega.a_dim() != other.a_dim() {
        return Err(Error::shape(alloc::format!(
            "underlying contractions act on different spaces: ({}, {}) vs ({}, {})",
            omega.t_dim(),
            omega.a_dim(),
            other.t_dim(),
            other.a_dim()
        )));
    }
    let s1 = phi_coeffs(omega, tol)?.realization().clone();
    let s2 = phi_coeffs(other, tol)?.realization().clone();
    if s1.input_dim() != s2.input_dim() {
        return Ok(None);
    }
    let a = omega.a_dim();
    let k = a.max(1);
    let (_, g1) = s1.truncated_ops(k);
    let (_, g2) = s2.truncated_ops(k);
    let theta0 = linalg::polar_unitary(&(linalg::pinv(g2.as_matrix(), tol.rank_tol) * g1.as_matrix()));
    let lhs = linalg::vstack(s2.input_dim(), &[s2.feed_op().as_matrix(), s2.input_op().as_matrix()]);
    let rhs = linalg::vstack(
        s1.input_dim(),
        &[s1.feed_op().as_matrix(), &(&theta0 * s1.input_op().as_matrix())],
    );
    let tau = match douglas_solve(&lhs.into(), &rhs.into(), tol) {
        Ok(t) => t,
        Err(Error::NoFactorization { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if linalg::isometry_defect(&tau).max(linalg::coisometry_defect(&tau)) > tol.check_tol {
        return Ok(None);
    }
    let aligned = LinearSystem::from_parts(
        s2.state_op().clone(),
        s2.input_op() * &tau,
        s2.output_op().clone(),
        s2.feed_op() * &tau,
    )?;
    let Some(theta_sys) = unitary_equivalence(&s1, &aligned, tol)? else {
        return Ok(None);
    };
    let theta = theta_sys.adjoint();
    let pf = omega.f_embedding.as_matrix() * omega.f_embedding.adjoint();
    let qf = linalg::identity(a) - &pf;
    let reducing_residual = linalg::norm(&(&qf * theta.as_matrix() * &pf))
        .max(linalg::norm(&(&qf * theta.adjoint() * &pf)));
    let w1 = omega.omega1_on_defect();
    let w1p = other.omega1_on_defect();
    let w2 = omega.omega2_on_defect();
    let w2p = other.omega2_on_defect();
    let th = theta.as_matrix();
    let tha = theta.adjoint().into_matrix();
    let unitary_coefficients = [omega, other].iter().all(|w| {
        linalg::isometry_defect(&w.stacked()) <= tol.check_tol && w.state_spectral_radius() < 1.0
    });
    Ok(Some(OmegaEquivalence {
        omega1_residual: linalg::norm(&(&w1 * th - &w1p)),
        theta_reading_residual: linalg::norm(&(&w2 * th - th * &w2p)),
        adjoint_reading_residual: linalg::norm(&(&w2 * &tha - &tha * &w2p)),
        reducing_residual,
        theta,
        unitary_coefficients,
    }))
}
