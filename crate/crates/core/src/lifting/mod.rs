//! Lifting data sets `{A, T', U', R, Q}`, their underlying contraction `ω`,
//! the coefficient functions built from `ω`, contractive interpolants and the
//! inverse construction from coefficients back to a data set.

use alloc::format;

use crate::error::{Error, Result};
use crate::opcore::linalg::{self, Mat};
use crate::opcore::{defect, DefectData, OperatorMatrix, ToleranceConfig, C64};
use crate::redheffer::{BlockOperator2, QuadrupleValues, RedhefferQuadruple};
use crate::report::{Check, CheckReport};
use crate::systems::{LinearSystem, TruncatedHardyOperator};

mod interpolant;
mod inverse;

pub use interpolant::{
    density_diagnostic, interpolant, omega_b, singleton_check, verify_interpolant,
    ContractiveInterpolant, DensityReport, OmegaB, SingletonVerdict,
};
pub use inverse::{
    inverse_construction, omega_equivalence, sample_points, InverseConstruction,
    OmegaEquivalence,
};

/// Operators `A: H → H'`, `T': H' → H'` and `R, Q: H₀ → H` of a lifting
/// problem, with the truncation degree used for the lifted space
/// `H' ⊕ H²(D_{T'})`. The isometric lifting `U'` is always the
/// Sz.-Nagy–Schäffer lifting of `T'` (see [`schaffer_lifting`]).
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingDataSet {
    pub a: OperatorMatrix,
    pub t_prime: OperatorMatrix,
    pub r: OperatorMatrix,
    pub q: OperatorMatrix,
    pub degree: usize,
}

impl LiftingDataSet {
    /// Checks that the shapes fit together.
    pub fn new(
        a: OperatorMatrix,
        t_prime: OperatorMatrix,
        r: OperatorMatrix,
        q: OperatorMatrix,
        degree: usize,
    ) -> Result<Self> {
        let (hp, h) = a.shape();
        let ok = t_prime.shape() == (hp, hp)
            && r.nrows() == h
            && q.nrows() == h
            && r.ncols() == q.ncols();
        if !ok {
            return Err(Error::shape(format!(
                "data set shapes do not fit: A {:?}, T' {:?}, R {:?}, Q {:?}",
                a.shape(),
                t_prime.shape(),
                r.shape(),
                q.shape()
            )));
        }
        for m in [&a, &t_prime, &r, &q] {
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self {
            a,
            t_prime,
            r,
            q,
            degree,
        })
    }

    /// Dimension of `H`.
    pub fn h_dim(&self) -> usize {
        self.a.dom_dim()
    }

    /// Dimension of `H'`.
    pub fn h_prime_dim(&self) -> usize {
        self.a.cod_dim()
    }

    /// Dimension of `H₀`.
    pub fn h0_dim(&self) -> usize {
        self.r.dom_dim()
    }

    /// Defect data of `A`.
    pub fn a_defect(&self, tol: &ToleranceConfig) -> Result<DefectData> {
        defect(&self.a, tol)
    }

    /// Defect data of `T'`.
    pub fn t_defect(&self, tol: &ToleranceConfig) -> Result<DefectData> {
        defect(&self.t_prime, tol)
    }

    /// `D_A` in defect-space coordinates, `J_A^* D_A`.
    pub fn a_defect_coordinates(&self, tol: &ToleranceConfig) -> Result<Mat> {
        Ok(self.a_defect(tol)?.coordinates().into_matrix())
    }

    pub fn with_degree(&self, degree: usize) -> Self {
        Self {
            degree,
            ..self.clone()
        }
    }
}

/// Checks `T'AR = AQ`, `R^*R <= Q^*Q` and contractivity of `A` and `T'`.
///
/// Check names: `intertwining:identity`, `intertwining:order`,
/// `contraction:A`, `contraction:T'`.
pub fn validate(data: &LiftingDataSet, tol: &ToleranceConfig) -> CheckReport {
    let mut report = CheckReport::new();
    let lhs = data.t_prime.as_matrix() * data.a.as_matrix() * data.r.as_matrix();
    let rhs = data.a.as_matrix() * data.q.as_matrix();
    report.push(Check::new(
        "intertwining:identity",
        linalg::norm(&(lhs - rhs)),
        tol.check_tol,
    ));
    let gap = data.q.adjoint() * data.q.as_matrix() - data.r.adjoint() * data.r.as_matrix();
    let lowest = linalg::min_eigenvalue(&linalg::hermitian_part(&gap));
    let order_violation = if lowest.is_finite() { (-lowest).max(0.0) } else { 0.0 };
    report.push(Check::new("intertwining:order", order_violation, tol.check_tol));
    report.push(Check::new(
        "contraction:A",
        (data.a.norm() - 1.0).max(0.0),
        tol.check_tol,
    ));
    report.push(Check::new(
        "contraction:T'",
        (data.t_prime.norm() - 1.0).max(0.0),
        tol.check_tol,
    ));
    report
}

/// Sz.-Nagy–Schäffer lifting `[[T', 0], [E D_{T'}, S]]` on
/// `H' ⊕ H²(D_{T'})` truncated at degree `k`; the top degree is shifted out.
pub fn schaffer_lifting(
    t_prime: &OperatorMatrix,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<BlockOperator2> {
    let dt = defect(t_prime, tol)?;
    let t = dt.rank;
    let embed = TruncatedHardyOperator::constant_embedding(t, k);
    let lower_left = embed.as_matrix() * dt.coordinates().as_matrix();
    let shift = TruncatedHardyOperator::shift(t, k);
    BlockOperator2::new(
        t_prime.as_matrix().clone(),
        linalg::zeros(t_prime.nrows(), (k + 1) * t),
        lower_left,
        shift.as_matrix().clone(),
    )
}

/// Contraction `ω = [ω1; ω2]: F → D_{T'} ⊕ D_A`, with `F ⊂ D_A` given by an
/// isometric embedding. All maps are in defect-space coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct UnderlyingContraction {
    pub omega1: OperatorMatrix,
    pub omega2: OperatorMatrix,
    pub f_embedding: OperatorMatrix,
}

impl UnderlyingContraction {
    /// Checks shapes, that the embedding is isometric and that `‖ω‖ <= 1`.
    pub fn new(
        omega1: OperatorMatrix,
        omega2: OperatorMatrix,
        f_embedding: OperatorMatrix,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let f = f_embedding.ncols();
        let ok = omega1.ncols() == f
            && omega2.ncols() == f
            && f_embedding.nrows() == omega2.nrows();
        if !ok {
            return Err(Error::shape(format!(
                "underlying contraction shapes do not fit: ω1 {:?}, ω2 {:?}, F {:?}",
                omega1.shape(),
                omega2.shape(),
                f_embedding.shape()
            )));
        }
        let iso = linalg::isometry_defect(&f_embedding);
        if iso > tol.check_tol {
            return Err(Error::NotIsometric { defect: iso });
        }
        let out = Self {
            omega1,
            omega2,
            f_embedding,
        };
        let norm = out.stacked().norm();
        if norm > 1.0 + tol.check_tol {
            return Err(Error::NotAContraction { norm });
        }
        Ok(out)
    }

    /// Dimension of `D_{T'}`, the codomain of `ω1`.
    pub fn t_dim(&self) -> usize {
        self.omega1.nrows()
    }

    /// Dimension of `D_A`, the codomain of `ω2`.
    pub fn a_dim(&self) -> usize {
        self.omega2.nrows()
    }

    /// Dimension of `F`.
    pub fn f_dim(&self) -> usize {
        self.f_embedding.ncols()
    }

    /// Dimension of `G = D_A ⊖ F`.
    pub fn g_dim(&self) -> usize {
        self.a_dim() - self.f_dim()
    }

    /// `[ω1; ω2]`.
    pub fn stacked(&self) -> OperatorMatrix {
        OperatorMatrix::from(linalg::vstack(
            self.f_dim(),
            &[&self.omega1, &self.omega2],
        ))
    }

    /// Orthonormal basis of `G`.
    pub fn g_embedding(&self) -> Mat {
        linalg::complement_basis(&self.f_embedding, self.a_dim())
    }

    /// `ω1 Π_F` on `D_A`.
    pub fn omega1_on_defect(&self) -> Mat {
        self.omega1.as_matrix() * self.f_embedding.adjoint()
    }

    /// `ω2 Π_F` on `D_A`, the state operator of the coefficient realization.
    pub fn omega2_on_defect(&self) -> Mat {
        self.omega2.as_matrix() * self.f_embedding.adjoint()
    }

    /// Defect data of `ω^*`, on `D_{T'} ⊕ D_A`.
    pub fn star_defect(&self, tol: &ToleranceConfig) -> Result<DefectData> {
        defect(&self.stacked().adjoint(), tol)
    }

    /// Basis-free distance to another contraction on the same ambient
    /// spaces: `max(‖ω1Π_F - ω1'Π_F'‖, ‖ω2Π_F - ω2'Π_F'‖, ‖P_F - P_F'‖)`.
    pub fn distance(&self, other: &UnderlyingContraction) -> f64 {
        if self.t_dim() != other.t_dim() || self.a_dim() != other.a_dim() {
            return f64::INFINITY;
        }
        let pf = |u: &UnderlyingContraction| u.f_embedding.as_matrix() * u.f_embedding.adjoint();
        [
            linalg::norm(&(self.omega1_on_defect() - other.omega1_on_defect())),
            linalg::norm(&(self.omega2_on_defect() - other.omega2_on_defect())),
            linalg::norm(&(pf(self) - pf(other))),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Spectral radius of `ω2 Π_F`.
    pub fn state_spectral_radius(&self) -> f64 {
        linalg::spectral_radius(&self.omega2_on_defect())
    }
}

/// Extracts `ω` from `ω D_A Q = [D_{T'} A R; D_A R]`, with
/// `F = closure(D_A Q H₀)` found by a rank-revealing SVD.
pub fn underlying_contraction(
    data: &LiftingDataSet,
    tol: &ToleranceConfig,
) -> Result<UnderlyingContraction> {
    let da = data.a_defect(tol)?;
    let dt = data.t_defect(tol)?;
    let da_coords = da.coordinates().into_matrix();
    let dt_coords = dt.coordinates().into_matrix();
    let g = &da_coords * data.q.as_matrix();
    let f_embedding = linalg::range_basis(&g, tol.rank_tol, 1.0);
    let rhs = linalg::vstack(
        data.h0_dim(),
        &[
            &(&dt_coords * data.a.as_matrix() * data.r.as_matrix()),
            &(&da_coords * data.r.as_matrix()),
        ],
    );
    let reduced = f_embedding.adjoint() * &g;
    let omega = &rhs * linalg::pinv(&reduced, tol.rank_tol);
    let residual = linalg::norm(&(&omega * &reduced - &rhs));
    if residual > tol.check_tol {
        return Err(Error::InconsistentData { residual });
    }
    let t = dt.rank;
    let f = f_embedding.ncols();
    let omega1 = linalg::sub(&omega, 0, 0, t, f);
    let omega2 = linalg::sub(&omega, t, 0, da.rank, f);
    UnderlyingContraction::new(omega1.into(), omega2.into(), f_embedding.into(), tol)
}

/// Data set realizing a given `ω`: `H = D_{T'} ⊕ D_A`, `H' = D_{T'}`,
/// `H₀ = F`, `A = [I 0]`, `T' = 0`, `R = ω`, `Q` the embedding of `F` into the
/// second slot.
pub fn omega_to_data_set(omega: &UnderlyingContraction, degree: usize) -> LiftingDataSet {
    let (t, a, f) = (omega.t_dim(), omega.a_dim(), omega.f_dim());
    let proj = linalg::hstack(t, &[&linalg::identity(t), &linalg::zeros(t, a)]);
    let q = linalg::vstack(f, &[&linalg::zeros(t, f), &omega.f_embedding]);
    LiftingDataSet::new(
        proj.into(),
        OperatorMatrix::zeros(t, t),
        omega.stacked(),
        q.into(),
        degree,
    )
    .expect("assembled shapes are consistent")
}

/// Coefficient quadruple of `ω`, realized on the state space `D_A` by
/// `Z = ω2 Π_F`, `B = Π_{D_A} D_{ω*}`, `C = [Π_G; ω1 Π_F]` and
/// `D = [0; Π_{D_{T'}} D_{ω*}]`, with input space `D_{ω*}` and output space
/// `G ⊕ D_{T'}`.
pub fn phi_coeffs(omega: &UnderlyingContraction, tol: &ToleranceConfig) -> Result<RedhefferQuadruple> {
    let (t, a) = (omega.t_dim(), omega.a_dim());
    let dstar = omega.star_defect(tol)?;
    let dj = dstar.defect_operator.as_matrix() * dstar.embedding.as_matrix();
    let e_prime = dstar.rank;
    let g_emb = omega.g_embedding();
    let g = g_emb.ncols();
    let z = omega.omega2_on_defect();
    let b = linalg::sub(&dj, t, 0, a, e_prime);
    let d2 = linalg::sub(&dj, 0, 0, t, e_prime);
    let c = linalg::vstack(a, &[&g_emb.adjoint(), &omega.omega1_on_defect()]);
    let d = linalg::vstack(e_prime, &[&linalg::zeros(g, e_prime), &d2]);
    let sys = LinearSystem::new(z.into(), b.into(), c.into(), d.into(), tol)?;
    RedhefferQuadruple::new(sys, g, tol)
}

/// Direct evaluation of the four coefficients of `ω` at `λ` from their
/// defining resolvent formulas, independent of the realization.
pub fn phi_closed_form(
    omega: &UnderlyingContraction,
    lambda: C64,
    tol: &ToleranceConfig,
) -> Result<QuadrupleValues> {
    let (t, a) = (omega.t_dim(), omega.a_dim());
    let dstar = omega.star_defect(tol)?;
    let dj = dstar.defect_operator.as_matrix() * dstar.embedding.as_matrix();
    let e_prime = dstar.rank;
    let res = linalg::try_inverse(
        &(linalg::identity(a) - omega.omega2_on_defect() * lambda),
        crate::systems::RCOND_MIN,
    )
    .ok_or(Error::ResolventSingular)?;
    let pg = omega.g_embedding().adjoint();
    let w1 = omega.omega1_on_defect();
    let to_a = linalg::sub(&dj, t, 0, a, e_prime);
    let to_t = linalg::sub(&dj, 0, 0, t, e_prime);
    Ok(QuadrupleValues {
        psi11: &pg * &res * &to_a * lambda,
        psi12: &pg * &res,
        psi21: &to_t + &w1 * &res * &to_a * lambda,
        psi22: &w1 * &res,
    })
}

#[cfg(test)]
mod tests;
