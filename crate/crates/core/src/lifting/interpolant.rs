use alloc::vec::Vec;

use super::{schaffer_lifting, underlying_contraction, LiftingDataSet};
use crate::error::{Error, Result};
use crate::opcore::linalg::{self, Mat};
use crate::opcore::{classify, defect, OperatorClass, OperatorMatrix, ToleranceConfig};
use crate::redheffer::{gamma_hv, gamma_hv_any, RedhefferQuadruple, SchurParameter};
use crate::report::{Check, CheckReport};
use crate::systems::TruncatedHardyOperator;

/// `B = [A; Γ D_A]: H → H' ⊕ H²(D_{T'})`, truncated at the degree of `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractiveInterpolant {
    pub a_part: OperatorMatrix,
    /// `Γ: D_A → H²(D_{T'})` in defect-space coordinates.
    pub gamma: TruncatedHardyOperator,
    /// `J_A^* D_A: H → D_A`.
    pub a_defect_coordinates: OperatorMatrix,
}

impl ContractiveInterpolant {
    pub fn degree(&self) -> usize {
        self.gamma.degree()
    }

    /// The stacked operator `[A; Γ J_A^* D_A]`.
    pub fn matrix(&self) -> OperatorMatrix {
        let lower = self.gamma.as_matrix() * self.a_defect_coordinates.as_matrix();
        OperatorMatrix::from(linalg::vstack(
            self.a_part.ncols(),
            &[self.a_part.as_matrix(), &lower],
        ))
    }
}

/// `B_V = [A; Γ_{H_V} D_A]` with `H_V` the transform of `V` under `phi`.
///
/// Parameters outside the open ball are accepted as long as the feedback
/// inverse exists at the truncation.
pub fn interpolant(
    data: &LiftingDataSet,
    phi: &RedhefferQuadruple,
    v: &SchurParameter,
    tol: &ToleranceConfig,
) -> Result<ContractiveInterpolant> {
    let k = data.degree;
    let gamma = if v.open_ball() {
        gamma_hv(phi, v, k, tol)?
    } else {
        gamma_hv_any(phi, v, k)?
    };
    let coords = data.a_defect_coordinates(tol)?;
    if coords.nrows() != gamma.ncols() {
        return Err(Error::shape(alloc::format!(
            "coefficient state dimension {} differs from rank of D_A {}",
            gamma.ncols(),
            coords.nrows()
        )));
    }
    let out = ContractiveInterpolant {
        a_part: data.a.clone(),
        gamma,
        a_defect_coordinates: coords.into(),
    };
    let norm = out.matrix().norm();
    if norm > 1.0 + tol.check_tol {
        return Err(Error::NotAContraction { norm });
    }
    Ok(out)
}

/// Checks `Π_{H'} B = A`, the shift identity `U'BR = BQ` on `H'` and degrees
/// below the truncation edge, and `‖B‖ <= 1`.
///
/// Check names: `interpolation:projection`, `interpolation:shift`,
/// `interpolation:contraction`.
pub fn verify_interpolant(
    b: &ContractiveInterpolant,
    data: &LiftingDataSet,
    tol: &ToleranceConfig,
) -> Result<CheckReport> {
    let k = b.degree();
    let bm = b.matrix();
    let hp = data.h_prime_dim();
    let mut report = CheckReport::new();
    let top = linalg::sub(&bm, 0, 0, hp, bm.ncols());
    report.push(Check::new(
        "interpolation:projection",
        linalg::norm(&(top - data.a.as_matrix())),
        0.0,
    ));
    let lifting = schaffer_lifting(&data.t_prime, k, tol)?.assemble();
    if lifting.ncols() != bm.nrows() {
        return Err(Error::shape(alloc::format!(
            "interpolant has {} rows, lifted space has dimension {}",
            bm.nrows(),
            lifting.ncols()
        )));
    }
    let diff = lifting.as_matrix() * bm.as_matrix() * data.r.as_matrix()
        - bm.as_matrix() * data.q.as_matrix();
    let t = b.gamma.codomain_dim();
    let kept = hp + k * t;
    let shift_residual = linalg::norm(&linalg::sub(&diff, 0, 0, kept, diff.ncols()));
    report.push(Check::new("interpolation:shift", shift_residual, tol.check_tol));
    report.push(Check::new(
        "interpolation:contraction",
        (bm.norm() - 1.0).max(0.0),
        tol.check_tol,
    ));
    Ok(report)
}

/// The contraction `ω_B: F_B → D_Γ` with `ω_B D_Γ|_F = D_Γ ω2`, where
/// `F_B = closure(D_Γ F)`, in coordinates of the defect space of `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaB {
    pub omega: OperatorMatrix,
    /// Isometric embedding of `F_B` into `D_Γ` coordinates.
    pub f_embedding: OperatorMatrix,
    /// Rank of `D_Γ`.
    pub defect_rank: usize,
    pub residual: f64,
    pub class: OperatorClass,
}

/// Computes `ω_B` for the interpolant `b` of `data`.
pub fn omega_b(
    data: &LiftingDataSet,
    b: &ContractiveInterpolant,
    tol: &ToleranceConfig,
) -> Result<OmegaB> {
    let omega = underlying_contraction(data, tol)?;
    let dg = defect(b.gamma.operator(), tol)?;
    let coords = dg.coordinates().into_matrix();
    let image = &coords * omega.f_embedding.as_matrix();
    let fb = linalg::range_basis(&image, tol.rank_tol, 1.0);
    let reduced = fb.adjoint() * &image;
    let target = &coords * omega.omega2.as_matrix();
    let w = &target * linalg::pinv(&reduced, tol.rank_tol);
    let residual = linalg::norm(&(&w * &reduced - &target));
    if residual > tol.check_tol {
        return Err(Error::InconsistentData { residual });
    }
    let w = OperatorMatrix::from(w);
    let class = classify(&w, tol)?;
    Ok(OmegaB {
        omega: w,
        f_embedding: fb.into(),
        defect_rank: dg.rank,
        residual,
        class,
    })
}

/// Outcome of [`singleton_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SingletonVerdict {
    pub singleton: bool,
    pub f_b_rank: usize,
    pub defect_rank: usize,
    pub omega_b_class: OperatorClass,
}

/// Whether `B` is produced by exactly one parameter: `F_B = D_Γ` or `ω_B`
/// co-isometric.
pub fn singleton_check(
    data: &LiftingDataSet,
    b: &ContractiveInterpolant,
    tol: &ToleranceConfig,
) -> Result<SingletonVerdict> {
    let wb = omega_b(data, b, tol)?;
    let f_b_rank = wb.f_embedding.ncols();
    Ok(SingletonVerdict {
        singleton: f_b_rank == wb.defect_rank || wb.class.is_coisometric(),
        f_b_rank,
        defect_rank: wb.defect_rank,
        omega_b_class: wb.class,
    })
}

/// Per-degree evidence on the density of `Γ_{Φ12} D_A` in `H²(G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    /// Rank of the truncated `Γ_{Φ12}` at degrees `0..=K`.
    pub ranks: Vec<usize>,
    /// `(K + 1) dim G`.
    pub required: Vec<usize>,
    pub dense: Vec<bool>,
    /// The constants `E_G G` lie in the truncated range.
    pub contains_constants: Vec<bool>,
    /// The backward shift maps the degree-`K` range into the degree-`K-1`
    /// range (vacuous at `K = 0`).
    pub backward_shift_invariant: Vec<bool>,
    /// The backward shift maps the degree-`K` range onto the degree-`K-1`
    /// range (vacuous at `K = 0`).
    pub backward_shift_onto: Vec<bool>,
}

fn subspace_residual(basis: &Mat, vectors: &Mat) -> f64 {
    let proj = basis * basis.adjoint();
    linalg::norm(&(vectors - proj * vectors))
}

/// Rank profile of the truncated `Γ_{Φ12}` for `K = 0..=kmax`.
pub fn density_diagnostic(
    phi: &RedhefferQuadruple,
    kmax: usize,
    tol: &ToleranceConfig,
) -> DensityReport {
    let g = phi.dims().param_in;
    let check = libm::sqrt(tol.check_tol);
    let mut out = DensityReport {
        ranks: Vec::new(),
        required: Vec::new(),
        dense: Vec::new(),
        contains_constants: Vec::new(),
        backward_shift_invariant: Vec::new(),
        backward_shift_onto: Vec::new(),
    };
    let [_, c12, _, _] = phi.taylor(kmax);
    let mut previous: Option<Mat> = None;
    for k in 0..=kmax {
        let gamma = TruncatedHardyOperator::block_column(&c12[..=k], phi.dims().state, g);
        let basis = linalg::range_basis(gamma.as_matrix(), tol.rank_tol, 1.0);
        let rank = basis.ncols();
        let required = (k + 1) * g;
        let constants = TruncatedHardyOperator::constant_embedding(g, k);
        out.ranks.push(rank);
        out.required.push(required);
        out.dense.push(rank == required);
        out.contains_constants
            .push(subspace_residual(&basis, constants.as_matrix()) <= check);
        match &previous {
            None => {
                out.backward_shift_invariant.push(true);
                out.backward_shift_onto.push(true);
            }
            Some(prev) => {
                let shifted = linalg::sub(&basis, g, 0, k * g, rank);
                out.backward_shift_invariant
                    .push(subspace_residual(prev, &shifted) <= check);
                let shifted_rank = linalg::range_basis(&shifted, tol.rank_tol, 1.0).ncols();
                out.backward_shift_onto.push(shifted_rank == prev.ncols());
            }
        }
        previous = Some(basis);
    }
    out
}
