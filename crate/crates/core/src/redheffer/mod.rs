//! Redheffer quadruples and the linear fractional map
//! `V ↦ Ψ22 + Ψ21 V (I - Ψ11 V)^{-1} Ψ12`, together with coefficient
//! matrices, Redheffer products, the rotated matrix `K_V`, uniqueness
//! diagnostics, the harmonic maximum principle and norm bounds.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::opcore::linalg::{self, Mat};
use crate::opcore::{classify, defect, OperatorClass, OperatorMatrix, ToleranceConfig, C64};
use crate::systems::{HardyDomain, TruncatedHardyOperator, RCOND_MIN};

mod types;

pub use types::{
    BlockOperator2, CoefficientMatrix, QuadrupleDims, QuadrupleValues, RedhefferQuadruple,
    SchurKind, SchurParameter,
};

fn check_param_dims(psi: &RedhefferQuadruple, v: &SchurParameter) -> Result<()> {
    let d = psi.dims();
    if v.input_dim() != d.param_in || v.output_dim() != d.param_out {
        return Err(Error::shape(format!(
            "parameter maps C^{} -> C^{}, quadruple expects C^{} -> C^{}",
            v.input_dim(),
            v.output_dim(),
            d.param_in,
            d.param_out
        )));
    }
    Ok(())
}

/// `Ψ22(λ) + Ψ21(λ) V(λ) (I - Ψ11(λ) V(λ))^{-1} Ψ12(λ)`.
pub fn transform_eval(
    psi: &RedhefferQuadruple,
    v: &SchurParameter,
    lambda: C64,
) -> Result<OperatorMatrix> {
    check_param_dims(psi, v)?;
    let q = psi.eval(lambda)?;
    let vl = v.eval(lambda)?;
    let e = psi.dims().param_in;
    let inner = linalg::identity(e) - &q.psi11 * &vl;
    let inv = linalg::try_inverse(&inner, RCOND_MIN).ok_or(Error::FractionSingular)?;
    Ok(OperatorMatrix::from(q.psi22 + q.psi21 * vl * inv * q.psi12))
}

/// Truncated coefficient matrix at degree `k`.
pub fn coefficient_matrix(psi: &RedhefferQuadruple, k: usize) -> CoefficientMatrix {
    let d = psi.dims();
    let [c11, c12, c21, c22] = psi.taylor(k);
    CoefficientMatrix {
        m11: TruncatedHardyOperator::toeplitz(&c11, d.param_out, d.param_in),
        g12: TruncatedHardyOperator::block_column(&c12, d.state, d.param_in),
        m21: TruncatedHardyOperator::toeplitz(&c21, d.param_out, d.output),
        g22: TruncatedHardyOperator::block_column(&c22, d.state, d.output),
    }
}

/// `Γ22 + M21 M_V (I - M11 M_V)^{-1} Γ12` from precomputed truncated blocks.
fn gamma_from_blocks(k0: &CoefficientMatrix, mv: &Mat) -> Result<Mat> {
    let n = k0.m11.nrows();
    let inner = linalg::identity(n) - k0.m11.as_matrix() * mv;
    let inv = linalg::try_inverse(&inner, RCOND_MIN).ok_or(Error::FractionSingular)?;
    Ok(k0.g22.as_matrix() + k0.m21.as_matrix() * mv * inv * k0.g12.as_matrix())
}

fn wrap_gamma(m: Mat, psi: &RedhefferQuadruple, k: usize) -> TruncatedHardyOperator {
    let d = psi.dims();
    TruncatedHardyOperator::from_matrix(m, k, HardyDomain::Coefficient(d.state), d.output)
}

/// Truncated `Γ_{H_V}` for an open-ball parameter.
pub fn gamma_hv(
    psi: &RedhefferQuadruple,
    v: &SchurParameter,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<TruncatedHardyOperator> {
    check_param_dims(psi, v)?;
    let mv = v.open_ball_multiplication(k, tol)?;
    let k0 = coefficient_matrix(psi, k);
    Ok(wrap_gamma(gamma_from_blocks(&k0, &mv)?, psi, k))
}

/// Truncated `Γ_{H_V}` for any Schur parameter with `I - M11 M_V` invertible.
pub fn gamma_hv_any(
    psi: &RedhefferQuadruple,
    v: &SchurParameter,
    k: usize,
) -> Result<TruncatedHardyOperator> {
    check_param_dims(psi, v)?;
    let mv = v.multiplication(k);
    let k0 = coefficient_matrix(psi, k);
    Ok(wrap_gamma(gamma_from_blocks(&k0, &mv)?, psi, k))
}

/// Redheffer product of `M1 = [[Z1, B1], [C1, D1]]: X ⊕ U1 → X' ⊕ Y1` and
/// `M2 = [[Z2, B2], [C2, D2]]: X' ⊕ U2 → X ⊕ Y2`, mapping `U1 ⊕ U2` into
/// `Y1 ⊕ Y2`.
pub fn redheffer_product(m1: &BlockOperator2, m2: &BlockOperator2) -> Result<BlockOperator2> {
    let (z1, b1, c1, d1) = (&m1.top_left, &m1.top_right, &m1.bottom_left, &m1.bottom_right);
    let (z2, b2, c2, d2) = (&m2.top_left, &m2.top_right, &m2.bottom_left, &m2.bottom_right);
    let x = z1.ncols();
    let xp = z1.nrows();
    if z2.shape() != (x, xp) || b2.nrows() != x || c2.ncols() != xp {
        return Err(Error::shape(format!(
            "Redheffer product: state blocks {:?} and {:?} do not chain",
            z1.shape(),
            z2.shape()
        )));
    }
    let inv_x = linalg::try_inverse(&(linalg::identity(x) - z2 * z1), RCOND_MIN)
        .ok_or(Error::FeedbackSingular)?;
    let inv_xp = linalg::try_inverse(&(linalg::identity(xp) - z1 * z2), RCOND_MIN)
        .ok_or(Error::FeedbackSingular)?;
    BlockOperator2::new(
        d1 + c1 * z2 * &inv_xp * b1,
        c1 * &inv_x * b2,
        c2 * &inv_xp * b1,
        d2 + c2 * z1 * &inv_x * b2,
    )
}

/// Rotation `[[M_V, D_{M_V*}], [-D_{M_V}, M_V^*]]` on truncated spaces.
pub fn rotation(v: &SchurParameter, k: usize, tol: &ToleranceConfig) -> Result<BlockOperator2> {
    let mv = v.open_ball_multiplication(k, tol)?.into_operator();
    rotation_of(&mv, tol)
}

fn rotation_of(mv: &OperatorMatrix, tol: &ToleranceConfig) -> Result<BlockOperator2> {
    let d = defect(mv, tol)?.defect_operator.into_matrix();
    let dstar = defect(&mv.adjoint(), tol)?.defect_operator.into_matrix();
    BlockOperator2::new(mv.as_matrix().clone(), dstar, -d, mv.adjoint().into_matrix())
}

/// Closed-form `K_V = R_V ∘ K_0`:
///
/// ```text
/// [[M_V^* - D_{M_V} M11 (I - M_V M11)^{-1} D_{M_V*},  -D_{M_V} (I - M11 M_V)^{-1} Γ12],
///  [M21 (I - M_V M11)^{-1} D_{M_V*},                  Γ22 + M21 M_V (I - M11 M_V)^{-1} Γ12]]
/// ```
pub fn k_v(
    psi: &RedhefferQuadruple,
    v: &SchurParameter,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<BlockOperator2> {
    check_param_dims(psi, v)?;
    let mv_op = v.open_ball_multiplication(k, tol)?.into_operator();
    let k0 = coefficient_matrix(psi, k);
    let mv = mv_op.as_matrix();
    let dv = defect(&mv_op, tol)?.defect_operator.into_matrix();
    let dv_star = defect(&mv_op.adjoint(), tol)?.defect_operator.into_matrix();
    let (m11, g12, m21, g22) = (
        k0.m11.as_matrix(),
        k0.g12.as_matrix(),
        k0.m21.as_matrix(),
        k0.g22.as_matrix(),
    );
    let n_out = mv.nrows();
    let n_in = mv.ncols();
    let inv_out = linalg::try_inverse(&(linalg::identity(n_out) - mv * m11), RCOND_MIN)
        .ok_or(Error::FeedbackSingular)?;
    let inv_in = linalg::try_inverse(&(linalg::identity(n_in) - m11 * mv), RCOND_MIN)
        .ok_or(Error::FeedbackSingular)?;
    BlockOperator2::new(
        mv.adjoint() - &dv * m11 * &inv_out * &dv_star,
        -(&dv * &inv_in * g12),
        m21 * &inv_out * &dv_star,
        g22 + m21 * mv * &inv_in * g12,
    )
}

/// Entrywise distance between [`k_v`] and `rotation(V) ∘ K_0`.
pub fn k_v_cross_check(
    psi: &RedhefferQuadruple,
    v: &SchurParameter,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<f64> {
    let direct = k_v(psi, v, k, tol)?;
    let product = redheffer_product(&rotation(v, k, tol)?, &coefficient_matrix(psi, k).as_block())?;
    Ok(direct.max_entry_distance(&product))
}

/// Outcome of [`range_singleton_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SingletonReport {
    pub singleton: bool,
    /// All Taylor coefficients of `Ψ12` up to `K` vanish.
    pub psi12_vanishes: bool,
    /// All Taylor coefficients of `Ψ21` up to `K` vanish.
    pub psi21_vanishes: bool,
    /// For a co-isometric coefficient matrix: `E = {0}` or `Γ_{Ψ22}` is
    /// co-isometric. `None` when the coefficient matrix is not co-isometric.
    pub coisometric_criterion: Option<bool>,
    /// Two constant parameters whose transforms differ, when not a singleton.
    pub witness: Option<(OperatorMatrix, OperatorMatrix)>,
}

fn max_coeff_norm(c: &[Mat]) -> f64 {
    c.iter().map(linalg::norm).fold(0.0, f64::max)
}

/// Constant grid `{0} ∪ {±½, ±½i}·E_ij` over the elementary matrices of
/// `E → E'`, zero first.
pub fn constant_grid(param_in: usize, param_out: usize) -> Vec<OperatorMatrix> {
    let mut out = Vec::with_capacity(1 + 4 * param_in * param_out);
    out.push(OperatorMatrix::zeros(param_out, param_in));
    let values = [
        C64::new(0.5, 0.0),
        C64::new(-0.5, 0.0),
        C64::new(0.0, 0.5),
        C64::new(0.0, -0.5),
    ];
    for i in 0..param_out {
        for j in 0..param_in {
            for &c in &values {
                let mut m = linalg::zeros(param_out, param_in);
                m[(i, j)] = c;
                out.push(OperatorMatrix::from(m));
            }
        }
    }
    out
}

fn grid_transforms(
    psi: &RedhefferQuadruple,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<(OperatorMatrix, Mat)>> {
    let d = psi.dims();
    constant_grid(d.param_in, d.param_out)
        .into_iter()
        .map(|v| {
            let p = SchurParameter::constant(v.clone(), tol)?;
            let g = gamma_hv(psi, &p, k, tol)?.into_operator().into_matrix();
            Ok((v, g))
        })
        .collect()
}

/// Separation threshold for truncated transforms on the constant grid.
fn separation(tol: &ToleranceConfig) -> f64 {
    libm::sqrt(tol.check_tol)
}

/// Decides whether `V ↦ H_V` is constant, from the vanishing of `Ψ12` or
/// `Ψ21` up to degree `k`. When it is not, a separating pair is searched on
/// the constant grid.
pub fn range_singleton_check(
    psi: &RedhefferQuadruple,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<SingletonReport> {
    let [_, c12, c21, _] = psi.taylor(k);
    let psi12_vanishes = max_coeff_norm(&c12) <= tol.check_tol;
    let psi21_vanishes = max_coeff_norm(&c21) <= tol.check_tol;
    let d = psi.dims();
    let k0 = coefficient_matrix(psi, k);
    let coisometric_criterion = if linalg::coisometry_defect(&k0.assemble()) <= tol.check_tol {
        Some(d.param_in == 0 || linalg::coisometry_defect(&k0.g22) <= tol.check_tol)
    } else {
        None
    };
    let singleton = psi12_vanishes || psi21_vanishes;
    let witness = if singleton {
        None
    } else {
        let grid = grid_transforms(psi, k, tol)?;
        let (v0, g0) = &grid[0];
        grid.iter()
            .skip(1)
            .find(|(_, g)| linalg::norm(&(g - g0)) > separation(tol))
            .map(|(v, _)| (v0.clone(), v.clone()))
    };
    Ok(SingletonReport {
        singleton,
        psi12_vanishes,
        psi21_vanishes,
        coisometric_criterion,
        witness,
    })
}

/// Two distinct constant parameters on the grid with equal truncated
/// `Γ_{H_V}` (within `check_tol`).
pub fn nonuniqueness_witness(
    psi: &RedhefferQuadruple,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<Option<(OperatorMatrix, OperatorMatrix)>> {
    let grid = grid_transforms(psi, k, tol)?;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            if linalg::norm(&(&grid[i].1 - &grid[j].1)) <= tol.check_tol {
                return Ok(Some((grid[i].0.clone(), grid[j].0.clone())));
            }
        }
    }
    Ok(None)
}

/// Which side of the maximum-principle dichotomy the samples support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxPrincipleVerdict {
    /// Every truncated norm is at most `1 - delta`.
    StrictlyBelowOne { delta: f64 },
    /// Every truncated norm is within `check_tol` of one.
    NormOne,
    /// Neither: the samples contradict the dichotomy at this truncation.
    Mixed,
}

/// Evidence for the maximum principle at a fixed truncation degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleReport {
    pub degree: usize,
    /// `‖Γ_{H_V}‖` at degree `K`, one per sample.
    pub norms: Vec<f64>,
    /// The same norms at degree `K - 1` (equal to `norms` when `K = 0`).
    pub norms_previous_degree: Vec<f64>,
    /// Truncated norms never decrease from `K - 1` to `K`.
    pub monotone_in_degree: bool,
    pub verdict: MaxPrincipleVerdict,
}

impl MaxPrincipleReport {
    pub fn dichotomy_holds(&self) -> bool {
        !matches!(self.verdict, MaxPrincipleVerdict::Mixed) && self.monotone_in_degree
    }
}

/// Truncated norms of `Γ_{H_V}` over the samples, with the dichotomy verdict.
pub fn max_principle_suite(
    psi: &RedhefferQuadruple,
    samples: &[SchurParameter],
    k: usize,
    tol: &ToleranceConfig,
) -> Result<MaxPrincipleReport> {
    let mut norms = Vec::with_capacity(samples.len());
    let mut previous = Vec::with_capacity(samples.len());
    for v in samples {
        let g = gamma_hv(psi, v, k, tol)?;
        norms.push(g.norm());
        let prev = if k == 0 {
            g.norm()
        } else {
            gamma_hv(psi, v, k - 1, tol)?.norm()
        };
        previous.push(prev);
    }
    let monotone_in_degree = norms
        .iter()
        .zip(&previous)
        .all(|(n, p)| *p <= n + tol.check_tol);
    let top = norms.iter().copied().fold(0.0, f64::max);
    let verdict = if norms.iter().all(|n| (n - 1.0).abs() <= tol.check_tol) {
        MaxPrincipleVerdict::NormOne
    } else if top < 1.0 - tol.check_tol {
        MaxPrincipleVerdict::StrictlyBelowOne { delta: 1.0 - top }
    } else {
        MaxPrincipleVerdict::Mixed
    };
    Ok(MaxPrincipleReport {
        degree: k,
        norms,
        norms_previous_degree: previous,
        monotone_in_degree,
        verdict,
    })
}

/// Outcome of [`kernel_inclusion_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInclusionReport {
    pub holds: bool,
    /// Orthonormal basis of `Ker D_{Γ_{H_V}}`, the vectors `Γ_{H_V}` keeps
    /// isometrically.
    pub kernel: OperatorMatrix,
    /// `max ‖(I - Γ_{H_Ṽ}^* Γ_{H_Ṽ}) u‖` over the basis.
    pub inclusion_residual: f64,
    /// `max ‖Γ_{Ψ12} u‖` over the basis.
    pub psi12_residual: f64,
    /// `max ‖Γ_{H_Ṽ} u - Γ_{Ψ22} u‖` over the basis.
    pub transfer_residual: f64,
}

/// Basis of the right singular vectors of `g` at singular value one.
fn isometric_directions(g: &Mat, tol: &ToleranceConfig) -> Mat {
    let s = linalg::svd(g);
    let count = s.s.iter().filter(|&&x| x >= 1.0 - tol.check_tol).count();
    s.v.columns(0, count).into_owned()
}

/// Checks `Ker D_{Γ_{H_V}} ⊂ Ker D_{Γ_{H_Ṽ}}` and the mechanism behind it:
/// kernel vectors are annihilated by `Γ_{Ψ12}`, so `Γ_{H_Ṽ} u = Γ_{Ψ22} u`.
pub fn kernel_inclusion_check(
    psi: &RedhefferQuadruple,
    v: &SchurParameter,
    other: &SchurParameter,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<KernelInclusionReport> {
    let g = gamma_hv(psi, v, k, tol)?;
    let g_other = gamma_hv_any(psi, other, k)?;
    let k0 = coefficient_matrix(psi, k);
    let kernel = isometric_directions(&g, tol);
    let d_other = linalg::identity(g_other.ncols()) - g_other.adjoint() * g_other.as_matrix();
    let col_max = |m: Mat| -> f64 {
        m.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    };
    let inclusion_residual = col_max(&d_other * &kernel);
    let psi12_residual = col_max(k0.g12.as_matrix() * &kernel);
    let transfer_residual = col_max((g_other.as_matrix() - k0.g22.as_matrix()) * &kernel);
    Ok(KernelInclusionReport {
        holds: inclusion_residual <= tol.check_tol,
        kernel: OperatorMatrix::from(kernel),
        inclusion_residual,
        psi12_residual,
        transfer_residual,
    })
}

/// Values of the three norm bounds for one vector `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    /// `‖Γ_{H_V} u‖²`.
    pub lhs: f64,
    pub rhs1: f64,
    pub rhs2: f64,
    /// `None` when the observability columns are not isometric at `K`.
    pub rhs3: Option<f64>,
    /// Truncated `‖M_V‖`.
    pub mv_norm: f64,
    /// Truncated `‖I - M_{Ψ11} M_V‖`.
    pub feedback_norm: f64,
    /// Isometry defect of `[Γ_{Ψ12}; Γ_{Ψ22}]` deciding whether `rhs3` applies.
    pub observability_isometry_defect: f64,
}

impl BoundsReport {
    /// Smallest `rhs - lhs` over the applicable bounds.
    pub fn min_slack(&self) -> f64 {
        let mut s = (self.rhs1 - self.lhs).min(self.rhs2 - self.lhs);
        if let Some(r3) = self.rhs3 {
            s = s.min(r3 - self.lhs);
        }
        s
    }
}

/// Evaluates the three upper bounds on `‖Γ_{H_V} u‖²`:
///
/// ```text
/// rhs1 = ‖u‖² - (1 - m²)/n² ‖Γ12 u‖²
/// rhs2 = ‖u‖² - (1 - m)/(1 + m) ‖Γ12 u‖²
/// rhs3 = 2m/(1 + m) ‖u‖² + (1 - m)/(1 + m) ‖Γ22 u‖²
/// ```
///
/// with `m = ‖M_V‖` and `n = ‖I - M11 M_V‖`. `rhs3` requires isometric
/// observability columns.
pub fn bounds_check(
    psi: &RedhefferQuadruple,
    v: &SchurParameter,
    u: &Mat,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<BoundsReport> {
    let d = psi.dims();
    if u.shape() != (d.state, 1) {
        return Err(Error::shape(format!(
            "bounds vector must be {}x1, got {:?}",
            d.state,
            u.shape()
        )));
    }
    check_param_dims(psi, v)?;
    let mv = v.open_ball_multiplication(k, tol)?;
    let k0 = coefficient_matrix(psi, k);
    let g = gamma_from_blocks(&k0, &mv)?;
    let m = mv.norm();
    let n = linalg::norm(&(linalg::identity(k0.m11.nrows()) - k0.m11.as_matrix() * mv.as_matrix()));
    let sq = |x: &Mat| x.norm_squared();
    let uu = sq(u);
    let lhs = sq(&(&g * u));
    let g12u = sq(&(k0.g12.as_matrix() * u));
    let g22u = sq(&(k0.g22.as_matrix() * u));
    let factor2 = (1.0 - m) / (1.0 + m);
    let rhs1 = if n > 0.0 {
        uu - (1.0 - m * m) / (n * n) * g12u
    } else {
        uu
    };
    let rhs2 = uu - factor2 * g12u;
    let iso = k0.observability_isometry_defect();
    let rhs3 = (iso <= tol.check_tol).then(|| 2.0 * m / (1.0 + m) * uu + factor2 * g22u);
    Ok(BoundsReport {
        lhs,
        rhs1,
        rhs2,
        rhs3,
        mv_norm: m,
        feedback_norm: n,
        observability_isometry_defect: iso,
    })
}

/// Operator-norm forms of the bounds, taken over all unit vectors `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    /// Truncated `‖Γ_{H_V}‖`.
    pub norm: f64,
    /// `sqrt(1 - (1 - m)/(1 + m) σ_min(Γ12)²)`.
    pub bound2: f64,
    /// `sqrt(2m/(1 + m) + (1 - m)/(1 + m) ‖Γ22‖²)`, when the observability
    /// columns are isometric.
    pub bound3: Option<f64>,
    pub mv_norm: f64,
}

/// Truncated norm of `Γ_{H_V}` with the two norm-level bounds.
pub fn norm_bounds(
    psi: &RedhefferQuadruple,
    v: &SchurParameter,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<NormBounds> {
    check_param_dims(psi, v)?;
    let mv = v.open_ball_multiplication(k, tol)?;
    let k0 = coefficient_matrix(psi, k);
    let g = gamma_from_blocks(&k0, &mv)?;
    let m = mv.norm();
    let factor = (1.0 - m) / (1.0 + m);
    let smin = linalg::min_singular_value(k0.g12.as_matrix());
    let smin = if smin.is_finite() { smin } else { 0.0 };
    let bound2 = math::sqrt((1.0 - factor * smin * smin).max(0.0));
    let bound3 = (k0.observability_isometry_defect() <= tol.check_tol).then(|| {
        let n22 = linalg::norm(k0.g22.as_matrix());
        math::sqrt(2.0 * m / (1.0 + m) + factor * n22 * n22)
    });
    Ok(NormBounds {
        norm: linalg::norm(&g),
        bound2,
        bound3,
        mv_norm: m,
    })
}

/// Norm class of a block operator.
pub fn block_class(m: &BlockOperator2, tol: &ToleranceConfig) -> Result<OperatorClass> {
    classify(&m.assemble(), tol)
}
