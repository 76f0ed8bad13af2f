//! Complex operator algebra: the matrix carrier for every Hilbert-space
//! operator, contraction classes, defect operators, Douglas factorization and
//! the co-isometric Parrott solve.

use alloc::format;
use core::ops::{Add, Deref, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::math;

pub mod linalg;

use linalg::Mat;

pub type C64 = nalgebra::Complex<f64>;

/// A bounded operator between finite-dimensional spaces, stored as a dense
/// complex matrix with `rows = dim(codomain)` and `cols = dim(domain)`.
///
/// Zero-dimensional domains and codomains are legal and are represented by
/// empty matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(Mat);

impl OperatorMatrix {
    /// Wraps `entries`, rejecting NaN and infinite entries.
    pub fn new(entries: Mat) -> Result<Self> {
        if !linalg::is_finite(&entries) {
            return Err(Error::NonFinite);
        }
        Ok(Self(entries))
    }

    pub fn zeros(cod_dim: usize, dom_dim: usize) -> Self {
        Self(linalg::zeros(cod_dim, dom_dim))
    }

    pub fn identity(n: usize) -> Self {
        Self(linalg::identity(n))
    }

    /// Real matrix from row-major data.
    pub fn from_real(cod_dim: usize, dom_dim: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), cod_dim * dom_dim);
        Self(Mat::from_fn(cod_dim, dom_dim, |i, j| C64::new(data[i * dom_dim + j], 0.0)))
    }

    /// Complex matrix from row-major data.
    pub fn from_complex(cod_dim: usize, dom_dim: usize, data: &[C64]) -> Self {
        assert_eq!(data.len(), cod_dim * dom_dim);
        Self(Mat::from_fn(cod_dim, dom_dim, |i, j| data[i * dom_dim + j]))
    }

    pub fn dom_dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn cod_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Operator norm.
    pub fn norm(&self) -> f64 {
        linalg::norm(&self.0)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn is_finite(&self) -> bool {
        linalg::is_finite(&self.0)
    }

    /// `‖self - other‖` in operator norm; panics on a shape mismatch.
    pub fn distance(&self, other: &OperatorMatrix) -> f64 {
        linalg::norm(&(&self.0 - &other.0))
    }
}

impl Deref for OperatorMatrix {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

impl From<Mat> for OperatorMatrix {
    fn from(m: Mat) -> Self {
        Self(m)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<&Mat> for OperatorMatrix {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        self.0 * rhs
    }
}

impl Mul<OperatorMatrix> for &Mat {
    type Output = Mat;
    fn mul(self, rhs: OperatorMatrix) -> Mat {
        self * rhs.0
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix(-&self.0)
    }
}

/// Numerical tolerances used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Relative singular value / eigenvalue cutoff for rank decisions.
    pub rank_tol: f64,
    /// Tolerance for asserted identities (residual norms).
    pub check_tol: f64,
    /// Margin separating strict contractions from contractions.
    pub norm_slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            check_tol: 1e-9,
            norm_slack: 1e-6,
        }
    }
}

impl ToleranceConfig {
    /// Checks `0 < rank_tol <= check_tol <= norm_slack < 1`.
    pub fn validated(self) -> Result<Self> {
        let ok = self.rank_tol > 0.0
            && self.rank_tol <= self.check_tol
            && self.check_tol <= self.norm_slack
            && self.norm_slack < 1.0;
        if ok {
            Ok(self)
        } else {
            Err(Error::BadDims(format!(
                "tolerances must satisfy 0 < rank_tol <= check_tol <= norm_slack < 1, got {:?}",
                self
            )))
        }
    }
}

/// Norm class of an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorClass {
    StrictContraction,
    Contraction,
    Isometry,
    CoIsometry,
    Unitary,
    Expansion,
}

impl OperatorClass {
    /// Whether the class is at most norm one.
    pub fn is_contractive(self) -> bool {
        !matches!(self, OperatorClass::Expansion)
    }

    pub fn is_isometric(self) -> bool {
        matches!(self, OperatorClass::Isometry | OperatorClass::Unitary)
    }

    pub fn is_coisometric(self) -> bool {
        matches!(self, OperatorClass::CoIsometry | OperatorClass::Unitary)
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorClass::StrictContraction => "strict_contraction",
            OperatorClass::Contraction => "contraction",
            OperatorClass::Isometry => "isometry",
            OperatorClass::CoIsometry => "co_isometry",
            OperatorClass::Unitary => "unitary",
            OperatorClass::Expansion => "expansion",
        }
    }
}

/// Classifies `m` by its norm and its isometry / co-isometry defects.
///
/// Unitary takes precedence over isometry and co-isometry, and those over
/// the plain contraction classes.
pub fn classify(m: &OperatorMatrix, tol: &ToleranceConfig) -> Result<OperatorClass> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = m.norm();
    if norm > 1.0 + tol.check_tol {
        return Ok(OperatorClass::Expansion);
    }
    let iso = linalg::isometry_defect(m) <= tol.check_tol;
    let coiso = linalg::coisometry_defect(m) <= tol.check_tol;
    Ok(match (iso, coiso) {
        (true, true) => OperatorClass::Unitary,
        (true, false) => OperatorClass::Isometry,
        (false, true) => OperatorClass::CoIsometry,
        _ if norm <= 1.0 - tol.norm_slack => OperatorClass::StrictContraction,
        _ => OperatorClass::Contraction,
    })
}

/// Defect operator `D_N = (I - N^* N)^{1/2}` together with an isometric
/// embedding whose range is the defect space.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectData {
    pub defect_operator: OperatorMatrix,
    /// Isometry `J` with `range(J) = range(D_N)`; columns are a canonical
    /// basis of the defect space.
    pub embedding: OperatorMatrix,
    pub rank: usize,
}

impl DefectData {
    /// Dimension of the ambient space (the domain of `N`).
    pub fn ambient_dim(&self) -> usize {
        self.defect_operator.dom_dim()
    }

    /// `D_N` read into defect-space coordinates: `J^* D_N`.
    pub fn coordinates(&self) -> OperatorMatrix {
        OperatorMatrix(self.embedding.adjoint() * self.defect_operator.as_matrix())
    }

    /// `D_N` restricted to the defect space, in defect-space coordinates:
    /// `J^* D_N J`, Hermitian positive definite.
    pub fn compressed(&self) -> OperatorMatrix {
        let j = self.embedding.as_matrix();
        OperatorMatrix(j.adjoint() * self.defect_operator.as_matrix() * j)
    }
}

/// Computes the defect data of the contraction `n`.
///
/// Eigenvalues of `I - N^* N` are clamped at zero before the square root is
/// taken. The defect space keeps eigenvectors whose eigenvalue exceeds
/// `rank_tol * max(lambda_max, 1)`.
pub fn defect(n: &OperatorMatrix, tol: &ToleranceConfig) -> Result<DefectData> {
    if !n.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = n.norm();
    if norm > 1.0 + tol.check_tol {
        return Err(Error::NotAContraction { norm });
    }
    let dim = n.dom_dim();
    let gram = linalg::identity(dim) - n.adjoint() * n.as_matrix();
    let (vals, vecs) = linalg::hermitian_eigen(&gram);
    let top = vals.first().copied().unwrap_or(0.0).max(1.0);
    let rank = vals.iter().filter(|&&l| l > tol.rank_tol * top).count();
    let defect_operator = linalg::psd_sqrt(&gram);
    let embedding = linalg::canonical_basis(&vecs.columns(0, rank).into_owned());
    Ok(DefectData {
        defect_operator: OperatorMatrix(defect_operator),
        embedding: OperatorMatrix(embedding),
        rank,
    })
}

/// Douglas factorization: the minimal-norm `Λ` with `G1 Λ = G2`.
pub fn douglas_solve(
    g1: &OperatorMatrix,
    g2: &OperatorMatrix,
    tol: &ToleranceConfig,
) -> Result<OperatorMatrix> {
    if g1.cod_dim() != g2.cod_dim() {
        return Err(Error::shape(format!(
            "douglas_solve: codomains differ ({} vs {})",
            g1.cod_dim(),
            g2.cod_dim()
        )));
    }
    if !g1.is_finite() || !g2.is_finite() {
        return Err(Error::NonFinite);
    }
    let lambda = linalg::pinv(g1, tol.rank_tol) * g2.as_matrix();
    let residual = linalg::norm(&(g1.as_matrix() * &lambda - g2.as_matrix()));
    if residual > tol.check_tol {
        return Err(Error::NoFactorization { residual });
    }
    Ok(OperatorMatrix(lambda))
}

/// Solves `D_{ω*} J φ = M` for `φ` in defect-space coordinates and checks
/// that `φ` is a co-isometry.
///
/// `dstar` is the defect data of `ω^*`; `m` maps some space `E'` into the
/// ambient space of `dstar`. The solution is unique.
pub fn parrott_coisometry_solve(
    dstar: &DefectData,
    m: &OperatorMatrix,
    tol: &ToleranceConfig,
) -> Result<OperatorMatrix> {
    if m.cod_dim() != dstar.ambient_dim() {
        return Err(Error::shape(format!(
            "parrott_coisometry_solve: right-hand side has {} rows, defect space ambient dim is {}",
            m.cod_dim(),
            dstar.ambient_dim()
        )));
    }
    let j = dstar.embedding.as_matrix();
    let inner = linalg::try_inverse(dstar.compressed().as_matrix(), 1e-14).ok_or(
        Error::NotSolvable {
            residual: f64::INFINITY,
        },
    )?;
    let phi = inner * j.adjoint() * m.as_matrix();
    let recomposed = dstar.defect_operator.as_matrix() * j * &phi;
    let residual = linalg::norm(&(recomposed - m.as_matrix()));
    if residual > tol.check_tol {
        return Err(Error::NotSolvable { residual });
    }
    let defect = linalg::coisometry_defect(&phi);
    if defect > tol.check_tol {
        return Err(Error::NotCoisometric { defect });
    }
    Ok(OperatorMatrix(phi))
}

/// `sqrt(x)` re-exported for callers that build scalar examples.
pub fn real_sqrt(x: f64) -> f64 {
    math::sqrt(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_contraction, random_isometry, random_unitary, seeded};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn classify_examples() {
        let t = tol();
        let half = OperatorMatrix::from_real(1, 1, &[0.5]);
        assert_eq!(classify(&half, &t).unwrap(), OperatorClass::StrictContraction);
        let col = OperatorMatrix::from_real(2, 1, &[1.0, 0.0]);
        assert_eq!(classify(&col, &t).unwrap(), OperatorClass::Isometry);
        let row = OperatorMatrix::from_real(1, 2, &[real_sqrt(3.0) / 2.0, 0.5]);
        assert_eq!(classify(&row, &t).unwrap(), OperatorClass::CoIsometry);
        let two = OperatorMatrix::from_real(1, 1, &[2.0]);
        assert_eq!(classify(&two, &t).unwrap(), OperatorClass::Expansion);
        let almost = OperatorMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.9999999]);
        assert_eq!(classify(&almost, &t).unwrap(), OperatorClass::Contraction);
        assert_eq!(
            classify(&OperatorMatrix::identity(3), &t).unwrap(),
            OperatorClass::Unitary
        );
    }

    #[test]
    fn classify_rejects_nan() {
        let mut m = linalg::zeros(1, 1);
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert_eq!(
            classify(&OperatorMatrix::from(m.clone()), &tol()),
            Err(Error::NonFinite)
        );
        assert_eq!(OperatorMatrix::new(m), Err(Error::NonFinite));
    }

    #[test]
    fn defect_examples() {
        let t = tol();
        let d = defect(&OperatorMatrix::zeros(3, 3), &t).unwrap();
        assert_eq!(d.rank, 3);
        assert!(d.defect_operator.distance(&OperatorMatrix::identity(3)) < 1e-14);

        let iso = OperatorMatrix::from_real(2, 1, &[0.6, 0.8]);
        let d = defect(&iso, &t).unwrap();
        assert_eq!(d.rank, 0);
        assert!(d.defect_operator.norm() < 1e-7);
        assert_eq!(d.embedding.shape(), (1, 0));

        let d = defect(&OperatorMatrix::from_real(1, 1, &[0.5]), &t).unwrap();
        assert_eq!(d.rank, 1);
        assert!((d.defect_operator[(0, 0)].re - real_sqrt(3.0) / 2.0).abs() < 1e-15);

        assert!(matches!(
            defect(&OperatorMatrix::from_real(1, 1, &[1.5]), &t),
            Err(Error::NotAContraction { .. })
        ));
    }

    #[test]
    fn defect_of_coordinate_projection_has_canonical_embedding() {
        // N = [I 0] on C^2 ⊕ C^1: defect space is the last coordinate.
        let n = OperatorMatrix::from_real(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let d = defect(&n, &tol()).unwrap();
        assert_eq!(d.rank, 1);
        assert!(d
            .embedding
            .distance(&OperatorMatrix::from_real(3, 1, &[0.0, 0.0, 1.0]))
            < 1e-12);
    }

    #[test]
    fn defect_square_identity_on_random_contractions() {
        let mut rng = seeded(11);
        let t = tol();
        for k in 0..20 {
            let n = random_contraction(&mut rng, 1 + k % 4, 1 + k % 5, 0.3 + 0.035 * k as f64);
            let d = defect(&n, &t).unwrap();
            let lhs = d.defect_operator.as_matrix() * d.defect_operator.as_matrix();
            let rhs = linalg::identity(n.dom_dim()) - n.adjoint() * n.as_matrix();
            assert!(linalg::norm(&(lhs - rhs)) < 1e-10);
            assert!(linalg::isometry_defect(&d.embedding) < 1e-12);
            // range(J) = range(D)
            let j = d.embedding.as_matrix();
            let proj = j * j.adjoint();
            let dn = d.defect_operator.as_matrix();
            assert!(linalg::norm(&(&proj * dn - dn)) < 1e-9);
        }
    }

    #[test]
    fn douglas_examples() {
        let t = tol();
        let mut rng = seeded(3);
        let g2 = random_contraction(&mut rng, 3, 2, 0.7);
        let lam = douglas_solve(&OperatorMatrix::identity(3), &g2, &t).unwrap();
        assert!(lam.distance(&g2) < 1e-14);

        let two = OperatorMatrix::identity(2).scale(C64::new(2.0, 0.0));
        let lam = douglas_solve(&two, &OperatorMatrix::identity(2), &t).unwrap();
        assert!(lam.distance(&OperatorMatrix::identity(2).scale(C64::new(0.5, 0.0))) < 1e-14);

        let g1 = random_isometry(&mut rng, 5, 3).scale(C64::new(1.7, 0.0));
        let u = random_unitary(&mut rng, 3);
        let lam = douglas_solve(&g1, &(&g1 * &u), &t).unwrap();
        assert!(lam.distance(&u) < 1e-10);
    }

    #[test]
    fn douglas_rejects_range_violation() {
        let g1 = OperatorMatrix::from_real(2, 1, &[1.0, 0.0]);
        let g2 = OperatorMatrix::from_real(2, 1, &[0.0, 1.0]);
        assert!(matches!(
            douglas_solve(&g1, &g2, &tol()),
            Err(Error::NoFactorization { .. })
        ));
    }

    #[test]
    fn douglas_equal_gramians_give_isometry_on_range() {
        let t = tol();
        let mut rng = seeded(5);
        let g2 = random_contraction(&mut rng, 4, 3, 0.9);
        let w = random_unitary(&mut rng, 3);
        // G1 = G2 W^*: G1 G1^* = G2 G2^*
        let g1 = &g2 * &w.adjoint();
        let lam = douglas_solve(&g1, &g2, &t).unwrap();
        let range = linalg::range_basis(&g2.adjoint(), 1e-10, 0.0);
        let restricted = lam.as_matrix() * &range;
        assert!(linalg::isometry_defect(&restricted) < 1e-9);
    }

    #[test]
    fn parrott_examples() {
        let t = tol();
        let mut rng = seeded(8);
        let omega = random_contraction(&mut rng, 4, 2, 0.8);
        let dstar = defect(&omega.adjoint(), &t).unwrap();
        let m = &dstar.defect_operator * &dstar.embedding;
        let phi = parrott_coisometry_solve(&dstar, &m, &t).unwrap();
        assert!(phi.distance(&OperatorMatrix::identity(dstar.rank)) < 1e-10);

        let unitary = random_unitary(&mut rng, 3);
        let dstar = defect(&unitary.adjoint(), &t).unwrap();
        assert_eq!(dstar.rank, 0);
        let phi = parrott_coisometry_solve(&dstar, &OperatorMatrix::zeros(3, 2), &t).unwrap();
        assert_eq!(phi.shape(), (0, 2));
    }

    #[test]
    fn parrott_rejects_inconsistent_input() {
        let t = tol();
        let omega = OperatorMatrix::from_real(2, 1, &[1.0, 0.0]);
        let dstar = defect(&omega.adjoint(), &t).unwrap();
        // range(D_{ω*}) is the second coordinate; the first is unreachable.
        let bad = OperatorMatrix::from_real(2, 1, &[1.0, 0.0]);
        assert!(matches!(
            parrott_coisometry_solve(&dstar, &bad, &t),
            Err(Error::NotSolvable { .. })
        ));
        let short = OperatorMatrix::from_real(2, 1, &[0.0, 0.5]);
        assert!(matches!(
            parrott_coisometry_solve(&dstar, &short, &t),
            Err(Error::NotCoisometric { .. })
        ));
    }

    #[test]
    fn tolerance_ordering_is_enforced() {
        assert!(ToleranceConfig::default().validated().is_ok());
        let bad = ToleranceConfig {
            rank_tol: 1e-6,
            check_tol: 1e-9,
            norm_slack: 1e-3,
        };
        assert!(bad.validated().is_err());
    }
}
