use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::opcore::linalg::{self, Mat};
use crate::opcore::{OperatorMatrix, ToleranceConfig, C64};
use crate::systems::{LinearSystem, TruncatedHardyOperator};

/// Dimensions of the four spaces a quadruple acts between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadrupleDims {
    /// State space, the domain of `Ψ12` and `Ψ22`.
    pub state: usize,
    /// Parameter output space `E'`, the domain of `Ψ11` and `Ψ21`.
    pub param_out: usize,
    /// Parameter input space `E`, the codomain of `Ψ11` and `Ψ12`.
    pub param_in: usize,
    /// Codomain of `Ψ21` and `Ψ22`.
    pub output: usize,
}

/// Pointwise values of the four coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrupleValues {
    pub psi11: Mat,
    pub psi12: Mat,
    pub psi21: Mat,
    pub psi22: Mat,
}

/// Four analytic coefficients sharing one realization: the output space is
/// split as `E ⊕ Y` at `split`, `Ψ11, Ψ21` are the row blocks of the transfer
/// function and `Ψ12, Ψ22` those of the observability function.
#[derive(Debug, Clone, PartialEq)]
pub struct RedhefferQuadruple {
    realization: LinearSystem,
    split: usize,
}

impl RedhefferQuadruple {
    /// Checks the split and that the feedthrough into `E` vanishes.
    pub fn new(realization: LinearSystem, split: usize, tol: &ToleranceConfig) -> Result<Self> {
        if split > realization.output_dim() {
            return Err(Error::shape(format!(
                "split index {} exceeds output dimension {}",
                split,
                realization.output_dim()
            )));
        }
        let d1 = linalg::sub(realization.feed_op(), 0, 0, split, realization.input_dim());
        let norm = linalg::norm(&d1);
        if norm > tol.check_tol {
            return Err(Error::FeedthroughNonzero { norm });
        }
        Ok(Self { realization, split })
    }

    pub fn realization(&self) -> &LinearSystem {
        &self.realization
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn dims(&self) -> QuadrupleDims {
        QuadrupleDims {
            state: self.realization.state_dim(),
            param_out: self.realization.input_dim(),
            param_in: self.split,
            output: self.realization.output_dim() - self.split,
        }
    }

    fn split_rows(&self, m: &Mat) -> (Mat, Mat) {
        let (rows, cols) = m.shape();
        (
            linalg::sub(m, 0, 0, self.split, cols),
            linalg::sub(m, self.split, 0, rows - self.split, cols),
        )
    }

    pub fn eval(&self, lambda: C64) -> Result<QuadrupleValues> {
        let f = self.realization.transfer_eval(lambda)?;
        let w = self.realization.observability_eval(lambda)?;
        let (psi11, psi21) = self.split_rows(&f);
        let (psi12, psi22) = self.split_rows(&w);
        Ok(QuadrupleValues {
            psi11,
            psi12,
            psi21,
            psi22,
        })
    }

    /// Taylor coefficients of `Ψ11, Ψ12, Ψ21, Ψ22` up to degree `k`.
    pub fn taylor(&self, k: usize) -> [Vec<Mat>; 4] {
        let (f, w) = self.realization.taylor(k);
        let mut out: [Vec<Mat>; 4] = Default::default();
        for (fk, wk) in f.iter().zip(&w) {
            let (a, c) = self.split_rows(fk);
            let (b, d) = self.split_rows(wk);
            out[0].push(a);
            out[1].push(b);
            out[2].push(c);
            out[3].push(d);
        }
        out
    }
}

/// Truncated coefficient matrix `[[M_{Ψ11}, Γ_{Ψ12}], [M_{Ψ21}, Γ_{Ψ22}]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub m11: TruncatedHardyOperator,
    pub g12: TruncatedHardyOperator,
    pub m21: TruncatedHardyOperator,
    pub g22: TruncatedHardyOperator,
}

impl CoefficientMatrix {
    pub fn degree(&self) -> usize {
        self.m11.degree()
    }

    pub fn as_block(&self) -> BlockOperator2 {
        BlockOperator2::new(
            self.m11.as_matrix().clone(),
            self.g12.as_matrix().clone(),
            self.m21.as_matrix().clone(),
            self.g22.as_matrix().clone(),
        )
        .expect("coefficient blocks share dimensions")
    }

    pub fn assemble(&self) -> OperatorMatrix {
        self.as_block().assemble()
    }

    /// `‖I - X^*X‖` over the columns of degree-zero `E'` inputs and the state
    /// columns, which carry the full truncation tail.
    pub fn isometry_defect(&self) -> f64 {
        let e_prime = match self.m11.domain() {
            crate::systems::HardyDomain::Hardy(d) => d,
            crate::systems::HardyDomain::Coefficient(d) => d,
        };
        let full = self.assemble();
        let rows = full.nrows();
        let first = linalg::sub(&full, 0, 0, rows, e_prime);
        let state_cols = self.g12.ncols();
        let last = linalg::sub(&full, 0, full.ncols() - state_cols, rows, state_cols);
        linalg::isometry_defect(&linalg::hstack(rows, &[&first, &last]))
    }

    /// `‖I - X^*X‖` for the stacked observability columns `[Γ_{Ψ12}; Γ_{Ψ22}]`.
    pub fn observability_isometry_defect(&self) -> f64 {
        let cols = self.g12.ncols();
        let stacked = linalg::vstack(cols, &[self.g12.as_matrix(), self.g22.as_matrix()]);
        linalg::isometry_defect(&stacked)
    }
}

/// Operator with a 2x2 block decomposition
/// `[[X, B], [C, D]]: X₁ ⊕ U → X₂ ⊕ Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator2 {
    pub top_left: Mat,
    pub top_right: Mat,
    pub bottom_left: Mat,
    pub bottom_right: Mat,
}

impl BlockOperator2 {
    pub fn new(top_left: Mat, top_right: Mat, bottom_left: Mat, bottom_right: Mat) -> Result<Self> {
        let ok = top_left.nrows() == top_right.nrows()
            && bottom_left.nrows() == bottom_right.nrows()
            && top_left.ncols() == bottom_left.ncols()
            && top_right.ncols() == bottom_right.ncols();
        if !ok {
            return Err(Error::shape(format!(
                "2x2 blocks do not assemble: {:?} {:?} / {:?} {:?}",
                top_left.shape(),
                top_right.shape(),
                bottom_left.shape(),
                bottom_right.shape()
            )));
        }
        Ok(Self {
            top_left,
            top_right,
            bottom_left,
            bottom_right,
        })
    }

    /// Splits `m` after `rows` rows and `cols` columns.
    pub fn split(m: &OperatorMatrix, rows: usize, cols: usize) -> Result<Self> {
        let (r, c) = m.shape();
        if rows > r || cols > c {
            return Err(Error::shape(format!(
                "cannot split a {:?} matrix at ({}, {})",
                m.shape(),
                rows,
                cols
            )));
        }
        Self::new(
            linalg::sub(m, 0, 0, rows, cols),
            linalg::sub(m, 0, cols, rows, c - cols),
            linalg::sub(m, rows, 0, r - rows, cols),
            linalg::sub(m, rows, cols, r - rows, c - cols),
        )
    }

    pub fn assemble(&self) -> OperatorMatrix {
        let cols = self.top_left.ncols() + self.top_right.ncols();
        let top = linalg::hstack(self.top_left.nrows(), &[&self.top_left, &self.top_right]);
        let bottom = linalg::hstack(
            self.bottom_left.nrows(),
            &[&self.bottom_left, &self.bottom_right],
        );
        OperatorMatrix::from(linalg::vstack(cols, &[&top, &bottom]))
    }

    pub fn blocks(&self) -> [&Mat; 4] {
        [
            &self.top_left,
            &self.top_right,
            &self.bottom_left,
            &self.bottom_right,
        ]
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_entry_distance(&self, other: &BlockOperator2) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in self.blocks().into_iter().zip(other.blocks()) {
            if a.shape() != b.shape() {
                return f64::INFINITY;
            }
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max(math::cabs(x - y));
            }
        }
        worst
    }
}

/// How a Schur parameter is represented.
#[derive(Debug, Clone, PartialEq)]
pub enum SchurKind {
    Constant(OperatorMatrix),
    Realized(LinearSystem),
}

/// Schur class function `V: E → E'`, constant or realization backed.
///
/// `open_ball` certifies `‖V‖∞ < 1`: for a constant by its norm, for a
/// realization by the norm of its system matrix, each with margin
/// `norm_slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurParameter {
    kind: SchurKind,
    open_ball: bool,
}

impl SchurParameter {
    pub fn constant(v: OperatorMatrix, tol: &ToleranceConfig) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        let norm = v.norm();
        if norm > 1.0 + tol.check_tol {
            return Err(Error::NotAContraction { norm });
        }
        Ok(Self {
            kind: SchurKind::Constant(v),
            open_ball: norm <= 1.0 - tol.norm_slack,
        })
    }

    pub fn zero(param_in: usize, param_out: usize) -> Self {
        Self {
            kind: SchurKind::Constant(OperatorMatrix::zeros(param_out, param_in)),
            open_ball: true,
        }
    }

    pub fn realized(sys: LinearSystem, tol: &ToleranceConfig) -> Result<Self> {
        let norm = sys.system_matrix().norm();
        if norm > 1.0 + tol.check_tol {
            return Err(Error::NotAContraction { norm });
        }
        Ok(Self {
            kind: SchurKind::Realized(sys),
            open_ball: norm <= 1.0 - tol.norm_slack,
        })
    }

    pub fn kind(&self) -> &SchurKind {
        &self.kind
    }

    pub fn open_ball(&self) -> bool {
        self.open_ball
    }

    /// Dimension of `E`, the domain.
    pub fn input_dim(&self) -> usize {
        match &self.kind {
            SchurKind::Constant(v) => v.dom_dim(),
            SchurKind::Realized(s) => s.input_dim(),
        }
    }

    /// Dimension of `E'`, the codomain.
    pub fn output_dim(&self) -> usize {
        match &self.kind {
            SchurKind::Constant(v) => v.cod_dim(),
            SchurKind::Realized(s) => s.output_dim(),
        }
    }

    pub fn eval(&self, lambda: C64) -> Result<Mat> {
        match &self.kind {
            SchurKind::Constant(v) => Ok(v.as_matrix().clone()),
            SchurKind::Realized(s) => Ok(s.transfer_eval(lambda)?.into_matrix()),
        }
    }

    pub fn taylor(&self, k: usize) -> Vec<Mat> {
        match &self.kind {
            SchurKind::Constant(v) => {
                let mut out = Vec::with_capacity(k + 1);
                out.push(v.as_matrix().clone());
                for _ in 0..k {
                    out.push(linalg::zeros(v.cod_dim(), v.dom_dim()));
                }
                out
            }
            SchurKind::Realized(s) => s.taylor(k).0,
        }
    }

    /// Truncated multiplication operator `M_V`.
    pub fn multiplication(&self, k: usize) -> TruncatedHardyOperator {
        TruncatedHardyOperator::toeplitz(&self.taylor(k), self.input_dim(), self.output_dim())
    }

    /// `M_V` at degree `k`, after checking the open-ball certificate and the
    /// truncated norm.
    pub fn open_ball_multiplication(
        &self,
        k: usize,
        tol: &ToleranceConfig,
    ) -> Result<TruncatedHardyOperator> {
        let mv = self.multiplication(k);
        let norm = mv.norm();
        if !self.open_ball || norm > 1.0 - tol.norm_slack {
            return Err(Error::NotOpenBall { norm });
        }
        Ok(mv)
    }

    /// Scales the parameter by `t`; realized parameters scale their output.
    pub fn scaled(&self, t: f64, tol: &ToleranceConfig) -> Result<Self> {
        let s = C64::new(t, 0.0);
        match &self.kind {
            SchurKind::Constant(v) => Self::constant(v.scale(s), tol),
            SchurKind::Realized(sys) => {
                let scaled = LinearSystem::from_parts(
                    sys.state_op().clone(),
                    sys.input_op().clone(),
                    sys.output_op().scale(s),
                    sys.feed_op().scale(s),
                )?;
                let norm = scaled.system_matrix().norm();
                Ok(Self {
                    kind: SchurKind::Realized(scaled),
                    open_ball: norm <= 1.0 - tol.norm_slack,
                })
            }
        }
    }
}
