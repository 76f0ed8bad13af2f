//! Linear systems `x' = Zx + Bu, y = Cx + Du`, their transfer and
//! observability functions, and the truncated Hardy-space operators they
//! induce.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::opcore::linalg::{self, Mat};
use crate::opcore::{OperatorMatrix, ToleranceConfig, C64};

mod hardy;

pub use hardy::{HardyDomain, TruncatedHardyOperator};

/// Reciprocal condition number below which `I - λZ` counts as singular.
pub(crate) const RCOND_MIN: f64 = 1e-13;

/// State-space realization with a contractive system matrix
/// `[[Z, B], [C, D]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    state_op: OperatorMatrix,
    input_op: OperatorMatrix,
    output_op: OperatorMatrix,
    feed_op: OperatorMatrix,
}

impl LinearSystem {
    /// Assembles a system, checking shapes and contractivity of the system
    /// matrix.
    pub fn new(
        state_op: OperatorMatrix,
        input_op: OperatorMatrix,
        output_op: OperatorMatrix,
        feed_op: OperatorMatrix,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let sys = Self::from_parts(state_op, input_op, output_op, feed_op)?;
        let norm = sys.system_matrix().norm();
        if norm > 1.0 + tol.check_tol {
            return Err(Error::NotAContraction { norm });
        }
        Ok(sys)
    }

    /// Assembles a system checking shapes only.
    pub fn from_parts(
        state_op: OperatorMatrix,
        input_op: OperatorMatrix,
        output_op: OperatorMatrix,
        feed_op: OperatorMatrix,
    ) -> Result<Self> {
        let n = state_op.cod_dim();
        let ok = state_op.dom_dim() == n
            && input_op.cod_dim() == n
            && output_op.dom_dim() == n
            && feed_op.cod_dim() == output_op.cod_dim()
            && feed_op.dom_dim() == input_op.dom_dim();
        if !ok {
            return Err(Error::shape(format!(
                "system blocks do not assemble: Z {:?}, B {:?}, C {:?}, D {:?}",
                state_op.shape(),
                input_op.shape(),
                output_op.shape(),
                feed_op.shape()
            )));
        }
        for m in [&state_op, &input_op, &output_op, &feed_op] {
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self {
            state_op,
            input_op,
            output_op,
            feed_op,
        })
    }

    /// Splits a system matrix with the given state and input dimensions.
    pub fn from_system_matrix(
        m: &OperatorMatrix,
        state_dim: usize,
        input_dim: usize,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        if m.cod_dim() < state_dim || m.dom_dim() != state_dim + input_dim {
            return Err(Error::shape(format!(
                "system matrix {:?} cannot be split with state dim {} and input dim {}",
                m.shape(),
                state_dim,
                input_dim
            )));
        }
        let out = m.cod_dim() - state_dim;
        let blk = |r0, c0, nr, nc| OperatorMatrix::from(linalg::sub(m, r0, c0, nr, nc));
        Self::new(
            blk(0, 0, state_dim, state_dim),
            blk(0, state_dim, state_dim, input_dim),
            blk(state_dim, 0, out, state_dim),
            blk(state_dim, state_dim, out, input_dim),
            tol,
        )
    }

    pub fn state_op(&self) -> &OperatorMatrix {
        &self.state_op
    }

    pub fn input_op(&self) -> &OperatorMatrix {
        &self.input_op
    }

    pub fn output_op(&self) -> &OperatorMatrix {
        &self.output_op
    }

    pub fn feed_op(&self) -> &OperatorMatrix {
        &self.feed_op
    }

    pub fn state_dim(&self) -> usize {
        self.state_op.dom_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.input_op.dom_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.output_op.cod_dim()
    }

    /// `[[Z, B], [C, D]]`.
    pub fn system_matrix(&self) -> OperatorMatrix {
        let top = linalg::hstack(self.state_dim(), &[&self.state_op, &self.input_op]);
        let bottom = linalg::hstack(self.output_dim(), &[&self.output_op, &self.feed_op]);
        OperatorMatrix::from(linalg::vstack(
            self.state_dim() + self.input_dim(),
            &[&top, &bottom],
        ))
    }

    fn resolvent(&self, lambda: C64) -> Result<Mat> {
        let n = self.state_dim();
        let m = linalg::identity(n) - self.state_op.as_matrix() * lambda;
        linalg::try_inverse(&m, RCOND_MIN).ok_or(Error::ResolventSingular)
    }

    /// `F(λ) = D + λ C (I - λZ)^{-1} B`.
    pub fn transfer_eval(&self, lambda: C64) -> Result<OperatorMatrix> {
        let res = self.resolvent(lambda)?;
        let f = self.feed_op.as_matrix()
            + self.output_op.as_matrix() * res * self.input_op.as_matrix() * lambda;
        Ok(OperatorMatrix::from(f))
    }

    /// `W(λ) = C (I - λZ)^{-1}`.
    pub fn observability_eval(&self, lambda: C64) -> Result<OperatorMatrix> {
        let res = self.resolvent(lambda)?;
        Ok(OperatorMatrix::from(self.output_op.as_matrix() * res))
    }

    /// Taylor coefficients `F_0..F_n` and `W_0..W_n` with `F_0 = D`,
    /// `F_k = C Z^{k-1} B` and `W_k = C Z^k`.
    pub fn taylor(&self, n: usize) -> (Vec<Mat>, Vec<Mat>) {
        let mut f = Vec::with_capacity(n + 1);
        let mut w = Vec::with_capacity(n + 1);
        f.push(self.feed_op.as_matrix().clone());
        w.push(self.output_op.as_matrix().clone());
        for k in 1..=n {
            f.push(&w[k - 1] * self.input_op.as_matrix());
            let next = &w[k - 1] * self.state_op.as_matrix();
            w.push(next);
        }
        (f, w)
    }

    /// Truncated multiplication operator `M_F` and observability operator
    /// `Γ_W` at degree `k`.
    pub fn truncated_ops(&self, k: usize) -> (TruncatedHardyOperator, TruncatedHardyOperator) {
        let (f, w) = self.taylor(k);
        (
            TruncatedHardyOperator::toeplitz(&f, self.input_dim(), self.output_dim()),
            TruncatedHardyOperator::block_column(&w, self.state_dim(), self.output_dim()),
        )
    }

    /// Isometry defect of `[M_F Γ_W]` at degree `k`, measured on the columns
    /// that see every retained output degree: inputs at degree zero and the
    /// initial state.
    pub fn isometry_defect(&self, k: usize) -> f64 {
        let (mf, gw) = self.truncated_ops(k);
        let rows = mf.nrows();
        let first = linalg::sub(mf.as_matrix(), 0, 0, rows, self.input_dim());
        let x = linalg::hstack(rows, &[&first, gw.as_matrix()]);
        linalg::isometry_defect(&x)
    }

    /// Co-isometry defect `‖[M_F Γ_W][M_F Γ_W]^* - I‖` at degree `k`.
    pub fn coisometry_defect(&self, k: usize) -> f64 {
        let (mf, gw) = self.truncated_ops(k);
        let x = linalg::hstack(mf.nrows(), &[mf.as_matrix(), gw.as_matrix()]);
        linalg::coisometry_defect(&x)
    }

    /// Conjugates the state space by the unitary `u`:
    /// `(U Z U^*, U B, C U^*, D)`.
    pub fn conjugate_state(&self, u: &OperatorMatrix) -> Result<Self> {
        if u.shape() != (self.state_dim(), self.state_dim()) {
            return Err(Error::shape(format!(
                "state conjugation needs a {0}x{0} matrix, got {1:?}",
                self.state_dim(),
                u.shape()
            )));
        }
        Self::from_parts(
            &(u * &self.state_op) * &u.adjoint(),
            u * &self.input_op,
            &self.output_op * &u.adjoint(),
            self.feed_op.clone(),
        )
    }

    /// Direct sum of state spaces with a second system that shares neither
    /// inputs nor outputs: `(Z ⊕ Z', [B; 0], [C 0], D)`.
    pub fn pad_state(&self, extra_state: &OperatorMatrix) -> Result<Self> {
        let p = extra_state.cod_dim();
        let z = linalg::block_diag(&[&self.state_op, extra_state]);
        let b = linalg::vstack(
            self.input_dim(),
            &[&self.input_op, &linalg::zeros(p, self.input_dim())],
        );
        let c = linalg::hstack(
            self.output_dim(),
            &[&self.output_op, &linalg::zeros(self.output_dim(), p)],
        );
        Self::from_parts(z.into(), b.into(), c.into(), self.feed_op.clone())
    }
}

/// Strong stability test: in finite dimension `Z^n x -> 0` for all `x` iff the
/// spectral radius is below one. Returns the verdict and the radius.
pub fn strong_stability(z: &OperatorMatrix, tol: &ToleranceConfig) -> (bool, f64) {
    let rho = linalg::spectral_radius(z);
    (rho < 1.0 - tol.rank_tol, rho)
}

/// Stacked observability matrix `[C; CZ; ..; CZ^{n-1}]`.
fn observability_matrix(sys: &LinearSystem) -> Mat {
    let n = sys.state_dim();
    let (_, w) = sys.taylor(n.saturating_sub(1));
    let parts: Vec<&Mat> = w.iter().collect();
    linalg::vstack(n, &parts)
}

/// Dimension of `Ker Γ_W`.
pub fn unobservable_dim(sys: &LinearSystem, tol: &ToleranceConfig) -> usize {
    if sys.state_dim() == 0 {
        return 0;
    }
    let obs = observability_matrix(sys);
    linalg::kernel_basis(&obs, tol.rank_tol, 1.0).ncols()
}

fn require_coisometric(sys: &LinearSystem, tol: &ToleranceConfig) -> Result<()> {
    let defect = linalg::coisometry_defect(&sys.system_matrix());
    if defect > tol.check_tol {
        return Err(Error::NotCoisometric { defect });
    }
    Ok(())
}

/// Compresses a co-isometric system to the orthogonal complement of its
/// unobservable subspace `Ker Γ_W`.
///
/// The unobservable subspace is `Z`-invariant and lies in `Ker C`, so the
/// compression keeps every Taylor coefficient of the transfer function.
pub fn observable_reduction(sys: &LinearSystem, tol: &ToleranceConfig) -> Result<LinearSystem> {
    require_coisometric(sys, tol)?;
    let n = sys.state_dim();
    if n == 0 {
        return Ok(sys.clone());
    }
    let obs = observability_matrix(sys);
    let kernel = linalg::kernel_basis(&obs, tol.rank_tol, 1.0);
    if kernel.ncols() == 0 {
        return Ok(sys.clone());
    }
    let keep = linalg::complement_basis(&kernel, n);
    let keep_adj = keep.adjoint();
    LinearSystem::from_parts(
        OperatorMatrix::from(&keep_adj * sys.state_op.as_matrix() * &keep),
        OperatorMatrix::from(&keep_adj * sys.input_op.as_matrix()),
        OperatorMatrix::from(sys.output_op.as_matrix() * &keep),
        sys.feed_op.clone(),
    )
}

/// Largest entrywise deviation between the transfer Taylor coefficients of
/// two systems up to degree `n`.
pub fn taylor_distance(a: &LinearSystem, b: &LinearSystem, n: usize) -> f64 {
    let (fa, _) = a.taylor(n);
    let (fb, _) = b.taylor(n);
    fa.iter()
        .zip(&fb)
        .map(|(x, y)| linalg::norm(&(x - y)))
        .fold(0.0, f64::max)
}

/// Finds the unitary `Θ` with `Θ Z₁ = Z₂ Θ`, `C₁ = C₂ Θ` and `Θ B₁ = B₂`
/// between two observable co-isometric systems with the same transfer
/// function. Returns `None` when the transfer functions differ.
pub fn unitary_equivalence(
    sys1: &LinearSystem,
    sys2: &LinearSystem,
    tol: &ToleranceConfig,
) -> Result<Option<OperatorMatrix>> {
    if sys1.input_dim() != sys2.input_dim() || sys1.output_dim() != sys2.output_dim() {
        return Err(Error::shape(format!(
            "systems act between different spaces: {}->{} vs {}->{}",
            sys1.input_dim(),
            sys1.output_dim(),
            sys2.input_dim(),
            sys2.output_dim()
        )));
    }
    for sys in [sys1, sys2] {
        require_coisometric(sys, tol)?;
        let kernel_dim = unobservable_dim(sys, tol);
        if kernel_dim > 0 {
            return Err(Error::NotObservable { kernel_dim });
        }
    }
    let (n1, n2) = (sys1.state_dim(), sys2.state_dim());
    if taylor_distance(sys1, sys2, n1 + n2) > tol.check_tol {
        return Ok(None);
    }
    if n1 != n2 {
        return Ok(None);
    }
    let k = n1.max(1);
    let (_, g1) = sys1.truncated_ops(k);
    let (_, g2) = sys2.truncated_ops(k);
    let raw = linalg::pinv(g2.as_matrix(), tol.rank_tol) * g1.as_matrix();
    let theta = linalg::polar_unitary(&raw);
    let intertwine = [
        linalg::norm(&(&theta * sys1.state_op.as_matrix() - sys2.state_op.as_matrix() * &theta)),
        linalg::norm(&(sys1.output_op.as_matrix() - sys2.output_op.as_matrix() * &theta)),
        linalg::norm(&(&theta * sys1.input_op.as_matrix() - sys2.input_op.as_matrix())),
    ];
    if intertwine.iter().any(|&r| r > tol.check_tol) {
        return Ok(None);
    }
    Ok(Some(OperatorMatrix::from(theta)))
}
