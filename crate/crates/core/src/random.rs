//! Seeded instance generators.
//!
//! Every generator draws from [`ChaCha8Rng`] (the ChaCha stream cipher with
//! 8 rounds, seeded from a `u64` through `SeedableRng::seed_from_u64`), so
//! instances are reproducible across platforms. Complex Gaussian entries are
//! `(x + iy)/√2` with `x, y` standard normal.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::lifting::{omega_to_data_set, LiftingDataSet, UnderlyingContraction};
use crate::math;
use crate::opcore::linalg::{self, Mat};
use crate::opcore::{OperatorMatrix, ToleranceConfig, C64};
use crate::redheffer::{RedhefferQuadruple, SchurParameter};
use crate::systems::LinearSystem;

pub type InstanceRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    })
}

/// Uniform draw from `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Complex Gaussian matrix scaled to operator norm `norm`.
pub fn random_contraction<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    norm: f64,
) -> OperatorMatrix {
    let g = gaussian(rng, rows, cols);
    let n = linalg::norm(&g);
    if n == 0.0 {
        return OperatorMatrix::from(g);
    }
    OperatorMatrix::from(g * C64::new(norm / n, 0.0))
}

/// Isometry `C^cols → C^rows` (`rows >= cols`) from the polar factor of a
/// Gaussian matrix.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> OperatorMatrix {
    assert!(rows >= cols, "an isometry needs rows >= cols");
    OperatorMatrix::from(linalg::polar_unitary(&gaussian(rng, rows, cols)))
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> OperatorMatrix {
    random_isometry(rng, n, n)
}

/// Unit vector in `C^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let g = gaussian(rng, n, 1);
    let norm = g.norm();
    if norm == 0.0 {
        g
    } else {
        g / C64::new(norm, 0.0)
    }
}

/// System with a co-isometric system matrix (requires `outputs <= inputs`).
pub fn random_coisometric_system<R: Rng + ?Sized>(
    rng: &mut R,
    state: usize,
    inputs: usize,
    outputs: usize,
) -> LinearSystem {
    let m = random_isometry(rng, state + inputs, state + outputs).adjoint();
    split_system(&m, state, inputs)
}

/// System with a unitary system matrix.
pub fn random_unitary_system<R: Rng + ?Sized>(rng: &mut R, state: usize, io: usize) -> LinearSystem {
    let m = random_unitary(rng, state + io);
    split_system(&m, state, io)
}

/// System with a contractive system matrix of norm `norm`.
pub fn random_contractive_system<R: Rng + ?Sized>(
    rng: &mut R,
    state: usize,
    inputs: usize,
    outputs: usize,
    norm: f64,
) -> LinearSystem {
    let m = random_contraction(rng, state + outputs, state + inputs, norm);
    split_system(&m, state, inputs)
}

fn split_system(m: &OperatorMatrix, state: usize, inputs: usize) -> LinearSystem {
    let out = m.nrows() - state;
    let blk = |r0, c0, nr, nc| OperatorMatrix::from(linalg::sub(m, r0, c0, nr, nc));
    LinearSystem::from_parts(
        blk(0, 0, state, state),
        blk(0, state, state, inputs),
        blk(state, 0, out, state),
        blk(state, state, out, inputs),
    )
    .expect("split blocks assemble")
}

/// How to draw `ω = [ω1; ω2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaRegime {
    /// Gaussian contraction scaled to norm `norm`.
    Contraction { norm: f64 },
    /// Isometry with `‖ω2‖ = state_norm` (needs `dim D_{T'} >= dim F` when
    /// `state_norm < 1`).
    Isometric { state_norm: f64 },
}

/// Random underlying contraction with `dim D_{T'} = t`, `dim D_A = a` and
/// `dim F = f`; `F` is a random subspace of `D_A`.
pub fn random_omega<R: Rng + ?Sized>(
    rng: &mut R,
    t: usize,
    a: usize,
    f: usize,
    regime: OmegaRegime,
) -> Result<UnderlyingContraction> {
    if f > a {
        return Err(Error::BadDims(alloc::format!("dim F = {} exceeds dim D_A = {}", f, a)));
    }
    let tol = ToleranceConfig::default();
    let f_emb = random_isometry(rng, a, f);
    let (w1, w2) = match regime {
        OmegaRegime::Contraction { norm } => {
            let w = random_contraction(rng, t + a, f, norm);
            (linalg::sub(&w, 0, 0, t, f), linalg::sub(&w, t, 0, a, f))
        }
        OmegaRegime::Isometric { state_norm } => {
            if t + a < f {
                return Err(Error::BadDims(alloc::format!(
                    "an isometry from dim {} into dim {} does not exist",
                    f,
                    t + a
                )));
            }
            if t >= f {
                let w2 = random_contraction(rng, a, f, state_norm).into_matrix();
                let rest = linalg::identity(f) - w2.adjoint() * &w2;
                let w1 = random_isometry(rng, t, f).as_matrix() * linalg::psd_sqrt(&rest);
                (w1, w2)
            } else {
                let w = random_isometry(rng, t + a, f);
                (linalg::sub(&w, 0, 0, t, f), linalg::sub(&w, t, 0, a, f))
            }
        }
    };
    UnderlyingContraction::new(w1.into(), w2.into(), f_emb, &tol)
}

/// Isometric `ω` whose state operator `ω2 Π_F` has spectral radius in
/// `[lo, hi]`, found by rejection sampling.
pub fn random_isometric_omega_with_radius<R: Rng + ?Sized>(
    rng: &mut R,
    t: usize,
    a: usize,
    f: usize,
    lo: f64,
    hi: f64,
) -> Result<UnderlyingContraction> {
    for _ in 0..10_000 {
        let s = uniform(rng, lo, 1.0_f64.min(hi * 1.6));
        let w = random_omega(rng, t, a, f, OmegaRegime::Isometric { state_norm: s })?;
        let rho = w.state_spectral_radius();
        if rho >= lo && rho <= hi {
            return Ok(w);
        }
    }
    Err(Error::BadDims(alloc::format!(
        "no isometric ω with spectral radius in [{}, {}] for dims ({}, {}, {})",
        lo,
        hi,
        t,
        a,
        f
    )))
}

/// Data set from `ω` dressed by unitaries on `H` and `H'`:
/// `A ↦ V A W^*`, `T' ↦ V T' V^*`, `R ↦ W R`, `Q ↦ W Q`.
pub fn dressed_data_set<R: Rng + ?Sized>(
    rng: &mut R,
    omega: &UnderlyingContraction,
    degree: usize,
) -> LiftingDataSet {
    let base = omega_to_data_set(omega, degree);
    let w = random_unitary(rng, base.h_dim());
    let v = random_unitary(rng, base.h_prime_dim());
    LiftingDataSet::new(
        &(&v * &base.a) * &w.adjoint(),
        &(&v * &base.t_prime) * &v.adjoint(),
        &w * &base.r,
        &w * &base.q,
        degree,
    )
    .expect("dressing keeps shapes")
}

/// Data set with `‖A‖ = a_norm < 1` and generic `T'`:
/// `Q = A^+ T' A R + N X`, with `N` spanning `Ker A` and `X` chosen so that
/// `Q^*Q - R^*R` is positive semidefinite with a margin of `gap`.
/// Requires `h - h' >= h0`.
pub fn random_strict_data_set<R: Rng + ?Sized>(
    rng: &mut R,
    h_prime: usize,
    h: usize,
    h0: usize,
    a_norm: f64,
    t_norm: f64,
    gap: f64,
    degree: usize,
) -> Result<LiftingDataSet> {
    if h < h_prime + h0 {
        return Err(Error::BadDims(alloc::format!(
            "need dim H >= dim H' + dim H0, got {} < {} + {}",
            h,
            h_prime,
            h0
        )));
    }
    let tol = ToleranceConfig::default();
    let a = random_contraction(rng, h_prime, h, a_norm);
    let tp = random_contraction(rng, h_prime, h_prime, t_norm);
    let r_norm = uniform(rng, 0.3, 1.0);
    let r = random_contraction(rng, h, h0, r_norm);
    let m0 = linalg::pinv(&a, tol.rank_tol) * tp.as_matrix() * a.as_matrix() * r.as_matrix();
    let need = r.adjoint() * r.as_matrix() - m0.adjoint() * &m0;
    let (vals, vecs) = linalg::hermitian_eigen(&linalg::hermitian_part(&need));
    let mut pos = linalg::zeros(h0, h0);
    for (i, &l) in vals.iter().enumerate() {
        let c = vecs.column(i);
        pos += c * c.adjoint() * C64::new(l.max(0.0) + gap, 0.0);
    }
    let kernel = linalg::kernel_basis(&a, tol.rank_tol, 1.0);
    let w = random_isometry(rng, kernel.ncols(), h0);
    let q = m0 + kernel * w.as_matrix() * linalg::psd_sqrt(&pos);
    LiftingDataSet::new(a, tp, r, q.into(), degree)
}

/// Constant Schur parameter `E → E'` of norm `norm`.
pub fn random_constant_parameter<R: Rng + ?Sized>(
    rng: &mut R,
    param_in: usize,
    param_out: usize,
    norm: f64,
) -> SchurParameter {
    SchurParameter::constant(
        random_contraction(rng, param_out, param_in, norm),
        &ToleranceConfig::default(),
    )
    .expect("scaled contraction is admissible")
}

/// Realized Schur parameter whose system matrix has norm `norm`.
pub fn random_realized_parameter<R: Rng + ?Sized>(
    rng: &mut R,
    state: usize,
    param_in: usize,
    param_out: usize,
    norm: f64,
) -> SchurParameter {
    let sys = random_contractive_system(rng, state, param_in, param_out, norm);
    SchurParameter::realized(sys, &ToleranceConfig::default())
        .expect("scaled contraction is admissible")
}

/// Mix of constant and realized open-ball parameters with norms in
/// `[0, max_norm]`.
pub fn random_open_ball_parameters<R: Rng + ?Sized>(
    rng: &mut R,
    param_in: usize,
    param_out: usize,
    count: usize,
    max_norm: f64,
) -> Vec<SchurParameter> {
    (0..count)
        .map(|i| {
            let norm = uniform(rng, 0.0, max_norm);
            if i % 2 == 0 {
                random_constant_parameter(rng, param_in, param_out, norm)
            } else {
                random_realized_parameter(rng, 2, param_in, param_out, norm)
            }
        })
        .collect()
}

/// Replaces `Ψ` by `[ψ^* 0; 0 I] Ψ [φ 0; 0 I]`: the realization's `C1` becomes
/// `ψ^* C1` and its input operators are multiplied by `φ`. With a unitary
/// `ψ` and a co-isometric `φ` the coefficient matrix stays co-isometric.
pub fn dress_quadruple(
    q: &RedhefferQuadruple,
    psi: &OperatorMatrix,
    phi: &OperatorMatrix,
    tol: &ToleranceConfig,
) -> Result<RedhefferQuadruple> {
    let sys = q.realization();
    let e = q.split();
    let c = sys.output_op().as_matrix();
    let c1 = linalg::sub(c, 0, 0, e, c.ncols());
    let rest = linalg::sub(c, e, 0, c.nrows() - e, c.ncols());
    let d = sys.feed_op().as_matrix();
    let d1 = linalg::sub(d, 0, 0, e, d.ncols());
    let d_rest = linalg::sub(d, e, 0, d.nrows() - e, d.ncols());
    let psi_adj = psi.adjoint().into_matrix();
    let new_c = linalg::vstack(c.ncols(), &[&(&psi_adj * &c1), &rest]);
    let new_d1 = &psi_adj * d1 * phi.as_matrix();
    let new_d = linalg::vstack(phi.ncols(), &[&new_d1, &(d_rest * phi.as_matrix())]);
    let dressed = LinearSystem::new(
        sys.state_op().clone(),
        sys.input_op() * phi,
        new_c.into(),
        new_d.into(),
        tol,
    )?;
    RedhefferQuadruple::new(dressed, psi.ncols(), tol)
}

/// Appends a state direction that the realization maps, with value one, to a
/// new last output coordinate and nowhere else. The new coordinate is a
/// column of `Ψ12` equal to zero and a unit-norm column of `Ψ22`.
pub fn append_isometric_direction(
    q: &RedhefferQuadruple,
    tol: &ToleranceConfig,
) -> Result<RedhefferQuadruple> {
    let sys = q.realization();
    let (n, m, p) = (sys.state_dim(), sys.input_dim(), sys.output_dim());
    let z = linalg::block_diag(&[sys.state_op(), &linalg::zeros(1, 1)]);
    let b = linalg::vstack(m, &[sys.input_op(), &linalg::zeros(1, m)]);
    let mut c = linalg::zeros(p + 1, n + 1);
    c.view_mut((0, 0), (p, n)).copy_from(sys.output_op().as_matrix());
    c[(p, n)] = linalg::one();
    let d = linalg::vstack(m, &[sys.feed_op(), &linalg::zeros(1, m)]);
    let out = LinearSystem::new(z.into(), b.into(), c.into(), d.into(), tol)?;
    RedhefferQuadruple::new(out, q.split(), tol)
}

/// Unit vector `e_i` in `C^n` as a column.
pub fn basis_vector(n: usize, i: usize) -> Mat {
    let mut v = linalg::zeros(n, 1);
    v[(i, 0)] = linalg::one();
    v
}

/// `sqrt` for callers building scalar instances.
pub fn sqrt(x: f64) -> f64 {
    math::sqrt(x)
}
