//! Dense complex linear algebra helpers shared by every module.
//!
//! All routines accept empty matrices (a zero row or column count) and return
//! correctly shaped empty results; nalgebra's decompositions are never called
//! on an empty input.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use super::C64;
use crate::math;

pub type Mat = DMatrix<C64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn zeros(rows: usize, cols: usize) -> Mat {
    Mat::from_element(rows, cols, ZERO)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn scalar(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Thin singular value decomposition `m = u * diag(s) * v^*`, singular values
/// in descending order.
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

pub fn svd(m: &Mat) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            u: zeros(r, 0),
            s: Vec::new(),
            v: zeros(c, 0),
        };
    }
    let dec = m.clone().svd(true, true);
    let out = sorted(Svd {
        u: dec.u.expect("svd computed with u"),
        s: dec.singular_values.iter().copied().collect(),
        v: dec.v_t.expect("svd computed with v_t").adjoint(),
    });
    if factorization_holds(m, &out) {
        out
    } else {
        jacobi_svd(m)
    }
}

const SVD_CHECK: f64 = 1e-12;

/// `m = u diag(s) v^*` with orthonormal `u` and `v`, up to [`SVD_CHECK`].
fn factorization_holds(m: &Mat, d: &Svd) -> bool {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let k = d.s.len();
    let sigma = Mat::from_fn(k, k, |i, j| if i == j { scalar(d.s[i]) } else { ZERO });
    let recon = (&d.u * sigma * d.v.adjoint() - m).norm();
    let u_gap = (d.u.adjoint() * &d.u - identity(k)).norm();
    let v_gap = (d.v.adjoint() * &d.v - identity(k)).norm();
    recon <= SVD_CHECK * scale && u_gap <= SVD_CHECK && v_gap <= SVD_CHECK
}

fn sorted(d: Svd) -> Svd {
    let mut order: Vec<usize> = (0..d.s.len()).collect();
    order.sort_by(|&a, &b| d.s[b].total_cmp(&d.s[a]));
    Svd {
        u: Mat::from_fn(d.u.nrows(), order.len(), |i, j| d.u[(i, order[j])]),
        s: order.iter().map(|&j| d.s[j]).collect(),
        v: Mat::from_fn(d.v.nrows(), order.len(), |i, j| d.v[(i, order[j])]),
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub(crate) fn jacobi_svd(m: &Mat) -> Svd {
    let (r, c) = m.shape();
    if r < c {
        let t = jacobi_svd(&m.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let mut a = m.clone();
    let mut v = identity(c);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = math::cabs(gamma);
                if g == 0.0 || g <= f64::EPSILON * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let unphase = gamma.conj() / scalar(g);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / math::sqrt(1.0 + t * t);
                let sn = cs * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)];
                        let y = mat[(i, q)] * unphase;
                        mat[(i, p)] = x * scalar(cs) - y * scalar(sn);
                        mat[(i, q)] = x * scalar(sn) + y * scalar(cs);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let s: Vec<f64> = (0..c).map(|j| a.column(j).norm()).collect();
    let d = sorted(Svd { u: a, s, v });
    let top = d.s[0];
    let live = d.s.iter().filter(|&&x| x > top * f64::EPSILON * c as f64 && x > 0.0).count();
    let mut u = zeros(r, c);
    for j in 0..live {
        u.set_column(j, &(d.u.column(j) / scalar(d.s[j])));
    }
    if live < c {
        let fill = complement_basis(&u.columns(0, live).into_owned(), r);
        for j in live..c {
            u.set_column(j, &fill.column(j - live));
        }
    }
    Svd { u, s: d.s, v: d.v }
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    svd(m).s
}

/// Operator (spectral) norm; zero for empty matrices.
pub fn norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value over the domain: zero when the matrix has more
/// columns than rows, `+inf` for an empty domain.
pub fn min_singular_value(m: &Mat) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Number of singular values above `rel_tol * max(sigma_max, floor)`.
pub fn numerical_rank(s: &[f64], rel_tol: f64, floor: f64) -> usize {
    let top = s.first().copied().unwrap_or(0.0).max(floor);
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `‖m^* m - I‖`.
pub fn isometry_defect(m: &Mat) -> f64 {
    norm(&(m.adjoint() * m - identity(m.ncols())))
}

/// `‖m m^* - I‖`.
pub fn coisometry_defect(m: &Mat) -> f64 {
    norm(&(m * m.adjoint() - identity(m.nrows())))
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()) * scalar(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(h: &Mat) -> (Vec<f64>, Mat) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Positive square root of a Hermitian positive semidefinite matrix, negative
/// eigenvalues clamped to zero.
pub fn psd_sqrt(h: &Mat) -> Mat {
    let (vals, vecs) = hermitian_eigen(h);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&l| scalar(math::sqrt(l.max(0.0)))));
    &vecs * Mat::from_diagonal(&d) * vecs.adjoint()
}

/// Smallest eigenvalue of a Hermitian matrix (`+inf` when empty).
pub fn min_eigenvalue(h: &Mat) -> f64 {
    hermitian_eigen(h).0.last().copied().unwrap_or(f64::INFINITY)
}

/// Moore-Penrose pseudoinverse with relative singular value cutoff.
pub fn pinv(m: &Mat, rel_tol: f64) -> Mat {
    let (r, c) = m.shape();
    let Svd { u, s, v } = svd(m);
    let rank = numerical_rank(&s, rel_tol, 0.0);
    let mut out = zeros(c, r);
    for k in 0..rank {
        let inv = scalar(1.0 / s[k]);
        out += v.column(k) * u.column(k).adjoint() * inv;
    }
    out
}

/// Orthonormal basis of the range of `m` (relative cutoff `rel_tol`, with the
/// scale floored at `floor`), canonicalized by [`canonical_basis`].
pub fn range_basis(m: &Mat, rel_tol: f64, floor: f64) -> Mat {
    let Svd { u, s, .. } = svd(m);
    let rank = numerical_rank(&s, rel_tol, floor);
    canonical_basis(&u.columns(0, rank).into_owned())
}

/// Orthonormal basis of the kernel of `m`.
pub fn kernel_basis(m: &Mat, rel_tol: f64, floor: f64) -> Mat {
    let n = m.ncols();
    let row_space = range_basis(&m.adjoint(), rel_tol, floor);
    complement_basis(&row_space, n)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q` inside `C^n`.
pub fn complement_basis(q: &Mat, n: usize) -> Mat {
    let proj = identity(n) - q * q.adjoint();
    pivoted_orthonormalize(&proj, n - q.ncols())
}

/// Re-express the span of the orthonormal columns `q` in a basis that depends
/// only on the subspace: pivoted Gram-Schmidt on the columns of the orthogonal
/// projector `q q^*`, each vector phased so that its pivot entry is real and
/// positive. Coordinate subspaces come back as standard basis vectors.
pub fn canonical_basis(q: &Mat) -> Mat {
    let proj = q * q.adjoint();
    pivoted_orthonormalize(&proj, q.ncols())
}

fn pivoted_orthonormalize(proj: &Mat, count: usize) -> Mat {
    let n = proj.nrows();
    let mut residual = proj.clone();
    let mut out = zeros(n, count);
    for k in 0..count {
        let mut best = 0;
        let mut best_norm = -1.0;
        for j in 0..n {
            let nj = residual.column(j).norm();
            if nj > best_norm + 1e-12 {
                best = j;
                best_norm = nj;
            }
        }
        let mut v: DVector<C64> = residual.column(best).into_owned();
        for i in 0..k {
            let qi = out.column(i);
            let c = qi.dotc(&v);
            v -= qi * c;
        }
        let nv = v.norm();
        if nv == 0.0 {
            break;
        }
        v /= scalar(nv);
        let pivot = v[best];
        if math::cabs(pivot) > 0.0 {
            v *= pivot.conj() / scalar(math::cabs(pivot));
        }
        out.set_column(k, &v);
        let coeffs = v.adjoint() * &residual;
        residual -= &v * coeffs;
    }
    out
}

/// Unitary factor of the polar decomposition (`u v^*` from the SVD).
pub fn polar_unitary(m: &Mat) -> Mat {
    let Svd { u, v, .. } = svd(m);
    u * v.adjoint()
}

/// Inverse of a square matrix, `None` when the reciprocal condition number is
/// below `rcond_min`.
pub fn try_inverse(m: &Mat, rcond_min: f64) -> Option<Mat> {
    let n = m.nrows();
    if n == 0 {
        return Some(zeros(0, 0));
    }
    let s = singular_values(m);
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if hi == 0.0 || lo / hi < rcond_min {
        return None;
    }
    m.clone().lu().try_inverse()
}

/// Eigenvalues of a general square complex matrix (diagonal of the complex
/// Schur form).
pub fn eigenvalues(m: &Mat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let t = Schur::new(m.clone()).unpack().1;
    let mut out: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    // A 2x2 block can survive when the sub-diagonal never underflows; resolve
    // it explicitly.
    let mut i = 0;
    while i + 1 < n {
        let sub = math::cabs(t[(i + 1, i)]);
        let scale = math::cabs(t[(i, i)]) + math::cabs(t[(i + 1, i + 1)]) + 1.0;
        if sub > 1e-12 * scale {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let tr = a + d;
            let det = a * d - b * c;
            let disc = math::csqrt(tr * tr - det * scalar(4.0));
            out[i] = (tr + disc) * scalar(0.5);
            out[i + 1] = (tr - disc) * scalar(0.5);
            i += 2;
        } else {
            i += 1;
        }
    }
    out
}

pub fn spectral_radius(m: &Mat) -> f64 {
    eigenvalues(m).iter().map(|&z| math::cabs(z)).fold(0.0, f64::max)
}

/// Stack matrices left to right. All must share the row count `rows`.
pub fn hstack(rows: usize, parts: &[&Mat]) -> Mat {
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c0 = 0;
    for p in parts {
        debug_assert_eq!(p.nrows(), rows);
        out.view_mut((0, c0), (rows, p.ncols())).copy_from(*p);
        c0 += p.ncols();
    }
    out
}

/// Stack matrices top to bottom. All must share the column count `cols`.
pub fn vstack(cols: usize, parts: &[&Mat]) -> Mat {
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r0 = 0;
    for p in parts {
        debug_assert_eq!(p.ncols(), cols);
        out.view_mut((r0, 0), (p.nrows(), cols)).copy_from(*p);
        r0 += p.nrows();
    }
    out
}

/// Block diagonal matrix.
pub fn block_diag(parts: &[&Mat]) -> Mat {
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for p in parts {
        out.view_mut((r0, c0), p.shape()).copy_from(*p);
        r0 += p.nrows();
        c0 += p.ncols();
    }
    out
}

pub fn sub(m: &Mat, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat {
    m.view((r0, c0), (nr, nc)).into_owned()
}

pub const fn one() -> C64 {
    ONE
}
