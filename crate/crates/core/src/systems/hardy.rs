use alloc::vec::Vec;
use core::ops::Deref;

use crate::opcore::linalg::{self, Mat};
use crate::opcore::OperatorMatrix;

/// Domain of a truncated operator: a truncated Hardy space `H²(C^d)` over
/// degrees `0..=K`, or a plain coefficient space `C^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardyDomain {
    Hardy(usize),
    Coefficient(usize),
}

impl HardyDomain {
    /// Number of matrix columns at truncation degree `k`.
    pub fn columns(self, k: usize) -> usize {
        match self {
            HardyDomain::Hardy(d) => (k + 1) * d,
            HardyDomain::Coefficient(d) => d,
        }
    }
}

/// Operator into the truncated Hardy space `H²(C^m)`, degrees `0..=K`, with
/// degree-major layout: coefficient `j` of degree `i` sits at row `i*m + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHardyOperator {
    matrix: OperatorMatrix,
    degree: usize,
    domain: HardyDomain,
    codomain_dim: usize,
}

impl TruncatedHardyOperator {
    /// Wraps a matrix; panics if its shape disagrees with the layout.
    pub fn from_matrix(
        matrix: Mat,
        degree: usize,
        domain: HardyDomain,
        codomain_dim: usize,
    ) -> Self {
        assert_eq!(
            matrix.shape(),
            ((degree + 1) * codomain_dim, domain.columns(degree)),
            "truncated operator layout mismatch"
        );
        Self {
            matrix: OperatorMatrix::from(matrix),
            degree,
            domain,
            codomain_dim,
        }
    }

    /// Block lower-triangular Toeplitz matrix of the multiplication operator
    /// with Taylor coefficients `coeffs[0..=K]` (each `cod x dom`).
    pub fn toeplitz(coeffs: &[Mat], dom: usize, cod: usize) -> Self {
        let k = coeffs.len() - 1;
        let mut m = linalg::zeros((k + 1) * cod, (k + 1) * dom);
        for i in 0..=k {
            for j in 0..=i {
                m.view_mut((i * cod, j * dom), (cod, dom))
                    .copy_from(&coeffs[i - j]);
            }
        }
        Self::from_matrix(m, k, HardyDomain::Hardy(dom), cod)
    }

    /// Block column `[W_0; ..; W_K]` acting on a coefficient space.
    pub fn block_column(coeffs: &[Mat], dom: usize, cod: usize) -> Self {
        let k = coeffs.len() - 1;
        let parts: Vec<&Mat> = coeffs.iter().collect();
        Self::from_matrix(
            linalg::vstack(dom, &parts),
            k,
            HardyDomain::Coefficient(dom),
            cod,
        )
    }

    /// Multiplication by a constant operator: `I_{K+1} ⊗ c`.
    pub fn constant(c: &Mat, k: usize) -> Self {
        let mut coeffs = Vec::with_capacity(k + 1);
        coeffs.push(c.clone());
        for _ in 0..k {
            coeffs.push(linalg::zeros(c.nrows(), c.ncols()));
        }
        Self::toeplitz(&coeffs, c.ncols(), c.nrows())
    }

    /// Forward shift on `H²(C^d)` truncated at degree `k`; the top degree is
    /// shifted out.
    pub fn shift(d: usize, k: usize) -> Self {
        let mut coeffs = Vec::with_capacity(k + 1);
        coeffs.push(linalg::zeros(d, d));
        if k >= 1 {
            coeffs.push(linalg::identity(d));
        }
        for _ in 2..=k {
            coeffs.push(linalg::zeros(d, d));
        }
        Self::toeplitz(&coeffs, d, d)
    }

    /// Embedding of `C^d` as the constants of `H²(C^d)`.
    pub fn constant_embedding(d: usize, k: usize) -> Self {
        let mut coeffs = Vec::with_capacity(k + 1);
        coeffs.push(linalg::identity(d));
        for _ in 0..k {
            coeffs.push(linalg::zeros(d, d));
        }
        Self::block_column(&coeffs, d, d)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> HardyDomain {
        self.domain
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.matrix
    }

    /// Block of output degree `i` and input degree `j` (for a coefficient
    /// domain `j` must be zero).
    pub fn block(&self, i: usize, j: usize) -> Mat {
        let cod = self.codomain_dim;
        let (dom, c0) = match self.domain {
            HardyDomain::Hardy(d) => (d, j * d),
            HardyDomain::Coefficient(d) => {
                assert_eq!(j, 0, "coefficient domains have a single block column");
                (d, 0)
            }
        };
        linalg::sub(&self.matrix, i * cod, c0, cod, dom)
    }

    /// Largest deviation from block lower-triangular Toeplitz structure.
    pub fn toeplitz_deviation(&self) -> f64 {
        let HardyDomain::Hardy(_) = self.domain else {
            return 0.0;
        };
        let k = self.degree;
        let mut worst: f64 = 0.0;
        for i in 0..=k {
            for j in 0..=k {
                let b = self.block(i, j);
                let dev = if j > i {
                    linalg::norm(&b)
                } else {
                    linalg::norm(&(b - self.block(i - j, 0)))
                };
                worst = worst.max(dev);
            }
        }
        worst
    }
}

impl Deref for TruncatedHardyOperator {
    type Target = OperatorMatrix;
    fn deref(&self) -> &OperatorMatrix {
        &self.matrix
    }
}
