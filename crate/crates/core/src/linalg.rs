//! Dense real-symmetric matrices, their spectral decomposition, and the
//! Löwner order.
//!
//! Every matrix in the crate is a [`HermitianMatrix`]: an immutable,
//! exactly symmetric `n x n` array of finite reals with `1 <= n <= 512`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension accepted at construction.
pub const MAX_DIM: usize = 512;

/// Relative asymmetry below which input is silently symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-12;

const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Self-adjoint matrix in real-symmetric representation.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: DMatrix<f64>,
}

impl HermitianMatrix {
    /// Builds a matrix from row-major data.
    ///
    /// Asymmetry up to `1e-12 * (1 + max|entry|)` is removed by averaging
    /// with the transpose; anything larger is rejected.
    pub fn from_row_major(n: usize, data: &[f64]) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Dimension { n, max: MAX_DIM });
        }
        if data.len() != n * n {
            return Err(Error::DataLength {
                n,
                expected: n * n,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: k / n,
                col: k % n,
            });
        }
        let m = DMatrix::from_row_slice(n, n, data);
        Self::from_dmatrix(m)
    }

    /// Wraps an nalgebra matrix, applying the same validation as
    /// [`from_row_major`](Self::from_row_major).
    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                left: rows,
                right: cols,
            });
        }
        let n = rows;
        if n == 0 || n > MAX_DIM {
            return Err(Error::Dimension { n, max: MAX_DIM });
        }
        if let Some(k) = m.iter().position(|x| !x.is_finite()) {
            // column-major position
            return Err(Error::NonFinite {
                row: k % n,
                col: k / n,
            });
        }
        let max_abs = m.amax();
        let asymmetry = (&m - m.transpose()).amax();
        let allowed = SYMMETRY_TOL * (1.0 + max_abs);
        if asymmetry > allowed {
            return Err(Error::Asymmetric { asymmetry, allowed });
        }
        Ok(Self::symmetrized(m))
    }

    /// Averages with the transpose without any asymmetry check. Used for
    /// results of arithmetic on symmetric operands, where the only
    /// asymmetry is rounding.
    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Self { inner: out }
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::scaled_identity(n, 1.0)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::scaled_identity(n, 0.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Result<Self> {
        Self::from_diagonal(&vec![c; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::Dimension { n, max: MAX_DIM });
        }
        if let Some(k) = diag.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: k, col: k });
        }
        Ok(Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        })
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::from_diagonal(&[value])
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.inner.transpose().as_slice().to_vec()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.inner.amax()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self::symmetrized(&self.inner + &other.inner))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self::symmetrized(&self.inner - &other.inner))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::symmetrized(&self.inner * c)
    }

    /// `self + c * I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.inner.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        Self { inner: m }
    }

    /// `self * other`, symmetrized. Only meaningful when the operands commute
    /// (e.g. powers of one matrix).
    pub fn mul_symmetrized(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self::symmetrized(&self.inner * &other.inner))
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same_dim(self, other)?;
        Ok((&self.inner - &other.inner).amax())
    }
}

pub(crate) fn check_same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("n >= 1")
    }

    /// `max |lambda|`, the operator norm of the decomposed matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.eigenvalues.len();
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(n, n)).amax()
    }

    /// `V diag(values) V^T`, symmetrized.
    pub fn reconstruct_with(&self, values: &[f64]) -> HermitianMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        HermitianMatrix::symmetrized(scaled * self.vectors.transpose())
    }

    /// `max |V diag(lambda) V^T - A|`.
    pub fn reconstruction_residual(&self, a: &HermitianMatrix) -> f64 {
        self.reconstruct_with(&self.eigenvalues)
            .max_abs_diff(a)
            .unwrap_or(f64::INFINITY)
    }
}

/// Symmetric eigendecomposition. Fails instead of returning an unconverged
/// or inaccurate result: the reconstruction residual is checked against
/// `1e-10 * (1 + max |lambda|)`.
pub fn eigh(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let m = &a.inner;
    let evd = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)])
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::EigenNonConvergence { n })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns nondecreasing eigenvalues
    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i]).collect();
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenNonConvergence { n });
    }
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    let eig = SpectralDecomposition {
        eigenvalues,
        vectors,
    };
    if eig.reconstruction_residual(a) > RECONSTRUCTION_TOL * (1.0 + eig.spectral_radius()) {
        return Err(Error::EigenNonConvergence { n });
    }
    Ok(eig)
}

/// Operator norm `max |lambda|`.
pub fn opnorm(a: &HermitianMatrix) -> Result<f64> {
    Ok(eigh(a)?.spectral_radius())
}

pub fn min_eigenvalue(a: &HermitianMatrix) -> Result<f64> {
    Ok(eigh(a)?.min())
}

/// How PSD checks absorb rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub psd_tol: f64,
    /// Scale `psd_tol` by `1 + ||M||`.
    pub relative: bool,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            psd_tol: 1e-10,
            relative: true,
        }
    }
}

impl ToleranceConfig {
    pub fn new(psd_tol: f64, relative: bool) -> Result<Self> {
        if !(psd_tol > 0.0 && psd_tol.is_finite()) {
            return Err(Error::Parameter {
                name: "psd_tol",
                value: psd_tol,
                expected: "(0, inf)",
            });
        }
        Ok(Self { psd_tol, relative })
    }

    /// Absolute threshold for a matrix (or quantity) of norm `norm`.
    pub fn threshold(&self, norm: f64) -> f64 {
        if self.relative {
            self.psd_tol * (1.0 + norm)
        } else {
            self.psd_tol
        }
    }
}

/// `a >= b`: the difference is positive semidefinite up to tolerance.
pub fn loewner_geq(a: &HermitianMatrix, b: &HermitianMatrix, tol: &ToleranceConfig) -> Result<bool> {
    let eig = eigh(&a.sub(b)?)?;
    Ok(eig.min() >= -tol.threshold(eig.spectral_radius()))
}

/// `a > b`: the difference is positive definite beyond tolerance. In finite
/// dimension this is also the invertibility order.
pub fn loewner_gt(a: &HermitianMatrix, b: &HermitianMatrix, tol: &ToleranceConfig) -> Result<bool> {
    let eig = eigh(&a.sub(b)?)?;
    Ok(eig.min() > tol.threshold(eig.spectral_radius()))
}

/// Order data of a pair: the gap `m = lambda_min(A - B)`, `||A||`, and
/// `||(A - B)^{-1}||` (`None` when `A - B` is singular or indefinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderWitness {
    pub m: f64,
    pub norm_a: f64,
    pub inv_gap_norm: Option<f64>,
}

pub fn order_gap(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<OrderWitness> {
    let m = min_eigenvalue(&a.sub(b)?)?;
    let norm_a = opnorm(a)?;
    let inv_gap_norm = (m > 0.0).then(|| 1.0 / m);
    Ok(OrderWitness {
        m,
        norm_a,
        inv_gap_norm,
    })
}
