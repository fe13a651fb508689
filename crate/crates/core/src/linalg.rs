//! Dense real linear algebra shared by the state, transform and bound modules.
//!
//! All matrices here are small (2s × 2s), so everything goes through a full
//! symmetric eigendecomposition. Norms of symmetric matrices are spectral:
//! trace norm = Σ|λ|, Hilbert–Schmidt norm² = Σλ², operator norm = max|λ|.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("self-adjoint eigendecomposition of a finite symmetric matrix");
    let values = eig.S().column_vector();
    let vectors = eig.U();
    // faer returns the spectrum in nondecreasing order
    (DVector::from_fn(n, |i, _| values[i]), DMatrix::from_fn(n, n, |i, j| vectors[(i, j)]))
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    sym_eigen(m).0
}

/// Applies `f` to the spectrum of a symmetric matrix.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * f(values[j]));
    symmetrize(&(scaled * vectors.transpose()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).min()
}

fn require_pd(m: &DMatrix<f64>) -> Result<()> {
    let lo = min_eigenvalue(m);
    if lo > 0.0 && lo.is_finite() {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite { min_eigenvalue: lo })
    }
}

pub fn sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_pd(m)?;
    Ok(sym_apply(m, f64::sqrt))
}

pub fn inv_sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_pd(m)?;
    Ok(sym_apply(m, |x| 1.0 / x.sqrt()))
}

pub fn inverse_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_pd(m)?;
    Ok(sym_apply(m, |x| 1.0 / x))
}

/// Trace norm of a symmetric matrix.
pub fn trace_norm(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Squared Hilbert–Schmidt norm.
pub fn hs_norm_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum()
}

pub fn hs_norm(m: &DMatrix<f64>) -> f64 {
    hs_norm_sq(m).sqrt()
}

/// Operator norm of a symmetric matrix.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest singular value of an arbitrary square matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    op_norm(&(m.transpose() * m)).sqrt()
}

/// Clamps a value that must be non-negative analytically: rounding in
/// `[-floor, 0)` maps to zero, anything below is reported.
pub fn clamp_nonneg(what: &'static str, value: f64, floor: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -floor {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand { what, value, floor })
    }
}
