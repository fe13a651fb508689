//! The square-root correction `Υ_α = √(I + (2Δ⁻¹α)⁻²)` and the transformed
//! covariance `α̂ = α(I + Υ_α)` that governs the characteristic function of `√ρ`.
//!
//! `Υ_α` is the α-positive square root, i.e. positive in the inner product
//! `zᵀαz`. It is computed through the Euclidean similarity `W = α^{1/2}`:
//! `K = W⁻¹(α + ¼Δα⁻¹Δ)W⁻¹` is symmetric PSD and `Υ_α = W⁻¹√K W`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::{SymplecticSpace, PURITY_TOL};

/// Eigenvalues of `K` below this abort; between it and zero they are rounding.
pub const NEGATIVE_FLOOR: f64 = 1e-10;

/// `K` has eigenvalues `1 − 1/(4a_j²)`; directions with `a_j` within
/// [`PURITY_TOL`] of 1/2 are treated as exactly pure.
const PURE_DIRECTION: f64 = 4.0 * PURITY_TOL;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HatPair {
    #[serde(with = "crate::matrix_serde")]
    pub upsilon: DMatrix<f64>,
    #[serde(with = "crate::matrix_serde")]
    pub hat: DMatrix<f64>,
    #[serde(with = "crate::matrix_serde")]
    pub source_cov: DMatrix<f64>,
}

pub fn upsilon_of(cov: &DMatrix<f64>, space: &SymplecticSpace) -> Result<DMatrix<f64>> {
    let n = space.dim();
    if cov.nrows() != n || cov.ncols() != n {
        return Err(Error::Dimension { expected: n, found: cov.nrows() });
    }
    let delta = space.delta();
    let root = linalg::sqrt_spd(cov)?;
    let root_inv = linalg::inverse_spd(&root)?;
    let cov_inv = linalg::inverse_spd(cov)?;
    let defect = linalg::symmetrize(&(cov + delta * cov_inv * delta * 0.25));
    let k = linalg::symmetrize(&(&root_inv * defect * &root_inv));
    let (values, vectors) = linalg::sym_eigen(&k);
    if let Some(&low) = values.iter().find(|&&x| x < -NEGATIVE_FLOOR) {
        return Err(Error::NegativeRadicand { what: "α + ¼Δα⁻¹Δ (uncertainty relation)", value: low, floor: NEGATIVE_FLOOR });
    }
    let roots: Vec<f64> = values.iter().map(|&x| if x < PURE_DIRECTION { 0.0 } else { x.sqrt() }).collect();
    let sqrt_k = DMatrix::from_fn(n, n, |i, j| vectors[(i, j)] * roots[j]) * vectors.transpose();
    Ok(root_inv * sqrt_k * root)
}

pub fn hat_of(cov: &DMatrix<f64>, space: &SymplecticSpace) -> Result<HatPair> {
    let upsilon = upsilon_of(cov, space)?;
    let hat = linalg::symmetrize(&(cov + cov * &upsilon));
    Ok(HatPair { upsilon, hat, source_cov: cov.clone() })
}

/// Numerical residuals of the identities satisfied by a [`HatPair`].
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    /// `‖¼Δα̂⁻¹Δ + (2α − α̂)‖₂`.
    pub complement: f64,
    /// `‖Υ² − (I + (2Δ⁻¹α)⁻²)‖₂`.
    pub upsilon_square: f64,
    /// `‖αΥ − (αΥ)ᵀ‖₂`.
    pub alpha_upsilon_asymmetry: f64,
    /// Smallest eigenvalue of `αΥ`.
    pub alpha_upsilon_min: f64,
    /// Smallest eigenvalues of `α̂ − α` and `2α − α̂`.
    pub hat_minus_cov_min: f64,
    pub twice_cov_minus_hat_min: f64,
    /// Smallest eigenvalue of `α − αΥ`.
    pub cov_minus_alpha_upsilon_min: f64,
    /// `‖[Υ, Δ⁻¹α]‖₂`.
    pub commutator: f64,
    /// `‖α‖`, `‖α̂‖`, `‖α⁻¹‖`, `‖α̂⁻¹‖`.
    pub cov_norm: f64,
    pub hat_norm: f64,
    pub cov_inv_norm: f64,
    pub hat_inv_norm: f64,
}

impl IdentityReport {
    /// `a ≤ ‖α̂‖ ≤ 2a`, with relative slack `rel` for rounding at the equality cases.
    pub fn hat_norm_sandwich(&self, rel: f64) -> bool {
        let a = self.cov_norm;
        self.hat_norm >= a * (1.0 - rel) && self.hat_norm <= 2.0 * a * (1.0 + rel)
    }

    /// `1/(2a) ≤ ‖α̂⁻¹‖ ≤ 4a`.
    pub fn hat_inverse_sandwich(&self, rel: f64) -> bool {
        let a = self.cov_norm;
        self.hat_inv_norm >= (1.0 - rel) / (2.0 * a) && self.hat_inv_norm <= 4.0 * a * (1.0 + rel)
    }

    /// `1/a ≤ ‖α⁻¹‖ ≤ 4a`.
    pub fn cov_inverse_sandwich(&self, rel: f64) -> bool {
        let a = self.cov_norm;
        self.cov_inv_norm >= (1.0 - rel) / a && self.cov_inv_norm <= 4.0 * a * (1.0 + rel)
    }
}

pub fn certify(pair: &HatPair, space: &SymplecticSpace) -> Result<IdentityReport> {
    let n = space.dim();
    let delta = space.delta();
    let delta_inv = space.delta_inv();
    let cov = &pair.source_cov;
    let hat = &pair.hat;
    let ups = &pair.upsilon;
    let eye = DMatrix::<f64>::identity(n, n);

    let cov_inv = linalg::inverse_spd(cov)?;
    let hat_inv = linalg::inverse_spd(hat)?;
    let complement = (delta * &hat_inv * delta * 0.25 + (cov * 2.0 - hat)).norm();
    let target = &eye + &cov_inv * delta * &cov_inv * delta * 0.25;
    let upsilon_square = (ups * ups - target).norm();
    let au = cov * ups;
    let alpha_upsilon_asymmetry = (&au - au.transpose()).norm();
    let au_sym = linalg::symmetrize(&au);
    let a_op = &delta_inv * cov;
    Ok(IdentityReport {
        complement,
        upsilon_square,
        alpha_upsilon_asymmetry,
        alpha_upsilon_min: linalg::min_eigenvalue(&au_sym),
        hat_minus_cov_min: linalg::min_eigenvalue(&(hat - cov)),
        twice_cov_minus_hat_min: linalg::min_eigenvalue(&(cov * 2.0 - hat)),
        cov_minus_alpha_upsilon_min: linalg::min_eigenvalue(&(cov - &au_sym)),
        commutator: (ups * &a_op - &a_op * ups).norm(),
        cov_norm: linalg::op_norm(cov),
        hat_norm: linalg::op_norm(hat),
        cov_inv_norm: linalg::op_norm(&cov_inv),
        hat_inv_norm: linalg::op_norm(&hat_inv),
    })
}

/// `α + √(α² − I/4)`, valid when `[α, Δ] = 0`.
pub fn gauge_hat(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.nrows();
    let inner = cov * cov - DMatrix::identity(n, n) * 0.25;
    cov + linalg::sym_apply(&inner, |x| x.max(0.0).sqrt())
}
