//! Fock-basis ground truth for one- and two-mode Gaussian states.

pub mod arbitration;
pub mod cache;
mod density;
mod fock;
mod quadrature;

use serde::{Deserialize, Serialize};

pub use density::{
    char_fn_check, char_function, default_points, default_probes, default_radius, gaussian_density, hs_inner,
    parseval_integral, raw_density, special_case_density, weyl_expectation, Density, Quadrature, MAX_ORACLE_MODES,
    TRAPEZOID_DECAY, TRUNCATION_TOL,
};
pub use fock::{
    herm_eigen, hermitize, identity, kron, scaled, ladder, quadrature_ops, weyl_elements, weyl_operator, CMat,
    TruncatedOperator, HERMITIAN_TOL,
};
pub use quadrature::gauss_hermite;

use crate::error::{Error, Result};
use crate::symplectic::GaussianState;

/// `Σ|λ_i(ρ₁ − ρ₂)|`.
pub fn trace_norm_distance(rho1: &TruncatedOperator, rho2: &TruncatedOperator) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::Dimension { expected: rho1.dim(), found: rho2.dim() });
    }
    let (values, _) = herm_eigen(&(&rho1.matrix - &rho2.matrix))?;
    Ok(values.iter().map(|v| v.abs()).sum())
}

/// `Tr √ρ₁ √ρ₂` from the spectral square roots.
pub fn overlap_oracle(rho1: &Density, rho2: &Density) -> Result<f64> {
    if rho1.operator.dim() != rho2.operator.dim() {
        return Err(Error::Dimension { expected: rho1.operator.dim(), found: rho2.operator.dim() });
    }
    Ok(hs_inner(&rho1.sqrt(), &rho2.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub trace_distance: f64,
    pub overlap: f64,
    pub trace_defect: [f64; 2],
    pub clip_mass: [f64; 2],
    pub char_residual: f64,
    /// Cutoff actually used after any escalation.
    pub cutoff: usize,
}

/// Oracle options for a pair of states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub cutoff: usize,
    /// Largest cutoff tried when truncation is visible at `cutoff`.
    pub max_cutoff: usize,
    pub quadrature: Quadrature,
    pub check_char: bool,
}

impl OracleConfig {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff, max_cutoff: cutoff, quadrature: Quadrature::GaussHermite, check_char: true }
    }

    pub fn escalating(cutoff: usize, max_cutoff: usize) -> Self {
        Self { max_cutoff: max_cutoff.max(cutoff), ..Self::new(cutoff) }
    }
}

/// Reconstructs both states at one cutoff, raising it by half until both are accepted.
pub fn reconstruct_pair(s1: &GaussianState, s2: &GaussianState, config: &OracleConfig) -> Result<(Density, Density)> {
    if s1.modes() != s2.modes() {
        return Err(Error::Dimension { expected: s1.space().dim(), found: s2.space().dim() });
    }
    let mut cutoff = config.cutoff;
    loop {
        let attempt = gaussian_density(s1, cutoff, config.quadrature)
            .and_then(|d1| Ok((d1, gaussian_density(s2, cutoff, config.quadrature)?)));
        match attempt {
            Err(Error::Truncation { .. }) if cutoff < config.max_cutoff => {
                cutoff = (cutoff + cutoff / 2).min(config.max_cutoff);
            }
            other => return other,
        }
    }
}

/// Oracle trace distance and overlap for a pair of states.
pub fn oracle_compare(s1: &GaussianState, s2: &GaussianState, config: &OracleConfig) -> Result<OracleResult> {
    let (d1, d2) = reconstruct_pair(s1, s2, config)?;
    let char_residual = if config.check_char {
        let probes = default_probes(s1.modes());
        char_fn_check(&d1, s1, &probes)?.max(char_fn_check(&d2, s2, &probes)?)
    } else {
        f64::NAN
    };
    Ok(OracleResult {
        trace_distance: trace_norm_distance(&d1.operator, &d2.operator)?,
        overlap: overlap_oracle(&d1, &d2)?,
        trace_defect: [d1.trace_defect, d2.trace_defect],
        clip_mass: [d1.clip_mass, d2.clip_mass],
        char_residual,
        cutoff: d1.cutoff(),
    })
}
