//! States overlap `Tr√ρ₁√ρ₂` in closed form and the trace-norm distance
//! bounds built on it.
//!
//! Notation: `a = ‖α‖`, `b = ‖β‖` (operator norms), `m = m₂ − m₁`,
//! `σ = (α̂ + β̂)/2`. Norms of the symmetric difference `α − β` are spectral.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hat::hat_of;
use crate::linalg;
use crate::symplectic::{is_gauge_invariant, is_pure, GaussianState, SymplecticSpace, PURITY_TOL};

/// Rounding floor for radicands that are nonnegative analytically.
pub const RADICAND_FLOOR: f64 = 1e-10;
/// Tolerance used to classify states as gauge-invariant when assembling a report.
pub const GAUGE_TOL: f64 = 1e-9;

/// Coefficient applied to `mᵀσ⁻¹m` in the exponent of the overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapConvention {
    /// `exp(−½ mᵀσ⁻¹m)`, the coefficient as printed alongside the bounds.
    PaperHalf,
    /// `exp(−¼ mᵀσ⁻¹m)`, from evaluating the Gaussian Parseval integral directly.
    Quarter,
}

impl OverlapConvention {
    pub const ALL: [OverlapConvention; 2] = [OverlapConvention::PaperHalf, OverlapConvention::Quarter];

    pub fn coefficient(self) -> f64 {
        match self {
            Self::PaperHalf => 0.5,
            Self::Quarter => 0.25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PaperHalf => "paper_half",
            Self::Quarter => "quarter",
        }
    }
}

/// Oracle arbitration on displaced coherent pairs selects the quarter coefficient.
impl Default for OverlapConvention {
    fn default() -> Self {
        Self::Quarter
    }
}

impl fmt::Display for OverlapConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OverlapConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper_half" => Ok(Self::PaperHalf),
            "quarter" => Ok(Self::Quarter),
            other => Err(format!("unknown overlap convention `{other}` (expected paper_half|quarter)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapValue {
    pub value: f64,
    /// `(det α̂ det β̂)^{1/4} / det σ^{1/2}`.
    pub prefactor: f64,
    /// `mᵀσ⁻¹m`.
    pub exponent_quadform: f64,
    pub convention: OverlapConvention,
}

fn check_pair(s1: &GaussianState, s2: &GaussianState) -> Result<()> {
    if s1.modes() != s2.modes() {
        return Err(Error::Dimension { expected: s1.space().dim(), found: s2.space().dim() });
    }
    Ok(())
}

fn log_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let values = linalg::sym_eigenvalues(m);
    if values.iter().any(|&x| x <= 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: values.min() });
    }
    Ok(values.iter().map(|x| x.ln()).sum())
}

/// `Tr√ρ = det(2α̂)^{1/4}`.
pub fn sqrt_char_prefactor(cov: &DMatrix<f64>, space: &SymplecticSpace) -> Result<f64> {
    let pair = hat_of(cov, space)?;
    Ok((0.25 * log_det_spd(&(pair.hat * 2.0))?).exp())
}

fn overlap_from_hats(hat1: &DMatrix<f64>, hat2: &DMatrix<f64>, m: &DVector<f64>, convention: OverlapConvention) -> Result<OverlapValue> {
    let sigma = (hat1 + hat2) * 0.5;
    let sigma_inv = linalg::inverse_spd(&sigma)
        .map_err(|e| Error::Numerical(format!("σ(α̂, β̂) is singular: {e}")))?;
    let log_pref = 0.25 * (log_det_spd(hat1)? + log_det_spd(hat2)?) - 0.5 * log_det_spd(&sigma)?;
    let prefactor = log_pref.exp();
    let exponent_quadform = m.dot(&(sigma_inv * m)).max(0.0);
    let value = prefactor * (-convention.coefficient() * exponent_quadform).exp();
    Ok(OverlapValue { value, prefactor, exponent_quadform, convention })
}

/// Closed-form `Tr√ρ₁√ρ₂`; the pair is reduced to `ρ_α` vs `ρ_{m₂−m₁, β}`.
pub fn overlap(s1: &GaussianState, s2: &GaussianState, convention: OverlapConvention) -> Result<OverlapValue> {
    check_pair(s1, s2)?;
    let space = s1.space();
    let h1 = hat_of(s1.cov(), space)?;
    let h2 = hat_of(s2.cov(), space)?;
    overlap_from_hats(&h1.hat, &h2.hat, &(s2.mean() - s1.mean()), convention)
}

/// `(2(1 − F), 2√(1 − F²))`.
pub fn bound_pair_basic(overlap: f64) -> (f64, f64) {
    let f = overlap.clamp(0.0, 1.0);
    (2.0 * (1.0 - f), 2.0 * (1.0 - f * f).sqrt())
}

struct PairTerms {
    a: f64,
    b: f64,
    modes: usize,
    mean_diff: DVector<f64>,
    cov_diff: DMatrix<f64>,
    hat1: DMatrix<f64>,
    hat2: DMatrix<f64>,
}

impl PairTerms {
    fn new(s1: &GaussianState, s2: &GaussianState) -> Result<Self> {
        check_pair(s1, s2)?;
        let space = s1.space();
        Ok(Self {
            a: linalg::op_norm(s1.cov()),
            b: linalg::op_norm(s2.cov()),
            modes: s1.modes(),
            mean_diff: s2.mean() - s1.mean(),
            cov_diff: s1.cov() - s2.cov(),
            hat1: hat_of(s1.cov(), space)?.hat,
            hat2: hat_of(s2.cov(), space)?.hat,
        })
    }

    fn mean_dist_sq(&self) -> f64 {
        self.mean_diff.norm_squared()
    }

    fn intermediate(&self) -> Result<f64> {
        let sum_inv = linalg::inverse_spd(&(&self.hat1 + &self.hat2))?;
        let mean_term = 2.0 * self.mean_diff.dot(&(sum_inv * &self.mean_diff));
        let inv1 = linalg::inverse_spd(&self.hat1)?;
        let inv2 = linalg::inverse_spd(&self.hat2)?;
        let trace = ((&self.hat1 - &self.hat2) * (inv2 - inv1)).trace() / 8.0;
        let trace = linalg::clamp_nonneg("Tr(α̂−β̂)(β̂⁻¹−α̂⁻¹)", trace, RADICAND_FLOOR)?;
        Ok(2.0 * (mean_term.max(0.0) + trace).sqrt())
    }

    /// Radicand shared by E1 and E3: `8 min(a,b)‖m‖² + ½‖α−β‖₂²`.
    fn pure_radicand(&self) -> f64 {
        8.0 * self.a.min(self.b) * self.mean_dist_sq() + 0.5 * linalg::hs_norm_sq(&self.cov_diff)
    }

    fn e1(&self) -> f64 {
        2.0 * self.pure_radicand().sqrt()
    }

    fn e2(&self) -> Result<f64> {
        let t1 = linalg::trace_norm(&self.cov_diff);
        let t2 = linalg::hs_norm_sq(&self.cov_diff);
        let r = linalg::clamp_nonneg("(a+b)‖α−β‖₁ − ‖α−β‖₂²", (self.a + self.b) * t1 - t2, RADICAND_FLOOR)?;
        Ok(4.0 * r.sqrt())
    }

    fn poly_min(&self) -> f64 {
        poly_p(self.a, self.b).min(poly_p(self.b, self.a))
    }

    fn e3(&self) -> f64 {
        let t1 = linalg::trace_norm(&self.cov_diff);
        2.0 * (self.pure_radicand() + self.poly_min() * t1).sqrt()
    }
}

/// `2√(2mᵀ(α̂+β̂)⁻¹m + ⅛Tr(α̂−β̂)(β̂⁻¹−α̂⁻¹))`.
pub fn bound_intermediate(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    PairTerms::new(s1, s2)?.intermediate()
}

/// Pure-state estimate; `None` unless both states are pure.
pub fn bound_e1(s1: &GaussianState, s2: &GaussianState) -> Result<Option<f64>> {
    check_pair(s1, s2)?;
    if !(is_pure(s1, PURITY_TOL) && is_pure(s2, PURITY_TOL)) {
        return Ok(None);
    }
    Ok(Some(PairTerms::new(s1, s2)?.e1()))
}

/// Gauge-invariant estimate `4√((a+b)‖α−β‖₁ − ‖α−β‖₂²)`; `None` unless both
/// states are centered and commute with Δ.
pub fn bound_e2(s1: &GaussianState, s2: &GaussianState) -> Result<Option<f64>> {
    check_pair(s1, s2)?;
    if !(is_gauge_invariant(s1, GAUGE_TOL) && is_gauge_invariant(s2, GAUGE_TOL)) {
        return Ok(None);
    }
    PairTerms::new(s1, s2)?.e2().map(Some)
}

/// `P(a,b) = 4a⁵[32(a+b)ab + 32ab² + 128a²b³(a+b)]`.
pub fn poly_p(a: f64, b: f64) -> f64 {
    4.0 * a.powi(5) * (32.0 * (a + b) * a * b + 32.0 * a * b * b + 128.0 * a * a * b.powi(3) * (a + b))
}

/// General estimate with the `min{P(a,b), P(b,a)}‖α−β‖₁` term.
pub fn bound_e3(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    Ok(PairTerms::new(s1, s2)?.e3())
}

/// Total mean photon number `N = ½(‖α‖₁ + ‖m‖² − s)`.
pub fn mean_photon(state: &GaussianState) -> f64 {
    0.5 * (state.cov().trace() + state.mean().norm_squared() - state.modes() as f64)
}

fn photon_max(s1: &GaussianState, s2: &GaussianState) -> f64 {
    mean_photon(s1).max(mean_photon(s2))
}

/// `√2(√N + √(N+1))[‖m₁−m₂‖₂ + 2√‖α−β‖₁]`.
pub fn lami_theorem2(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    check_pair(s1, s2)?;
    let n = photon_max(s1, s2).max(0.0);
    let t1 = linalg::trace_norm(&(s1.cov() - s2.cov()));
    let dm = (s1.mean() - s2.mean()).norm();
    Ok(2f64.sqrt() * (n.sqrt() + (n + 1.0).sqrt()) * (dm + 2.0 * t1.sqrt()))
}

/// `2√(N + s/2)·√(2‖m₁−m₂‖₂² + 2‖α−β‖)`; `None` unless both states are pure.
pub fn lami_lemma4(s1: &GaussianState, s2: &GaussianState) -> Result<Option<f64>> {
    check_pair(s1, s2)?;
    if !(is_pure(s1, PURITY_TOL) && is_pure(s2, PURITY_TOL)) {
        return Ok(None);
    }
    let n = photon_max(s1, s2).max(0.0);
    let s = s1.modes() as f64;
    let op = linalg::op_norm(&(s1.cov() - s2.cov()));
    let dm2 = (s1.mean() - s2.mean()).norm_squared();
    Ok(Some(2.0 * (n + 0.5 * s).sqrt() * (2.0 * dm2 + 2.0 * op).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applicability {
    pub both_pure: bool,
    pub both_gauge: bool,
}

/// Every bound for one state pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub modes: usize,
    pub a: f64,
    pub b: f64,
    /// `‖m₁ − m₂‖₂`.
    pub mean_dist: f64,
    /// `‖α − β‖₁`.
    pub cov_dist_1: f64,
    /// `‖α − β‖₂`.
    pub cov_dist_2: f64,
    pub overlap: OverlapValue,
    pub lower: f64,
    pub basic_upper: f64,
    pub intermediate: f64,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub e3: f64,
    #[serde(rename = "poly_P_min")]
    pub poly_p_min: f64,
    pub lami_t2: f64,
    pub lami_l4: Option<f64>,
    #[serde(rename = "photon_N")]
    pub photon_n: f64,
    pub flags: Applicability,
    /// Name and value of the smallest applicable upper bound.
    pub winner: String,
    pub min_upper: f64,
}

impl BoundReport {
    /// Applicable upper bounds by name, in CSV column order.
    pub fn upper_bounds(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("basic_upper", self.basic_upper), ("intermediate", self.intermediate)];
        if let Some(v) = self.e1 {
            out.push(("e1", v));
        }
        if let Some(v) = self.e2 {
            out.push(("e2", v));
        }
        out.push(("e3", self.e3));
        out.push(("lami_t2", self.lami_t2));
        if let Some(v) = self.lami_l4 {
            out.push(("lami_l4", v));
        }
        out
    }
}

pub fn report(s1: &GaussianState, s2: &GaussianState, convention: OverlapConvention) -> Result<BoundReport> {
    let terms = PairTerms::new(s1, s2)?;
    let both_pure = is_pure(s1, PURITY_TOL) && is_pure(s2, PURITY_TOL);
    let both_gauge = is_gauge_invariant(s1, GAUGE_TOL) && is_gauge_invariant(s2, GAUGE_TOL);
    let overlap = overlap_from_hats(&terms.hat1, &terms.hat2, &terms.mean_diff, convention)?;
    let (lower, basic_upper) = bound_pair_basic(overlap.value);
    let mut report = BoundReport {
        modes: terms.modes,
        a: terms.a,
        b: terms.b,
        mean_dist: terms.mean_dist_sq().sqrt(),
        cov_dist_1: linalg::trace_norm(&terms.cov_diff),
        cov_dist_2: linalg::hs_norm(&terms.cov_diff),
        overlap,
        lower,
        basic_upper,
        intermediate: terms.intermediate()?,
        e1: both_pure.then(|| terms.e1()),
        e2: if both_gauge { Some(terms.e2()?) } else { None },
        e3: terms.e3(),
        poly_p_min: terms.poly_min(),
        lami_t2: lami_theorem2(s1, s2)?,
        lami_l4: lami_lemma4(s1, s2)?,
        photon_n: photon_max(s1, s2),
        flags: Applicability { both_pure, both_gauge },
        winner: String::new(),
        min_upper: f64::INFINITY,
    };
    let (name, value) = report
        .upper_bounds()
        .into_iter()
        .fold(("", f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    report.winner = name.to_string();
    report.min_upper = value;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{random_state, RandomStateConfig, RandomStateParams, StateClass, SymplecticSpace};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn centered(cov: &[f64]) -> GaussianState {
        let space = SymplecticSpace::new(cov.len() / 2).unwrap();
        GaussianState::new(space, DVector::zeros(cov.len()), diag(cov)).unwrap()
    }

    fn vacuum() -> GaussianState {
        GaussianState::vacuum(1).unwrap()
    }

    fn thermal(a: f64) -> GaussianState {
        GaussianState::thermal(1, a).unwrap()
    }

    fn squeezed() -> GaussianState {
        centered(&[2.0, 0.125])
    }

    /// Coherent pair with `‖m₁ − m₂‖² = 1`.
    fn coherent_pair() -> (GaussianState, GaussianState) {
        (vacuum(), GaussianState::coherent(&[1.0, 0.0]).unwrap())
    }

    // Tr√ρ for a thermal state with occupation n̄: Σ √p_n with p_n = (1−r) rⁿ,
    // r = n̄/(n̄+1), i.e. √(1−r)/(1−√r).
    fn thermal_sqrt_trace(nbar: f64) -> f64 {
        let r = nbar / (nbar + 1.0);
        (1.0 - r).sqrt() / (1.0 - r.sqrt())
    }

    #[test]
    fn sqrt_char_prefactor_examples() {
        let sp = SymplecticSpace::new(1).unwrap();
        assert_abs_diff_eq!(sqrt_char_prefactor(&diag(&[0.5, 0.5]), &sp).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sqrt_char_prefactor(&diag(&[2.0, 0.125]), &sp).unwrap(), 1.0, epsilon = 1e-14);
        let expected = thermal_sqrt_trace(0.5);
        assert_abs_diff_eq!(expected, 1.93185, epsilon = 1e-5);
        assert_abs_diff_eq!(sqrt_char_prefactor(&diag(&[1.0, 1.0]), &sp).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn overlap_examples() {
        for st in [vacuum(), thermal(1.7), squeezed()] {
            for c in OverlapConvention::ALL {
                assert_abs_diff_eq!(overlap(&st, &st, c).unwrap().value, 1.0, epsilon = 1e-12);
            }
        }
        // ⟨0|√ρ_th|0⟩ = √p₀ = √(2/3) for n̄ = 1/2
        let f = overlap(&vacuum(), &thermal(1.0), OverlapConvention::Quarter).unwrap();
        assert_abs_diff_eq!(f.value, (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.value, 0.81650, epsilon = 1e-5);

        let (c1, c2) = coherent_pair();
        let half = overlap(&c1, &c2, OverlapConvention::PaperHalf).unwrap();
        let quarter = overlap(&c1, &c2, OverlapConvention::Quarter).unwrap();
        assert_abs_diff_eq!(half.exponent_quadform, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(half.value, (-1.0f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(quarter.value, (-0.5f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(quarter.prefactor, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn overlap_rejects_mode_mismatch() {
        let two = GaussianState::vacuum(2).unwrap();
        assert!(matches!(overlap(&vacuum(), &two, OverlapConvention::Quarter), Err(Error::Dimension { .. })));
    }

    #[test]
    fn basic_pair_examples() {
        assert_eq!(bound_pair_basic(1.0), (0.0, 0.0));
        assert_eq!(bound_pair_basic(0.0), (2.0, 2.0));
        let (lo, up) = bound_pair_basic((2.0f64 / 3.0).sqrt());
        assert_abs_diff_eq!(lo, 0.36700, epsilon = 1e-5);
        assert_abs_diff_eq!(up, 1.15470, epsilon = 1e-5);
    }

    #[test]
    fn intermediate_examples() {
        assert_abs_diff_eq!(bound_intermediate(&thermal(1.3), &thermal(1.3)).unwrap(), 0.0, epsilon = 1e-12);
        let (c1, c2) = coherent_pair();
        assert_abs_diff_eq!(bound_intermediate(&c1, &c2).unwrap(), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(bound_intermediate(&vacuum(), &thermal(1.0)).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn e1_examples() {
        assert_abs_diff_eq!(bound_e1(&squeezed(), &squeezed()).unwrap().unwrap(), 0.0, epsilon = 1e-12);
        let (c1, c2) = coherent_pair();
        assert_abs_diff_eq!(bound_e1(&c1, &c2).unwrap().unwrap(), 4.0, epsilon = 1e-12);
        let v = bound_e1(&vacuum(), &squeezed()).unwrap().unwrap();
        assert_abs_diff_eq!(v, 2.0 * (0.5f64 * (1.5 * 1.5 + 0.375 * 0.375)).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 2.18660, epsilon = 1e-5);
        assert_eq!(bound_e1(&vacuum(), &thermal(1.0)).unwrap(), None);
    }

    #[test]
    fn e2_examples() {
        assert_abs_diff_eq!(bound_e2(&thermal(1.5), &thermal(1.5)).unwrap().unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound_e2(&vacuum(), &thermal(1.0)).unwrap().unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound_e2(&thermal(1.0), &thermal(2.0)).unwrap().unwrap(), 8.0, epsilon = 1e-12);
        assert_eq!(bound_e2(&vacuum(), &squeezed()).unwrap(), None);
    }

    #[test]
    fn poly_examples() {
        assert_abs_diff_eq!(poly_p(0.5, 1.0), 11.0, epsilon = 1e-12);
        assert_abs_diff_eq!(poly_p(1.0, 0.5), 224.0, epsilon = 1e-12);
        assert_abs_diff_eq!(poly_p(0.5, 0.5), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn poly_is_increasing() {
        let grid: Vec<f64> = (0..20).map(|i| 0.5 + 0.25 * i as f64).collect();
        for &a in &grid {
            for w in grid.windows(2) {
                assert!(poly_p(a, w[1]) > poly_p(a, w[0]));
                assert!(poly_p(w[1], a) > poly_p(w[0], a));
            }
        }
    }

    #[test]
    fn e3_examples() {
        assert_abs_diff_eq!(bound_e3(&thermal(2.2), &thermal(2.2)).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound_e3(&vacuum(), &thermal(1.0)).unwrap(), 2.0 * 11.25f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(bound_e3(&vacuum(), &thermal(1.0)).unwrap(), 6.70820, epsilon = 1e-5);
        let (c1, c2) = coherent_pair();
        assert!(bound_e3(&c1, &c2).unwrap() >= bound_e1(&c1, &c2).unwrap().unwrap() - 1e-12);
    }

    #[test]
    fn photon_examples() {
        assert_abs_diff_eq!(mean_photon(&vacuum()), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mean_photon(&thermal(1.0)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(mean_photon(&coherent_pair().1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn lami_examples() {
        assert_abs_diff_eq!(lami_theorem2(&thermal(1.4), &thermal(1.4)).unwrap(), 0.0, epsilon = 1e-12);
        let t2 = lami_theorem2(&vacuum(), &thermal(1.0)).unwrap();
        assert_abs_diff_eq!(t2, 2f64.sqrt() * (0.5f64.sqrt() + 1.5f64.sqrt()) * 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t2, 5.46410, epsilon = 1e-5);
        let (c1, c2) = coherent_pair();
        assert_abs_diff_eq!(lami_theorem2(&c1, &c2).unwrap(), 2.73205, epsilon = 1e-5);

        assert_abs_diff_eq!(lami_lemma4(&squeezed(), &squeezed()).unwrap().unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lami_lemma4(&c1, &c2).unwrap().unwrap(), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        let l4 = lami_lemma4(&vacuum(), &squeezed()).unwrap().unwrap();
        assert_abs_diff_eq!(l4, 2.0 * 1.0625f64.sqrt() * 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(l4, 3.57071, epsilon = 1e-5);
        assert_eq!(lami_lemma4(&vacuum(), &thermal(1.0)).unwrap(), None);
    }

    #[test]
    fn report_flags() {
        let (c1, c2) = coherent_pair();
        let r = report(&c1, &c2, OverlapConvention::Quarter).unwrap();
        assert!(r.e1.is_some() && r.lami_l4.is_some() && r.e2.is_none());

        let r = report(&thermal(1.0), &thermal(2.0), OverlapConvention::Quarter).unwrap();
        assert!(r.e2.is_some() && r.e1.is_none() && r.lami_l4.is_none());

        // vacuum is both pure and gauge-invariant
        let r = report(&vacuum(), &vacuum(), OverlapConvention::Quarter).unwrap();
        assert!(r.e1.is_some() && r.e2.is_some());
    }

    #[test]
    fn report_vacuum_thermal() {
        let r = report(&vacuum(), &thermal(1.0), OverlapConvention::Quarter).unwrap();
        assert_abs_diff_eq!(r.e2.unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.e3, 6.70820, epsilon = 1e-5);
        assert_abs_diff_eq!(r.lami_t2, 5.46410, epsilon = 1e-5);
        assert_abs_diff_eq!(r.basic_upper, 1.15470, epsilon = 1e-5);
        assert_abs_diff_eq!(r.poly_p_min, 11.0, epsilon = 1e-12);
        assert_eq!(r.winner, "basic_upper");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["e2"], serde_json::json!(4.0));
        assert!(json.get("poly_P_min").is_some() && json.get("photon_N").is_some());
    }

    fn random_pair(seed: u64, modes: usize, class: u8, near: bool) -> (GaussianState, GaussianState) {
        let class = [StateClass::Pure, StateClass::Gauge, StateClass::General][class as usize];
        let space = SymplecticSpace::new(modes).unwrap();
        let config = RandomStateConfig { class, ..Default::default() };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p1 = RandomStateParams::sample(&space, &mut rng, &config);
        let p2 = RandomStateParams::sample(&space, &mut rng, &config);
        let p2 = if near { p1.interpolate(&p2, 0.05) } else { p2 };
        (p1.build(&space).unwrap(), p2.build(&space).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn symmetric_in_the_pair(seed in any::<u64>(), modes in 1usize..=3, class in 0u8..3, near in any::<bool>()) {
            let (s1, s2) = random_pair(seed, modes, class, near);
            let r12 = report(&s1, &s2, OverlapConvention::Quarter).unwrap();
            let r21 = report(&s2, &s1, OverlapConvention::Quarter).unwrap();
            prop_assert!((r12.overlap.value - r21.overlap.value).abs() <= 1e-12);
            let pairs = r12.upper_bounds().into_iter().zip(r21.upper_bounds());
            for ((name, x), (_, y)) in pairs {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{} {} vs {}", name, x, y);
            }
        }

        #[test]
        fn ordering_and_dominance(seed in any::<u64>(), modes in 1usize..=3, class in 0u8..3, near in any::<bool>()) {
            let (s1, s2) = random_pair(seed, modes, class, near);
            for c in OverlapConvention::ALL {
                let r = report(&s1, &s2, c).unwrap();
                prop_assert!(r.overlap.value <= 1.0 + 1e-12 && r.overlap.value >= 0.0);
                prop_assert!(r.overlap.prefactor <= 1.0 + 1e-12);
                prop_assert!(r.lower <= r.basic_upper);
                prop_assert!(r.basic_upper <= r.intermediate + 1e-9, "{} > {}", r.basic_upper, r.intermediate);
                for (name, v) in r.upper_bounds() {
                    prop_assert!(v >= r.lower - 1e-12, "{} below lower", name);
                }
            }
        }

        #[test]
        fn e2_radicand_nonnegative(seed in any::<u64>(), modes in 1usize..=3, near in any::<bool>()) {
            let (s1, s2) = random_pair(seed, modes, 1, near);
            let d = s1.cov() - s2.cov();
            let a = linalg::op_norm(s1.cov());
            let b = linalg::op_norm(s2.cov());
            prop_assert!((a + b) * linalg::trace_norm(&d) - linalg::hs_norm_sq(&d) >= -1e-10);
            prop_assert!(bound_e2(&s1, &s2).unwrap().is_some());
        }

        #[test]
        fn prefactor_is_one_only_for_equal_hats(seed in any::<u64>(), modes in 1usize..=2) {
            let space = SymplecticSpace::new(modes).unwrap();
            let s1 = random_state(&space, seed, &RandomStateConfig::default()).unwrap();
            let shifted = GaussianState::new(space.clone(), s1.mean() * 0.0, s1.cov().clone()).unwrap();
            prop_assert!((overlap(&s1, &shifted, OverlapConvention::Quarter).unwrap().prefactor - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn poly_strictly_increasing(a in 0.5f64..5.0, b in 0.5f64..5.0, da in 1e-3f64..1.0) {
            prop_assert!(poly_p(a + da, b) > poly_p(a, b));
            prop_assert!(poly_p(a, b + da) > poly_p(a, b));
        }
    }
}
