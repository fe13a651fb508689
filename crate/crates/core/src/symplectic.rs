//! Gaussian-state parameters over the canonical symplectic space.
//!
//! Quadratures are ordered `q1, p1, …, qs, ps` and ħ = 1, so the vacuum has
//! covariance `I/2` and a covariance matrix is admissible iff every
//! symplectic eigenvalue is at least 1/2.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance on `‖α − αᵀ‖` (scaled by `‖α‖`).
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Slack allowed below 1/2 for a symplectic eigenvalue.
pub const SYMPL_TOL: f64 = 1e-8;
/// Distance of every symplectic eigenvalue from 1/2 for a pure state.
pub const PURITY_TOL: f64 = 1e-8;

/// Block-diagonal commutation matrix with `s` blocks `[[0, 1], [-1, 0]]`.
pub fn build_delta(modes: usize) -> Result<DMatrix<f64>> {
    if modes == 0 {
        return Err(Error::ZeroModes);
    }
    let n = 2 * modes;
    let mut delta = DMatrix::zeros(n, n);
    for j in 0..modes {
        delta[(2 * j, 2 * j + 1)] = 1.0;
        delta[(2 * j + 1, 2 * j)] = -1.0;
    }
    Ok(delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    modes: usize,
    delta: DMatrix<f64>,
}

impl SymplecticSpace {
    pub fn new(modes: usize) -> Result<Self> {
        Ok(Self { modes, delta: build_delta(modes)? })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Phase-space dimension `2s`.
    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn delta(&self) -> &DMatrix<f64> {
        &self.delta
    }

    /// `Δ⁻¹`, which equals `Δᵀ = −Δ` for the canonical form.
    pub fn delta_inv(&self) -> DMatrix<f64> {
        self.delta.transpose()
    }

    fn check_square(&self, m: &DMatrix<f64>) -> Result<()> {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension { expected: n, found: m.nrows().max(m.ncols()) });
        }
        Ok(())
    }
}

/// A Gaussian state `ρ_{m,α}` given by its mean vector and covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateFile", into = "StateFile")]
pub struct GaussianState {
    space: SymplecticSpace,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// On-disk JSON layout: `{"modes": s, "mean": [..2s], "cov": [[..2s]; 2s]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub modes: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl TryFrom<StateFile> for GaussianState {
    type Error = Error;

    fn try_from(file: StateFile) -> Result<Self> {
        let space = SymplecticSpace::new(file.modes)?;
        let n = space.dim();
        if file.cov.len() != n {
            return Err(Error::Dimension { expected: n, found: file.cov.len() });
        }
        if let Some(row) = file.cov.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, found: row.len() });
        }
        let cov = DMatrix::from_fn(n, n, |i, j| file.cov[i][j]);
        GaussianState::from_parts(space, DVector::from_vec(file.mean), cov)
    }
}

impl From<GaussianState> for StateFile {
    fn from(state: GaussianState) -> Self {
        let n = state.space.dim();
        StateFile {
            modes: state.space.modes,
            mean: state.mean.iter().copied().collect(),
            cov: (0..n).map(|i| (0..n).map(|j| state.cov[(i, j)]).collect()).collect(),
        }
    }
}

impl GaussianState {
    /// Builds a state after checking dimensions only; see [`validate_state`].
    pub fn from_parts(space: SymplecticSpace, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if mean.len() != space.dim() {
            return Err(Error::Dimension { expected: space.dim(), found: mean.len() });
        }
        space.check_square(&cov)?;
        Ok(Self { space, mean, cov })
    }

    /// Builds a state and rejects it unless it passes [`validate_state`].
    pub fn new(space: SymplecticSpace, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let state = Self::from_parts(space, mean, cov)?;
        match validate_state(&state) {
            Validity::Valid => Ok(state),
            Validity::Invalid(reason) => Err(Error::InvalidState(reason)),
        }
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        Self::thermal(modes, 0.5)
    }

    /// Centered state with covariance `a·I`, i.e. mean occupation `a − 1/2` per mode.
    pub fn thermal(modes: usize, a: f64) -> Result<Self> {
        let space = SymplecticSpace::new(modes)?;
        let n = space.dim();
        Self::new(space, DVector::zeros(n), DMatrix::identity(n, n) * a)
    }

    /// Coherent state: vacuum covariance displaced to `mean`.
    pub fn coherent(mean: &[f64]) -> Result<Self> {
        if mean.is_empty() || !mean.len().is_multiple_of(2) {
            return Err(Error::Dimension { expected: 2 * (mean.len() / 2).max(1), found: mean.len() });
        }
        let space = SymplecticSpace::new(mean.len() / 2)?;
        let n = space.dim();
        Self::new(space, DVector::from_column_slice(mean), DMatrix::identity(n, n) * 0.5)
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn modes(&self) -> usize {
        self.space.modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Why a state failed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum InvalidReason {
    NonFinite,
    Asymmetric { residual: f64 },
    NotPositiveDefinite { min_eigenvalue: f64 },
    Uncertainty { min_sympl_eigenvalue: f64 },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFinite => write!(f, "mean or covariance contains non-finite entries"),
            Self::Asymmetric { residual } => {
                write!(f, "covariance is not symmetric (‖α − αᵀ‖ = {residual:.3e})")
            }
            Self::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "covariance is not positive definite (smallest eigenvalue {min_eigenvalue:.6})")
            }
            Self::Uncertainty { min_sympl_eigenvalue } => write!(
                f,
                "covariance violates the uncertainty relation α ≥ ±(i/2)Δ: \
                 symplectic eigenvalue {min_sympl_eigenvalue:.6} < 1/2"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Validity {
    Valid,
    Invalid(InvalidReason),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// `α^{1/2} Δᵀ α^{1/2}`: antisymmetric, with eigenvalues `±i a_j`.
fn normal_form_generator(cov: &DMatrix<f64>, space: &SymplecticSpace) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    space.check_square(cov)?;
    let root = linalg::sqrt_spd(cov)?;
    let k = &root * space.delta_inv() * &root;
    Ok(((&k - k.transpose()) * 0.5, root))
}

/// Symplectic eigenvalues of a positive-definite covariance, descending.
pub fn symplectic_spectrum(cov: &DMatrix<f64>, space: &SymplecticSpace) -> Result<Vec<f64>> {
    let (k, _) = normal_form_generator(cov, space)?;
    let squares = linalg::sym_eigenvalues(&(k.transpose() * &k));
    let mut desc: Vec<f64> = squares.iter().rev().copied().collect();
    desc.iter_mut().for_each(|x| *x = x.max(0.0));
    Ok(desc.chunks(2).map(|pair| (0.5 * (pair[0] + pair[1])).sqrt()).collect())
}

pub fn validate_state(state: &GaussianState) -> Validity {
    let cov = &state.cov;
    if cov.iter().chain(state.mean.iter()).any(|x| !x.is_finite()) {
        return Validity::Invalid(InvalidReason::NonFinite);
    }
    let scale = cov.norm().max(f64::MIN_POSITIVE);
    let residual = (cov - cov.transpose()).norm();
    if residual > SYMMETRY_TOL * scale {
        return Validity::Invalid(InvalidReason::Asymmetric { residual });
    }
    let min_eigenvalue = linalg::min_eigenvalue(cov);
    if min_eigenvalue <= 0.0 {
        return Validity::Invalid(InvalidReason::NotPositiveDefinite { min_eigenvalue });
    }
    match symplectic_spectrum(cov, &state.space) {
        Ok(spec) => {
            let lowest = spec.iter().copied().fold(f64::INFINITY, f64::min);
            if lowest < 0.5 - SYMPL_TOL {
                Validity::Invalid(InvalidReason::Uncertainty { min_sympl_eigenvalue: lowest })
            } else {
                Validity::Valid
            }
        }
        Err(_) => Validity::Invalid(InvalidReason::NotPositiveDefinite { min_eigenvalue }),
    }
}

/// Purity test `‖α + ¼ Δ α⁻¹ Δ‖ ≤ tol`.
pub fn is_pure(state: &GaussianState, tol: f64) -> bool {
    let delta = state.space.delta();
    match linalg::inverse_spd(&state.cov) {
        Ok(inv) => {
            let residual = &state.cov + delta * inv * delta * 0.25;
            linalg::spectral_norm(&residual) <= tol
        }
        Err(_) => false,
    }
}

/// Centered and commuting with Δ.
pub fn is_gauge_invariant(state: &GaussianState, tol: f64) -> bool {
    let delta = state.space.delta();
    let commutator = &state.cov * delta - delta * &state.cov;
    state.mean.amax() <= tol && linalg::spectral_norm(&commutator) <= tol
}

/// `α = Sᵀ diag(a_1, a_1, …, a_s, a_s) S` with `S` symplectic.
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition {
    pub symplectic: DMatrix<f64>,
    pub sympl_eigenvalues: Vec<f64>,
}

impl WilliamsonDecomposition {
    pub fn diagonal(&self) -> DMatrix<f64> {
        let d: Vec<f64> = self.sympl_eigenvalues.iter().flat_map(|&a| [a, a]).collect();
        DMatrix::from_diagonal(&DVector::from_vec(d))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.symplectic.transpose() * self.diagonal() * &self.symplectic
    }
}

pub fn williamson(cov: &DMatrix<f64>, space: &SymplecticSpace) -> Result<WilliamsonDecomposition> {
    let (k, root) = normal_form_generator(cov, space)?;
    let n = space.dim();
    let (values, vectors) = linalg::sym_eigen(&(k.transpose() * &k));
    let top = values[n - 1].abs().max(f64::MIN_POSITIVE);

    // clusters of (numerically) equal a_j², highest first
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in (0..n).rev() {
        match clusters.last_mut() {
            Some(c) if (values[c[0]] - values[i]).abs() <= 1e-8 * top => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut sympl = Vec::with_capacity(space.modes());
    for cluster in &clusters {
        if cluster.len() % 2 != 0 {
            return Err(Error::Numerical("unpaired symplectic eigenvalue".into()));
        }
        let frame = DMatrix::from_columns(&cluster.iter().map(|&i| vectors.column(i)).collect::<Vec<_>>());
        let projector = &frame * frame.transpose();
        let first = basis.len();
        for _ in 0..cluster.len() / 2 {
            // canonical choice inside a degenerate eigenspace: the projected
            // standard basis vector with the largest residual, lowest index on ties
            let mut best: Option<(DVector<f64>, f64)> = None;
            for e in 0..n {
                let mut r = projector.column(e).into_owned();
                for _ in 0..2 {
                    for b in &basis[first..] {
                        let c = b.dot(&r);
                        r.axpy(-c, b, 1.0);
                    }
                }
                let norm = r.norm();
                if best.as_ref().is_none_or(|(_, bn)| norm > *bn + 1e-12) {
                    best = Some((r, norm));
                }
            }
            let (r, norm) = best.ok_or_else(|| Error::Numerical("empty eigenspace".into()))?;
            if norm < 1e-8 {
                return Err(Error::Numerical("failed to orthogonalize symplectic basis".into()));
            }
            let u = r / norm;
            let ku = &k * &u;
            let a = ku.norm();
            if a <= 0.0 || !a.is_finite() {
                return Err(Error::Numerical("vanishing symplectic eigenvalue".into()));
            }
            let mut v = ku / a;
            let c = u.dot(&v);
            v.axpy(-c, &u, 1.0);
            basis.push(u);
            basis.push(v.normalize());
            sympl.push(a);
        }
    }

    let frame = DMatrix::from_columns(&basis);
    let d_inv_sqrt: Vec<f64> = sympl.iter().flat_map(|&a| [1.0 / a.sqrt(); 2]).collect();
    let symplectic = DMatrix::from_diagonal(&DVector::from_vec(d_inv_sqrt)) * frame.transpose() * root;
    Ok(WilliamsonDecomposition { symplectic, sympl_eigenvalues: sympl })
}

/// Kind of random state to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    /// All symplectic eigenvalues 1/2, arbitrary mean.
    Pure,
    /// Centered, covariance commuting with Δ.
    Gauge,
    General,
}

impl std::str::FromStr for StateClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pure" => Ok(Self::Pure),
            "gauge" => Ok(Self::Gauge),
            "general" => Ok(Self::General),
            other => Err(format!("unknown state class `{other}` (expected pure|gauge|general)")),
        }
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pure => "pure",
            Self::Gauge => "gauge",
            Self::General => "general",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomStateConfig {
    pub class: StateClass,
    /// Upper end of the symplectic-eigenvalue range `[1/2, sympl_max]`.
    pub sympl_max: f64,
    /// Bound on `‖m‖₂`.
    pub mean_scale: f64,
    /// Entries of the symmetric generator `H` are uniform in `[-squeeze, squeeze]`.
    pub squeeze: f64,
}

impl Default for RandomStateConfig {
    fn default() -> Self {
        Self { class: StateClass::General, sympl_max: 3.0, mean_scale: 2.0, squeeze: 0.4 }
    }
}

/// Raw parameters `(H, a_j, m)` of a random state; `α = Sᵀ diag(a) S` with `S = exp(ΔH)`.
#[derive(Debug, Clone)]
pub struct RandomStateParams {
    pub generator: DMatrix<f64>,
    pub sympl_eigenvalues: Vec<f64>,
    pub mean: DVector<f64>,
}

impl RandomStateParams {
    pub fn sample<R: Rng + ?Sized>(space: &SymplecticSpace, rng: &mut R, config: &RandomStateConfig) -> Self {
        let n = space.dim();
        let s = space.modes();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = if config.squeeze > 0.0 { rng.gen_range(-config.squeeze..=config.squeeze) } else { 0.0 };
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        let sympl_max = config.sympl_max.max(0.5);
        let sympl_eigenvalues = match config.class {
            StateClass::Pure => vec![0.5; s],
            _ => (0..s).map(|_| if sympl_max > 0.5 { rng.gen_range(0.5..=sympl_max) } else { 0.5 }).collect(),
        };
        let mean = match config.class {
            StateClass::Gauge => DVector::zeros(n),
            _ => {
                let dir = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let norm = dir.norm();
                let radius = config.mean_scale * rng.gen::<f64>();
                if norm > 0.0 {
                    dir * (radius / norm)
                } else {
                    DVector::zeros(n)
                }
            }
        };
        if config.class == StateClass::Gauge {
            let delta = space.delta();
            h = (&h - delta * &h * delta) * 0.5;
        }
        Self { generator: h, sympl_eigenvalues, mean }
    }

    /// Componentwise blend `(1 − t)·self + t·other`; stays inside the class of both.
    pub fn interpolate(&self, other: &Self, t: f64) -> Self {
        Self {
            generator: &self.generator * (1.0 - t) + &other.generator * t,
            sympl_eigenvalues: self
                .sympl_eigenvalues
                .iter()
                .zip(&other.sympl_eigenvalues)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
            mean: &self.mean * (1.0 - t) + &other.mean * t,
        }
    }

    pub fn symplectic(&self, space: &SymplecticSpace) -> DMatrix<f64> {
        (space.delta() * &self.generator).exp()
    }

    pub fn build(&self, space: &SymplecticSpace) -> Result<GaussianState> {
        let s = self.symplectic(space);
        let d: Vec<f64> = self.sympl_eigenvalues.iter().flat_map(|&a| [a, a]).collect();
        let cov = linalg::symmetrize(&(s.transpose() * DMatrix::from_diagonal(&DVector::from_vec(d)) * &s));
        GaussianState::new(space.clone(), self.mean.clone(), cov)
    }
}

/// Deterministic random state: the same `(seed, config)` always yields the same state.
pub fn random_state(space: &SymplecticSpace, seed: u64, config: &RandomStateConfig) -> Result<GaussianState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RandomStateParams::sample(space, &mut rng, config).build(space)
}
