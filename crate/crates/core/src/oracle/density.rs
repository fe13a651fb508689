//! Density matrices of Gaussian states from the inversion integral
//! `ρ = (2π)^{-s} ∫ f(z) W(z)* d^{2s}z`, plus closed-form special cases.

use faer::{c64, Mat};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fock::{
    conj_weyl_args, displacement_poly, fock_dim, herm_eigen, hermitize, kron, scaled, spectral_apply, sqrt_table, weyl_elements, CMat,
    TruncatedOperator,
};
use super::quadrature::gauss_hermite;
use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::{is_pure, validate_state, GaussianState, Validity, PURITY_TOL};

/// Largest accepted trace defect or clipped negative mass.
pub const TRUNCATION_TOL: f64 = 1e-8;
/// Negative spectral mass below this is rounding noise; the matrix is kept as computed.
const CLIP_NOISE: f64 = 1e-13;
/// The oracle handles one- and two-mode states only.
pub const MAX_ORACLE_MODES: usize = 2;
/// Boundary decay `½ zᵀαz` required of an automatic trapezoid radius.
pub const TRAPEZOID_DECAY: f64 = 40.0;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// Integration rule for the inversion integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Quadrature {
    /// Complex-shifted Gauss–Hermite product rule; exact for the truncated block.
    #[default]
    GaussHermite,
    /// Uniform tensor grid on `[−R, R]^{2s}`; `None` picks the default radius or point count.
    Trapezoid { radius: Option<f64>, points: Option<usize> },
}

impl Quadrature {
    pub fn trapezoid_default() -> Self {
        Quadrature::Trapezoid { radius: None, points: None }
    }

    /// `(M, R)` recorded in cache headers; Gauss–Hermite reports its node count and `R = 0`.
    pub fn grid_tag(&self, state: &GaussianState, cutoff: usize) -> Result<(usize, f64)> {
        match *self {
            Quadrature::GaussHermite => Ok((gh_nodes(state, cutoff)?.0, 0.0)),
            Quadrature::Trapezoid { radius, points } => {
                Ok((points.unwrap_or_else(|| default_points(state.modes())), match radius {
                    Some(r) => r,
                    None => default_radius(state.cov())?,
                }))
            }
        }
    }
}

pub fn default_points(modes: usize) -> usize {
    if modes == 1 {
        81
    } else {
        41
    }
}

/// `R` with `½ λ_min(α) R² = 40`.
pub fn default_radius(cov: &DMatrix<f64>) -> Result<f64> {
    let lo = linalg::min_eigenvalue(cov);
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok((2.0 * TRAPEZOID_DECAY / lo).sqrt())
}

/// Accepted density: Hermitian, eigenvalues clipped at zero, unit trace.
#[derive(Debug, Clone)]
pub struct Density {
    pub operator: TruncatedOperator,
    /// `1 − Tr ρ` before renormalization.
    pub trace_defect: f64,
    /// Total weight of clipped negative eigenvalues.
    pub clip_mass: f64,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl Density {
    /// Hermitizes, clips and renormalizes `raw`; rejects it if truncation is visible.
    pub fn from_raw(modes: usize, cutoff: usize, raw: CMat) -> Result<Self> {
        let density = Self::from_raw_unchecked(modes, cutoff, raw)?;
        if density.trace_defect.abs() > TRUNCATION_TOL || density.clip_mass > TRUNCATION_TOL {
            return Err(Error::Truncation {
                trace_defect: density.trace_defect,
                clip_mass: density.clip_mass,
                tolerance: TRUNCATION_TOL,
            });
        }
        Ok(density)
    }

    pub(crate) fn from_raw_unchecked(modes: usize, cutoff: usize, raw: CMat) -> Result<Self> {
        TruncatedOperator::new(modes, cutoff, raw.clone())?;
        let (mut values, vectors) = herm_eigen(&raw)?;
        let trace: f64 = values.iter().sum();
        let clip_mass: f64 = values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
        values.iter_mut().for_each(|v| *v = v.max(0.0));
        let kept: f64 = values.iter().sum();
        if !(kept > 0.0) {
            return Err(Error::Numerical("reconstructed density has no positive spectrum".into()));
        }
        values.iter_mut().for_each(|v| *v /= kept);
        let matrix = if clip_mass > CLIP_NOISE {
            spectral_apply(&values, &vectors, |v| c64::new(v, 0.0))
        } else {
            scaled(&hermitize(&raw), c64::new(1.0 / kept, 0.0))
        };
        Ok(Self {
            operator: TruncatedOperator { modes, cutoff, matrix },
            trace_defect: 1.0 - trace,
            clip_mass,
            eigenvalues: values,
            eigenvectors: vectors,
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.operator.matrix
    }

    pub fn modes(&self) -> usize {
        self.operator.modes
    }

    pub fn cutoff(&self) -> usize {
        self.operator.cutoff
    }

    /// Ascending, nonnegative, summing to 1.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sqrt(&self) -> CMat {
        spectral_apply(&self.eigenvalues, &self.eigenvectors, |v| c64::new(v.sqrt(), 0.0))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.operator.dim()).map(|i| self.matrix()[(i, i)].re).collect()
    }
}

fn check_oracle_state(state: &GaussianState) -> Result<()> {
    if state.modes() > MAX_ORACLE_MODES {
        return Err(Error::Unsupported(format!(
            "the Fock oracle handles at most {MAX_ORACLE_MODES} modes, got {}",
            state.modes()
        )));
    }
    match validate_state(state) {
        Validity::Valid => Ok(()),
        Validity::Invalid(reason) => Err(Error::InvalidState(reason)),
    }
}

/// Reconstructs `ρ` in the truncated Fock basis. Uses the on-disk cache when
/// `GAUSSDIST_CACHE_DIR` is set.
pub fn gaussian_density(state: &GaussianState, cutoff: usize, quadrature: Quadrature) -> Result<Density> {
    match super::cache::DensityCache::from_env() {
        Some(cache) => cache.get_or_build(state, cutoff, quadrature),
        None => build_density(state, cutoff, quadrature),
    }
}

pub(crate) fn build_density(state: &GaussianState, cutoff: usize, quadrature: Quadrature) -> Result<Density> {
    Density::from_raw(state.modes(), cutoff, raw_density(state, cutoff, quadrature)?)
}

/// Unnormalized quadrature result before Hermitization.
pub fn raw_density(state: &GaussianState, cutoff: usize, quadrature: Quadrature) -> Result<CMat> {
    check_oracle_state(state)?;
    fock_dim(state.modes(), cutoff)?;
    match quadrature {
        Quadrature::GaussHermite => raw_gauss_hermite(state, cutoff),
        Quadrature::Trapezoid { radius, points } => {
            let radius = match radius {
                Some(r) => r,
                None => default_radius(state.cov())?,
            };
            let points = points.unwrap_or_else(|| default_points(state.modes()));
            if points < 2 || !(radius > 0.0) {
                return Err(Error::Unsupported(format!("trapezoid grid M={points}, R={radius}")));
            }
            raw_trapezoid(state, cutoff, radius, points)
        }
    }
}

/// Centered Gaussian `exp(−½zᵀCz)`, `C = α + ½I`: returns `L` with `LLᵀ = C⁻¹`
/// and the prefactor `1/√det C`.
fn centered_gaussian(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = cov.nrows();
    let c = cov + DMatrix::identity(n, n) * 0.5;
    let c_inv = linalg::inverse_spd(&c)?;
    let l = nalgebra::Cholesky::new(linalg::symmetrize(&c_inv))
        .ok_or_else(|| Error::Numerical("Cholesky factorization of (α + I/2)⁻¹ failed".into()))?
        .l();
    let log_det: f64 = linalg::sym_eigenvalues(&c).iter().map(|x| x.ln()).sum();
    Ok((l, (-0.5 * log_det).exp()))
}

/// Extra Fock levels kept in the centered reconstruction before displacing.
pub fn displacement_margin(state: &GaussianState) -> usize {
    if state.modes() == 1 && state.mean().amax() != 0.0 {
        12
    } else {
        0
    }
}

/// Node counts per axis `(n₁, n₂)` of the Gauss–Hermite product rule.
fn gh_nodes(state: &GaussianState, cutoff: usize) -> Result<(usize, usize)> {
    let cutoff = cutoff + displacement_margin(state);
    if state.modes() == 1 {
        return Ok((cutoff, 0));
    }
    let (l, _) = centered_gaussian(state.cov())?;
    let coupled = (2..4).any(|i| (0..2).any(|j| l[(i, j)] != 0.0));
    Ok((if coupled { 2 * cutoff - 1 } else { cutoff }, cutoff))
}

fn product_rule(n: usize) -> Vec<([f64; 2], f64)> {
    let (x, w) = gauss_hermite(n);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(([x[i], x[j]], w[i] * w[j]));
        }
    }
    out
}

fn mode_poly(x: c64, y: c64, d: usize, scale: c64, sq: &[f64]) -> Vec<c64> {
    let (g, gb) = conj_weyl_args(x, y);
    displacement_poly(g, gb, d, scale, sq)
}

fn accumulate(acc: &mut [c64], term: &[c64], weight: c64) {
    acc.iter_mut().zip(term).for_each(|(a, t)| *a += *t * weight);
}

fn sum_in_order(parts: Vec<Vec<c64>>, len: usize) -> Vec<c64> {
    let mut acc = vec![ZERO; len];
    for p in parts {
        acc.iter_mut().zip(&p).for_each(|(a, t)| *a += *t);
    }
    acc
}

fn to_mat(flat: &[c64], d: usize) -> CMat {
    Mat::from_fn(d, d, |i, j| flat[i * d + j])
}

/// `Σ_k A_k ⊗ B_k` for row-major `d × d` factors, via one product `XᵀY`.
fn kron_sum(a_rows: &[Vec<c64>], b_rows: &[Vec<c64>], d: usize) -> CMat {
    let d2 = d * d;
    let x = Mat::from_fn(a_rows.len(), d2, |k, e| a_rows[k][e]);
    let y = Mat::from_fn(b_rows.len(), d2, |k, e| b_rows[k][e]);
    let g = x.transpose() * &y;
    Mat::from_fn(d2, d2, |r, c| {
        let (i, k) = (r / d, r % d);
        let (j, l) = (c / d, c % d);
        g[(i * d + j, k * d + l)]
    })
}

fn raw_gauss_hermite(state: &GaussianState, d: usize) -> Result<CMat> {
    let inner = d + displacement_margin(state);
    let centered = raw_centered(state, inner)?;
    if state.mean().amax() == 0.0 {
        return Ok(centered);
    }
    let sq = sqrt_table(inner);
    let mut block = identity_block();
    for k in 0..state.modes() {
        let (mq, mp) = (state.mean()[2 * k], state.mean()[2 * k + 1]);
        let gamma = c64::new(mq, mp) * std::f64::consts::FRAC_1_SQRT_2;
        let flat = displacement_poly(gamma, gamma.conj(), inner, c64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0), &sq);
        block = kron(&block, &Mat::from_fn(d, inner, |i, j| flat[i * inner + j]));
    }
    Ok(&block * &centered * block.adjoint())
}

fn identity_block() -> CMat {
    Mat::from_fn(1, 1, |_, _| c64::new(1.0, 0.0))
}

/// Centered state with covariance `state.cov()`, real Gauss–Hermite nodes.
fn raw_centered(state: &GaussianState, d: usize) -> Result<CMat> {
    let (l, pref) = centered_gaussian(state.cov())?;
    let sq = sqrt_table(d);
    let re = |x: f64| c64::new(x, 0.0);
    if state.modes() == 1 {
        let rule = product_rule(d);
        let parts: Vec<Vec<c64>> = rule
            .par_chunks(d)
            .map(|chunk| {
                let mut acc = vec![ZERO; d * d];
                for &([v1, v2], w) in chunk {
                    let x = re(l[(0, 0)] * v1);
                    let y = re(l[(1, 0)] * v1 + l[(1, 1)] * v2);
                    accumulate(&mut acc, &mode_poly(x, y, d, re(w), &sq), re(1.0));
                }
                acc
            })
            .collect();
        let flat = sum_in_order(parts, d * d);
        return Ok(scaled(&to_mat(&flat, d), re(pref)));
    }
    let coupled = (2..4).any(|i| (0..2).any(|j| l[(i, j)] != 0.0));
    let n1 = if coupled { 2 * d - 1 } else { d };
    let rule1 = product_rule(n1);
    let rule2 = product_rule(d);
    let rows: Vec<(Vec<c64>, Vec<c64>)> = rule1
        .par_iter()
        .map(|&([a, b], w1)| {
            let x1 = re(l[(0, 0)] * a);
            let y1 = re(l[(1, 0)] * a + l[(1, 1)] * b);
            let first = mode_poly(x1, y1, d, re(w1 * pref), &sq);
            let bx = l[(2, 0)] * a + l[(2, 1)] * b;
            let by = l[(3, 0)] * a + l[(3, 1)] * b;
            let mut second = vec![ZERO; d * d];
            for &([c, e], w2) in &rule2 {
                let x2 = re(bx + l[(2, 2)] * c);
                let y2 = re(by + l[(3, 2)] * c + l[(3, 3)] * e);
                accumulate(&mut second, &mode_poly(x2, y2, d, re(w2), &sq), re(1.0));
            }
            (first, second)
        })
        .collect();
    let (a_rows, b_rows): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(kron_sum(&a_rows, &b_rows, d))
}

/// `f(z) = exp(imᵀz − ½zᵀαz)`.
pub fn char_function(state: &GaussianState, z: &[f64]) -> c64 {
    let zv = DVector::from_column_slice(z);
    let quad = zv.dot(&(state.cov() * &zv));
    c64::new(-0.5 * quad, state.mean().dot(&zv)).exp()
}

fn raw_trapezoid(state: &GaussianState, d: usize, radius: f64, points: usize) -> Result<CMat> {
    let h = 2.0 * radius / (points - 1) as f64;
    let axis: Vec<f64> = (0..points).map(|k| -radius + k as f64 * h).collect();
    let mut grid = Vec::with_capacity(points * points);
    for &x in &axis {
        for &y in &axis {
            grid.push([x, y]);
        }
    }
    let sq = sqrt_table(d);
    let cell = h * h / (2.0 * std::f64::consts::PI);
    // elements of W(−z) including the e^{−|z|²/4} factor
    let elements = |z: [f64; 2]| {
        let scale = c64::new((-(z[0] * z[0] + z[1] * z[1]) / 4.0).exp(), 0.0);
        mode_poly(c64::new(z[0], 0.0), c64::new(z[1], 0.0), d, scale, &sq)
    };
    if state.modes() == 1 {
        let parts: Vec<Vec<c64>> = grid
            .par_chunks(points)
            .map(|chunk| {
                let mut acc = vec![ZERO; d * d];
                for &z in chunk {
                    accumulate(&mut acc, &elements(z), char_function(state, &z) * cell);
                }
                acc
            })
            .collect();
        return Ok(to_mat(&sum_in_order(parts, d * d), d));
    }
    let second: Vec<Vec<c64>> = grid.par_iter().map(|&z| elements(z)).collect();
    let rows: Vec<(Vec<c64>, Vec<c64>)> = grid
        .par_iter()
        .map(|&z1| {
            let first = elements(z1);
            let mut acc = vec![ZERO; d * d];
            for (z2, e2) in grid.iter().zip(&second) {
                let f = char_function(state, &[z1[0], z1[1], z2[0], z2[1]]);
                accumulate(&mut acc, e2, f * cell * cell);
            }
            (first, acc)
        })
        .collect();
    let (a_rows, b_rows): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(kron_sum(&a_rows, &b_rows, d))
}

/// Closed-form density of a single-mode thermal, coherent or pure centered squeezed state.
pub fn special_case_density(state: &GaussianState, cutoff: usize) -> Result<Density> {
    check_oracle_state(state)?;
    fock_dim(1, cutoff)?;
    if state.modes() != 1 {
        return Err(Error::Unsupported("closed-form densities are single-mode".into()));
    }
    let a = state.cov();
    let scale = a.amax().max(1.0);
    let isotropic = a[(0, 1)].abs() <= 1e-12 * scale && (a[(0, 0)] - a[(1, 1)]).abs() <= 1e-12 * scale;
    let centered = state.mean().amax() == 0.0;
    let raw = if isotropic && centered {
        let nbar = (a[(0, 0)] - 0.5).max(0.0);
        let r = nbar / (nbar + 1.0);
        Mat::from_fn(cutoff, cutoff, |i, j| if i == j { c64::new((1.0 - r) * r.powi(i as i32), 0.0) } else { ZERO })
    } else if isotropic && (a[(0, 0)] - 0.5).abs() <= 1e-12 {
        let m = state.mean();
        let gamma = c64::new(m[0], m[1]) * std::f64::consts::FRAC_1_SQRT_2;
        let mut amp = vec![c64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0); cutoff];
        for n in 1..cutoff {
            amp[n] = amp[n - 1] * gamma / (n as f64).sqrt();
        }
        outer(&amp)
    } else if centered && is_pure(state, PURITY_TOL) {
        outer(&squeezed_vacuum_amplitudes(a, cutoff))
    } else {
        return Err(Error::Unsupported(
            "closed form covers single-mode thermal, coherent and centered pure squeezed states".into(),
        ));
    };
    Density::from_raw(1, cutoff, raw)
}

fn outer(amp: &[c64]) -> CMat {
    Mat::from_fn(amp.len(), amp.len(), |i, j| amp[i] * amp[j].conj())
}

/// Even-photon amplitudes `(−e^{iφ} tanh r)^n √((2n)!)/(2ⁿ n!) / √cosh r`.
fn squeezed_vacuum_amplitudes(a: &DMatrix<f64>, cutoff: usize) -> Vec<c64> {
    let sinh_sq = ((a[(0, 0)] + a[(1, 1)] - 1.0) / 2.0).max(0.0);
    let (sinh, cosh) = (sinh_sq.sqrt(), (1.0 + sinh_sq).sqrt());
    let a_sq = c64::new((a[(0, 0)] - a[(1, 1)]) / 2.0, a[(0, 1)]);
    let phase = if sinh > 0.0 { -a_sq / (sinh * cosh) } else { c64::new(1.0, 0.0) };
    let ratio = -phase * (sinh / cosh);
    let mut amp = vec![ZERO; cutoff];
    let mut c = c64::new(1.0 / cosh.sqrt(), 0.0);
    for n in 0..cutoff.div_ceil(2) {
        if n > 0 {
            c = c * ratio * ((2 * n - 1) as f64 / (2 * n) as f64).sqrt();
        }
        if 2 * n < cutoff {
            amp[2 * n] = c;
        }
    }
    amp
}

/// `Tr ρ W(z)` with exact Fock blocks of `W(z)`.
pub fn weyl_expectation(rho: &CMat, modes: usize, cutoff: usize, z: &[f64]) -> c64 {
    let d = cutoff;
    if modes == 1 {
        let w = weyl_elements(z[0], z[1], d);
        let mut t = ZERO;
        for i in 0..d {
            for j in 0..d {
                t += rho[(i, j)] * w[(j, i)];
            }
        }
        return t;
    }
    let w1 = weyl_elements(z[0], z[1], d);
    let w2 = weyl_elements(z[2], z[3], d);
    let mut t = ZERO;
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l in 0..d {
                    t += rho[(i * d + k, j * d + l)] * w1[(j, i)] * w2[(l, k)];
                }
            }
        }
    }
    t
}

/// Default 5 × 5 probe grid with coordinates in `[−1, 1]`.
pub fn default_probes(modes: usize) -> Vec<Vec<f64>> {
    let ticks = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut out = Vec::with_capacity(25);
    for &a in &ticks {
        for &b in &ticks {
            out.push(if modes == 1 { vec![a, b] } else { vec![a, b, 0.5 * (a + b), 0.5 * (a - b)] });
        }
    }
    out
}

/// `max |Tr ρW(z) − f(z)|` over the probes.
pub fn char_fn_check(rho: &Density, state: &GaussianState, probes: &[Vec<f64>]) -> Result<f64> {
    if rho.modes() != state.modes() {
        return Err(Error::Dimension { expected: 2 * rho.modes(), found: state.space().dim() });
    }
    let mut worst = 0.0f64;
    for z in probes {
        if z.len() != 2 * state.modes() {
            return Err(Error::Dimension { expected: 2 * state.modes(), found: z.len() });
        }
        let got = weyl_expectation(rho.matrix(), rho.modes(), rho.cutoff(), z);
        worst = worst.max((got - char_function(state, z)).norm());
    }
    Ok(worst)
}

/// Trapezoid value of `(2π)^{-s} ∫ conj(f₁) f₂ d^{2s}z`, equal to `Tr ρ₁ρ₂`.
pub fn parseval_integral(s1: &GaussianState, s2: &GaussianState, points: usize) -> Result<f64> {
    if s1.modes() != s2.modes() {
        return Err(Error::Dimension { expected: s1.space().dim(), found: s2.space().dim() });
    }
    let n = s1.space().dim();
    let radius = default_radius(&(s1.cov() + s2.cov()))?;
    let h = 2.0 * radius / (points - 1) as f64;
    let total = points.pow(n as u32);
    let mut sum = ZERO;
    let mut z = vec![0.0; n];
    for idx in 0..total {
        let mut k = idx;
        for zi in z.iter_mut() {
            *zi = -radius + (k % points) as f64 * h;
            k /= points;
        }
        sum += char_function(s1, &z).conj() * char_function(s2, &z);
    }
    Ok(sum.re * h.powi(n as i32) / (2.0 * std::f64::consts::PI).powi(s1.modes() as i32))
}

/// `Re Tr ρ₁ρ₂`.
pub fn hs_inner(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            t += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    t
}
