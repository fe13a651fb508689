//! Truncated Fock-space operators: ladder, quadratures, Weyl operators and
//! closed-form displacement matrix elements.

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

/// Hermiticity tolerance for [`TruncatedOperator`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Operator on the `cutoff^modes`-dimensional truncated Fock space, mode 1 most significant.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub modes: usize,
    pub cutoff: usize,
    pub matrix: CMat,
}

impl TruncatedOperator {
    pub fn new(modes: usize, cutoff: usize, matrix: CMat) -> Result<Self> {
        let dim = fock_dim(modes, cutoff)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension { expected: dim, found: matrix.nrows() });
        }
        Ok(Self { modes, cutoff, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// `max |A_ij − conj(A_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_residual() <= HERMITIAN_TOL
    }
}

pub(crate) fn fock_dim(modes: usize, cutoff: usize) -> Result<usize> {
    if modes == 0 {
        return Err(Error::ZeroModes);
    }
    if cutoff < 2 {
        return Err(Error::Unsupported(format!("Fock cutoff {cutoff} is below 2")));
    }
    cutoff
        .checked_pow(modes as u32)
        .filter(|&d| d <= 1 << 14)
        .ok_or_else(|| Error::Unsupported(format!("Fock space {cutoff}^{modes} is too large")))
}

/// `(A + Aᴴ)/2`.
pub fn hermitize(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Spectrum (ascending) and eigenvectors of a Hermitian matrix.
pub fn herm_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let eig = hermitize(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigendecomposition failed: {e:?}")))?;
    let values = eig.S().column_vector().iter().map(|v| v.re).collect();
    Ok((values, eig.U().to_owned()))
}

/// `V diag(f(λ)) Vᴴ`.
pub fn spectral_apply(values: &[f64], vectors: &CMat, f: impl Fn(f64) -> c64) -> CMat {
    let scaled = Mat::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, j)] * f(values[j]));
    &scaled * vectors.adjoint()
}

pub fn scaled(m: &CMat, c: c64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
}

/// Truncated annihilation operator, `A|n⟩ = √n|n−1⟩`.
pub fn ladder(cutoff: usize) -> CMat {
    Mat::from_fn(cutoff, cutoff, |i, j| if j == i + 1 { c64::new((j as f64).sqrt(), 0.0) } else { c64::new(0.0, 0.0) })
}

fn embed(single: &CMat, mode: usize, modes: usize, cutoff: usize) -> CMat {
    let mut out = identity(1);
    for k in 0..modes {
        out = if k == mode { kron(&out, single) } else { kron(&out, &identity(cutoff)) };
    }
    out
}

/// `(q_j, p_j)` for every mode.
pub fn quadrature_ops(modes: usize, cutoff: usize) -> Result<Vec<(CMat, CMat)>> {
    fock_dim(modes, cutoff)?;
    let a = ladder(cutoff);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let q = Mat::from_fn(cutoff, cutoff, |i, j| (a[(i, j)] + a[(j, i)].conj()) * r);
    let p = Mat::from_fn(cutoff, cutoff, |i, j| (a[(i, j)] - a[(j, i)].conj()) * c64::new(0.0, -r));
    Ok((0..modes).map(|k| (embed(&q, k, modes, cutoff), embed(&p, k, modes, cutoff))).collect())
}

/// `exp(i Σ(x_j q_j + y_j p_j))` of the truncated quadratures.
pub fn weyl_operator(z: &[f64], modes: usize, cutoff: usize) -> Result<TruncatedOperator> {
    if z.len() != 2 * modes {
        return Err(Error::Dimension { expected: 2 * modes, found: z.len() });
    }
    let ops = quadrature_ops(modes, cutoff)?;
    let dim = fock_dim(modes, cutoff)?;
    let mut gen = Mat::<c64>::zeros(dim, dim);
    for (k, (q, p)) in ops.iter().enumerate() {
        gen = &gen + scaled(q, c64::new(z[2 * k], 0.0)) + scaled(p, c64::new(z[2 * k + 1], 0.0));
    }
    let (values, vectors) = herm_eigen(&gen)?;
    let w = spectral_apply(&values, &vectors, |l| c64::new(l.cos(), l.sin()));
    TruncatedOperator::new(modes, cutoff, w)
}

pub(crate) fn sqrt_table(n: usize) -> Vec<f64> {
    (0..n).map(|k| (k as f64).sqrt()).collect()
}

/// `scale · ⟨m|D|n⟩ e^{γγ̄/2}` for `D = exp(γa† − γ̄a)`, row-major `d × d`.
///
/// `γ` and `γ̄` are independent so that the elements continue analytically to
/// complex quadrature arguments. Each diagonal band `n − m = ±k` comes from the
/// three-term recurrence of normalized Laguerre polynomials `L_m^{(k)}(γγ̄)`.
pub(crate) fn displacement_poly(gamma: c64, gamma_bar: c64, d: usize, scale: c64, sq: &[f64]) -> Vec<c64> {
    let x = gamma * gamma_bar;
    let mut out = vec![c64::new(0.0, 0.0); d * d];
    let mut t = vec![c64::new(0.0, 0.0); d];
    let (mut upper, mut lower) = (scale, scale);
    for k in 0..d {
        if k > 0 {
            upper = -upper * gamma_bar / sq[k];
            lower = lower * gamma / sq[k];
        }
        let len = d - k;
        t[0] = c64::new(1.0, 0.0);
        if len > 1 {
            t[1] = (c64::new((1 + k) as f64, 0.0) - x) / sq[1 + k];
        }
        for m in 2..len {
            let a = (c64::new((2 * m - 1 + k) as f64, 0.0) - x) / (sq[m] * sq[m + k]);
            let b = (sq[m - 1] * sq[m + k - 1]) / (sq[m] * sq[m + k]);
            t[m] = a * t[m - 1] - t[m - 2] * b;
        }
        for m in 0..len {
            out[m * d + m + k] = upper * t[m];
            out[(m + k) * d + m] = lower * t[m];
        }
    }
    out
}

/// `γ, γ̄` of `W(−z)` for one mode, `z = (x, y)` possibly complex.
pub(crate) fn conj_weyl_args(x: c64, y: c64) -> (c64, c64) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let ix = c64::new(0.0, 1.0) * x;
    ((y - ix) * r, (y + ix) * r)
}

/// Exact Fock block of the single-mode `W(z)`, `z = (x, y)` real.
pub fn weyl_elements(x: f64, y: f64, cutoff: usize) -> CMat {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let gamma = c64::new(-y * r, x * r);
    let scale = c64::new((-(x * x + y * y) / 4.0).exp(), 0.0);
    let flat = displacement_poly(gamma, gamma.conj(), cutoff, scale, &sqrt_table(cutoff));
    Mat::from_fn(cutoff, cutoff, |i, j| flat[i * cutoff + j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMat) -> f64 {
        let mut w = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                w = w.max(m[(i, j)].norm());
            }
        }
        w
    }

    fn block(m: &CMat, n: usize) -> CMat {
        Mat::from_fn(n, n, |i, j| m[(i, j)])
    }

    #[test]
    fn quadrature_examples() {
        let ops = quadrature_ops(1, 12).unwrap();
        let (q, p) = &ops[0];
        let q2 = q * q;
        assert!((q2[(0, 0)] - c64::new(0.5, 0.0)).norm() < 1e-15);
        let comm = q * p - p * q;
        let d = 11;
        let expected = Mat::from_fn(d, d, |i, j| if i == j { c64::new(0.0, 1.0) } else { c64::new(0.0, 0.0) });
        assert!(max_abs(&(block(&comm, d) - expected)) < 1e-13);
        let a = ladder(12);
        let num = a.adjoint() * &a;
        for n in 0..12 {
            assert!((num[(n, n)].re - n as f64).abs() < 1e-13);
        }
        assert!(TruncatedOperator::new(1, 12, q.clone()).unwrap().is_hermitian());
        assert!(quadrature_ops(1, 1).is_err());
    }

    #[test]
    fn two_mode_quadratures_commute_across_modes() {
        let ops = quadrature_ops(2, 5).unwrap();
        let c = &ops[0].0 * &ops[1].1 - &ops[1].1 * &ops[0].0;
        assert!(max_abs(&c) < 1e-14);
    }

    #[test]
    fn weyl_identity_and_unitarity() {
        let w = weyl_operator(&[0.0, 0.0], 1, 8).unwrap();
        assert!(max_abs(&(&w.matrix - identity(8))) < 1e-14);

        let d = 60;
        for z in [[2.0, 0.0], [0.0, -2.0], [1.2, 1.5], [-1.4, 0.3]] {
            let w = weyl_operator(&z, 1, d).unwrap();
            let u = &w.matrix * w.matrix.adjoint();
            assert!(max_abs(&(block(&u, d / 2) - identity(d / 2))) <= 1e-8);
            let exact = weyl_elements(z[0], z[1], d);
            assert!(max_abs(&(block(&w.matrix, d / 2) - block(&exact, d / 2))) <= 1e-8);
        }
    }

    #[test]
    fn weyl_relation() {
        let d = 60;
        let (z, zp) = ([0.7, -0.4], [-0.3, 0.9]);
        let w1 = weyl_operator(&z, 1, d).unwrap().matrix;
        let w2 = weyl_operator(&zp, 1, d).unwrap().matrix;
        let w12 = weyl_operator(&[z[0] + zp[0], z[1] + zp[1]], 1, d).unwrap().matrix;
        // Δ(z, z') = x y' − y x'
        let sympl = z[0] * zp[1] - z[1] * zp[0];
        let phase = c64::new(0.0, -0.5 * sympl).exp();
        let diff = &w1 * &w2 - scaled(&w12, phase);
        assert!(max_abs(&block(&diff, d / 2)) < 1e-8);
    }

    #[test]
    fn vacuum_elements() {
        let w = weyl_elements(1.0, 0.0, 6);
        assert!((w[(0, 0)].re - (-0.25f64).exp()).abs() < 1e-15);
        let w = weyl_elements(1.0, 1.0, 6);
        assert!((w[(0, 0)].re - (-0.5f64).exp()).abs() < 1e-15);
    }
}
