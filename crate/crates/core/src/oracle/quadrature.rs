//! Gauss–Hermite rules for the standard normal weight.

use faer::{Mat, Side};

/// Nodes and weights of the `n`-point rule for `E[g(v)]`, `v ~ N(0, 1)`.
/// Exact for polynomials of degree `≤ 2n − 1`; weights sum to 1.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Hermite rule needs at least one node");
    let jacobi = Mat::<f64>::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64).sqrt() } else { 0.0 });
    let eig = jacobi.self_adjoint_eigen(Side::Lower).expect("symmetric tridiagonal eigenproblem");
    let mut nodes: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (he, he_prev) = hermite_pair(n, *x);
            let step = he / (n as f64 * he_prev);
            if !step.is_finite() {
                break;
            }
            *x -= step;
        }
    }
    // symmetric rule: mirror to kill the last-bit asymmetry
    let mirrored: Vec<f64> = (0..n).map(|i| 0.5 * (nodes[i] - nodes[n - 1 - i])).collect();
    let weights: Vec<f64> = mirrored.iter().map(|&x| 1.0 / christoffel(n, x)).collect();
    let total: f64 = weights.iter().sum();
    (mirrored, weights.iter().map(|w| w / total).collect())
}

/// `(He_n(x), He_{n−1}(x))`.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `Σ_{k<n} ψ_k(x)²` with orthonormal `ψ_k = He_k/√k!`.
fn christoffel(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut sum = 0.0;
    for k in 0..n {
        sum += cur * cur;
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    sum
}
