//! Restarted Lanczos for the lowest eigenpair of a Hermitian operator given
//! only as a matrix-vector product.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::{axpy, dot, norm, normalize, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LanczosError {
    #[error("Lanczos did not converge after {iterations} products (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("Ritz value increased from {from} to {to}")]
    NonMonotone { from: f64, to: f64 },
    #[error("empty operator")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Cap on operator applications.
    pub max_iter: usize,
    /// Residual norm `‖Hx − θx‖` at which the pair is accepted.
    pub tol: f64,
    /// Krylov vectors kept before a restart.
    pub krylov_dim: usize,
    pub seed: u64,
    /// Random admixture added to a warm start so that symmetry sectors it
    /// misses can still be reached.
    pub perturbation: f64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { max_iter: 2000, tol: 1e-9, krylov_dim: 32, seed: 0x5eed, perturbation: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair<T> {
    pub value: f64,
    pub vector: Vec<T>,
    pub iterations: usize,
    pub residual: f64,
    /// Lowest Ritz value after every product.
    pub history: Vec<f64>,
}

pub fn random_vector<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..dim)
        .map(|_| {
            let re = rng.random_range(-1.0..1.0);
            if T::IS_COMPLEX {
                T::from_c64(num_complex::Complex64::new(re, rng.random_range(-1.0..1.0)))
            } else {
                T::from_re(re)
            }
        })
        .collect()
}

fn lowest_tridiagonal(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    (val, eig.eigenvectors.column(idx).iter().copied().collect())
}

pub fn lowest_eigenpair<T, F>(
    dim: usize,
    apply: F,
    start: Option<&[T]>,
    cfg: &LanczosConfig,
) -> Result<Eigenpair<T>, LanczosError>
where
    T: Scalar,
    F: FnMut(&[T], &mut [T]),
{
    let (pair, converged) = lowest_eigenpair_best(dim, apply, start, cfg)?;
    if converged {
        Ok(pair)
    } else {
        Err(LanczosError::NotConverged { iterations: pair.iterations, residual: pair.residual })
    }
}

/// Like [`lowest_eigenpair`], but an unconverged run still returns its best
/// Ritz pair, flagged `false`.
pub fn lowest_eigenpair_best<T, F>(
    dim: usize,
    mut apply: F,
    start: Option<&[T]>,
    cfg: &LanczosConfig,
) -> Result<(Eigenpair<T>, bool), LanczosError>
where
    T: Scalar,
    F: FnMut(&[T], &mut [T]),
{
    if dim == 0 {
        return Err(LanczosError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v: Vec<T> = match start {
        Some(s) if norm(s) > 0.0 => {
            let mut v = s.to_vec();
            normalize(&mut v);
            if cfg.perturbation > 0.0 {
                let noise: Vec<T> = random_vector(dim, &mut rng);
                axpy(T::from_re(cfg.perturbation / (dim as f64).sqrt()), &noise, &mut v);
            }
            v
        }
        _ => random_vector(dim, &mut rng),
    };
    normalize(&mut v);

    let m = cfg.krylov_dim.max(2).min(dim);
    let mut history = Vec::new();
    let mut products = 0usize;
    let mut w = vec![T::zero(); dim];
    let mut last_residual = f64::INFINITY;

    loop {
        let mut basis: Vec<Vec<T>> = vec![v.clone()];
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut theta;
        let mut y;
        loop {
            let k = basis.len() - 1;
            apply(&basis[k], &mut w);
            products += 1;
            let a = dot(&basis[k], &w).re();
            axpy(T::from_re(-a), &basis[k], &mut w);
            if k > 0 {
                axpy(T::from_re(-beta[k - 1]), &basis[k - 1], &mut w);
            }
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let b = norm(&w);
            alpha.push(a);
            (theta, y) = lowest_tridiagonal(&alpha, &beta);
            if let Some(&prev) = history.last() {
                let prev: f64 = prev;
                if theta > prev + 1e-10 * prev.abs().max(1.0) {
                    return Err(LanczosError::NonMonotone { from: prev, to: theta });
                }
            }
            history.push(theta);
            let estimate = b * y[k].abs();
            let exhausted = b <= 1e-14 * theta.abs().max(1.0);
            if estimate < cfg.tol * 0.1 || exhausted || basis.len() == m || products >= cfg.max_iter {
                break;
            }
            beta.push(b);
            let mut next = w.clone();
            crate::scalar::scale(&mut next, T::from_re(1.0 / b));
            basis.push(next);
        }

        let mut x = vec![T::zero(); dim];
        for (q, &c) in basis.iter().zip(&y) {
            axpy(T::from_re(c), q, &mut x);
        }
        normalize(&mut x);
        apply(&x, &mut w);
        products += 1;
        axpy(T::from_re(-theta), &x, &mut w);
        let residual = norm(&w);
        let converged = residual < cfg.tol;
        // A restart that makes no progress at all means the residual floor
        // lies above the requested tolerance.
        let stuck = residual >= last_residual && basis.len() < m;
        if converged || products >= cfg.max_iter || stuck {
            return Ok((Eigenpair { value: theta, vector: x, iterations: products, residual, history }, converged));
        }
        last_residual = residual;
        v = x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tridiag_apply(diag: &[f64], off: f64) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            let n = x.len();
            for i in 0..n {
                let mut acc = diag[i] * x[i];
                if i > 0 {
                    acc += off * x[i - 1];
                }
                if i + 1 < n {
                    acc += off * x[i + 1];
                }
                y[i] = acc;
            }
        }
    }

    #[test]
    fn discrete_laplacian_ground_state() {
        let n = 200;
        let diag = vec![2.0; n];
        let cfg = LanczosConfig { krylov_dim: 40, max_iter: 20_000, tol: 1e-8, ..Default::default() };
        let res = lowest_eigenpair(n, tridiag_apply(&diag, -1.0), None, &cfg).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((res.value - exact).abs() < 1e-12, "{} vs {exact}", res.value);
        assert!(res.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn agrees_with_dense_hermitian() {
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let z = if i == j {
                    Complex64::new(rng.random_range(-1.0..1.0), 0.0)
                } else {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                };
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let exact = SymmetricEigen::new(h.clone()).eigenvalues.min();
        let res = lowest_eigenpair(
            n,
            |x: &[Complex64], y: &mut [Complex64]| {
                for i in 0..n {
                    y[i] = (0..n).map(|j| h[(i, j)] * x[j]).sum();
                }
            },
            None,
            &LanczosConfig { krylov_dim: 8, ..Default::default() },
        )
        .unwrap();
        assert!((res.value - exact).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_space() {
        let res = lowest_eigenpair(1, |x: &[f64], y: &mut [f64]| y[0] = -3.0 * x[0], None, &Default::default())
            .unwrap();
        assert_eq!(res.value, -3.0);
    }

    #[test]
    fn reports_non_convergence() {
        let n = 400;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.01).sin()).collect();
        let cfg = LanczosConfig { krylov_dim: 4, max_iter: 8, tol: 1e-14, ..Default::default() };
        let err = lowest_eigenpair(n, tridiag_apply(&diag, -1.0), None, &cfg).unwrap_err();
        assert!(matches!(err, LanczosError::NotConverged { .. }));
        let (best, converged) = lowest_eigenpair_best(n, tridiag_apply(&diag, -1.0), None, &cfg).unwrap();
        assert!(!converged);
        assert!(best.residual > 1e-14);
        assert!((norm(&best.vector) - 1.0).abs() < 1e-12);
    }
}
