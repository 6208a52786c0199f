//! Truncated Fock-space operators and explicit preparation of
//! `U_λ (U_GS|0⟩ ⊗ |φ⟩)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::frame::PhotonFrame;
use crate::model::ModelSpec;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `x = (a + a†)/√2` on `levels` Fock states.
pub fn position(levels: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(levels, levels, |i, j| {
        if i + 1 == j || j + 1 == i {
            Complex64::new((i.max(j) as f64 / 2.0).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `p = i(a† − a)/√2`.
pub fn momentum(levels: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(levels, levels, |i, j| {
        // ⟨i|a†|j⟩ = √i δ_{i,j+1}, ⟨i|a|j⟩ = √j δ_{i+1,j}
        if i == j + 1 {
            I * (i as f64 / 2.0).sqrt()
        } else if i + 1 == j {
            -I * (j as f64 / 2.0).sqrt()
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `exp(−i t K)` for Hermitian `K`.
pub fn unitary_exp(k: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(k.clone());
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-I * t * l).exp()));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Working space for the Gaussian photon state; the state is built here and
/// then cut down to the requested cutoff.
fn work_levels(n_max: usize) -> usize {
    n_max + 80
}

/// `D(μ_x, μ_p) S(r)|0⟩` with `S = exp(−i r (xp+px)/2)` and
/// `D = exp(−i(μ_x p − μ_p x))`, on `levels` Fock states.
pub fn gaussian_state(frame: &PhotonFrame, levels: usize) -> DVector<Complex64> {
    let x = position(levels);
    let p = momentum(levels);
    let g = (&x * &p + &p * &x) * Complex64::new(0.5, 0.0);
    let k = &p * Complex64::new(frame.delta_x, 0.0) - &x * Complex64::new(frame.delta_p, 0.0);
    let mut vac = DVector::<Complex64>::zeros(levels);
    vac[0] = Complex64::new(1.0, 0.0);
    unitary_exp(&k, 1.0) * (unitary_exp(&g, frame.squeeze) * vac)
}

/// Per-site basis change between `s^z` and `s^x` eigenbases (its own inverse).
/// In the x basis a set bit means `s^x = +1/2`.
pub fn hadamard_all(psi: &mut [Complex64], n: usize) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        let bit = 1usize << i;
        for s in 0..psi.len() {
            if s & bit == 0 {
                let (a0, a1) = (psi[s], psi[s | bit]);
                psi[s] = (a1 - a0) * r;
                psi[s | bit] = (a0 + a1) * r;
            }
        }
    }
}

/// Explicit `U_λ (U_GS|0⟩ ⊗ |φ⟩)` on `n_max + 1` Fock levels, photon-major.
pub fn ngs_state(spec: &ModelSpec, frame: &PhotonFrame, phi: &[Complex64], n_max: usize) -> Vec<Complex64> {
    let n = spec.n;
    let dim_s = 1usize << n;
    assert_eq!(phi.len(), dim_s);
    let levels = work_levels(n_max);
    let photon = gaussian_state(frame, levels);
    let eta = frame.eta(spec);
    let mut phi_x = phi.to_vec();
    hadamard_all(&mut phi_x, n);

    let p = momentum(levels);
    let peig = SymmetricEigen::new(p);
    let photon_p = peig.eigenvectors.adjoint() * &photon;
    let mut out = vec![Complex64::new(0.0, 0.0); (n_max + 1) * dim_s];
    let mut shifted = std::collections::HashMap::new();
    for (s, &c) in phi_x.iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let ups = (s as u32).count_ones() as i64;
        let twice_mx = 2 * ups - n as i64;
        let ph = shifted.entry(twice_mx).or_insert_with(|| {
            let mx = twice_mx as f64 / 2.0;
            let rotated = DVector::from_iterator(
                levels,
                photon_p.iter().zip(peig.eigenvalues.iter()).map(|(a, &pk)| a * (-I * eta * mx * pk).exp()),
            );
            &peig.eigenvectors * rotated
        });
        for k in 0..=n_max {
            out[k * dim_s + s] = ph[k] * c;
        }
    }
    for k in 0..=n_max {
        hadamard_all(&mut out[k * dim_s..(k + 1) * dim_s], n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expect(m: &DMatrix<Complex64>, v: &DVector<Complex64>) -> f64 {
        (v.adjoint() * m * v)[(0, 0)].re
    }

    #[test]
    fn canonical_commutator_below_cutoff() {
        let (x, p) = (position(30), momentum(30));
        let c = &x * &p - &p * &x;
        for i in 0..29 {
            assert!((c[(i, i)] - I).norm() < 1e-12);
        }
    }

    #[test]
    fn squeezed_state_variances() {
        let levels = 140;
        let st = gaussian_state(&PhotonFrame::new(0.0, 0.0, 0.5, 0.0), levels);
        let (x, p) = (position(levels), momentum(levels));
        assert!((expect(&(&x * &x), &st) - 1.359_140_914_229_522_5).abs() < 1e-8);
        assert!((expect(&(&p * &p), &st) - 0.183_939_720_585_721_16).abs() < 1e-8);
    }

    #[test]
    fn displaced_state_means() {
        let levels = 120;
        let st = gaussian_state(&PhotonFrame::new(1.2, -0.7, 0.2, 0.0), levels);
        assert!((expect(&position(levels), &st) - 1.2).abs() < 1e-9);
        assert!((expect(&momentum(levels), &st) + 0.7).abs() < 1e-9);
    }

    #[test]
    fn hadamard_is_involution() {
        let mut v: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let orig = v.clone();
        hadamard_all(&mut v, 3);
        hadamard_all(&mut v, 3);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
