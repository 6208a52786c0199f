//! Maximal-spin sector `|j = N/2, m⟩` for permutation-symmetric `H_eff`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::Axis;
use crate::effective::{EffectiveCouplings, SpinMoments};

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState {
    pub n: usize,
    /// Amplitudes indexed by `m + j`.
    pub amplitudes: Vec<Complex64>,
}

fn j_of(n: usize) -> f64 {
    n as f64 / 2.0
}

/// `(S^x, S^y, S^z)` in the `m = −j … j` basis.
pub fn collective_ops(n: usize) -> [DMatrix<Complex64>; 3] {
    let d = n + 1;
    let j = j_of(n);
    let mut sx = DMatrix::<Complex64>::zeros(d, d);
    let mut sy = DMatrix::<Complex64>::zeros(d, d);
    let mut sz = DMatrix::<Complex64>::zeros(d, d);
    for k in 0..d {
        let m = k as f64 - j;
        sz[(k, k)] = Complex64::new(m, 0.0);
        if k + 1 < d {
            // ⟨m+1|S^+|m⟩
            let a = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            sx[(k + 1, k)] = Complex64::new(0.5 * a, 0.0);
            sx[(k, k + 1)] = Complex64::new(0.5 * a, 0.0);
            sy[(k + 1, k)] = Complex64::new(0.0, -0.5 * a);
            sy[(k, k + 1)] = Complex64::new(0.0, 0.5 * a);
        }
    }
    [sx, sy, sz]
}

/// `⟨m+1|S^+|m⟩` for `m = k − j`.
fn ladder(n: usize, k: usize) -> f64 {
    let j = j_of(n);
    let m = k as f64 - j;
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Pentadiagonal `H_eff` assembled from ladder matrix elements.
pub fn hamiltonian(c: &EffectiveCouplings) -> DMatrix<Complex64> {
    let n = c.n;
    let d = n + 1;
    let j = j_of(n);
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for k in 0..d {
        let m = k as f64 - j;
        let down = if k > 0 { ladder(n, k - 1) } else { 0.0 };
        let up = ladder(n, k);
        // ⟨m|(S^x)²|m⟩ = (a(m−1)² + a(m)²)/4
        h[(k, k)] = Complex64::new(c.e_photon + c.h_z * m + c.k_xx * 0.25 * (down * down + up * up), 0.0);
        if k + 1 < d {
            let z = Complex64::new(0.5 * c.h_x * up, -0.5 * c.h_y * up);
            h[(k + 1, k)] = z;
            h[(k, k + 1)] = z.conj();
        }
        if k + 2 < d {
            let z = Complex64::new(0.25 * c.k_xx * up * ladder(n, k + 1), 0.0);
            h[(k + 2, k)] = z;
            h[(k, k + 2)] = z;
        }
    }
    h
}

fn lowest(values: &nalgebra::DVector<f64>) -> (usize, f64) {
    let (idx, &e) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    (idx, e)
}

pub fn ground_state(c: &EffectiveCouplings) -> (f64, CollectiveState) {
    let h = hamiltonian(c);
    let (e, mut v): (f64, Vec<Complex64>) = if c.h_y == 0.0 {
        let eig = SymmetricEigen::new(h.map(|z| z.re));
        let (idx, e) = lowest(&eig.eigenvalues);
        (e, eig.eigenvectors.column(idx).iter().map(|&x| Complex64::new(x, 0.0)).collect())
    } else {
        let eig = SymmetricEigen::new(h);
        let (idx, e) = lowest(&eig.eigenvalues);
        (e, eig.eigenvectors.column(idx).iter().copied().collect())
    };
    // Fix the global phase on the largest component.
    let (_, pivot) = v.iter().enumerate().fold((0, Complex64::new(0.0, 0.0)), |best, (k, z)| {
        if z.norm() > best.1.norm() + 1e-12 {
            (k, *z)
        } else {
            best
        }
    });
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        for z in &mut v {
            *z *= phase;
        }
    }
    (e, CollectiveState { n: c.n, amplitudes: v })
}

impl CollectiveState {
    /// `S^a v` in O(N).
    fn apply(&self, axis: Axis) -> Vec<Complex64> {
        let n = self.n;
        let v = &self.amplitudes;
        let j = j_of(n);
        (0..=n)
            .map(|k| match axis {
                Axis::Z => v[k] * (k as f64 - j),
                Axis::X | Axis::Y => {
                    // ⟨k|S^+|k−1⟩ v[k−1] and ⟨k|S^−|k+1⟩ v[k+1]
                    let plus = if k > 0 { v[k - 1] * ladder(n, k - 1) } else { Complex64::new(0.0, 0.0) };
                    let minus = if k < n { v[k + 1] * ladder(n, k) } else { Complex64::new(0.0, 0.0) };
                    if axis == Axis::X {
                        (plus + minus) * 0.5
                    } else {
                        (plus - minus) * Complex64::new(0.0, -0.5)
                    }
                }
            })
            .collect()
    }

    fn overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    /// `⟨S^a S^b⟩`
    pub fn total_pair(&self, a: Axis, b: Axis) -> Complex64 {
        Self::overlap(&self.apply(a), &self.apply(b))
    }

    pub fn total(&self, a: Axis) -> f64 {
        Self::overlap(&self.amplitudes, &self.apply(a)).re
    }

    /// `⟨s_i^a⟩` for any site.
    pub fn site(&self, a: Axis) -> f64 {
        self.total(a) / self.n as f64
    }

    /// `⟨s_i^a s_j^b⟩` for `i ≠ j`, from
    /// `Σ_{i≠j} s_i^a s_j^b = S^a S^b − Σ_i s_i^a s_i^b`.
    pub fn pair(&self, a: Axis, b: Axis) -> Complex64 {
        let n = self.n as f64;
        if self.n < 2 {
            return Complex64::new(0.0, 0.0);
        }
        let onsite = if a == b {
            Complex64::new(n / 4.0, 0.0)
        } else {
            // s^a s^b = (i/2) ε_abc s^c
            let (c, sgn) = match (a, b) {
                (Axis::X, Axis::Y) => (Axis::Z, 1.0),
                (Axis::Y, Axis::X) => (Axis::Z, -1.0),
                (Axis::Y, Axis::Z) => (Axis::X, 1.0),
                (Axis::Z, Axis::Y) => (Axis::X, -1.0),
                (Axis::Z, Axis::X) => (Axis::Y, 1.0),
                (Axis::X, Axis::Z) => (Axis::Y, -1.0),
                _ => unreachable!(),
            };
            Complex64::new(0.0, 0.5 * sgn * self.total(c))
        };
        (self.total_pair(a, b) - onsite) / (n * (n - 1.0))
    }

    pub fn moments(&self, c: &EffectiveCouplings) -> SpinMoments {
        let nb = c.bonds().len() as f64;
        let alt: f64 = (0..self.n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).sum();
        let sy = self.total(Axis::Y);
        let sz = self.total(Axis::Z);
        SpinMoments {
            sx: self.total(Axis::X),
            sy,
            sz,
            sx2: self.total_pair(Axis::X, Axis::X).re,
            stag_y: alt * sy / self.n as f64,
            stag_z: alt * sz / self.n as f64,
            xx: nb * self.pair(Axis::X, Axis::X).re,
            yy: nb * self.pair(Axis::Y, Axis::Y).re,
            zz: nb * self.pair(Axis::Z, Axis::Z).re,
            yz: nb * 2.0 * self.pair(Axis::Y, Axis::Z).re,
        }
    }

    /// π rotation about z: `|m⟩ → (−1)^{j−m}|m⟩`.
    pub fn rotate_pi_z(&mut self) {
        for (k, z) in self.amplitudes.iter_mut().enumerate() {
            // k = m + j, so j − m = N − k
            if (self.n - k) % 2 == 1 {
                *z = -*z;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;

    #[test]
    fn free_spins_in_a_field() {
        let mut c = EffectiveCouplings::zero(2, Boundary::Open);
        c.h_z = 1.0;
        c.e_photon = 0.5;
        let (e, st) = ground_state(&c);
        assert!((e + 0.5).abs() < 1e-14);
        assert!((st.site(Axis::Z) + 0.5).abs() < 1e-14);
        assert!((st.pair(Axis::Z, Axis::Z).re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn commutation_relations() {
        let [sx, sy, sz] = collective_ops(5);
        let comm = &sx * &sy - &sy * &sx;
        let want = &sz * Complex64::new(0.0, 1.0);
        assert!((comm - want).norm() < 1e-12);
        let casimir = &sx * &sx + &sy * &sy + &sz * &sz;
        let j = 2.5;
        assert!((casimir - DMatrix::identity(6, 6) * Complex64::new(j * (j + 1.0), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ladder_assembly_matches_operator_products() {
        let mut c = EffectiveCouplings::zero(7, Boundary::Open);
        (c.e_photon, c.h_x, c.h_y, c.h_z, c.k_xx) = (0.3, -0.7, 0.4, 1.1, -0.25);
        let [sx, sy, sz] = collective_ops(7);
        let r = |v: f64| Complex64::new(v, 0.0);
        let want = DMatrix::<Complex64>::identity(8, 8) * r(0.3) + &sx * r(-0.7) + &sy * r(0.4) + &sz * r(1.1)
            + (&sx * &sx) * r(-0.25);
        assert!((hamiltonian(&c) - want).norm() < 1e-12);

        let (_, st) = ground_state(&c);
        let v = nalgebra::DVector::from_column_slice(&st.amplitudes);
        for (axis, op) in [(Axis::X, &sx), (Axis::Y, &sy), (Axis::Z, &sz)] {
            let direct = (v.adjoint() * op * &v)[(0, 0)].re;
            assert!((st.total(axis) - direct).abs() < 1e-12);
        }
        let xy = (v.adjoint() * &sx * &sy * &v)[(0, 0)];
        assert!((st.total_pair(Axis::X, Axis::Y) - xy).norm() < 1e-12);
    }
}
