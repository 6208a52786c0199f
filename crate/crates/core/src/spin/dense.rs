//! Matrix-free `H_eff` on the full `2^N` spin space.
//!
//! Basis index bit `i` set means site `i` is up (`s^z = +1/2`).

use num_complex::Complex64;
use rayon::prelude::*;

use super::Axis;
use crate::effective::{EffectiveCouplings, SpinMoments};
use crate::scalar::Scalar;

pub const MAX_SITES: usize = 24;
const CHUNK: usize = 1 << 12;

#[inline]
fn up(s: usize, i: usize) -> bool {
    s >> i & 1 == 1
}

#[inline]
fn sz(s: usize, i: usize) -> f64 {
    if up(s, i) {
        0.5
    } else {
        -0.5
    }
}

#[inline]
fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨s|s^y_i|s ⊕ 2^i⟩` as the imaginary part of `±i/2`.
#[inline]
fn sy_im(s: usize, i: usize) -> f64 {
    if up(s, i) {
        -0.5
    } else {
        0.5
    }
}

pub struct DenseOperator {
    n: usize,
    c: EffectiveCouplings,
    bonds: Vec<(usize, usize)>,
    neighbours: Vec<Vec<usize>>,
    diag: Vec<f64>,
    hy_site: Vec<f64>,
}

impl DenseOperator {
    pub fn new(c: &EffectiveCouplings) -> Self {
        let n = c.n;
        let bonds = c.bonds();
        let mut neighbours = vec![Vec::new(); n];
        for &(i, j) in &bonds {
            neighbours[i].push(j);
            neighbours[j].push(i);
        }
        let hz: Vec<f64> = (0..n).map(|i| c.h_z + c.stagger_z * sign(i)).collect();
        let hy_site = (0..n).map(|i| c.h_y + c.stagger_y * sign(i)).collect();
        let diag = (0..1usize << n)
            .into_par_iter()
            .map(|s| {
                let mut d = c.e_photon;
                for (i, h) in hz.iter().enumerate() {
                    d += h * sz(s, i);
                }
                for &(i, j) in &bonds {
                    d -= c.jt_zz * sz(s, i) * sz(s, j);
                }
                d
            })
            .collect();
        Self { n, c: c.clone(), bonds, neighbours, diag, hy_site }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn apply<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        let c = &self.c;
        let has_y = !c.is_real();
        assert!(!has_y || T::IS_COMPLEX, "complex couplings need a complex vector");
        // Bond flip amplitude for equal and unequal bit pairs.
        let flip_eq = T::from_re(-0.25 * c.jt_xx + 0.25 * c.jt_yy);
        let flip_ne = T::from_re(-0.25 * c.jt_xx - 0.25 * c.jt_yy);
        let bond_flips = c.jt_xx != 0.0 || c.jt_yy != 0.0;
        // With k_xx ≠ 0, S^x x is formed once and reused for h_x S^x and
        // k_xx (S^x)².
        let sx_x = if c.k_xx != 0.0 {
            let mut t = vec![T::zero(); x.len()];
            apply_total_x(self.n, x, &mut t);
            Some(t)
        } else {
            None
        };
        let hx = T::from_re(c.h_x);
        let half_hx = T::from_re(0.5 * c.h_x);
        let half_k = T::from_re(0.5 * c.k_xx);
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, out)| {
            let base = chunk * CHUNK;
            for (k, yk) in out.iter_mut().enumerate() {
                let s = base + k;
                let mut acc = x[s] * T::from_re(self.diag[s]);
                match &sx_x {
                    Some(t) => {
                        let mut flips = T::zero();
                        for i in 0..self.n {
                            flips += t[s ^ (1 << i)];
                        }
                        acc += hx * t[s] + half_k * flips;
                    }
                    None if c.h_x != 0.0 => {
                        let mut flips = T::zero();
                        for i in 0..self.n {
                            flips += x[s ^ (1 << i)];
                        }
                        acc += half_hx * flips;
                    }
                    None => {}
                }
                if has_y {
                    for i in 0..self.n {
                        let mut f = self.hy_site[i];
                        for &j in &self.neighbours[i] {
                            f -= c.jt_yz * sz(s, j);
                        }
                        if f != 0.0 {
                            acc += T::from_c64(Complex64::new(0.0, f * sy_im(s, i))) * x[s ^ (1 << i)];
                        }
                    }
                }
                if bond_flips {
                    for &(i, j) in &self.bonds {
                        let t = s ^ (1 << i) ^ (1 << j);
                        acc += if up(s, i) == up(s, j) { flip_eq } else { flip_ne } * x[t];
                    }
                }
                *yk = acc;
            }
        });
    }
}

/// `y = S^x x`
pub fn apply_total_x<T: Scalar>(n: usize, x: &[T], y: &mut [T]) {
    let half = T::from_re(0.5);
    y.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, out)| {
        let base = chunk * CHUNK;
        for (k, yk) in out.iter_mut().enumerate() {
            let s = base + k;
            let mut acc = T::zero();
            for i in 0..n {
                acc += x[s ^ (1 << i)];
            }
            *yk = acc * half;
        }
    });
}

/// Apply a product of single-site operators (rightmost first) to `|s⟩`.
fn apply_ops(mut s: usize, ops: &[(usize, Axis)]) -> (usize, Complex64) {
    let mut coeff = Complex64::new(1.0, 0.0);
    for &(i, axis) in ops.iter().rev() {
        match axis {
            Axis::Z => coeff *= sz(s, i),
            Axis::X => {
                s ^= 1 << i;
                coeff *= 0.5;
            }
            Axis::Y => {
                let f = if up(s, i) { Complex64::new(0.0, 0.5) } else { Complex64::new(0.0, -0.5) };
                s ^= 1 << i;
                coeff *= f;
            }
        }
    }
    (s, coeff)
}

/// `⟨ψ|O_1 O_2 … |ψ⟩` for single-site factors.
pub fn expect_product<T: Scalar>(psi: &[T], ops: &[(usize, Axis)]) -> Complex64 {
    psi.par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk, part)| {
            let base = chunk * CHUNK;
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, amp) in part.iter().enumerate() {
                let (t, coeff) = apply_ops(base + k, ops);
                acc += psi[t].to_c64().conj() * coeff * amp.to_c64();
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

pub fn moments<T: Scalar>(c: &EffectiveCouplings, psi: &[T]) -> SpinMoments {
    let n = c.n;
    let bonds = c.bonds();
    let partials: Vec<[f64; 9]> = psi
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk, part)| {
            let base = chunk * CHUNK;
            let mut a = [0.0; 9];
            for (k, amp) in part.iter().enumerate() {
                let s = base + k;
                let bra = amp.to_c64().conj();
                let p = amp.abs2();
                for i in 0..n {
                    a[2] += p * sz(s, i);
                    a[4] += p * sign(i) * sz(s, i);
                    let t = s ^ (1 << i);
                    let z = bra * psi[t].to_c64();
                    a[0] += 0.5 * z.re;
                    // Re(i·f·z) = −f·Im z
                    let fy = -sy_im(s, i) * z.im;
                    a[1] += fy;
                    a[3] += sign(i) * fy;
                }
                for &(i, j) in &bonds {
                    a[7] += p * sz(s, i) * sz(s, j);
                    let t = s ^ (1 << i) ^ (1 << j);
                    let z = bra * psi[t].to_c64();
                    a[5] += 0.25 * z.re;
                    let yy = if up(s, i) == up(s, j) { -0.25 } else { 0.25 };
                    a[6] += yy * z.re;
                    let zi = bra * psi[s ^ (1 << i)].to_c64();
                    let zj = bra * psi[s ^ (1 << j)].to_c64();
                    a[8] += -sy_im(s, i) * zi.im * sz(s, j) - sy_im(s, j) * zj.im * sz(s, i);
                }
            }
            a
        })
        .collect();
    let mut a = [0.0; 9];
    for p in partials {
        for k in 0..9 {
            a[k] += p[k];
        }
    }
    let mut tmp = vec![T::zero(); psi.len()];
    apply_total_x(n, psi, &mut tmp);
    let sx2 = tmp.iter().map(|v| v.abs2()).sum();
    SpinMoments {
        sx: a[0],
        sy: a[1],
        sz: a[2],
        sx2,
        stag_y: a[3],
        stag_z: a[4],
        xx: a[5],
        yy: a[6],
        zz: a[7],
        yz: a[8],
    }
}

/// Multiply by `(−1)^{#down}`: a π rotation about z up to a global phase.
pub fn rotate_pi_z<T: Scalar>(psi: &mut [T]) {
    let n_bits = psi.len().trailing_zeros();
    psi.par_iter_mut().enumerate().for_each(|(s, v)| {
        let downs = n_bits - (s as u32).count_ones();
        if downs % 2 == 1 {
            *v = -*v;
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;
    use crate::scalar::dot;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Explicit matrix from Kronecker products, used as the oracle.
    fn kron_matrix(c: &EffectiveCouplings) -> nalgebra::DMatrix<Complex64> {
        use nalgebra::DMatrix;
        let n = c.n;
        let dim = 1 << n;
        let id = DMatrix::<Complex64>::identity(2, 2);
        // basis (down, up) so that index bit 1 is up
        let sx = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0].map(|v| Complex64::new(v, 0.0)));
        let sy = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.0)],
        );
        let szm = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 0.5].map(|v| Complex64::new(v, 0.0)));
        let site = |op: &DMatrix<Complex64>, i: usize| {
            let mut m = DMatrix::<Complex64>::identity(1, 1);
            for k in (0..n).rev() {
                m = m.kronecker(if k == i { op } else { &id });
            }
            m
        };
        let sxs: Vec<_> = (0..n).map(|i| site(&sx, i)).collect();
        let sys: Vec<_> = (0..n).map(|i| site(&sy, i)).collect();
        let szs: Vec<_> = (0..n).map(|i| site(&szm, i)).collect();
        let r = |v: f64| Complex64::new(v, 0.0);
        let mut h = DMatrix::<Complex64>::identity(dim, dim) * r(c.e_photon);
        let mut total_x = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..n {
            let st = sign(i);
            h += &sxs[i] * r(c.h_x) + &sys[i] * r(c.h_y + st * c.stagger_y) + &szs[i] * r(c.h_z + st * c.stagger_z);
            total_x += &sxs[i];
        }
        h += &total_x * &total_x * r(c.k_xx);
        for (i, j) in c.bonds() {
            h -= (&sxs[i] * &sxs[j]) * r(c.jt_xx)
                + (&sys[i] * &sys[j]) * r(c.jt_yy)
                + (&szs[i] * &szs[j]) * r(c.jt_zz)
                + (&sys[i] * &szs[j] + &szs[i] * &sys[j]) * r(c.jt_yz);
        }
        h
    }

    fn random_couplings(rng: &mut ChaCha8Rng, n: usize, boundary: Boundary) -> EffectiveCouplings {
        use rand::Rng;
        let mut u = || rng.random_range(-1.0..1.0);
        EffectiveCouplings {
            n,
            boundary,
            e_photon: u(),
            h_x: u(),
            h_y: u(),
            h_z: u(),
            stagger_y: u(),
            stagger_z: u(),
            k_xx: u(),
            jt_xx: u(),
            jt_yy: u(),
            jt_zz: u(),
            jt_yz: u(),
        }
    }

    #[test]
    fn matvec_matches_kronecker_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, boundary) in [(1, Boundary::Open), (3, Boundary::Open), (4, Boundary::Periodic), (5, Boundary::Open)] {
            let c = random_couplings(&mut rng, n, boundary);
            let h = kron_matrix(&c);
            let op = DenseOperator::new(&c);
            let x: Vec<Complex64> = super::super::lanczos::random_vector(1 << n, &mut rng);
            let mut y = vec![Complex64::new(0.0, 0.0); 1 << n];
            op.apply(&x, &mut y);
            let want = &h * nalgebra::DVector::from_vec(x.clone());
            for k in 0..(1 << n) {
                assert!((y[k] - want[k]).norm() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn moments_reproduce_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (n, boundary) in [(2, Boundary::Open), (4, Boundary::Open), (5, Boundary::Periodic)] {
            let c = random_couplings(&mut rng, n, boundary);
            let op = DenseOperator::new(&c);
            let mut x: Vec<Complex64> = super::super::lanczos::random_vector(1 << n, &mut rng);
            crate::scalar::normalize(&mut x);
            let mut y = vec![Complex64::new(0.0, 0.0); 1 << n];
            op.apply(&x, &mut y);
            let direct = dot(&x, &y);
            assert!(direct.im.abs() < 1e-12);
            let m = moments(&c, &x);
            assert!((c.energy(&m) - direct.re).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn product_expectations_on_basis_states() {
        // |↓↑↓↓⟩ : bit 1 set
        let mut psi = vec![0.0f64; 16];
        psi[2] = 1.0;
        assert_eq!(expect_product(&psi, &[(1, Axis::Z)]).re, 0.5);
        assert_eq!(expect_product(&psi, &[(0, Axis::Z), (1, Axis::Z)]).re, -0.25);
        assert_eq!(expect_product(&psi, &[(0, Axis::X)]).re, 0.0);
        // s^y s^y on antiparallel pair flips to an orthogonal state
        assert_eq!(expect_product(&psi, &[(0, Axis::Y), (1, Axis::Y)]).norm(), 0.0);
        // s^x s^x = s^y s^y = 1/4 on one site
        assert!((expect_product(&psi, &[(2, Axis::Y), (2, Axis::Y)]).re - 0.25).abs() < 1e-15);
        // s^x s^y = i s^z / 2
        let z = expect_product(&psi, &[(1, Axis::X), (1, Axis::Y)]);
        assert!((z - Complex64::new(0.0, 0.25)).norm() < 1e-15);
    }

    #[test]
    fn pi_rotation_flips_transverse_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = random_couplings(&mut rng, 4, Boundary::Open);
        let mut x: Vec<Complex64> = super::super::lanczos::random_vector(16, &mut rng);
        crate::scalar::normalize(&mut x);
        let a = moments(&c, &x);
        rotate_pi_z(&mut x);
        let b = moments(&c, &x);
        assert!((a.sx + b.sx).abs() < 1e-14 && (a.sy + b.sy).abs() < 1e-14);
        assert!((a.sz - b.sz).abs() < 1e-14 && (a.xx - b.xx).abs() < 1e-14);
        assert!((a.yz + b.yz).abs() < 1e-14 && (a.sx2 - b.sx2).abs() < 1e-14);
    }
}
