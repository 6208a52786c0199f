//! Two-site DMRG on open chains.
//!
//! MPO channels for `H_eff` (row = left bond, column = right bond):
//!
//! ```text
//! 0: identity before any operator
//! 1: s^x waiting for its nearest neighbour       (closes with −J̃_xx s^x)
//! 2: i·s^y waiting for its nearest neighbour     (closes with J̃_yy i s^y + i J̃_yz s^z)
//! 3: s^z waiting for its nearest neighbour       (closes with −J̃_zz s^z − J̃_yz s^y)
//! 4: s^x carried to every later site             (closes with 2 k_xx s^x)
//! 5: identity after the Hamiltonian term is complete
//! ```
//!
//! Carrying `i s^y` keeps the yy channel real. The uniform `(S^x)²` term
//! costs a single channel because `(S^x)² = N/4 + 2 Σ_{i<j} s^x_i s^x_j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::lanczos::{lowest_eigenpair, lowest_eigenpair_best, random_vector, LanczosConfig, LanczosError};
use super::Axis;
use crate::effective::{EffectiveCouplings, SpinMoments};
use crate::model::Boundary;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpsError {
    #[error("the MPS backend needs an open chain")]
    PeriodicBoundary,
    #[error("DMRG energy rose from {from} to {to} in sweep {sweep}")]
    NonMonotone { sweep: usize, from: f64, to: f64 },
    #[error("local eigensolver: {0}")]
    Local(#[from] LanczosError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmrgConfig {
    pub bond_dim: usize,
    pub sweeps: usize,
    pub tol: f64,
    pub local: LanczosConfig,
    pub seed: u64,
}

impl Default for DmrgConfig {
    fn default() -> Self {
        Self {
            bond_dim: 64,
            sweeps: 10,
            tol: 1e-10,
            local: LanczosConfig { tol: 1e-9, krylov_dim: 24, max_iter: 400, perturbation: 0.0, ..Default::default() },
            seed: 0x6d7073,
        }
    }
}

/// Rank-3 site tensor `A[l, s, r]`, local index 0 = down, 1 = up.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    pub dl: usize,
    pub dr: usize,
    pub data: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mps<T> {
    pub sites: Vec<Tensor3<T>>,
}

/// Sparse MPO site: nonzero `W[a, b][s', s]` entries.
#[derive(Debug, Clone)]
pub struct MpoSite<T> {
    pub wl: usize,
    pub wr: usize,
    pub entries: Vec<(usize, usize, usize, usize, T)>,
}

pub type Op2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn local_op(axis: Axis) -> Op2 {
    let h = Complex64::new(0.5, 0.0);
    match axis {
        Axis::X => [[ZERO, h], [h, ZERO]],
        Axis::Y => [[ZERO, Complex64::new(0.0, 0.5)], [Complex64::new(0.0, -0.5), ZERO]],
        Axis::Z => [[-h, ZERO], [ZERO, h]],
    }
}

fn identity() -> Op2 {
    let one = Complex64::new(1.0, 0.0);
    [[one, ZERO], [ZERO, one]]
}

fn lincomb(terms: &[(Complex64, Op2)]) -> Op2 {
    let mut out = [[ZERO; 2]; 2];
    for (c, op) in terms {
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] += c * op[a][b];
            }
        }
    }
    out
}

/// Build an MPO from a bulk operator-valued matrix. The first site keeps only
/// row `start`, the last only column `end`.
pub fn mpo_from_bulk(n: usize, bulk: impl Fn(usize) -> Vec<Vec<Option<Op2>>>, start: usize, end: usize) -> Vec<MpoSite<Complex64>> {
    (0..n)
        .map(|i| {
            let w = bulk(i);
            let dim = w.len();
            let rows: Vec<usize> = if i == 0 { vec![start] } else { (0..dim).collect() };
            let cols: Vec<usize> = if i == n - 1 { vec![end] } else { (0..dim).collect() };
            let mut entries = Vec::new();
            for (ra, &a) in rows.iter().enumerate() {
                for (cb, &b) in cols.iter().enumerate() {
                    if let Some(op) = &w[a][b] {
                        for so in 0..2 {
                            for si in 0..2 {
                                if op[so][si] != ZERO {
                                    entries.push((ra, cb, so, si, op[so][si]));
                                }
                            }
                        }
                    }
                }
            }
            MpoSite { wl: rows.len(), wr: cols.len(), entries }
        })
        .collect()
}

pub fn hamiltonian_mpo(c: &EffectiveCouplings) -> Vec<MpoSite<Complex64>> {
    let n = c.n;
    let r = |v: f64| Complex64::new(v, 0.0);
    let (sx, sy, sz) = (local_op(Axis::X), local_op(Axis::Y), local_op(Axis::Z));
    let isy = lincomb(&[(Complex64::new(0.0, 1.0), sy)]);
    let id = identity();
    mpo_from_bulk(
        n,
        |i| {
            let st = if i % 2 == 0 { 1.0 } else { -1.0 };
            let mut w = vec![vec![None; 6]; 6];
            w[0][0] = Some(id);
            w[5][5] = Some(id);
            w[0][5] = Some(lincomb(&[
                (r(c.e_photon / n as f64 + 0.25 * c.k_xx), id),
                (r(c.h_x), sx),
                (r(c.h_y + st * c.stagger_y), sy),
                (r(c.h_z + st * c.stagger_z), sz),
            ]));
            w[0][1] = Some(sx);
            w[1][5] = Some(lincomb(&[(r(-c.jt_xx), sx)]));
            w[0][2] = Some(isy);
            w[2][5] = Some(lincomb(&[(r(c.jt_yy), isy), (Complex64::new(0.0, c.jt_yz), sz)]));
            w[0][3] = Some(sz);
            w[3][5] = Some(lincomb(&[(r(-c.jt_zz), sz), (r(-c.jt_yz), sy)]));
            w[0][4] = Some(sx);
            w[4][4] = Some(id);
            w[4][5] = Some(lincomb(&[(r(2.0 * c.k_xx), sx)]));
            w
        },
        0,
        5,
    )
}

/// `Σ_i w_i O_i`
pub fn onsite_sum_mpo(n: usize, op: Op2, weight: impl Fn(usize) -> f64) -> Vec<MpoSite<Complex64>> {
    mpo_from_bulk(
        n,
        |i| {
            let mut w = vec![vec![None; 2]; 2];
            w[0][0] = Some(identity());
            w[1][1] = Some(identity());
            w[0][1] = Some(lincomb(&[(Complex64::new(weight(i), 0.0), op)]));
            w
        },
        0,
        1,
    )
}

/// `Σ_i A_i B_{i+1}` over open-chain bonds.
pub fn bond_sum_mpo(n: usize, a: Op2, b: Op2) -> Vec<MpoSite<Complex64>> {
    mpo_from_bulk(
        n,
        |_| {
            let mut w = vec![vec![None; 3]; 3];
            w[0][0] = Some(identity());
            w[2][2] = Some(identity());
            w[0][1] = Some(a);
            w[1][2] = Some(b);
            w
        },
        0,
        2,
    )
}

/// `(Σ_i O_i)²`
pub fn total_squared_mpo(n: usize, op: Op2) -> Vec<MpoSite<Complex64>> {
    let two = Complex64::new(2.0, 0.0);
    let mut sq = [[ZERO; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..2 {
                sq[a][b] += op[a][k] * op[k][b];
            }
        }
    }
    mpo_from_bulk(
        n,
        |_| {
            let mut w = vec![vec![None; 3]; 3];
            w[0][0] = Some(identity());
            w[1][1] = Some(identity());
            w[2][2] = Some(identity());
            w[0][1] = Some(lincomb(&[(two, op)]));
            w[0][2] = Some(sq);
            w[1][2] = Some(op);
            w
        },
        0,
        2,
    )
}

/// Product operator `Π_k O_k` with identities elsewhere.
pub fn product_mpo(n: usize, ops: &[(usize, Axis)]) -> Vec<MpoSite<Complex64>> {
    mpo_from_bulk(
        n,
        |i| {
            let mut op = identity();
            for &(site, axis) in ops.iter().rev() {
                if site == i {
                    let f = local_op(axis);
                    let mut next = [[ZERO; 2]; 2];
                    for a in 0..2 {
                        for b in 0..2 {
                            for k in 0..2 {
                                next[a][b] += f[a][k] * op[k][b];
                            }
                        }
                    }
                    op = next;
                }
            }
            vec![vec![Some(op)]]
        },
        0,
        0,
    )
}

fn convert_mpo<T: Scalar>(mpo: &[MpoSite<Complex64>]) -> Vec<MpoSite<T>> {
    mpo.iter()
        .map(|w| MpoSite {
            wl: w.wl,
            wr: w.wr,
            entries: w.entries.iter().map(|&(a, b, so, si, v)| (a, b, so, si, T::from_c64(v))).collect(),
        })
        .collect()
}

// Row-major dense kernels.

fn mm<T: Scalar>(a: &[T], b: &[T], m: usize, k: usize, n: usize) -> Vec<T> {
    let mut c = vec![T::zero(); m * n];
    for i in 0..m {
        let row = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == T::zero() {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (cj, bj) in row.iter_mut().zip(brow) {
                *cj += aip * *bj;
            }
        }
    }
    c
}

/// `a · bᵀ` with `a: m×k`, `b: n×k`.
fn mm_bt<T: Scalar>(a: &[T], b: &[T], m: usize, k: usize, n: usize) -> Vec<T> {
    let mut c = vec![T::zero(); m * n];
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..n {
            let brow = &b[j * k..(j + 1) * k];
            c[i * n + j] = arow.iter().zip(brow).fold(T::zero(), |acc, (x, y)| acc + *x * *y);
        }
    }
    c
}

/// `aᴴ · b` with `a: k×m`, `b: k×n`.
fn mm_ha<T: Scalar>(a: &[T], b: &[T], k: usize, m: usize, n: usize) -> Vec<T> {
    let mut c = vec![T::zero(); m * n];
    for p in 0..k {
        let brow = &b[p * n..(p + 1) * n];
        for i in 0..m {
            let api = a[p * m + i].conjugate();
            if api == T::zero() {
                continue;
            }
            let row = &mut c[i * n..(i + 1) * n];
            for (cj, bj) in row.iter_mut().zip(brow) {
                *cj += api * *bj;
            }
        }
    }
    c
}

/// Environment `E[a, w, b]` with `a` the bra bond and `b` the ket bond.
#[derive(Debug, Clone)]
struct Env<T> {
    d: usize,
    w: usize,
    data: Vec<T>,
}

impl<T: Scalar> Env<T> {
    fn trivial() -> Self {
        Self { d: 1, w: 1, data: vec![T::one()] }
    }
}

fn extend_left<T: Scalar>(l: &Env<T>, a: &Tensor3<T>, w: &MpoSite<T>) -> Env<T> {
    let (dl, dr) = (a.dl, a.dr);
    debug_assert_eq!(l.d, dl);
    let t1 = mm(&l.data, &a.data, dl * l.w, dl, 2 * dr); // [a][w][s][b']
    let mut t2 = vec![T::zero(); dl * 2 * w.wr * dr]; // [a][s'][w'][b']
    for &(wa, wb, so, si, v) in &w.entries {
        for x in 0..dl {
            let src = &t1[((x * l.w + wa) * 2 + si) * dr..][..dr];
            let dst = &mut t2[((x * 2 + so) * w.wr + wb) * dr..][..dr];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += v * *s;
            }
        }
    }
    Env { d: dr, w: w.wr, data: mm_ha(&a.data, &t2, dl * 2, dr, w.wr * dr) }
}

fn extend_right<T: Scalar>(r: &Env<T>, b: &Tensor3<T>, w: &MpoSite<T>) -> Env<T> {
    let (dl, dr) = (b.dl, b.dr);
    debug_assert_eq!(r.d, dr);
    let t1 = mm_bt(&b.data, &r.data, dl * 2, dr, dr * r.w); // [b][s][a'][w']
    let mut t2 = vec![T::zero(); 2 * dr * w.wl * dl]; // [s'][a'][w][b]
    for &(wa, wb, so, si, v) in &w.entries {
        for y in 0..dl {
            for ap in 0..dr {
                t2[((so * dr + ap) * w.wl + wa) * dl + y] += v * t1[((y * 2 + si) * dr + ap) * r.w + wb];
            }
        }
    }
    let conj: Vec<T> = b.data.iter().map(|z| z.conjugate()).collect();
    Env { d: dl, w: w.wl, data: mm(&conj, &t2, dl, 2 * dr, w.wl * dl) }
}

fn two_site_apply<T: Scalar>(
    l: &Env<T>,
    wi: &MpoSite<T>,
    wj: &MpoSite<T>,
    r: &Env<T>,
    theta: &[T],
    out: &mut [T],
) {
    let (dl, dr) = (l.d, r.d);
    let x1 = mm(&l.data, theta, dl * l.w, dl, 4 * dr); // [a][w1][s1][s2][r]
    let mut x2 = vec![T::zero(); dl * wi.wr * 4 * dr]; // [a][w2][s1'][s2][r]
    for &(wa, wb, so, si, v) in &wi.entries {
        for a in 0..dl {
            let src = &x1[((a * l.w + wa) * 2 + si) * 2 * dr..][..2 * dr];
            let dst = &mut x2[((a * wi.wr + wb) * 2 + so) * 2 * dr..][..2 * dr];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += v * *s;
            }
        }
    }
    let mut x3 = vec![T::zero(); dl * 4 * wj.wr * dr]; // [a][s1'][s2'][w3][r]
    for &(wa, wb, so, si, v) in &wj.entries {
        for a in 0..dl {
            for s1 in 0..2 {
                let src = &x2[(((a * wi.wr + wa) * 2 + s1) * 2 + si) * dr..][..dr];
                let dst = &mut x3[(((a * 2 + s1) * 2 + so) * wj.wr + wb) * dr..][..dr];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * *s;
                }
            }
        }
    }
    let res = mm_bt(&x3, &r.data, dl * 4, wj.wr * dr, dr);
    out.copy_from_slice(&res);
}

/// SVD of a row-major `m×n` block, singular values sorted descending and
/// truncated to `max_keep` (and to numerically nonzero values).
fn truncated_svd<T: Scalar>(theta: &[T], m: usize, n: usize, max_keep: usize) -> (Vec<T>, Vec<f64>, Vec<T>, usize) {
    let mat = DMatrix::<T>::from_fn(m, n, |i, j| theta[i * n + j]);
    let svd = mat.svd(true, true);
    let u = svd.u.expect("u");
    let vt = svd.v_t.expect("v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = svd.singular_values[order[0]].max(f64::MIN_POSITIVE);
    let keep = order
        .iter()
        .take(max_keep)
        .filter(|&&k| svd.singular_values[k] > 1e-15 * smax)
        .count()
        .max(1);
    let mut uk = vec![T::zero(); m * keep];
    let mut vk = vec![T::zero(); keep * n];
    let mut s = Vec::with_capacity(keep);
    for (c, &k) in order.iter().take(keep).enumerate() {
        s.push(svd.singular_values[k]);
        for i in 0..m {
            uk[i * keep + c] = u[(i, k)];
        }
        for j in 0..n {
            vk[c * n + j] = vt[(k, j)];
        }
    }
    let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut s {
        *x /= norm;
    }
    (uk, s, vk, keep)
}

impl<T: Scalar> Mps<T> {
    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|a| a.dr).collect()
    }

    pub fn random(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut sites = Vec::with_capacity(n);
        for i in 0..n {
            let cap = |k: usize| if k >= 30 { usize::MAX } else { 1usize << k };
            let dl = cap(i).min(cap(n - i)).min(dim).max(1);
            let dr = cap(i + 1).min(cap(n - i - 1)).min(dim).max(1);
            sites.push(Tensor3 { dl, dr, data: random_vector(dl * 2 * dr, rng) });
        }
        let mut mps = Self { sites };
        mps.right_canonicalize();
        mps
    }

    /// Brings every site but the first into right-canonical form and
    /// normalises the state.
    pub fn right_canonicalize(&mut self) {
        let n = self.n();
        for i in (1..n).rev() {
            let (dl, dr) = (self.sites[i].dl, self.sites[i].dr);
            let (u, s, vt, k) = truncated_svd(&self.sites[i].data, dl, 2 * dr, usize::MAX);
            self.sites[i] = Tensor3 { dl: k, dr, data: vt };
            let mut us = u;
            for row in 0..dl {
                for c in 0..k {
                    us[row * k + c] *= T::from_re(s[c]);
                }
            }
            let prev = &self.sites[i - 1];
            let data = mm(&prev.data, &us, prev.dl * 2, dl, k);
            self.sites[i - 1] = Tensor3 { dl: prev.dl, dr: k, data };
        }
        let nrm = crate::scalar::norm(&self.sites[0].data);
        crate::scalar::scale(&mut self.sites[0].data, T::from_re(1.0 / nrm));
    }

    /// Full state vector with the dense-backend bit convention.
    pub fn to_dense(&self) -> Vec<T> {
        let mut acc: Vec<T> = vec![T::one()];
        let mut dim = 1usize;
        for (i, a) in self.sites.iter().enumerate() {
            // acc: [config][bond]
            let mut next = vec![T::zero(); dim * 2 * a.dr];
            for cfg in 0..dim {
                for l in 0..a.dl {
                    let c = acc[cfg * a.dl + l];
                    if c == T::zero() {
                        continue;
                    }
                    for s in 0..2 {
                        let new_cfg = cfg | (s << i);
                        for r in 0..a.dr {
                            next[new_cfg * a.dr + r] += c * a.data[(l * 2 + s) * a.dr + r];
                        }
                    }
                }
            }
            acc = next;
            dim *= 2;
        }
        acc
    }

    pub fn to_complex(&self) -> Mps<Complex64> {
        Mps {
            sites: self
                .sites
                .iter()
                .map(|a| Tensor3 { dl: a.dl, dr: a.dr, data: a.data.iter().map(|z| z.to_c64()).collect() })
                .collect(),
        }
    }

    /// π rotation about z: `(−1)^{#down}`.
    pub fn rotate_pi_z(&mut self) {
        for a in &mut self.sites {
            for l in 0..a.dl {
                for r in 0..a.dr {
                    a.data[l * 2 * a.dr + r] = -a.data[l * 2 * a.dr + r];
                }
            }
        }
    }
}

pub fn expectation<T: Scalar>(mps: &Mps<T>, mpo: &[MpoSite<T>]) -> T {
    let mut env = Env::trivial();
    for (a, w) in mps.sites.iter().zip(mpo) {
        env = extend_left(&env, a, w);
    }
    env.data[0]
}

pub fn expect_complex(mps: &Mps<Complex64>, mpo: &[MpoSite<Complex64>]) -> Complex64 {
    expectation(mps, mpo)
}

pub fn moments(mps: &Mps<Complex64>) -> SpinMoments {
    let n = mps.n();
    let (sx, sy, sz) = (local_op(Axis::X), local_op(Axis::Y), local_op(Axis::Z));
    let alt = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
    let e = |mpo: Vec<MpoSite<Complex64>>| expect_complex(mps, &mpo).re;
    let yz = e(bond_sum_mpo(n, sy, sz)) + e(bond_sum_mpo(n, sz, sy));
    SpinMoments {
        sx: e(onsite_sum_mpo(n, sx, |_| 1.0)),
        sy: e(onsite_sum_mpo(n, sy, |_| 1.0)),
        sz: e(onsite_sum_mpo(n, sz, |_| 1.0)),
        sx2: e(total_squared_mpo(n, sx)),
        stag_y: e(onsite_sum_mpo(n, sy, alt)),
        stag_z: e(onsite_sum_mpo(n, sz, alt)),
        xx: e(bond_sum_mpo(n, sx, sx)),
        yy: e(bond_sum_mpo(n, sy, sy)),
        zz: e(bond_sum_mpo(n, sz, sz)),
        yz,
    }
}

#[derive(Debug, Clone)]
pub struct DmrgResult<T> {
    pub energy: f64,
    pub state: Mps<T>,
    pub sweep_energies: Vec<f64>,
}

pub fn ground_state<T: Scalar>(
    c: &EffectiveCouplings,
    cfg: &DmrgConfig,
    warm: Option<&Mps<T>>,
) -> Result<DmrgResult<T>, MpsError> {
    if c.boundary == Boundary::Periodic && c.n > 2 {
        return Err(MpsError::PeriodicBoundary);
    }
    let n = c.n;
    let mpo: Vec<MpoSite<T>> = convert_mpo(&hamiltonian_mpo(c));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mps = match warm {
        Some(m) if m.n() == n => {
            let mut m = m.clone();
            m.right_canonicalize();
            m
        }
        _ => Mps::random(n, cfg.bond_dim.min(16), &mut rng),
    };

    if n == 1 {
        let a = &mps.sites[0];
        let mut h = [[T::zero(); 2]; 2];
        for &(_, _, so, si, v) in &mpo[0].entries {
            h[so][si] += v;
        }
        let res = lowest_eigenpair(
            2,
            |x: &[T], y: &mut [T]| {
                y[0] = h[0][0] * x[0] + h[0][1] * x[1];
                y[1] = h[1][0] * x[0] + h[1][1] * x[1];
            },
            Some(&a.data),
            &cfg.local,
        )?;
        let state = Mps { sites: vec![Tensor3 { dl: 1, dr: 1, data: res.vector }] };
        return Ok(DmrgResult { energy: res.value, state, sweep_energies: vec![res.value] });
    }

    let mut left: Vec<Env<T>> = vec![Env::trivial(); n];
    let mut right: Vec<Env<T>> = vec![Env::trivial(); n];
    for i in (0..n - 1).rev() {
        right[i] = extend_right(&right[i + 1], &mps.sites[i + 1], &mpo[i + 1]);
    }

    let mut sweep_energies: Vec<f64> = Vec::new();
    let mut energy = f64::INFINITY;
    let solve_pair = |i: usize, mps: &mut Mps<T>, left: &[Env<T>], right: &[Env<T>], to_right: bool| -> Result<f64, MpsError> {
        let (a, b) = (&mps.sites[i], &mps.sites[i + 1]);
        let (dl, dm, dr) = (a.dl, a.dr, b.dr);
        let theta = mm(&a.data, &b.data, dl * 2, dm, 2 * dr);
        let (l, r) = (&left[i], &right[i + 1]);
        let (wi, wj) = (&mpo[i], &mpo[i + 1]);
        // sweeps converge even when a single local step does not
        let (res, _) = lowest_eigenpair_best(
            theta.len(),
            |x: &[T], y: &mut [T]| two_site_apply(l, wi, wj, r, x, y),
            Some(&theta),
            &cfg.local,
        )?;
        let (u, s, vt, k) = truncated_svd(&res.vector, dl * 2, 2 * dr, cfg.bond_dim);
        let (mut u, mut vt) = (u, vt);
        if to_right {
            for row in 0..k {
                for col in 0..2 * dr {
                    vt[row * 2 * dr + col] *= T::from_re(s[row]);
                }
            }
        } else {
            for row in 0..dl * 2 {
                for col in 0..k {
                    u[row * k + col] *= T::from_re(s[col]);
                }
            }
        }
        mps.sites[i] = Tensor3 { dl, dr: k, data: u };
        mps.sites[i + 1] = Tensor3 { dl: k, dr, data: vt };
        Ok(res.value)
    };

    for sweep in 0..cfg.sweeps.max(1) {
        let mut e = f64::INFINITY;
        for i in 0..n - 1 {
            e = solve_pair(i, &mut mps, &left, &right, true)?;
            if i + 1 < n - 1 {
                left[i + 1] = extend_left(&left[i], &mps.sites[i], &mpo[i]);
            }
        }
        for i in (0..n - 1).rev() {
            e = solve_pair(i, &mut mps, &left, &right, false)?;
            right[i] = extend_right(&right[i + 1], &mps.sites[i + 1], &mpo[i + 1]);
        }
        if e > energy + 1e-8 * energy.abs().max(1.0) {
            return Err(MpsError::NonMonotone { sweep, from: energy, to: e });
        }
        sweep_energies.push(e);
        let converged = (energy - e).abs() < cfg.tol;
        energy = energy.min(e);
        if converged {
            break;
        }
    }
    let stored = expectation(&mps, &mpo).re();
    Ok(DmrgResult { energy: stored, state: mps, sweep_energies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::dense::{self, DenseOperator};
    use crate::spin::lanczos::lowest_eigenpair;
    use rand::Rng;

    fn xxz(n: usize, jz: f64) -> EffectiveCouplings {
        let mut c = EffectiveCouplings::zero(n, Boundary::Open);
        c.jt_xx = 1.0;
        c.jt_yy = 1.0;
        c.jt_zz = jz;
        c
    }

    fn dense_energy(c: &EffectiveCouplings) -> f64 {
        let op = DenseOperator::new(c);
        let cfg = LanczosConfig { tol: 1e-10, ..Default::default() };
        if c.is_real() {
            lowest_eigenpair::<f64, _>(op.dim(), |x, y| op.apply(x, y), None, &cfg).unwrap().value
        } else {
            lowest_eigenpair::<Complex64, _>(op.dim(), |x, y| op.apply(x, y), None, &cfg).unwrap().value
        }
    }

    #[test]
    fn mpo_matches_dense_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut u = || rng.random_range(-1.0..1.0);
        let c = EffectiveCouplings {
            n: 4,
            boundary: Boundary::Open,
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
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mps: Mps<Complex64> = Mps::random(4, 4, &mut rng);
        let psi = mps.to_dense();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let op = DenseOperator::new(&c);
        let mut hpsi = vec![Complex64::new(0.0, 0.0); 16];
        op.apply(&psi, &mut hpsi);
        let want = crate::scalar::dot(&psi, &hpsi);
        let got = expect_complex(&mps, &hamiltonian_mpo(&c));
        assert!((got - want).norm() < 1e-12, "{got} vs {want}");

        let m = moments(&mps);
        let md = dense::moments(&c, &psi);
        for (a, b) in [
            (m.sx, md.sx),
            (m.sy, md.sy),
            (m.sz, md.sz),
            (m.sx2, md.sx2),
            (m.stag_y, md.stag_y),
            (m.stag_z, md.stag_z),
            (m.xx, md.xx),
            (m.yy, md.yy),
            (m.zz, md.zz),
            (m.yz, md.yz),
        ] {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn xxz_chain_matches_lanczos() {
        let c = xxz(10, -1.6);
        let res: DmrgResult<f64> = ground_state(&c, &DmrgConfig::default(), None).unwrap();
        assert!((res.energy - dense_energy(&c)).abs() < 1e-8);
        assert!(res.sweep_energies.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    }

    #[test]
    fn single_and_two_site_chains() {
        let mut c = EffectiveCouplings::zero(1, Boundary::Open);
        c.h_z = 1.0;
        c.h_x = 0.3;
        let res: DmrgResult<f64> = ground_state(&c, &DmrgConfig::default(), None).unwrap();
        assert!((res.energy + 0.5 * (1.0f64 + 0.09).sqrt()).abs() < 1e-12);

        let mut c = xxz(2, 0.5);
        c.h_z = 0.2;
        let res: DmrgResult<f64> = ground_state(&c, &DmrgConfig::default(), None).unwrap();
        assert!((res.energy - dense_energy(&c)).abs() < 1e-10);
    }

    #[test]
    fn small_bond_dimension_is_variational() {
        let c = xxz(12, 0.3);
        let cfg = DmrgConfig { bond_dim: 4, ..Default::default() };
        let res: DmrgResult<f64> = ground_state(&c, &cfg, None).unwrap();
        assert!(res.energy >= dense_energy(&c) - 1e-10);
        assert!(res.state.bond_dims().iter().all(|&d| d <= 4));
    }

    #[test]
    fn rejects_periodic_chain() {
        let c = EffectiveCouplings::zero(4, Boundary::Periodic);
        assert_eq!(ground_state::<f64>(&c, &DmrgConfig::default(), None).unwrap_err(), MpsError::PeriodicBoundary);
    }
}
