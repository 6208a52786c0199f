//! Exact diagonalization of the untransformed Hamiltonian in
//! (truncated Fock) ⊗ (spin) space.
//!
//! Basis ordering is photon-major: index `n · 2^N + s`, with `s` using the
//! dense-backend bit convention.

pub mod fock;

use std::io::{self, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::effective::{build_with_stagger, EffectiveCouplings};
use crate::frame::PhotonFrame;
use crate::model::{effective_single_coupling, ModelSpec};
use crate::scalar::Scalar;
use crate::spin::dense::{self, DenseOperator};
use crate::spin::lanczos::{lowest_eigenpair, LanczosConfig, LanczosError};
use crate::spin::{Axis, SpinState};

pub const MAX_DIM: usize = 5_000_000;
pub const CUTOFF_STEP: usize = 20;
pub const ORDERING_TAG: &str = "photon-major";
const DUMP_MAGIC: &[u8; 8] = b"DKNGSED1";

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("Hilbert space of dimension {dim} exceeds the limit {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("Fock cutoff must be at least {min}, got {n_max}")]
    CutoffTooSmall { n_max: usize, min: usize },
    #[error("cutoff n_max = {n_max} not converged (shift {margin:.3e} on +{step}); try n_max = {suggested}")]
    CutoffNotConverged { n_max: usize, margin: f64, step: usize, suggested: usize },
    #[error("frame check supports at most {max} spins, got {n}")]
    TooManySpins { n: usize, max: usize },
    #[error("spin state must expose dense amplitudes")]
    NoAmplitudes,
    #[error(transparent)]
    Lanczos(#[from] LanczosError),
    #[error("dump i/o: {0}")]
    Io(#[from] io::Error),
    #[error("malformed dump: {0}")]
    BadDump(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockTruncation {
    pub n_max: usize,
    /// Accepted energy shift between `n_max` and `n_max + 20`.
    pub max_margin: f64,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Self {
        Self { n_max, max_margin: 1e-8 }
    }
}

/// The full Hamiltonian with an optional staggered `h_s Σ (−1)^i s_i^z`.
pub struct FullOperator {
    n: usize,
    levels: usize,
    omega: f64,
    gp: f64,
    spin: DenseOperator,
}

impl FullOperator {
    pub fn new(spec: &ModelSpec, n_max: usize, stagger: f64) -> Self {
        let mut c = EffectiveCouplings::zero(spec.n, spec.boundary);
        c.h_z = spec.epsilon;
        c.stagger_z = stagger;
        c.jt_xx = spec.exchange.x;
        c.jt_yy = spec.exchange.y;
        c.jt_zz = spec.exchange.z;
        Self { n: spec.n, levels: n_max + 1, omega: spec.omega, gp: effective_single_coupling(spec), spin: DenseOperator::new(&c) }
    }

    pub fn dim(&self) -> usize {
        self.levels << self.n
    }

    pub fn apply<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        let ds = 1usize << self.n;
        let blocks: Vec<Vec<T>> = (0..self.levels)
            .into_par_iter()
            .map(|k| {
                let xk = &x[k * ds..(k + 1) * ds];
                let mut out = vec![T::zero(); ds];
                self.spin.apply(xk, &mut out);
                let w = T::from_re(self.omega * (k as f64 + 0.5));
                // x-quadrature couples neighbouring Fock levels
                let mut mix = vec![T::zero(); ds];
                if k > 0 {
                    let c = T::from_re((k as f64 / 2.0).sqrt());
                    for (m, v) in mix.iter_mut().zip(&x[(k - 1) * ds..k * ds]) {
                        *m += c * *v;
                    }
                }
                if k + 1 < self.levels {
                    let c = T::from_re(((k + 1) as f64 / 2.0).sqrt());
                    for (m, v) in mix.iter_mut().zip(&x[(k + 1) * ds..(k + 2) * ds]) {
                        *m += c * *v;
                    }
                }
                let mut sx = vec![T::zero(); ds];
                dense::apply_total_x(self.n, &mix, &mut sx);
                let g = T::from_re(self.gp);
                for ((o, a), b) in out.iter_mut().zip(xk).zip(&sx) {
                    *o += w * *a + g * *b;
                }
                out
            })
            .collect();
        for (k, b) in blocks.into_iter().enumerate() {
            y[k * ds..(k + 1) * ds].copy_from_slice(&b);
        }
    }

    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        let mut h = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, &mut h);
        crate::scalar::dot(psi, &h).re / crate::scalar::dot(psi, psi).re
    }
}

/// A state of the full problem.
#[derive(Debug, Clone)]
pub struct FullState {
    pub n: usize,
    pub n_max: usize,
    pub amplitudes: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub energy: f64,
    pub margin: f64,
    pub n_max: usize,
    pub state: FullState,
}

fn oracle_lanczos() -> LanczosConfig {
    LanczosConfig { tol: 1e-10, max_iter: 20_000, krylov_dim: 40, seed: 0x0eac1e, perturbation: 0.0 }
}

fn lowest(spec: &ModelSpec, n_max: usize, stagger: f64) -> Result<(f64, Vec<f64>), OracleError> {
    let op = FullOperator::new(spec, n_max, stagger);
    let dim = op.dim();
    if dim > MAX_DIM {
        return Err(OracleError::TooLarge { dim, max: MAX_DIM });
    }
    if dim <= DENSE_DIM {
        return Ok(dense_lowest(&op));
    }
    let res = lowest_eigenpair(dim, |x: &[f64], y: &mut [f64]| op.apply(x, y), None, &oracle_lanczos())?;
    Ok((res.value, res.vector))
}

/// Full diagonalisation below this dimension; exact for degenerate ground states.
const DENSE_DIM: usize = 1024;

fn dense_lowest(op: &FullOperator) -> (f64, Vec<f64>) {
    let dim = op.dim();
    let mut m = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for j in 0..dim {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        m.column_mut(j).copy_from_slice(&col);
    }
    let eig = m.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
}

pub fn full_ground_state(spec: &ModelSpec, trunc: &FockTruncation) -> Result<OracleResult, OracleError> {
    full_ground_state_with_stagger(spec, trunc, 0.0)
}

pub fn full_ground_state_with_stagger(
    spec: &ModelSpec,
    trunc: &FockTruncation,
    stagger: f64,
) -> Result<OracleResult, OracleError> {
    if trunc.n_max < 2 {
        return Err(OracleError::CutoffTooSmall { n_max: trunc.n_max, min: 2 });
    }
    let big = (trunc.n_max + CUTOFF_STEP + 1) << spec.n;
    if big > MAX_DIM {
        return Err(OracleError::TooLarge { dim: big, max: MAX_DIM });
    }
    let (e, v) = lowest(spec, trunc.n_max, stagger)?;
    let (e2, _) = lowest(spec, trunc.n_max + CUTOFF_STEP, stagger)?;
    let margin = (e - e2).abs();
    if margin > trunc.max_margin {
        return Err(OracleError::CutoffNotConverged {
            n_max: trunc.n_max,
            margin,
            step: CUTOFF_STEP,
            suggested: 2 * trunc.n_max,
        });
    }
    Ok(OracleResult {
        energy: e,
        margin,
        n_max: trunc.n_max,
        state: FullState {
            n: spec.n,
            n_max: trunc.n_max,
            amplitudes: v.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullObservables {
    /// `⟨a†a⟩`
    pub photons: f64,
    pub n_mean: f64,
    pub m_z: f64,
    pub site_z: Vec<f64>,
}

impl FullState {
    fn blocks(&self) -> impl Iterator<Item = (usize, &[Complex64])> {
        let ds = 1usize << self.n;
        self.amplitudes.chunks(ds).enumerate()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn photons(&self) -> f64 {
        self.blocks().map(|(k, b)| k as f64 * b.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() / self.norm_sqr()
    }

    /// `⟨Π O⟩` for spin operators, traced over the photon.
    pub fn spin_expect(&self, ops: &[(usize, Axis)]) -> f64 {
        self.blocks().map(|(_, b)| dense::expect_product(b, ops).re).sum::<f64>() / self.norm_sqr()
    }

    pub fn observables(&self) -> FullObservables {
        let photons = self.photons();
        let site_z: Vec<f64> = (0..self.n).map(|i| self.spin_expect(&[(i, Axis::Z)])).collect();
        FullObservables {
            photons,
            n_mean: photons / self.n as f64,
            m_z: site_z.iter().sum::<f64>() / self.n as f64,
            site_z,
        }
    }
}

pub fn full_observables(res: &OracleResult) -> FullObservables {
    res.state.observables()
}

pub const FRAME_CHECK_MAX_SPINS: usize = 6;
pub const FRAME_CHECK_MIN_CUTOFF: usize = 40;

/// Explicit `U_λ(U_GS|0⟩ ⊗ |φ⟩)` as a full state.
pub fn prepare_ngs(spec: &ModelSpec, frame: &PhotonFrame, state: &SpinState, n_max: usize) -> Result<FullState, OracleError> {
    let phi = state.dense_amplitudes().ok_or(OracleError::NoAmplitudes)?;
    Ok(FullState { n: spec.n, n_max, amplitudes: fock::ngs_state(spec, frame, &phi, n_max) })
}

/// `|⟨φ|H_eff|φ⟩ − ⟨Ψ|H|Ψ⟩|` with `|Ψ⟩` built explicitly.
pub fn frame_equality_check(
    spec: &ModelSpec,
    frame: &PhotonFrame,
    state: &SpinState,
    n_max: usize,
) -> Result<f64, OracleError> {
    frame_equality_check_with_stagger(spec, frame, state, n_max, 0.0)
}

pub fn frame_equality_check_with_stagger(
    spec: &ModelSpec,
    frame: &PhotonFrame,
    state: &SpinState,
    n_max: usize,
    stagger: f64,
) -> Result<f64, OracleError> {
    if spec.n > FRAME_CHECK_MAX_SPINS {
        return Err(OracleError::TooManySpins { n: spec.n, max: FRAME_CHECK_MAX_SPINS });
    }
    if n_max < FRAME_CHECK_MIN_CUTOFF {
        return Err(OracleError::CutoffTooSmall { n_max, min: FRAME_CHECK_MIN_CUTOFF });
    }
    let c = build_with_stagger(spec, frame, stagger);
    let e_eff = (c.energy(&state.moments(&c)) - c.e_photon) / state.norm().powi(2) + c.e_photon;
    let full = |cut: usize| -> Result<f64, OracleError> {
        let psi = prepare_ngs(spec, frame, state, cut)?;
        Ok(FullOperator::new(spec, cut, stagger).energy(&psi.amplitudes))
    };
    let e = full(n_max)?;
    let e_more = full(n_max + CUTOFF_STEP)?;
    let shift = (e - e_more).abs();
    if shift > 1e-9 {
        return Err(OracleError::CutoffNotConverged { n_max, margin: shift, step: CUTOFF_STEP, suggested: 2 * n_max });
    }
    Ok((e_eff - e).abs())
}

/// Binary dump: magic, then little-endian `u64` total dimension, `n_max`,
/// `N`, a 16-byte NUL-padded ordering tag, the `f64` energy, and finally the
/// amplitudes as interleaved `(re, im)` `f64` pairs.
pub fn write_dump(res: &OracleResult, mut w: impl Write) -> Result<(), OracleError> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(res.state.amplitudes.len() as u64).to_le_bytes())?;
    w.write_all(&(res.n_max as u64).to_le_bytes())?;
    w.write_all(&(res.state.n as u64).to_le_bytes())?;
    let mut tag = [0u8; 16];
    tag[..ORDERING_TAG.len()].copy_from_slice(ORDERING_TAG.as_bytes());
    w.write_all(&tag)?;
    w.write_all(&res.energy.to_le_bytes())?;
    for z in &res.state.amplitudes {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_dump_file(res: &OracleResult, path: &Path) -> Result<(), OracleError> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    write_dump(res, &mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct DumpHeader {
    pub dim: usize,
    pub n_max: usize,
    pub n: usize,
    pub ordering: String,
    pub energy: f64,
}

pub fn read_dump(mut r: impl Read) -> Result<(DumpHeader, Vec<Complex64>), OracleError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(OracleError::BadDump("magic".into()));
    }
    let mut u = [0u8; 8];
    let mut next_u64 = |r: &mut dyn Read| -> io::Result<u64> {
        r.read_exact(&mut u)?;
        Ok(u64::from_le_bytes(u))
    };
    let dim = next_u64(&mut r)? as usize;
    let n_max = next_u64(&mut r)? as usize;
    let n = next_u64(&mut r)? as usize;
    let mut tag = [0u8; 16];
    r.read_exact(&mut tag)?;
    let ordering = String::from_utf8_lossy(&tag).trim_end_matches('\0').to_string();
    let mut f = [0u8; 8];
    r.read_exact(&mut f)?;
    let energy = f64::from_le_bytes(f);
    if dim != (n_max + 1) << n {
        return Err(OracleError::BadDump(format!("dimension {dim} does not match n_max {n_max}, N {n}")));
    }
    let mut amps = Vec::with_capacity(dim);
    for _ in 0..dim {
        r.read_exact(&mut f)?;
        let re = f64::from_le_bytes(f);
        r.read_exact(&mut f)?;
        amps.push(Complex64::new(re, f64::from_le_bytes(f)));
    }
    Ok((DumpHeader { dim, n_max, n, ordering, energy }, amps))
}
