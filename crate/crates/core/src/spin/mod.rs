//! Ground states of `H_eff` and spin expectation values.

pub mod collective;
pub mod dense;
pub mod lanczos;
pub mod mps;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::effective::{EffectiveCouplings, SpinMoments};
use crate::model::Boundary;
use crate::scalar::Scalar;
use collective::CollectiveState;
use lanczos::{LanczosConfig, LanczosError};
use mps::{DmrgConfig, Mps, MpsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Dense,
    Collective,
    Mps,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Collective => "collective",
            Backend::Mps => "mps",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("dense backend supports at most {max} sites, got {n}")]
    TooManySites { n: usize, max: usize },
    #[error("collective backend needs a permutation-symmetric H_eff (no exchange, no staggered field)")]
    NotPermutationSymmetric,
    #[error("collective backend needs k_xx <= 0 for the maximal-spin sector to hold the ground state, got {0}")]
    RepulsiveCollective(f64),
    #[error("MPS backend needs an open chain")]
    PeriodicMps,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("observable {0:?} is not available on the {1} backend")]
    Unsupported(Observable, &'static str),
    #[error("state has {state} sites but couplings have {couplings}")]
    SizeMismatch { state: usize, couplings: usize },
    #[error(transparent)]
    Lanczos(#[from] LanczosError),
    #[error(transparent)]
    Dmrg(MpsError),
}

impl From<MpsError> for SolverError {
    fn from(e: MpsError) -> Self {
        match e {
            MpsError::PeriodicBoundary => SolverError::PeriodicMps,
            other => SolverError::Dmrg(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub backend: Backend,
    pub lanczos_max_iter: usize,
    pub lanczos_tol: f64,
    pub krylov_dim: usize,
    pub bond_dim: usize,
    pub sweeps: usize,
    pub dmrg_tol: f64,
    /// Staggered `Σ (−1)^i s_i^z` field in units of ε.
    pub stagger_field: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Dense,
            lanczos_max_iter: 3000,
            lanczos_tol: 1e-9,
            krylov_dim: 32,
            bond_dim: 64,
            sweeps: 10,
            dmrg_tol: 1e-10,
            stagger_field: 1e-9,
            seed: 0x5eed,
        }
    }
}

impl SolverConfig {
    pub fn dense() -> Self {
        Self::default()
    }

    pub fn collective() -> Self {
        Self { backend: Backend::Collective, stagger_field: 0.0, ..Self::default() }
    }

    pub fn mps() -> Self {
        Self { backend: Backend::Mps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if !(self.lanczos_tol > 0.0) || !(self.dmrg_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.bond_dim < 2 {
            return bad("bond dimension must be at least 2");
        }
        if self.krylov_dim < 2 || self.lanczos_max_iter == 0 || self.sweeps == 0 {
            return bad("iteration limits must be positive");
        }
        if !self.stagger_field.is_finite() {
            return bad("staggered field must be finite");
        }
        Ok(())
    }

    pub fn lanczos(&self) -> LanczosConfig {
        LanczosConfig {
            max_iter: self.lanczos_max_iter,
            tol: self.lanczos_tol,
            krylov_dim: self.krylov_dim,
            seed: self.seed,
            perturbation: 0.0,
        }
    }

    pub fn dmrg(&self) -> DmrgConfig {
        let d = DmrgConfig::default();
        DmrgConfig {
            bond_dim: self.bond_dim,
            sweeps: self.sweeps,
            tol: self.dmrg_tol,
            local: LanczosConfig { tol: self.lanczos_tol, seed: self.seed, ..d.local },
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    Site { site: usize, axis: Axis },
    Pair { i: usize, a: Axis, j: usize, b: Axis },
    Total(Axis),
    TotalSquared(Axis),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpinState {
    DenseReal { n: usize, psi: Vec<f64> },
    DenseComplex { n: usize, psi: Vec<Complex64> },
    Collective(CollectiveState),
    MpsReal(Mps<f64>),
    MpsComplex(Mps<Complex64>),
}

impl SpinState {
    pub fn n(&self) -> usize {
        match self {
            SpinState::DenseReal { n, .. } | SpinState::DenseComplex { n, .. } => *n,
            SpinState::Collective(c) => c.n,
            SpinState::MpsReal(m) => m.n(),
            SpinState::MpsComplex(m) => m.n(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            SpinState::DenseReal { .. } | SpinState::DenseComplex { .. } => Backend::Dense,
            SpinState::Collective(_) => Backend::Collective,
            SpinState::MpsReal(_) | SpinState::MpsComplex(_) => Backend::Mps,
        }
    }

    /// True when every amplitude is real in the `s^z` basis.
    pub fn is_real(&self) -> bool {
        match self {
            SpinState::DenseReal { .. } | SpinState::MpsReal(_) => true,
            SpinState::Collective(c) => c.amplitudes.iter().all(|z| z.im == 0.0),
            SpinState::DenseComplex { .. } | SpinState::MpsComplex(_) => false,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            SpinState::DenseReal { psi, .. } => crate::scalar::norm(psi),
            SpinState::DenseComplex { psi, .. } => crate::scalar::norm(psi),
            SpinState::Collective(c) => crate::scalar::norm(&c.amplitudes),
            SpinState::MpsReal(m) => mps::expect_complex(&m.to_complex(), &mps::product_mpo(m.n(), &[])).re.sqrt(),
            SpinState::MpsComplex(m) => mps::expect_complex(m, &mps::product_mpo(m.n(), &[])).re.sqrt(),
        }
    }

    /// Full `2^N` amplitude vector where the backend can produce one.
    pub fn dense_amplitudes(&self) -> Option<Vec<Complex64>> {
        match self {
            SpinState::DenseReal { psi, .. } => Some(psi.iter().map(|&x| Complex64::new(x, 0.0)).collect()),
            SpinState::DenseComplex { psi, .. } => Some(psi.clone()),
            SpinState::MpsReal(m) if m.n() <= dense::MAX_SITES => Some(m.to_complex().to_dense()),
            SpinState::MpsComplex(m) if m.n() <= dense::MAX_SITES => Some(m.to_dense()),
            SpinState::Collective(c) if c.n <= dense::MAX_SITES => Some(collective_to_dense(c)),
            _ => None,
        }
    }

    pub fn moments(&self, c: &EffectiveCouplings) -> SpinMoments {
        match self {
            SpinState::DenseReal { psi, .. } => dense::moments(c, psi),
            SpinState::DenseComplex { psi, .. } => dense::moments(c, psi),
            SpinState::Collective(s) => s.moments(c),
            SpinState::MpsReal(m) => mps::moments(&m.to_complex()),
            SpinState::MpsComplex(m) => mps::moments(m),
        }
    }

    pub fn expectations(&self, request: &[Observable]) -> Result<Vec<f64>, SolverError> {
        match self {
            SpinState::DenseReal { psi, .. } => Ok(request.iter().map(|o| dense_observable(self.n(), psi, o)).collect()),
            SpinState::DenseComplex { psi, .. } => Ok(request.iter().map(|o| dense_observable(self.n(), psi, o)).collect()),
            SpinState::Collective(s) => request.iter().map(|o| collective_observable(s, o)).collect(),
            SpinState::MpsReal(m) => {
                let m = m.to_complex();
                Ok(request.iter().map(|o| mps_observable(&m, o)).collect())
            }
            SpinState::MpsComplex(m) => Ok(request.iter().map(|o| mps_observable(m, o)).collect()),
        }
    }

    /// π rotation about z (maps `s^x, s^y → −s^x, −s^y`).
    pub fn rotate_pi_z(&mut self) {
        match self {
            SpinState::DenseReal { psi, .. } => dense::rotate_pi_z(psi),
            SpinState::DenseComplex { psi, .. } => dense::rotate_pi_z(psi),
            SpinState::Collective(s) => s.rotate_pi_z(),
            SpinState::MpsReal(m) => m.rotate_pi_z(),
            SpinState::MpsComplex(m) => m.rotate_pi_z(),
        }
    }

    /// Product state with every spin along `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn product(n: usize, backend: Backend, theta: f64, phi: f64) -> Result<Self, SolverError> {
        let up = Complex64::new((theta / 2.0).cos(), 0.0);
        let dn = Complex64::from_polar((theta / 2.0).sin(), phi);
        let real = dn.im == 0.0 || phi.sin().abs() < 1e-15;
        Ok(match backend {
            Backend::Dense => {
                if n > dense::MAX_SITES {
                    return Err(SolverError::TooManySites { n, max: dense::MAX_SITES });
                }
                let psi: Vec<Complex64> = (0..1usize << n)
                    .map(|idx| {
                        let k = (idx as u32).count_ones() as i32;
                        up.powi(k) * dn.powi(n as i32 - k)
                    })
                    .collect();
                if real {
                    SpinState::DenseReal { n, psi: psi.iter().map(|z| z.re).collect() }
                } else {
                    SpinState::DenseComplex { n, psi }
                }
            }
            Backend::Collective => {
                let amplitudes = (0..=n)
                    .map(|k| up.powi(k as i32) * dn.powi((n - k) as i32) * (0.5 * ln_binomial(n, k)).exp())
                    .collect();
                SpinState::Collective(CollectiveState { n, amplitudes })
            }
            Backend::Mps => {
                let sites: Vec<mps::Tensor3<Complex64>> =
                    (0..n).map(|_| mps::Tensor3 { dl: 1, dr: 1, data: vec![dn, up] }).collect();
                let m = Mps { sites };
                if real {
                    SpinState::MpsReal(Mps {
                        sites: m
                            .sites
                            .iter()
                            .map(|t| mps::Tensor3 { dl: 1, dr: 1, data: t.data.iter().map(|z| z.re).collect() })
                            .collect(),
                    })
                } else {
                    SpinState::MpsComplex(m)
                }
            }
        })
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let lf = |m: usize| (1..=m).map(|x| (x as f64).ln()).sum::<f64>();
    lf(n) - lf(k) - lf(n - k)
}

fn collective_to_dense(c: &CollectiveState) -> Vec<Complex64> {
    let n = c.n;
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (s, v) in psi.iter_mut().enumerate() {
        let k = (s as u32).count_ones() as usize;
        *v = c.amplitudes[k] / ln_binomial(n, k).exp().sqrt();
    }
    psi
}

fn dense_observable<T: Scalar>(n: usize, psi: &[T], o: &Observable) -> f64 {
    match *o {
        Observable::Site { site, axis } => dense::expect_product(psi, &[(site, axis)]).re,
        Observable::Pair { i, a, j, b } => dense::expect_product(psi, &[(i, a), (j, b)]).re,
        Observable::Total(axis) => (0..n).map(|i| dense::expect_product(psi, &[(i, axis)]).re).sum(),
        Observable::TotalSquared(axis) => {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += dense::expect_product(psi, &[(i, axis), (j, axis)]).re;
                }
            }
            acc
        }
    }
}

fn collective_observable(s: &CollectiveState, o: &Observable) -> Result<f64, SolverError> {
    Ok(match *o {
        Observable::Site { axis, .. } => s.site(axis),
        Observable::Pair { i, a, j, b } if i != j => s.pair(a, b).re,
        Observable::Pair { a, b, .. } => {
            if a == b {
                0.25
            } else {
                0.0
            }
        }
        Observable::Total(axis) => s.total(axis),
        Observable::TotalSquared(axis) => s.total_pair(axis, axis).re,
    })
}

fn mps_observable(m: &Mps<Complex64>, o: &Observable) -> f64 {
    let n = m.n();
    let mpo = match *o {
        Observable::Site { site, axis } => mps::product_mpo(n, &[(site, axis)]),
        Observable::Pair { i, a, j, b } => mps::product_mpo(n, &[(i, a), (j, b)]),
        Observable::Total(axis) => mps::onsite_sum_mpo(n, mps::local_op(axis), |_| 1.0),
        Observable::TotalSquared(axis) => mps::total_squared_mpo(n, mps::local_op(axis)),
    };
    mps::expect_complex(m, &mpo).re
}

pub fn check_backend(c: &EffectiveCouplings, cfg: &SolverConfig) -> Result<(), SolverError> {
    cfg.validate()?;
    match cfg.backend {
        Backend::Dense if c.n > dense::MAX_SITES => Err(SolverError::TooManySites { n: c.n, max: dense::MAX_SITES }),
        Backend::Collective if c.has_exchange() || c.has_stagger() => Err(SolverError::NotPermutationSymmetric),
        Backend::Collective if c.k_xx > 0.0 => Err(SolverError::RepulsiveCollective(c.k_xx)),
        Backend::Mps if c.boundary == Boundary::Periodic && c.n > 2 => Err(SolverError::PeriodicMps),
        _ => Ok(()),
    }
}

/// Lowest eigenpair of `H_eff`, warm-started from `warm` when it matches.
pub fn ground_state(
    c: &EffectiveCouplings,
    cfg: &SolverConfig,
    warm: Option<&SpinState>,
) -> Result<(f64, SpinState), SolverError> {
    check_backend(c, cfg)?;
    if let Some(w) = warm {
        if w.n() != c.n {
            return Err(SolverError::SizeMismatch { state: w.n(), couplings: c.n });
        }
    }
    let n = c.n;
    match cfg.backend {
        Backend::Dense => {
            let op = dense::DenseOperator::new(c);
            let lc = cfg.lanczos();
            let warm_complex = matches!(warm, Some(SpinState::DenseComplex { .. }));
            if c.is_real() && !warm_complex {
                let start = match warm {
                    Some(SpinState::DenseReal { psi, .. }) => Some(psi.as_slice()),
                    _ => None,
                };
                let res = lanczos::lowest_eigenpair(op.dim(), |x: &[f64], y: &mut [f64]| op.apply(x, y), start, &lc)?;
                Ok((res.value, SpinState::DenseReal { n, psi: res.vector }))
            } else {
                let start: Option<Vec<Complex64>> = match warm {
                    Some(SpinState::DenseReal { psi, .. }) => Some(psi.iter().map(|&x| Complex64::new(x, 0.0)).collect()),
                    Some(SpinState::DenseComplex { psi, .. }) => Some(psi.clone()),
                    _ => None,
                };
                let res = lanczos::lowest_eigenpair(
                    op.dim(),
                    |x: &[Complex64], y: &mut [Complex64]| op.apply(x, y),
                    start.as_deref(),
                    &lc,
                )?;
                Ok((res.value, SpinState::DenseComplex { n, psi: res.vector }))
            }
        }
        Backend::Collective => {
            let (e, s) = collective::ground_state(c);
            Ok((e, SpinState::Collective(s)))
        }
        Backend::Mps => {
            let dc = cfg.dmrg();
            let warm_complex = matches!(warm, Some(SpinState::MpsComplex(_)));
            if c.is_real() && !warm_complex {
                let start = match warm {
                    Some(SpinState::MpsReal(m)) => Some(m),
                    _ => None,
                };
                let res = mps::ground_state::<f64>(c, &dc, start)?;
                Ok((res.energy, SpinState::MpsReal(res.state)))
            } else {
                let converted;
                let start = match warm {
                    Some(SpinState::MpsComplex(m)) => Some(m),
                    Some(SpinState::MpsReal(m)) => {
                        converted = m.to_complex();
                        Some(&converted)
                    }
                    _ => None,
                };
                let res = mps::ground_state::<Complex64>(c, &dc, start)?;
                Ok((res.energy, SpinState::MpsComplex(res.state)))
            }
        }
    }
}
