//! Hybrid non-Gaussian-state ground-state solver for Dicke-Heisenberg chains.
//!
//! The photon is treated with a Gaussian state dressed by a spin-photon
//! entangler, which turns the problem into an effective spin Hamiltonian
//! solved by dense Lanczos, the collective-spin basis, or DMRG. An outer
//! self-consistent loop optimises the photon frame.

pub mod benchmark;
pub mod config;
pub mod effective;
pub mod frame;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod scalar;
pub mod scf;
pub mod spin;
pub mod sweep;

pub use effective::{EffectiveCouplings, SpinMoments};
pub use frame::{DressingFactors, PhotonFrame};
pub use model::{Boundary, Exchange, ModelError, ModelPreset, ModelSpec};
pub use spin::{Axis, Backend, Observable, SolverConfig, SolverError, SpinState};
pub use observables::{DecayClass, ObservableSet, Phase, ScalingFit};
pub use scf::{Branch, ScfConfig, ScfError, ScfReport, SeedStrategy};
pub use config::{Config, ConfigError, PresetKind};
pub use sweep::{PhaseBoundary, PointResult, SweepError, SweepPlan};
