//! Run configuration as read from TOML.
//!
//! ```toml
//! [model]
//! preset = "dicke-ising"   # dicke | dicke-ising | dicke-xxz | custom
//! n = 16
//! g = 0.4
//! j = 0.125                # dicke-ising: J_z = 4j
//!
//! [solver]
//! backend = "dense"
//!
//! [scf]
//! tol_e = 1e-12
//!
//! [sweep]
//! axes = [{ param = "g", min = 0.0, max = 1.0, step = 0.02 }]
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Boundary, Exchange, ModelError, ModelSpec};
use crate::observables::{DecayThresholds, PhaseThresholds};
use crate::scf::ScfConfig;
use crate::spin::SolverConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    #[default]
    Dicke,
    DickeIsing,
    DickeXxz,
    Custom,
}

impl PresetKind {
    pub fn name(&self) -> &'static str {
        match self {
            PresetKind::Dicke => "dicke",
            PresetKind::DickeIsing => "dicke-ising",
            PresetKind::DickeXxz => "dicke-xxz",
            PresetKind::Custom => "custom",
        }
    }
}

/// Tunable model parameter, usable as a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    G,
    J,
    Jx,
    Jy,
    Jz,
}

impl Param {
    pub fn name(&self) -> &'static str {
        match self {
            Param::G => "g",
            Param::J => "j",
            Param::Jx => "jx",
            Param::Jy => "jy",
            Param::Jz => "jz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: PresetKind,
    pub n: usize,
    pub g: f64,
    /// Ising constant of the `dicke-ising` preset (`J_z = 4j`).
    pub j: f64,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub boundary: Boundary,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            preset: PresetKind::Dicke,
            n: 8,
            g: 0.0,
            j: 0.0,
            jx: 0.0,
            jy: 0.0,
            jz: 0.0,
            omega: 1.0,
            epsilon: 1.0,
            boundary: Boundary::Open,
        }
    }
}

impl ModelConfig {
    pub fn exchange(&self) -> Exchange {
        match self.preset {
            PresetKind::Dicke => Exchange::ZERO,
            PresetKind::DickeIsing => Exchange::new(0.0, 0.0, 4.0 * self.j),
            PresetKind::DickeXxz => Exchange::new(1.0, 1.0, self.jz),
            PresetKind::Custom => Exchange::new(self.jx, self.jy, self.jz),
        }
    }

    pub fn spec(&self) -> Result<ModelSpec, ModelError> {
        ModelSpec::new(self.n, self.omega, self.epsilon, self.g, self.exchange(), self.boundary)
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::G => self.g,
            Param::J => self.j,
            Param::Jx => self.jx,
            Param::Jy => self.jy,
            Param::Jz => self.jz,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::G => self.g = v,
            Param::J => self.j = v,
            Param::Jx => self.jx = v,
            Param::Jy => self.jy = v,
            Param::Jz => self.jz = v,
        }
    }

    /// Parameters that actually enter the Hamiltonian for this preset.
    pub fn accepts(&self, p: Param) -> bool {
        matches!(
            (self.preset, p),
            (_, Param::G)
                | (PresetKind::DickeIsing, Param::J)
                | (PresetKind::DickeXxz, Param::Jz)
                | (PresetKind::Custom, Param::Jx | Param::Jy | Param::Jz)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisSpec {
    /// Grid values `min, min+step, …` up to `max` (inclusive within rounding).
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.min + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchPolicy {
    /// Both seeds where the chain has an antiferromagnetic z coupling,
    /// otherwise the superradiant seed alone.
    #[default]
    Auto,
    Both,
    Normal,
    Superradiant,
    /// The single seed named in `[scf.seed]`.
    Seed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    /// `⟨n⟩/N` crossing the superradiance threshold.
    #[default]
    Threshold,
    /// Finite-size exponent `α` from the size list crossing `alpha_crossing`.
    Scaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<AxisSpec>,
    /// Sizes for scaling fits; the model size is always included.
    pub sizes: Vec<usize>,
    pub branches: BranchPolicy,
    pub detector: Detector,
    /// Name stem of the output files.
    pub name: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { axes: Vec::new(), sizes: Vec::new(), branches: BranchPolicy::Auto, detector: Detector::Threshold, name: "sweep".into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub superradiant: f64,
    pub order_tol: f64,
    /// Adjacent-point change in `M_z` or `⟨n⟩/N` that marks a first-order step.
    pub jump: f64,
    pub alpha_crossing: f64,
    pub decay: DecayThresholds,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { superradiant: 0.01, order_tol: 0.02, jump: 0.1, alpha_crossing: 0.5, decay: DecayThresholds::default() }
    }
}

impl Thresholds {
    pub fn phase(&self) -> PhaseThresholds {
        PhaseThresholds { superradiant: self.superradiant, order_tol: self.order_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Worker-pool width; `DICKE_NGS_WORKERS` overrides when set.
    pub workers: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), workers: None }
    }
}

pub const WORKERS_ENV: &str = "DICKE_NGS_WORKERS";

impl OutputConfig {
    pub fn worker_count(&self) -> Result<usize, ConfigError> {
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            return v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| ConfigError::Invalid(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")));
        }
        Ok(self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelConfig,
    pub solver: SolverConfig,
    pub scf: ScfConfig,
    pub sweep: SweepConfig,
    pub thresholds: Thresholds,
    pub output: OutputConfig,
}

impl Config {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), source: Box::new(e) })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serialisable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.spec()?;
        self.solver.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.scf.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.sweep.axes.len() > 2 {
            return Err(ConfigError::Invalid("at most two sweep axes".into()));
        }
        for a in &self.sweep.axes {
            if !(a.step > 0.0) || !a.min.is_finite() || !a.max.is_finite() || a.max < a.min {
                return Err(ConfigError::Invalid(format!("axis `{}` needs min <= max and step > 0", a.param.name())));
            }
            if !self.model.accepts(a.param) {
                return Err(ConfigError::Invalid(format!(
                    "parameter `{}` has no effect on the {} preset",
                    a.param.name(),
                    self.model.preset.name()
                )));
            }
        }
        if self.sweep.axes.len() == 2 && self.sweep.axes[0].param == self.sweep.axes[1].param {
            return Err(ConfigError::Invalid("sweep axes must differ".into()));
        }
        if self.sweep.sizes.contains(&0) {
            return Err(ConfigError::Invalid("sizes must be positive".into()));
        }
        let t = &self.thresholds;
        if !(t.superradiant > 0.0 && t.order_tol > 0.0 && t.jump > 0.0 && t.alpha_crossing > 0.0 && t.alpha_crossing < 1.0) {
            return Err(ConfigError::Invalid("thresholds must be positive and alpha_crossing inside (0, 1)".into()));
        }
        if self.sweep.name.is_empty() || self.sweep.name.contains(['/', '\\']) {
            return Err(ConfigError::Invalid("sweep.name must be a plain file stem".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        let back = Config::from_toml(&c.to_toml(), Path::new("x")).unwrap();
        assert_eq!(back, c);
        c.validate().unwrap();
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let text = r#"
            [model]
            preset = "dicke-ising"
            n = 12
            j = 0.125
            [sweep]
            axes = [{ param = "g", min = 0.0, max = 0.1, step = 0.05 }]
        "#;
        let c = Config::from_toml(text, Path::new("x")).unwrap();
        assert_eq!(c.model.exchange(), Exchange::new(0.0, 0.0, 0.5));
        assert_eq!(c.scf, ScfConfig::default());
        assert_eq!(c.sweep.axes[0].values(), vec![0.0, 0.05, 0.1]);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_and_inconsistent_keys() {
        assert!(matches!(Config::from_toml("[model]\nbogus = 1\n", Path::new("x")), Err(ConfigError::Parse { .. })));
        let mut c = Config::default();
        c.sweep.axes.push(AxisSpec { param: Param::Jz, min: 0.0, max: 1.0, step: 0.1 });
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
        let mut c = Config::default();
        c.sweep.axes.push(AxisSpec { param: Param::G, min: 0.0, max: 1.0, step: 0.0 });
        assert!(c.validate().is_err());
    }

    #[test]
    fn axis_grid_includes_end_point() {
        let a = AxisSpec { param: Param::G, min: 0.0, max: 1.0, step: 0.05 };
        let v = a.values();
        assert_eq!(v.len(), 21);
        assert!((v[20] - 1.0).abs() < 1e-12);
    }
}
