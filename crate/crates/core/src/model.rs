//! Problem definition for the Dicke-Heisenberg chain.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = ω/2 (x² + p²) + ε S^z + g' S^x x − Σ_⟨ij⟩ Σ_α J_α s_i^α s_j^α
//! ```
//!
//! with `s = σ/2`, `S^α = Σ_i s_i^α` and `g' = 2g/√(N/2)`. Energies are in
//! units where `ω = ε = 1` unless configured otherwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("particle count must be at least 1")]
    EmptyChain,
    #[error("cavity frequency must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("transition frequency must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("collective coupling must be non-negative, got {0} (the sign of g is a gauge choice)")]
    NegativeCoupling(f64),
    #[error("non-finite model parameter `{0}`")]
    NonFinite(&'static str),
    #[error("no second-order boundary for J = {j} <= J_c = {j_c}")]
    BelowCriticalExchange { j: f64, j_c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Exchange constants `(J_x, J_y, J_z)` of the nearest-neighbour term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Exchange {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Exchange {
    pub const ZERO: Exchange = Exchange { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    pub omega: f64,
    pub epsilon: f64,
    pub g: f64,
    pub exchange: Exchange,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ModelSpec {
    pub fn new(
        n: usize,
        omega: f64,
        epsilon: f64,
        g: f64,
        exchange: Exchange,
        boundary: Boundary,
    ) -> Result<Self, ModelError> {
        let spec = Self { n, omega, epsilon, g, exchange, boundary };
        spec.validate()?;
        Ok(spec)
    }

    /// Bare Dicke model in the default units `ω = ε = 1`.
    pub fn dicke(n: usize, g: f64) -> Result<Self, ModelError> {
        Self::new(n, 1.0, 1.0, g, Exchange::ZERO, Boundary::Open)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("omega", self.omega),
            ("epsilon", self.epsilon),
            ("g", self.g),
            ("Jx", self.exchange.x),
            ("Jy", self.exchange.y),
            ("Jz", self.exchange.z),
        ] {
            if !v.is_finite() {
                return Err(ModelError::NonFinite(name));
            }
        }
        if self.n == 0 {
            return Err(ModelError::EmptyChain);
        }
        if self.omega <= 0.0 {
            return Err(ModelError::NonPositiveOmega(self.omega));
        }
        if self.epsilon <= 0.0 {
            return Err(ModelError::NonPositiveEpsilon(self.epsilon));
        }
        if self.g < 0.0 {
            return Err(ModelError::NegativeCoupling(self.g));
        }
        Ok(())
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Nearest-neighbour bonds `(i, j)` with `i < j` except for the wrap-around
    /// bond of a periodic chain. Chains shorter than three sites have no
    /// distinct wrap-around bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        chain_bonds(self.n, self.boundary)
    }

    /// Reference site for bulk correlation tables (`i = N/4 − 1`, clamped to 0).
    pub fn bulk_site(&self) -> usize {
        (self.n / 4).saturating_sub(1)
    }

    /// Staggered observables are edge-sensitive on odd chains.
    pub fn staggered_is_edge_sensitive(&self) -> bool {
        self.n % 2 == 1
    }
}

pub fn chain_bonds(n: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if boundary == Boundary::Periodic && n > 2 {
        bonds.push((n - 1, 0));
    }
    bonds
}

/// Named parameter families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelPreset {
    Dicke,
    /// Ising chain with `J_z = 4J`.
    DickeIsing { j: f64 },
    /// XXZ chain with `J_x = J_y = 1`.
    DickeXxz { jz: f64 },
}

impl ModelPreset {
    pub fn exchange(&self) -> Exchange {
        match *self {
            ModelPreset::Dicke => Exchange::ZERO,
            ModelPreset::DickeIsing { j } => Exchange::new(0.0, 0.0, 4.0 * j),
            ModelPreset::DickeXxz { jz } => Exchange::new(1.0, 1.0, jz),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelPreset::Dicke => "dicke",
            ModelPreset::DickeIsing { .. } => "dicke-ising",
            ModelPreset::DickeXxz { .. } => "dicke-xxz",
        }
    }

    /// Spec with `ω = ε = 1` and an open chain.
    pub fn spec(&self, n: usize, g: f64) -> Result<ModelSpec, ModelError> {
        ModelSpec::new(n, 1.0, 1.0, g, self.exchange(), Boundary::Open)
    }
}

/// Single-emitter coupling `g' = 2g/√(N/2)`.
pub fn effective_single_coupling(spec: &ModelSpec) -> f64 {
    2.0 * spec.g / (spec.n as f64 / 2.0).sqrt()
}

/// Critical coupling of the bare Dicke model, `√(ωε)/2`.
pub fn dicke_critical_coupling(spec: &ModelSpec) -> f64 {
    (spec.omega * spec.epsilon).sqrt() / 2.0
}

/// `J_c = −ε/4`: the Ising exchange separating the ferromagnetic and
/// antiferromagnetic regimes at `g = 0`.
pub fn ising_critical_exchange(spec: &ModelSpec) -> f64 {
    -spec.epsilon / 4.0
}

/// Second-order FM-NP → PM-SP line of the Dicke-Ising model,
/// `g_c(J) = g_c √(1 − J/J_c)`. Only defined on the ferromagnetic side.
pub fn ising_boundary(j: f64, spec: &ModelSpec) -> Result<f64, ModelError> {
    let j_c = ising_critical_exchange(spec);
    if j < j_c {
        return Err(ModelError::BelowCriticalExchange { j, j_c });
    }
    Ok(dicke_critical_coupling(spec) * (1.0 - j / j_c).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_coupling_values() {
        let s = ModelSpec::dicke(8, 0.5).unwrap();
        assert_abs_diff_eq!(effective_single_coupling(&s), 0.5, epsilon = 1e-15);
        let s = ModelSpec::dicke(13, 0.0).unwrap();
        assert_eq!(effective_single_coupling(&s), 0.0);
        let s = ModelSpec::dicke(200, 0.25).unwrap();
        assert_abs_diff_eq!(effective_single_coupling(&s), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn critical_coupling_values() {
        let s = ModelSpec::dicke(4, 0.1).unwrap();
        assert_abs_diff_eq!(dicke_critical_coupling(&s), 0.5, epsilon = 1e-15);
        let s = ModelSpec::new(4, 4.0, 1.0, 0.1, Exchange::ZERO, Boundary::Open).unwrap();
        assert_abs_diff_eq!(dicke_critical_coupling(&s), 1.0, epsilon = 1e-15);
        let s = ModelSpec::new(4, 1.0, 1e-300, 0.1, Exchange::ZERO, Boundary::Open).unwrap();
        assert!(dicke_critical_coupling(&s) < 1e-149);
    }

    #[test]
    fn ising_boundary_values() {
        let s = ModelSpec::dicke(16, 0.0).unwrap();
        assert_abs_diff_eq!(ising_boundary(0.0, &s).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ising_boundary(-0.25, &s).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            ising_boundary(0.25, &s).unwrap(),
            0.5 * 2f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(matches!(
            ising_boundary(-0.3, &s),
            Err(ModelError::BelowCriticalExchange { .. })
        ));
    }

    #[test]
    fn presets_map_exchange() {
        assert!(ModelPreset::Dicke.exchange().is_zero());
        assert_eq!(
            ModelPreset::DickeIsing { j: 0.25 }.exchange(),
            Exchange::new(0.0, 0.0, 1.0)
        );
        assert_eq!(
            ModelPreset::DickeXxz { jz: -1.6 }.exchange(),
            Exchange::new(1.0, 1.0, -1.6)
        );
    }

    #[test]
    fn validation_rejects_bad_input() {
        assert_eq!(ModelSpec::dicke(0, 0.1), Err(ModelError::EmptyChain));
        assert!(matches!(ModelSpec::dicke(4, -0.1), Err(ModelError::NegativeCoupling(_))));
        assert!(ModelSpec::new(4, 0.0, 1.0, 0.1, Exchange::ZERO, Boundary::Open).is_err());
        assert!(ModelSpec::new(4, 1.0, -1.0, 0.1, Exchange::ZERO, Boundary::Open).is_err());
        assert!(ModelSpec::new(4, f64::NAN, 1.0, 0.1, Exchange::ZERO, Boundary::Open).is_err());
    }

    #[test]
    fn bonds_and_bulk_site() {
        let s = ModelSpec::dicke(8, 0.1).unwrap();
        assert_eq!(s.bonds().len(), 7);
        assert_eq!(s.bulk_site(), 1);
        let p = s.with_boundary(Boundary::Periodic);
        assert_eq!(p.bonds().len(), 8);
        assert_eq!(*p.bonds().last().unwrap(), (7, 0));
        assert_eq!(chain_bonds(2, Boundary::Periodic), vec![(0, 1)]);
        assert_eq!(chain_bonds(1, Boundary::Open), vec![]);
    }
}
