//! Fixtures shared by the solver benchmarks.

use dicke_ngs::effective::{build_with_stagger, EffectiveCouplings};
use dicke_ngs::{Boundary, Exchange, ModelSpec, PhotonFrame};

/// Dressed XXZ couplings at a generic frame, so every term of `H_eff` is active.
pub fn xxz_couplings(n: usize) -> EffectiveCouplings {
    let spec = ModelSpec::new(n, 1.0, 1.0, 0.4, Exchange::new(1.0, 1.0, -1.6), Boundary::Open)
        .expect("benchmark parameters are valid");
    build_with_stagger(&spec, &PhotonFrame::new(0.8, 0.0, 0.1, -0.3), 1e-9)
}

/// Deterministic start vector of length `2^n`.
pub fn start_vector(n: usize) -> Vec<f64> {
    (0..1usize << n).map(|k| ((k * 2654435761) % 1000) as f64 / 1000.0 - 0.5).collect()
}
