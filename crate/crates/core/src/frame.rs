//! Gaussian photon state and the spin-photon entangler.
//!
//! The photon is prepared as `U_GS|0⟩` with displacement `(Δ_x, Δ_p)` and a
//! single squeeze parameter `r` (`r > 0` widens `x` and narrows `p`). The
//! entangler is `U_λ = exp(−i η S^x p)` with `η = g'λ/ω`; it shifts
//! `x → x + η S^x` and rotates every spin about its x axis by the operator
//! angle `η p`.

use serde::{Deserialize, Serialize};

use crate::model::{effective_single_coupling, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhotonFrame {
    pub delta_x: f64,
    pub delta_p: f64,
    pub squeeze: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
}

/// Gaussian averages of the entangler rotation angle `ηp`:
/// `c1 = ⟨cos ηp⟩`, `s1 = ⟨sin ηp⟩`, `c2 = ⟨cos 2ηp⟩`, `s2 = ⟨sin 2ηp⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressingFactors {
    pub eta: f64,
    pub c1: f64,
    pub s1: f64,
    pub c2: f64,
    pub s2: f64,
}

impl DressingFactors {
    pub const IDENTITY: DressingFactors =
        DressingFactors { eta: 0.0, c1: 1.0, s1: 0.0, c2: 1.0, s2: 0.0 };
}

impl PhotonFrame {
    pub const IDENTITY: PhotonFrame =
        PhotonFrame { delta_x: 0.0, delta_p: 0.0, squeeze: 0.0, lambda: 0.0 };

    pub fn new(delta_x: f64, delta_p: f64, squeeze: f64, lambda: f64) -> Self {
        Self { delta_x, delta_p, squeeze, lambda }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.delta_x, self.delta_p, self.squeeze, self.lambda]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn max_abs_diff(&self, other: &PhotonFrame) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn moments(&self) -> Moments {
        Moments {
            mean_x: self.delta_x,
            mean_p: self.delta_p,
            var_x: (2.0 * self.squeeze).exp() / 2.0,
            var_p: (-2.0 * self.squeeze).exp() / 2.0,
        }
    }

    pub fn eta(&self, spec: &ModelSpec) -> f64 {
        effective_single_coupling(spec) * self.lambda / spec.omega
    }

    pub fn dressing(&self, spec: &ModelSpec) -> DressingFactors {
        dressing_for(self.eta(spec), self.delta_p, self.moments().var_p)
    }
}

/// Closed-form Gaussian characteristic function of `ηp`.
pub fn dressing_for(eta: f64, mean_p: f64, var_p: f64) -> DressingFactors {
    let a1 = (-0.5 * eta * eta * var_p).exp();
    let a2 = (-2.0 * eta * eta * var_p).exp();
    let (s1, c1) = (eta * mean_p).sin_cos();
    let (s2, c2) = (2.0 * eta * mean_p).sin_cos();
    DressingFactors { eta, c1: a1 * c1, s1: a1 * s1, c2: a2 * c2, s2: a2 * s2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Composite Simpson quadrature of `f(p)` against the normal density.
    fn gaussian_average(mean: f64, var: f64, f: impl Fn(f64) -> f64) -> f64 {
        let sd = var.sqrt();
        let (lo, hi) = (mean - 14.0 * sd, mean + 14.0 * sd);
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let p = lo + k as f64 * h;
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let rho = (-(p - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
            acc += w * rho * f(p);
        }
        acc * h / 3.0
    }

    #[test]
    fn vacuum_and_squeezed_moments() {
        let m = PhotonFrame::IDENTITY.moments();
        assert_eq!((m.mean_x, m.mean_p, m.var_x, m.var_p), (0.0, 0.0, 0.5, 0.5));

        let m = PhotonFrame::new(0.0, 0.0, 0.5, 0.0).moments();
        assert_abs_diff_eq!(m.var_x, 1.359_140_914_229_522_5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.var_p, 0.183_939_720_585_721_16, epsilon = 1e-12);

        let flipped = PhotonFrame::new(0.0, 0.0, -0.5, 0.0).moments();
        assert_abs_diff_eq!(flipped.var_x, m.var_p, epsilon = 1e-15);
        assert_abs_diff_eq!(flipped.var_p, m.var_x, epsilon = 1e-15);
    }

    #[test]
    fn dressing_identity_and_reference_points() {
        let spec = ModelSpec::dicke(8, 0.5).unwrap();
        let d = PhotonFrame::new(1.3, 0.4, 0.2, 0.0).dressing(&spec);
        assert_eq!((d.c1, d.s1, d.c2, d.s2), (1.0, 0.0, 1.0, 0.0));

        let d = dressing_for(1.0, 0.0, 0.5);
        assert_abs_diff_eq!(d.c1, 0.778_800_783_071_404_9, epsilon = 1e-12);
        assert_abs_diff_eq!(d.s1, 0.0, epsilon = 1e-15);

        let d = dressing_for(1.0, PI / 2.0, 0.5);
        assert_abs_diff_eq!(d.c1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.s1, 0.778_800_783_071_404_9, epsilon = 1e-12);
    }

    #[test]
    fn dressing_matches_quadrature_at_reference_points() {
        for &(eta, mp, vp) in &[(1.0, 0.0, 0.5), (1.0, PI / 2.0, 0.5), (0.7, -0.3, 0.2)] {
            let d = dressing_for(eta, mp, vp);
            assert_abs_diff_eq!(d.c1, gaussian_average(mp, vp, |p| (eta * p).cos()), epsilon = 1e-10);
            assert_abs_diff_eq!(d.s1, gaussian_average(mp, vp, |p| (eta * p).sin()), epsilon = 1e-10);
            assert_abs_diff_eq!(d.c2, gaussian_average(mp, vp, |p| (2.0 * eta * p).cos()), epsilon = 1e-10);
            assert_abs_diff_eq!(d.s2, gaussian_average(mp, vp, |p| (2.0 * eta * p).sin()), epsilon = 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn minimum_uncertainty(r in -2.0f64..2.0) {
            let m = PhotonFrame::new(0.0, 0.0, r, 0.0).moments();
            prop_assert!((m.var_x * m.var_p - 0.25).abs() < 1e-13);
        }

        #[test]
        fn dressing_amplitudes(eta in -3.0f64..3.0, mp in -3.0f64..3.0, r in -1.0f64..1.0) {
            let vp = (-2.0 * r).exp() / 2.0;
            let d = dressing_for(eta, mp, vp);
            prop_assert!((d.c1 * d.c1 + d.s1 * d.s1 - (-eta * eta * vp).exp()).abs() < 1e-13);
            prop_assert!((d.c2 * d.c2 + d.s2 * d.s2 - (-4.0 * eta * eta * vp).exp()).abs() < 1e-13);
        }

        #[test]
        fn dressing_matches_quadrature(eta in -2.0f64..2.0, mp in -2.0f64..2.0, r in -0.5f64..0.5) {
            let vp = (-2.0 * r).exp() / 2.0;
            let d = dressing_for(eta, mp, vp);
            prop_assert!((d.c1 - gaussian_average(mp, vp, |p| (eta * p).cos())).abs() < 1e-10);
            prop_assert!((d.s2 - gaussian_average(mp, vp, |p| (2.0 * eta * p).sin())).abs() < 1e-10);
        }
    }
}
