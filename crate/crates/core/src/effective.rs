//! Photon-averaged spin Hamiltonian.
//!
//! For a frame `(Δ_x, Δ_p, r, λ)` the photon is integrated out analytically:
//!
//! ```text
//! H_eff = e_ph + h_x S^x + h_y S^y + h_z S^z + Σ_i (−1)^i (b_y s_i^y + b_z s_i^z)
//!       + k_xx (S^x)²
//!       − Σ_⟨ij⟩ [J̃_xx s^x s^x + J̃_yy s^y s^y + J̃_zz s^z s^z + J̃_yz (s^y s^z + s^z s^y)]
//! ```
//!
//! The staggered pair `(b_y, b_z)` is the dressed image of an optional
//! degeneracy-breaking field `h_s Σ_i (−1)^i s_i^z` added to the bare model.

use crate::frame::{DressingFactors, PhotonFrame};
use crate::model::{effective_single_coupling, Boundary, ModelSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCouplings {
    pub n: usize,
    pub boundary: Boundary,
    pub e_photon: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_z: f64,
    pub stagger_y: f64,
    pub stagger_z: f64,
    pub k_xx: f64,
    pub jt_xx: f64,
    pub jt_yy: f64,
    pub jt_zz: f64,
    pub jt_yz: f64,
}

/// Spin expectation values that fully determine `⟨φ|H_eff|φ⟩`.
///
/// Bond sums run over the chain bonds; `yz` is `Σ ⟨s_i^y s_j^z + s_i^z s_j^y⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpinMoments {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub sx2: f64,
    pub stag_y: f64,
    pub stag_z: f64,
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub yz: f64,
}

impl EffectiveCouplings {
    /// Bare spin couplings with no photon and no fields: useful for tests and
    /// for evaluating the spin chain alone.
    pub fn zero(n: usize, boundary: Boundary) -> Self {
        Self {
            n,
            boundary,
            e_photon: 0.0,
            h_x: 0.0,
            h_y: 0.0,
            h_z: 0.0,
            stagger_y: 0.0,
            stagger_z: 0.0,
            k_xx: 0.0,
            jt_xx: 0.0,
            jt_yy: 0.0,
            jt_zz: 0.0,
            jt_yz: 0.0,
        }
    }

    pub fn bonds(&self) -> Vec<(usize, usize)> {
        crate::model::chain_bonds(self.n, self.boundary)
    }

    /// True when every matrix element is real in the `s^z` basis.
    pub fn is_real(&self) -> bool {
        self.h_y == 0.0 && self.stagger_y == 0.0 && self.jt_yz == 0.0
    }

    pub fn has_exchange(&self) -> bool {
        self.jt_xx != 0.0 || self.jt_yy != 0.0 || self.jt_zz != 0.0 || self.jt_yz != 0.0
    }

    pub fn has_stagger(&self) -> bool {
        self.stagger_y != 0.0 || self.stagger_z != 0.0
    }

    pub fn energy(&self, m: &SpinMoments) -> f64 {
        self.e_photon
            + self.h_x * m.sx
            + self.h_y * m.sy
            + self.h_z * m.sz
            + self.stagger_y * m.stag_y
            + self.stagger_z * m.stag_z
            + self.k_xx * m.sx2
            - (self.jt_xx * m.xx + self.jt_yy * m.yy + self.jt_zz * m.zz + self.jt_yz * m.yz)
    }
}

pub fn build(spec: &ModelSpec, frame: &PhotonFrame) -> EffectiveCouplings {
    build_with_stagger(spec, frame, 0.0)
}

pub fn build_with_stagger(spec: &ModelSpec, frame: &PhotonFrame, stagger: f64) -> EffectiveCouplings {
    let gp = effective_single_coupling(spec);
    let m = frame.moments();
    let d = frame.dressing(spec);
    let lam = frame.lambda;
    let ex = spec.exchange;
    EffectiveCouplings {
        n: spec.n,
        boundary: spec.boundary,
        e_photon: 0.5 * spec.omega * (m.var_x + m.var_p + m.mean_x * m.mean_x + m.mean_p * m.mean_p),
        h_x: gp * m.mean_x * (1.0 + lam),
        h_y: spec.epsilon * d.s1,
        h_z: spec.epsilon * d.c1,
        stagger_y: stagger * d.s1,
        stagger_z: stagger * d.c1,
        k_xx: gp * gp / spec.omega * (lam + 0.5 * lam * lam),
        jt_xx: ex.x,
        jt_yy: 0.5 * ex.y * (1.0 + d.c2) + 0.5 * ex.z * (1.0 - d.c2),
        jt_zz: 0.5 * ex.z * (1.0 + d.c2) + 0.5 * ex.y * (1.0 - d.c2),
        jt_yz: 0.5 * (ex.z - ex.y) * d.s2,
    }
}

/// `⟨φ|H_eff(frame)|φ⟩` for a spin state summarised by its moments.
pub fn frame_energy(spec: &ModelSpec, frame: &PhotonFrame, stagger: f64, m: &SpinMoments) -> f64 {
    build_with_stagger(spec, frame, stagger).energy(m)
}

/// Analytic gradient of [`frame_energy`] with respect to
/// `(Δ_x, Δ_p, r, λ)` at fixed spin moments.
pub fn frame_gradient(spec: &ModelSpec, frame: &PhotonFrame, stagger: f64, m: &SpinMoments) -> [f64; 4] {
    let w = spec.omega;
    let gp = effective_single_coupling(spec);
    let kappa = gp / w;
    let mo = frame.moments();
    let DressingFactors { eta, c1, s1, c2, s2 } = frame.dressing(spec);
    let (mx, mp, vx, vp, lam) = (mo.mean_x, mo.mean_p, mo.var_x, mo.var_p, frame.lambda);
    let ex = spec.exchange;

    // E ⊃ c1·z1 + s1·y1 + c2·qc + s2·qs
    let z1 = spec.epsilon * m.sz + stagger * m.stag_z;
    let y1 = spec.epsilon * m.sy + stagger * m.stag_y;
    let qc = -0.5 * (ex.y - ex.z) * (m.yy - m.zz);
    let qs = -0.5 * (ex.z - ex.y) * m.yz;

    let amp1 = c1 * z1 + s1 * y1;
    let phase1 = -s1 * z1 + c1 * y1;
    let amp2 = c2 * qc + s2 * qs;
    let phase2 = -s2 * qc + c2 * qs;

    let d_mx = w * mx + gp * (1.0 + lam) * m.sx;
    let d_mp = w * mp + phase1 * eta + phase2 * 2.0 * eta;
    let d_r = w * (vx - vp) + amp1 * eta * eta * vp + amp2 * 4.0 * eta * eta * vp;
    let d_lam = gp * mx * m.sx + gp * gp / w * (1.0 + lam) * m.sx2 - amp1 * eta * vp * kappa
        + phase1 * mp * kappa
        - amp2 * 4.0 * eta * vp * kappa
        + phase2 * 2.0 * mp * kappa;
    [d_mx, d_mp, d_r, d_lam]
}

/// Central finite-difference gradient of [`frame_energy`].
pub fn frame_gradient_fd(
    spec: &ModelSpec,
    frame: &PhotonFrame,
    stagger: f64,
    m: &SpinMoments,
    h: f64,
) -> [f64; 4] {
    let base = frame.to_array();
    let mut out = [0.0; 4];
    for k in 0..4 {
        let mut up = base;
        let mut dn = base;
        up[k] += h;
        dn[k] -= h;
        let eu = frame_energy(spec, &PhotonFrame::from_array(up), stagger, m);
        let ed = frame_energy(spec, &PhotonFrame::from_array(dn), stagger, m);
        out[k] = (eu - ed) / (2.0 * h);
    }
    out
}

pub use crate::oracle::frame_equality_check;
