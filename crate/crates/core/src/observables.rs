//! Lab-frame observables, correlation analysis, finite-size scaling and
//! phase labels.
//!
//! The entangler is undone analytically: x-type spin operators are invariant,
//! `s^z → C1 s^z + S1 s^y` and
//! `s^z s^z → (1+C2)/2 s^z s^z + (1−C2)/2 s^y s^y + S2/2 (s^y s^z + s^z s^y)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::effective::SpinMoments;
use crate::frame::{DressingFactors, PhotonFrame};
use crate::model::ModelSpec;
use crate::spin::{Axis, Observable, SolverError, SpinState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("scaling fit needs at least {min} distinct sizes, got {got}")]
    TooFewSizes { got: usize, min: usize },
    #[error("scaling fit has {below} of {total} photon numbers below the floor {floor:e}")]
    PartiallyBelowFloor { below: usize, total: usize, floor: f64 },
    #[error("correlation table needs at least two distances")]
    TooFewDistances,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Total `⟨a†a⟩` of the NGS state.
pub fn photon_number(spec: &ModelSpec, frame: &PhotonFrame, m: &SpinMoments) -> f64 {
    let mo = frame.moments();
    let eta = frame.eta(spec);
    0.5 * (mo.var_x + mo.var_p - 1.0)
        + 0.5 * (mo.mean_x * mo.mean_x + mo.mean_p * mo.mean_p)
        + eta * mo.mean_x * m.sx
        + 0.5 * eta * eta * m.sx2
}

/// Lab-frame `Σ_i ⟨s_i^z⟩`.
pub fn lab_total_z(d: &DressingFactors, m: &SpinMoments) -> f64 {
    d.c1 * m.sz + d.s1 * m.sy
}

/// Lab-frame `⟨s_i^z s_j^z⟩` from transformed-frame pair expectations.
pub fn lab_zz(d: &DressingFactors, zz: f64, yy: f64, yz_sym: f64) -> f64 {
    0.5 * (1.0 + d.c2) * zz + 0.5 * (1.0 - d.c2) * yy + 0.5 * d.s2 * yz_sym
}

/// Correlations from the bulk reference site out to `r < N/2`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationTables {
    pub reference: usize,
    pub r: Vec<usize>,
    pub zz: Vec<f64>,
    /// `(−1)^r ⟨s_i^z s_{i+r}^z⟩`
    pub stag: Vec<f64>,
    pub xx: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub n: usize,
    pub energy: f64,
    /// `(E − ω/2)/N`
    pub e0: f64,
    /// `⟨n⟩/N`
    pub n_mean: f64,
    pub m_z: f64,
    pub abs_m_z: f64,
    pub correlations: CorrelationTables,
    /// Values at the largest tabulated distance; `None` when `N < 4`.
    pub zz_bulk: Option<f64>,
    pub stag_bulk: Option<f64>,
    pub xx_bulk: Option<f64>,
    pub stag_edge_sensitive: bool,
}

pub fn lab_frame_observables(
    spec: &ModelSpec,
    frame: &PhotonFrame,
    energy: f64,
    moments: &SpinMoments,
    state: &SpinState,
) -> Result<ObservableSet, ObservableError> {
    let n = spec.n;
    let d = frame.dressing(spec);
    let n_mean = photon_number(spec, frame, moments) / n as f64;
    let m_z = lab_total_z(&d, moments) / n as f64;

    let i = spec.bulk_site();
    let r: Vec<usize> = (1..n.div_ceil(2)).filter(|r| i + r < n).collect();
    let mut request = Vec::with_capacity(5 * r.len());
    for &dr in &r {
        let j = i + dr;
        request.extend([
            Observable::Pair { i, a: Axis::Z, j, b: Axis::Z },
            Observable::Pair { i, a: Axis::Y, j, b: Axis::Y },
            Observable::Pair { i, a: Axis::Y, j, b: Axis::Z },
            Observable::Pair { i, a: Axis::Z, j, b: Axis::Y },
            Observable::Pair { i, a: Axis::X, j, b: Axis::X },
        ]);
    }
    let values = state.expectations(&request)?;
    let norm2 = state.norm().powi(2);
    let mut zz = Vec::with_capacity(r.len());
    let mut stag = Vec::with_capacity(r.len());
    let mut xx = Vec::with_capacity(r.len());
    for (k, &dr) in r.iter().enumerate() {
        let v = &values[5 * k..5 * k + 5];
        let z = lab_zz(&d, v[0], v[1], v[2] + v[3]) / norm2;
        zz.push(z);
        stag.push(if dr % 2 == 0 { z } else { -z });
        xx.push(v[4] / norm2);
    }
    Ok(ObservableSet {
        n,
        energy,
        e0: (energy - 0.5 * spec.omega) / n as f64,
        n_mean,
        m_z,
        abs_m_z: m_z.abs(),
        zz_bulk: zz.last().copied(),
        stag_bulk: stag.last().copied(),
        xx_bulk: xx.last().copied(),
        correlations: CorrelationTables { reference: i, r, zz, stag, xx },
        stag_edge_sensitive: spec.staggered_is_edge_sensitive(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingClass {
    Normal,
    Sublinear,
    Superradiant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// `None` when every photon number sits below the numerical floor.
    pub alpha: Option<f64>,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    pub class: ScalingClass,
}

pub const SCALING_MIN_SIZES: usize = 4;
pub const PHOTON_FLOOR: f64 = 1e-12;

/// Classification band: `α ≥ 1 − band` is normal, `α ≤ band` superradiant.
pub const SCALING_BAND: f64 = 0.1;

pub fn scaling_class(alpha: f64) -> ScalingClass {
    if alpha >= 1.0 - SCALING_BAND {
        ScalingClass::Normal
    } else if alpha <= SCALING_BAND {
        ScalingClass::Superradiant
    } else {
        ScalingClass::Sublinear
    }
}

/// Least squares of `log(n/N)` against `log N`; `α = −slope`.
pub fn scaling_fit(points: &[(usize, f64)]) -> Result<ScalingFit, ObservableError> {
    let mut sizes: Vec<usize> = points.iter().map(|p| p.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < SCALING_MIN_SIZES {
        return Err(ObservableError::TooFewSizes { got: sizes.len(), min: SCALING_MIN_SIZES });
    }
    let below = points.iter().filter(|p| !(p.1 > PHOTON_FLOOR)).count();
    if below == points.len() {
        return Ok(ScalingFit { alpha: None, intercept: f64::NAN, r_squared: f64::NAN, points: 0, class: ScalingClass::Normal });
    }
    if below > 0 {
        return Err(ObservableError::PartiallyBelowFloor { below, total: points.len(), floor: PHOTON_FLOOR });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    let alpha = -slope;
    Ok(ScalingFit { alpha: Some(alpha), intercept, r_squared, points: points.len(), class: scaling_class(alpha) })
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, r²)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - a * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (a, b, r2)
}

fn residual_ss(xs: &[f64], ys: &[f64]) -> f64 {
    let (a, b, _) = linear_fit(xs, ys);
    xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    Exponential,
    PowerLaw,
    LongRange,
}

impl DecayClass {
    pub fn label(&self) -> &'static str {
        match self {
            DecayClass::Exponential => "exponential",
            DecayClass::PowerLaw => "power-law",
            DecayClass::LongRange => "long-range",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecayThresholds {
    /// `|c(r_max)|` above this counts as an ordered plateau candidate.
    pub long_range: f64,
    /// Largest relative drop of `|c|` over the far half of the table that
    /// still counts as a plateau.
    pub plateau_drop: f64,
    /// Below this many sites the classification is flagged low-confidence.
    pub min_sites: usize,
}

impl Default for DecayThresholds {
    fn default() -> Self {
        Self { long_range: 0.01, plateau_drop: 0.1, min_sites: 12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub class: DecayClass,
    pub low_confidence: bool,
    /// Residual sums of squares of `log|c|` against `r` and `log r`.
    pub exp_residual: f64,
    pub power_residual: f64,
    /// `1 − |c(r_max)| / |c(r_mid)|`
    pub far_drop: f64,
}

pub fn correlation_decay_classify(
    r: &[usize],
    corr: &[f64],
    n: usize,
    th: &DecayThresholds,
) -> Result<DecayFit, ObservableError> {
    let pts: Vec<(f64, f64)> =
        r.iter().zip(corr).filter(|(_, c)| c.abs() > 0.0).map(|(&r, c)| (r as f64, c.abs())).collect();
    if r.len() < 2 || pts.len() < 2 {
        return Err(ObservableError::TooFewDistances);
    }
    let last = corr[corr.len() - 1].abs();
    let mid = corr[(corr.len() - 1) / 2].abs();
    let far_drop = if mid > 0.0 { 1.0 - last / mid } else { 1.0 };
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let x_exp: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let x_pow: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let exp_residual = residual_ss(&x_exp, &ys);
    let power_residual = residual_ss(&x_pow, &ys);
    let class = if last > th.long_range && far_drop <= th.plateau_drop {
        DecayClass::LongRange
    } else if exp_residual < power_residual {
        DecayClass::Exponential
    } else {
        DecayClass::PowerLaw
    };
    Ok(DecayFit { class, low_confidence: n < th.min_sites, exp_residual, power_residual, far_drop })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "FM-NP")]
    FmNp,
    #[serde(rename = "AFM-NP")]
    AfmNp,
    #[serde(rename = "PM-SP")]
    PmSp,
    #[serde(rename = "XY-SP-coexistence")]
    Coexistence,
    #[serde(rename = "boundary")]
    Boundary,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::FmNp => "FM-NP",
            Phase::AfmNp => "AFM-NP",
            Phase::PmSp => "PM-SP",
            Phase::Coexistence => "XY-SP-coexistence",
            Phase::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseThresholds {
    /// `⟨n⟩/N` above this is superradiant.
    pub superradiant: f64,
    /// Distance to 1/4 within which a z correlator counts as ordered.
    pub order_tol: f64,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        Self { superradiant: 0.01, order_tol: 0.02 }
    }
}

/// Label plus the distance of the point to each class criterion (zero when
/// the criterion is met).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    pub d_fm: f64,
    pub d_afm: f64,
    pub d_sp: f64,
}

pub fn classify_phase(
    obs: &ObservableSet,
    scaling: Option<&ScalingFit>,
    xx_decay: Option<DecayClass>,
    th: &PhaseThresholds,
) -> PhaseLabel {
    let gap = |v: f64| if v.is_nan() { f64::INFINITY } else { ((0.25 - v).abs() - th.order_tol).max(0.0) };
    // Order must hold at the two largest distances, otherwise a Néel state
    // with even r_max would pass the ferromagnetic test.
    let far_gap = |table: &[f64], bulk: Option<f64>, f: fn(f64) -> f64| match table.len() {
        0 | 1 => gap(bulk.map(f).unwrap_or(f64::NAN)),
        k => gap(f(table[k - 1])).max(gap(f(table[k - 2]))),
    };
    let d_fm_order = far_gap(&obs.correlations.zz, obs.zz_bulk, |v| v);
    let d_afm_order = far_gap(&obs.correlations.stag, obs.stag_bulk, f64::abs);
    let sp_excess = obs.n_mean - th.superradiant;
    let d_normal = sp_excess.max(0.0);
    let d_sp = (-sp_excess).max(0.0);
    let label = |phase| PhaseLabel { phase, d_fm: d_fm_order + d_normal, d_afm: d_afm_order + d_normal, d_sp };

    let sublinear = scaling.is_some_and(|s| s.class == ScalingClass::Sublinear);
    if sublinear && xx_decay == Some(DecayClass::PowerLaw) {
        return label(Phase::Coexistence);
    }
    let z_ordered = d_fm_order == 0.0 || d_afm_order == 0.0;
    if obs.n_mean > th.superradiant && !z_ordered {
        return label(Phase::PmSp);
    }
    if obs.n_mean <= th.superradiant && d_fm_order == 0.0 {
        return label(Phase::FmNp);
    }
    if obs.n_mean <= th.superradiant && d_afm_order == 0.0 {
        return label(Phase::AfmNp);
    }
    label(Phase::Boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::build;
    use crate::model::{Boundary, Exchange};
    use crate::oracle::prepare_ngs;
    use crate::spin::{ground_state, SolverConfig};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_frame_is_bare_expectation() {
        let spec = ModelSpec::new(6, 1.0, 1.0, 0.0, Exchange::new(0.0, 0.0, 1.0), Boundary::Open).unwrap();
        let c = build(&spec, &PhotonFrame::IDENTITY);
        let (e, st) = ground_state(&c, &SolverConfig { stagger_field: 0.0, ..SolverConfig::dense() }, None).unwrap();
        let m = st.moments(&c);
        let obs = lab_frame_observables(&spec, &PhotonFrame::IDENTITY, e, &m, &st).unwrap();
        assert_eq!(obs.n_mean, 0.0);
        assert_abs_diff_eq!(obs.m_z, m.sz / 6.0, epsilon = 1e-15);
        let bare = st.expectations(&[Observable::Pair { i: 0, a: Axis::Z, j: 2, b: Axis::Z }]).unwrap()[0];
        assert_abs_diff_eq!(obs.correlations.zz[1], bare, epsilon = 1e-15);
        assert_eq!(obs.correlations.reference, 0);
        assert_eq!(obs.correlations.r, vec![1, 2]);
    }

    #[test]
    fn lab_values_match_explicit_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = ModelSpec::new(4, 1.0, 1.0, 0.45, Exchange::new(0.3, -0.4, 0.8), Boundary::Open).unwrap();
        for _ in 0..4 {
            let frame = PhotonFrame::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.4..0.4),
                rng.random_range(-1.2..0.5),
            );
            let c = build(&spec, &frame);
            let (e, st) = ground_state(&c, &SolverConfig { stagger_field: 0.0, ..SolverConfig::dense() }, None).unwrap();
            let m = st.moments(&c);
            let obs = lab_frame_observables(&spec, &frame, e, &m, &st).unwrap();
            let full = prepare_ngs(&spec, &frame, &st, 60).unwrap();
            let fo = full.observables();
            assert_abs_diff_eq!(obs.n_mean, fo.n_mean, epsilon = 1e-8);
            assert_abs_diff_eq!(obs.m_z, fo.m_z, epsilon = 1e-8);
            let i = obs.correlations.reference;
            for (k, &r) in obs.correlations.r.iter().enumerate() {
                let zz = full.spin_expect(&[(i, Axis::Z), (i + r, Axis::Z)]);
                let xx = full.spin_expect(&[(i, Axis::X), (i + r, Axis::X)]);
                assert_abs_diff_eq!(obs.correlations.zz[k], zz, epsilon = 1e-8);
                assert_abs_diff_eq!(obs.correlations.xx[k], xx, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn exact_power_law_scaling() {
        let pts: Vec<(usize, f64)> = (8..=20).step_by(2).map(|n| (n, 0.37 / n as f64)).collect();
        let fit = scaling_fit(&pts).unwrap();
        assert_abs_diff_eq!(fit.alpha.unwrap(), 1.0, epsilon = 1e-6);
        assert_eq!(fit.class, ScalingClass::Normal);
    }

    #[test]
    fn scaling_edge_cases() {
        assert!(matches!(scaling_fit(&[(8, 0.1), (10, 0.1), (12, 0.1)]), Err(ObservableError::TooFewSizes { .. })));
        let zero = scaling_fit(&[(8, 0.0), (10, 1e-14), (12, 0.0), (14, 0.0)]).unwrap();
        assert_eq!((zero.alpha, zero.class), (None, ScalingClass::Normal));
        let flat = scaling_fit(&[(8, 0.2), (10, 0.2), (12, 0.2), (14, 0.2)]).unwrap();
        assert_eq!(flat.class, ScalingClass::Superradiant);
        let sub: Vec<(usize, f64)> = [8, 12, 16, 20].iter().map(|&n| (n, (n as f64).powf(-0.5))).collect();
        assert_eq!(scaling_fit(&sub).unwrap().class, ScalingClass::Sublinear);
    }

    #[test]
    fn decay_classes_on_synthetic_tables() {
        let r: Vec<usize> = (1..10).collect();
        let th = DecayThresholds::default();
        let exp: Vec<f64> = r.iter().map(|&r| 0.25 * (-0.8 * r as f64).exp()).collect();
        let pow: Vec<f64> = r.iter().map(|&r| 0.2 * (r as f64).powf(-0.7)).collect();
        let flat: Vec<f64> = r.iter().map(|&r| 0.2 + 0.05 * (-(r as f64)).exp()).collect();
        assert_eq!(correlation_decay_classify(&r, &exp, 20, &th).unwrap().class, DecayClass::Exponential);
        assert_eq!(correlation_decay_classify(&r, &pow, 20, &th).unwrap().class, DecayClass::PowerLaw);
        assert_eq!(correlation_decay_classify(&r, &flat, 20, &th).unwrap().class, DecayClass::LongRange);
        assert!(correlation_decay_classify(&r[..5], &pow[..5], 10, &th).unwrap().low_confidence);
    }

    fn obs_with(n_mean: f64, zz: f64, stag: f64) -> ObservableSet {
        ObservableSet {
            n: 16,
            energy: 0.0,
            e0: 0.0,
            n_mean,
            m_z: 0.0,
            abs_m_z: 0.0,
            correlations: CorrelationTables::default(),
            zz_bulk: Some(zz),
            stag_bulk: Some(stag),
            xx_bulk: None,
            stag_edge_sensitive: false,
        }
    }

    #[test]
    fn phase_labels() {
        let th = PhaseThresholds::default();
        assert_eq!(classify_phase(&obs_with(0.0, 0.25, 0.25), None, None, &th).phase, Phase::FmNp);
        assert_eq!(classify_phase(&obs_with(0.0, -0.25, -0.25), None, None, &th).phase, Phase::AfmNp);
        assert_eq!(classify_phase(&obs_with(0.3, 0.01, -0.01), None, None, &th).phase, Phase::PmSp);
        let b = classify_phase(&obs_with(0.0, 0.1, -0.1), None, None, &th);
        assert_eq!(b.phase, Phase::Boundary);
        assert!(b.d_fm > 0.1 && b.d_afm > 0.1 && b.d_sp > 0.0);
        let fit = ScalingFit { alpha: Some(0.5), intercept: 0.0, r_squared: 1.0, points: 4, class: ScalingClass::Sublinear };
        let p = classify_phase(&obs_with(0.02, 0.0, 0.0), Some(&fit), Some(DecayClass::PowerLaw), &th);
        assert_eq!(p.phase, Phase::Coexistence);
    }

    proptest! {
        #[test]
        fn photon_number_is_non_negative(
            mx in -3.0..3.0f64, mp in -3.0..3.0f64, r in -1.0..1.0f64, lam in -2.0..1.0f64,
            sx in -2.0..2.0f64, spread in 0.0..1.0f64,
        ) {
            let spec = ModelSpec::dicke(4, 0.7).unwrap();
            // Any physical state has ⟨(S^x)²⟩ ≥ ⟨S^x⟩².
            let m = SpinMoments { sx, sx2: sx * sx + spread, ..Default::default() };
            let n = photon_number(&spec, &PhotonFrame::new(mx, mp, r, lam), &m);
            prop_assert!(n >= -1e-12);
        }
    }
}
