//! Self-consistent loop: alternate a frame update at fixed spin moments with
//! one warm-started inner ground-state solve.
//!
//! The frame update takes the exact minimiser in `Δ_x` and then a few damped
//! Newton steps on `(Δ_x, Δ_p, r, λ)` with an Armijo backtracking line search.
//! Neither half can raise the variational energy, so the outer history is
//! monotone.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::effective::{build_with_stagger, frame_energy, frame_gradient, frame_gradient_fd, SpinMoments};
use crate::frame::PhotonFrame;
use crate::model::{dicke_critical_coupling, effective_single_coupling, ModelError, ModelSpec};
use crate::observables::{lab_total_z, photon_number};
use crate::spin::{ground_state, Backend, SolverConfig, SolverError, SpinState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScfError {
    #[error("invalid SCF configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("energy rose from {from} to {to} at iteration {iteration}")]
    EnergyIncrease { iteration: usize, from: f64, to: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepControl {
    pub initial: f64,
    pub shrink: f64,
    pub grow: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { initial: 1.0, shrink: 0.5, grow: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeedStrategy {
    /// Identity frame, spin state from the bare couplings.
    #[default]
    Normal,
    /// Mean-field Dicke displacement with spins tilted toward −x.
    Superradiant,
    /// Explicit starting frame.
    Frame { frame: PhotonFrame },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Normal,
    Superradiant,
    Custom,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::Normal => "normal",
            Branch::Superradiant => "superradiant",
            Branch::Custom => "custom",
        }
    }
}

impl SeedStrategy {
    pub fn branch(&self) -> Branch {
        match self {
            SeedStrategy::Normal => Branch::Normal,
            SeedStrategy::Superradiant => Branch::Superradiant,
            SeedStrategy::Frame { .. } => Branch::Custom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GradientMode {
    #[default]
    Analytic,
    FiniteDifference { h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScfConfig {
    pub max_iter: usize,
    pub tol_e: f64,
    pub tol_o: f64,
    pub step: StepControl,
    pub seed: SeedStrategy,
    pub gradient: GradientMode,
    /// Newton steps on the frame per outer iteration.
    pub frame_steps: usize,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol_e: 1e-12,
            tol_o: 1e-8,
            step: StepControl::default(),
            seed: SeedStrategy::Normal,
            gradient: GradientMode::Analytic,
            frame_steps: 8,
        }
    }
}

impl ScfConfig {
    pub fn validate(&self) -> Result<(), ScfError> {
        let bad = |m: &str| Err(ScfError::InvalidConfig(m.to_string()));
        if !(self.tol_e > 0.0 && self.tol_o > 0.0) {
            return bad("tol_e and tol_o must be positive");
        }
        if !(self.step.shrink > 0.0 && self.step.shrink < 1.0) {
            return bad("step.shrink must lie in (0, 1)");
        }
        if !(self.step.grow > 1.0 && self.step.grow.is_finite()) {
            return bad("step.grow must exceed 1");
        }
        if !(self.step.initial > 0.0 && self.step.initial.is_finite()) {
            return bad("step.initial must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if let GradientMode::FiniteDifference { h } = self.gradient {
            if !(h > 0.0 && h.is_finite()) {
                return bad("finite-difference step must be positive");
            }
        }
        Ok(())
    }
}

/// One outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    pub squeeze: f64,
    pub lambda: f64,
    /// `⟨n⟩/N`
    pub n_mean: f64,
    /// Lab-frame magnetisation per particle.
    pub m_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfReport {
    pub converged: bool,
    pub iterations: usize,
    pub branch: Branch,
    pub energy: f64,
    pub n_mean: f64,
    pub m_z: f64,
    /// Final successive-iterate changes.
    pub last_delta_e: f64,
    pub last_delta_obs: f64,
    pub frame: PhotonFrame,
    pub spec: ModelSpec,
    pub scf: ScfConfig,
    pub solver: SolverConfig,
    pub history: Vec<IterationRecord>,
    #[serde(skip)]
    pub state: Option<SpinState>,
    #[serde(skip)]
    pub moments: SpinMoments,
}

impl ScfReport {
    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    pub fn from_toml(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }
}

struct Evaluator<'a> {
    spec: &'a ModelSpec,
    stagger: f64,
    mode: GradientMode,
}

impl Evaluator<'_> {
    fn energy(&self, f: &[f64; 4], m: &SpinMoments) -> f64 {
        frame_energy(self.spec, &PhotonFrame::from_array(*f), self.stagger, m)
    }

    fn gradient(&self, f: &[f64; 4], m: &SpinMoments) -> [f64; 4] {
        let frame = PhotonFrame::from_array(*f);
        match self.mode {
            GradientMode::Analytic => frame_gradient(self.spec, &frame, self.stagger, m),
            GradientMode::FiniteDifference { h } => frame_gradient_fd(self.spec, &frame, self.stagger, m, h),
        }
    }

    /// Central differences of the gradient, symmetrised.
    fn hessian(&self, f: &[f64; 4], m: &SpinMoments) -> Matrix4<f64> {
        let h = 1e-4;
        let mut out = Matrix4::zeros();
        for k in 0..4 {
            let (mut up, mut dn) = (*f, *f);
            up[k] += h;
            dn[k] -= h;
            let (gu, gd) = (self.gradient(&up, m), self.gradient(&dn, m));
            for i in 0..4 {
                out[(i, k)] = (gu[i] - gd[i]) / (2.0 * h);
            }
        }
        (out + out.transpose()) * 0.5
    }

    fn closed_form_x(&self, f: &mut [f64; 4], m: &SpinMoments) {
        let gp = effective_single_coupling(self.spec);
        f[0] = -gp * (1.0 + f[3]) * m.sx / self.spec.omega;
    }
}

/// Newton direction with the Hessian spectrum folded to be positive.
fn newton_direction(hess: &Matrix4<f64>, grad: &Vector4<f64>) -> Vector4<f64> {
    let eig = SymmetricEigen::new(*hess);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs())).max(1e-300);
    let floor = 1e-10 * scale;
    let mut d = Vector4::zeros();
    for k in 0..4 {
        let v = eig.eigenvectors.column(k);
        let l = eig.eigenvalues[k].abs().max(floor);
        d -= v * (v.dot(grad) / l);
    }
    d
}

/// Rounding allowance for energies of magnitude `e`.
fn ulp_slack(e: f64) -> f64 {
    64.0 * f64::EPSILON * e.abs().max(1.0)
}

/// Energy descent on the frame at fixed moments. Returns the new frame and
/// its energy, never above `e_start`.
///
/// With `lock_p` the energy is even in `Δ_p` and `Δ_p = 0` is kept exactly,
/// so that rounding noise cannot push a real problem onto the complex path.
fn frame_update(
    ev: &Evaluator,
    scf: &ScfConfig,
    start: &PhotonFrame,
    m: &SpinMoments,
    lock_p: bool,
    trust: &mut f64,
) -> (PhotonFrame, f64) {
    let mut f = start.to_array();
    let mut e = ev.energy(&f, m);
    let mut trial = f;
    ev.closed_form_x(&mut trial, m);
    let et = ev.energy(&trial, m);
    if et <= e {
        f = trial;
        e = et;
    }
    let cap = scf.step.initial.max(1.0);
    for _ in 0..scf.frame_steps {
        let mut g = Vector4::from(ev.gradient(&f, m));
        let mut hess = ev.hessian(&f, m);
        if lock_p {
            g[1] = 0.0;
            for k in 0..4 {
                hess[(1, k)] = 0.0;
                hess[(k, 1)] = 0.0;
            }
        }
        if g.amax() == 0.0 {
            break;
        }
        let mut d = newton_direction(&hess, &g);
        if lock_p {
            d[1] = 0.0;
        }
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            d = -g;
            slope = -g.norm_squared();
        }
        let mut t = *trust;
        let mut improved = false;
        while t > 1e-12 {
            let cand: [f64; 4] = std::array::from_fn(|k| f[k] + t * d[k]);
            let ec = ev.energy(&cand, m);
            // Within rounding of a flat minimum the step is still taken.
            if ec <= e + 1e-4 * t * slope + ulp_slack(e) {
                improved = ec < e;
                f = cand;
                e = e.min(ec);
                break;
            }
            t *= scf.step.shrink;
        }
        if !improved {
            break;
        }
        *trust = if t == *trust { (t * scf.step.grow).min(cap) } else { t };
    }
    (PhotonFrame::from_array(f), ev.energy(&f, m))
}

/// Inner residual target: loose while the outer loop is still moving, the
/// configured floor once it settles.
fn inner_tolerance(floor: f64, last_de: f64, last_dobs: f64) -> f64 {
    let loose = 1e-4f64.min(1e-2 * last_de.sqrt()).min(1e-2 * last_dobs);
    if loose.is_nan() {
        return 1e-4f64.max(floor);
    }
    loose.max(floor)
}

/// Starting frame and optional spin warm start for a seed.
pub fn seed_start(spec: &ModelSpec, seed: &SeedStrategy, backend: Backend) -> Result<(PhotonFrame, Option<SpinState>), ScfError> {
    Ok(match seed {
        SeedStrategy::Normal => (PhotonFrame::IDENTITY, None),
        SeedStrategy::Frame { frame } => (*frame, None),
        SeedStrategy::Superradiant => {
            let gp = effective_single_coupling(spec);
            let gc = dicke_critical_coupling(spec);
            let theta = if spec.g > gc {
                (spec.omega * spec.epsilon / (4.0 * spec.g * spec.g)).acos()
            } else {
                std::f64::consts::FRAC_PI_3
            };
            let mx = gp * spec.n as f64 / 2.0 * theta.sin() / spec.omega;
            let frame = PhotonFrame::new(mx, 0.0, 0.0, 0.0);
            let state = SpinState::product(spec.n, backend, std::f64::consts::PI - theta, std::f64::consts::PI)?;
            (frame, Some(state))
        }
    })
}

fn lab_values(spec: &ModelSpec, frame: &PhotonFrame, m: &SpinMoments) -> (f64, f64) {
    let n = spec.n as f64;
    (photon_number(spec, frame, m) / n, lab_total_z(&frame.dressing(spec), m) / n)
}

pub fn solve(spec: &ModelSpec, seed: &SeedStrategy, scf: &ScfConfig, solver: &SolverConfig) -> Result<ScfReport, ScfError> {
    spec.validate()?;
    scf.validate()?;
    solver.validate()?;
    // collective states carry no site index
    let stagger = if solver.backend == Backend::Collective { 0.0 } else { solver.stagger_field };
    let ev = Evaluator { spec, stagger, mode: scf.gradient };

    let (mut frame, warm) = seed_start(spec, seed, solver.backend)?;
    let c = build_with_stagger(spec, &frame, stagger);
    let (_, mut state) = ground_state(&c, solver, warm.as_ref())?;
    let mut m = state.moments(&c);
    let mut energy = c.energy(&m);
    let (mut n_mean, mut m_z) = lab_values(spec, &frame, &m);

    let mut history = Vec::new();
    let mut trust = scf.step.initial;
    let mut converged = false;
    let (mut last_de, mut last_dobs) = (f64::INFINITY, f64::INFINITY);
    let allowed = |e: f64| 10.0 * scf.tol_e + ulp_slack(e);

    for iteration in 1..=scf.max_iter {
        let lock_p = frame.delta_p == 0.0 && state.is_real();
        let (new_frame, e_frame) = frame_update(&ev, scf, &frame, &m, lock_p, &mut trust);
        if e_frame > energy + allowed(energy) {
            return Err(ScfError::EnergyIncrease { iteration, from: energy, to: e_frame });
        }
        let c = build_with_stagger(spec, &new_frame, stagger);
        let inner_tol = inner_tolerance(solver.lanczos_tol, last_de, last_dobs);
        let inner = SolverConfig { lanczos_tol: inner_tol, ..*solver };
        let (_, candidate) = ground_state(&c, &inner, Some(&state))?;
        let cm = candidate.moments(&c);
        let e_inner = c.energy(&cm);
        // Keep the previous state if the inner solver failed to improve on it.
        let (next_state, next_m, e_new) = if e_inner <= e_frame + ulp_slack(e_frame) {
            (candidate, cm, e_inner)
        } else {
            (state, m, e_frame)
        };
        if e_new > energy + allowed(energy) {
            return Err(ScfError::EnergyIncrease { iteration, from: energy, to: e_new });
        }
        let (nn, mz) = lab_values(spec, &new_frame, &next_m);
        last_de = (e_new - energy).abs();
        last_dobs = (nn - n_mean).abs().max((mz - m_z).abs()).max(new_frame.max_abs_diff(&frame));
        frame = new_frame;
        state = next_state;
        m = next_m;
        energy = e_new;
        n_mean = nn;
        m_z = mz;
        history.push(IterationRecord {
            iteration,
            energy,
            delta_x: frame.delta_x,
            delta_p: frame.delta_p,
            squeeze: frame.squeeze,
            lambda: frame.lambda,
            n_mean,
            m_z,
        });
        if last_de < scf.tol_e && last_dobs < scf.tol_o && inner_tol == solver.lanczos_tol {
            converged = true;
            break;
        }
    }

    if frame.delta_x < 0.0 {
        frame.delta_x = -frame.delta_x;
        frame.delta_p = -frame.delta_p;
        state.rotate_pi_z();
        let c = build_with_stagger(spec, &frame, stagger);
        m = state.moments(&c);
        energy = c.energy(&m);
        (n_mean, m_z) = lab_values(spec, &frame, &m);
    }

    Ok(ScfReport {
        converged,
        iterations: history.len(),
        branch: seed.branch(),
        energy,
        n_mean,
        m_z,
        last_delta_e: last_de,
        last_delta_obs: last_dobs,
        frame,
        spec: *spec,
        scf: ScfConfig { seed: *seed, ..*scf },
        solver: SolverConfig { stagger_field: stagger, ..*solver },
        history,
        state: Some(state),
        moments: m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBranchReport {
    pub normal: ScfReport,
    pub superradiant: ScfReport,
    pub selected: Branch,
}

impl TwoBranchReport {
    pub fn best(&self) -> &ScfReport {
        match self.selected {
            Branch::Superradiant => &self.superradiant,
            _ => &self.normal,
        }
    }

    pub fn into_best(self) -> ScfReport {
        match self.selected {
            Branch::Superradiant => self.superradiant,
            _ => self.normal,
        }
    }
}

/// Solve from the normal and the superradiant seed. Ties within the energy
/// tolerance go to the normal branch.
pub fn solve_two_branch(spec: &ModelSpec, scf: &ScfConfig, solver: &SolverConfig) -> Result<TwoBranchReport, ScfError> {
    let normal = solve(spec, &SeedStrategy::Normal, scf, solver)?;
    let superradiant = solve(spec, &SeedStrategy::Superradiant, scf, solver)?;
    let tie = 10.0 * scf.tol_e + ulp_slack(normal.energy);
    let selected = if superradiant.energy < normal.energy - tie { Branch::Superradiant } else { Branch::Normal };
    Ok(TwoBranchReport { normal, superradiant, selected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, Exchange, ModelPreset};
    use crate::oracle::{full_ground_state_with_stagger, FockTruncation};
    use approx::assert_abs_diff_eq;

    fn monotone(r: &ScfReport) -> bool {
        r.history.windows(2).all(|w| w[1].energy <= w[0].energy + 10.0 * r.scf.tol_e + ulp_slack(w[0].energy))
    }

    #[test]
    fn decoupled_limit_keeps_identity_frame() {
        let spec = ModelPreset::DickeIsing { j: 0.2 }.spec(8, 0.0).unwrap();
        let r = solve(&spec, &SeedStrategy::Normal, &ScfConfig::default(), &SolverConfig::dense()).unwrap();
        assert!(r.converged);
        assert!(r.frame.max_abs_diff(&PhotonFrame::IDENTITY) < 1e-8);
        let c = build_with_stagger(&spec, &PhotonFrame::IDENTITY, SolverConfig::dense().stagger_field);
        let (e, _) = ground_state(&c, &SolverConfig::dense(), None).unwrap();
        assert_abs_diff_eq!(r.energy, e, epsilon = 1e-10);
    }

    #[test]
    fn superradiant_dicke_energy() {
        let spec = ModelSpec::dicke(200, 1.0).unwrap();
        let r = solve(&spec, &SeedStrategy::Superradiant, &ScfConfig::default(), &SolverConfig::collective()).unwrap();
        assert!(r.converged, "{} iterations", r.iterations);
        assert!(monotone(&r));
        assert!(r.frame.delta_x > 0.0);
        assert_abs_diff_eq!((r.energy - 0.5) / 200.0, -1.0625, epsilon = 1e-3);
        assert_eq!(r.history.len(), r.iterations);
    }

    #[test]
    fn normal_phase_converges_tightly() {
        let spec = ModelSpec::dicke(200, 0.25).unwrap();
        let r = solve(&spec, &SeedStrategy::Normal, &ScfConfig::default(), &SolverConfig::collective()).unwrap();
        assert!(r.converged);
        assert!(r.last_delta_e < 1e-12 && r.last_delta_obs < 1e-8);
        assert!(r.n_mean < 0.01);
        assert_abs_diff_eq!(r.m_z, -0.5, epsilon = 1e-3);
    }

    #[test]
    fn variational_against_full_diagonalisation() {
        let solver = SolverConfig::dense();
        for (spec, n_max) in [
            (ModelSpec::dicke(4, 0.7).unwrap(), 40),
            (ModelSpec::new(4, 1.0, 1.0, 0.4, Exchange::new(0.0, 0.0, -2.0), Boundary::Open).unwrap(), 30),
        ] {
            let best = solve_two_branch(&spec, &ScfConfig::default(), &solver).unwrap().into_best();
            let exact = full_ground_state_with_stagger(&spec, &FockTruncation::new(n_max), solver.stagger_field).unwrap();
            assert!(best.energy >= exact.energy - 1e-10, "{} < {}", best.energy, exact.energy);
        }
    }

    #[test]
    fn finite_difference_mode_agrees() {
        let spec = ModelSpec::dicke(6, 0.8).unwrap();
        let solver = SolverConfig::dense();
        let a = solve(&spec, &SeedStrategy::Superradiant, &ScfConfig::default(), &solver).unwrap();
        let fd = ScfConfig { gradient: GradientMode::FiniteDifference { h: 1e-5 }, ..ScfConfig::default() };
        let b = solve(&spec, &SeedStrategy::Superradiant, &fd, &solver).unwrap();
        assert_abs_diff_eq!(a.energy, b.energy, epsilon = 1e-8);
    }

    #[test]
    fn report_round_trips_through_toml() {
        let spec = ModelSpec::dicke(4, 0.6).unwrap();
        let r = solve(&spec, &SeedStrategy::Superradiant, &ScfConfig { max_iter: 5, ..Default::default() }, &SolverConfig::dense())
            .unwrap();
        let text = r.to_toml().unwrap();
        let back = ScfReport::from_toml(&text).unwrap();
        assert_eq!(back.history, r.history);
        assert_eq!(back.frame, r.frame);
        assert_eq!(back.branch, Branch::Superradiant);
    }

    #[test]
    fn rejects_bad_config() {
        let spec = ModelSpec::dicke(4, 0.6).unwrap();
        let bad = ScfConfig { step: StepControl { shrink: 1.5, ..Default::default() }, ..Default::default() };
        assert!(matches!(solve(&spec, &SeedStrategy::Normal, &bad, &SolverConfig::dense()), Err(ScfError::InvalidConfig(_))));
    }
}
