//! Grid runner: single points, parameter sweeps and size-scaling studies.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{BranchPolicy, Config, ConfigError, Detector, ModelConfig, Param, Thresholds};
use crate::model::ModelSpec;
use crate::observables::{
    classify_phase, correlation_decay_classify, lab_frame_observables, scaling_fit, DecayFit, ObservableError,
    ObservableSet, PhaseLabel, ScalingFit, SCALING_MIN_SIZES,
};
use crate::scf::{solve, solve_two_branch, Branch, ScfConfig, ScfError, ScfReport, SeedStrategy};
use crate::spin::SolverConfig;

/// Fixed column set of every results table.
pub const COLUMNS: [&str; 15] = [
    "N", "g", "Jx", "Jy", "Jz", "E0", "n_mean", "Mz", "zz_bulk", "stag_bulk", "alpha", "xx_class", "phase", "branch",
    "status",
];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scf(#[from] ScfError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SweepError + '_ {
    move |source| SweepError::Io { path: path.to_path_buf(), source }
}

/// Validated run plan.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub config: Config,
}

impl SweepPlan {
    pub fn new(config: Config) -> Result<Self, SweepError> {
        config.validate()?;
        let plan = Self { config };
        if plan.config.sweep.detector == Detector::Scaling && plan.sizes().len() < SCALING_MIN_SIZES {
            return Err(ConfigError::Invalid(format!(
                "the scaling detector needs at least {SCALING_MIN_SIZES} distinct sizes"
            ))
            .into());
        }
        Ok(plan)
    }

    /// Sorted distinct sizes; the model size is always present.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = self.config.sweep.sizes.clone();
        s.push(self.config.model.n);
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Grid cells in row-major order of the axes (first axis slowest).
    pub fn cells(&self) -> Vec<ModelConfig> {
        let mut cells = vec![self.config.model];
        for axis in &self.config.sweep.axes {
            let vals = axis.values();
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    vals.iter().map(move |&v| {
                        let mut c = c;
                        c.set(axis.param, v);
                        c
                    })
                })
                .collect();
        }
        cells
    }

    fn pool(&self) -> Result<rayon::ThreadPool, SweepError> {
        let width = self.config.output.worker_count()?;
        rayon::ThreadPoolBuilder::new().num_threads(width).build().map_err(|e| SweepError::Pool(e.to_string()))
    }

    fn out_path(&self, suffix: &str) -> PathBuf {
        self.config.output.dir.join(format!("{}{suffix}", self.config.sweep.name))
    }
}

/// One solved grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub spec: ModelSpec,
    pub selected: Branch,
    /// Selected report; the spin state is dropped.
    pub report: ScfReport,
    /// Losing branch when two seeds were run.
    pub rival: Option<ScfReport>,
    pub observables: ObservableSet,
    pub xx_decay: Option<DecayFit>,
}

impl PointResult {
    pub fn converged(&self) -> bool {
        self.report.converged
    }

    /// Energies of the normal and superradiant branches when both ran.
    pub fn branch_energies(&self) -> Option<(f64, f64)> {
        let rival = self.rival.as_ref()?;
        match self.selected {
            Branch::Superradiant => Some((rival.energy, self.report.energy)),
            _ => Some((self.report.energy, rival.energy)),
        }
    }

    /// `⟨n⟩/N` of the normal and superradiant branches when both ran.
    pub fn branch_photons(&self) -> Option<(f64, f64)> {
        let rival = self.rival.as_ref()?;
        match self.selected {
            Branch::Superradiant => Some((rival.n_mean, self.report.n_mean)),
            _ => Some((self.report.n_mean, rival.n_mean)),
        }
    }
}

pub fn wants_both(policy: BranchPolicy, spec: &ModelSpec) -> bool {
    match policy {
        BranchPolicy::Both => true,
        BranchPolicy::Auto => spec.exchange.z < 0.0,
        _ => false,
    }
}

/// Solve one point under the branch policy and evaluate its observables.
pub fn solve_point(
    spec: &ModelSpec,
    policy: BranchPolicy,
    scf: &ScfConfig,
    solver: &SolverConfig,
    thresholds: &Thresholds,
) -> Result<PointResult, SweepError> {
    let (mut report, rival, selected) = if wants_both(policy, spec) {
        let two = solve_two_branch(spec, scf, solver)?;
        let selected = two.selected;
        let (best, other) = match selected {
            Branch::Superradiant => (two.superradiant, two.normal),
            _ => (two.normal, two.superradiant),
        };
        (best, Some(other), selected)
    } else {
        let seed = match policy {
            BranchPolicy::Normal => SeedStrategy::Normal,
            BranchPolicy::Seed => scf.seed,
            _ => SeedStrategy::Superradiant,
        };
        let r = solve(spec, &seed, scf, solver)?;
        let b = r.branch;
        (r, None, b)
    };
    let state = report.state.take().expect("solver returns a state");
    let observables = lab_frame_observables(spec, &report.frame, report.energy, &report.moments, &state)?;
    let c = &observables.correlations;
    let xx_decay = correlation_decay_classify(&c.r, &c.xx, spec.n, &thresholds.decay).ok();
    let rival = rival.map(|mut r| {
        r.state = None;
        r
    });
    Ok(PointResult { spec: *spec, selected, report, rival, observables, xx_decay })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Ok,
    NotConverged,
    Failed(String),
}

impl PointStatus {
    pub fn label(&self) -> String {
        match self {
            PointStatus::Ok => "ok".into(),
            PointStatus::NotConverged => "not-converged".into(),
            PointStatus::Failed(m) => format!("error: {m}"),
        }
    }
}

/// A point of the grid at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: usize,
    pub model: ModelConfig,
    pub result: Option<PointResult>,
    pub alpha: Option<f64>,
    pub phase: Option<PhaseLabel>,
    pub status: PointStatus,
}

impl SweepRow {
    pub fn n_mean(&self) -> Option<f64> {
        self.result.as_ref().map(|r| r.observables.n_mean)
    }

    pub fn m_z(&self) -> Option<f64> {
        self.result.as_ref().map(|r| r.observables.m_z)
    }
}

/// Finite-size exponent of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellScaling {
    pub cell: usize,
    pub model: ModelConfig,
    pub fit: Result<ScalingFit, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn label(&self) -> &'static str {
        match self {
            Order::First => "first",
            Order::Second => "second",
        }
    }
}

/// Normal/superradiant crossing along one line of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    /// Value of the other axis, if any.
    pub line_value: Option<f64>,
    /// Interpolated crossing on the line axis.
    pub crossing: f64,
    /// True when the line enters the superradiant side with increasing parameter.
    pub rising: bool,
    pub order: Order,
    /// Largest adjacent change of `M_z` or `⟨n⟩/N` around the crossing.
    pub max_jump: f64,
    /// The selected branch switches from the normal to a distinct
    /// superradiant solution around the crossing.
    pub branches_cross: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseBoundary {
    pub line_axis: Param,
    pub other_axis: Option<Param>,
    pub detector: Detector,
    pub points: Vec<BoundaryPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub scaling: Vec<CellScaling>,
    pub boundary: PhaseBoundary,
    pub files: Vec<PathBuf>,
}

impl SweepOutcome {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.status == PointStatus::Ok)
    }
}

/// Solve every `(cell, size)` pair of the plan in parallel; rows come back in
/// grid order regardless of the pool width.
pub fn compute_rows(plan: &SweepPlan) -> Result<(Vec<SweepRow>, Vec<CellScaling>), SweepError> {
    let cfg = &plan.config;
    let cells = plan.cells();
    let sizes = plan.sizes();
    let jobs: Vec<(usize, ModelConfig)> = cells
        .iter()
        .enumerate()
        .flat_map(|(k, c)| {
            sizes.iter().map(move |&n| {
                let mut m = *c;
                m.n = n;
                (k, m)
            })
        })
        .collect();
    let run = |&(cell, model): &(usize, ModelConfig)| {
        let outcome = model
            .spec()
            .map_err(|e| SweepError::Config(e.into()))
            .and_then(|spec| solve_point(&spec, cfg.sweep.branches, &cfg.scf, &cfg.solver, &cfg.thresholds));
        let (result, status) = match outcome {
            Ok(r) => {
                let s = if r.converged() { PointStatus::Ok } else { PointStatus::NotConverged };
                (Some(r), s)
            }
            Err(e) => (None, PointStatus::Failed(e.to_string())),
        };
        SweepRow { cell, model, result, alpha: None, phase: None, status }
    };
    let pool = plan.pool()?;
    let mut rows: Vec<SweepRow> = pool.install(|| jobs.par_iter().map(run).collect());

    let mut scaling = Vec::new();
    if sizes.len() >= SCALING_MIN_SIZES {
        for (k, c) in cells.iter().enumerate() {
            let pts: Result<Vec<(usize, f64)>, String> = rows
                .iter()
                .filter(|r| r.cell == k)
                .map(|r| r.n_mean().map(|v| (r.model.n, v)).ok_or_else(|| format!("N = {} failed", r.model.n)))
                .collect();
            let fit = pts.and_then(|p| scaling_fit(&p).map_err(|e| e.to_string()));
            scaling.push(CellScaling { cell: k, model: *c, fit });
        }
    }
    let phase_th = cfg.thresholds.phase();
    for row in &mut rows {
        let fit = scaling.get(row.cell).and_then(|s| s.fit.as_ref().ok());
        row.alpha = fit.and_then(|f| f.alpha);
        if let Some(r) = &row.result {
            row.phase = Some(classify_phase(&r.observables, fit, r.xx_decay.map(|d| d.class), &phase_th));
        }
    }
    Ok((rows, scaling))
}

/// Axis along which boundaries are traced: `g` when swept, else the first axis.
fn line_axes(cfg: &Config) -> (Param, Option<Param>) {
    let axes: Vec<Param> = cfg.sweep.axes.iter().map(|a| a.param).collect();
    match axes.as_slice() {
        [] => (Param::G, None),
        [a] => (*a, None),
        [a, b] if *b == Param::G => (Param::G, Some(*a)),
        [a, b] => (*a, Some(*b)),
        _ => unreachable!("at most two axes"),
    }
}

/// Trace boundary crossings on the rows of the model size.
pub fn extract_boundary(plan: &SweepPlan, rows: &[SweepRow], scaling: &[CellScaling]) -> PhaseBoundary {
    let cfg = &plan.config;
    let th = &cfg.thresholds;
    let (line_axis, other_axis) = line_axes(cfg);
    let detector = cfg.sweep.detector;
    let main: Vec<&SweepRow> = rows.iter().filter(|r| r.model.n == cfg.model.n).collect();

    let mut lines: Vec<(Option<f64>, Vec<&SweepRow>)> = Vec::new();
    for r in main {
        let key = other_axis.map(|p| r.model.get(p));
        match lines.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => lines.push((key, vec![r])),
        }
    }

    let mut points = Vec::new();
    for (line_value, mut line) in lines {
        line.sort_by(|a, b| a.model.get(line_axis).total_cmp(&b.model.get(line_axis)));
        // Indicator, oriented so that positive means superradiant.
        let indicator = |r: &SweepRow| -> Option<f64> {
            match detector {
                Detector::Threshold => r.n_mean().map(|n| n - th.superradiant),
                Detector::Scaling => match scaling.get(r.cell).map(|s| &s.fit) {
                    Some(Ok(f)) => Some(th.alpha_crossing - f.alpha.unwrap_or(1.0)),
                    _ => None,
                },
            }
        };
        let vals: Vec<Option<f64>> = line.iter().map(|r| indicator(r)).collect();
        for k in 0..line.len().saturating_sub(1) {
            let (Some(a), Some(b)) = (vals[k], vals[k + 1]) else { continue };
            if (a > 0.0) == (b > 0.0) {
                continue;
            }
            let (x0, x1) = (line[k].model.get(line_axis), line[k + 1].model.get(line_axis));
            let crossing = x0 + (x1 - x0) * a / (a - b);
            let lo = k.saturating_sub(1);
            let hi = (k + 2).min(line.len() - 1);
            let window = &line[lo..=hi];
            let max_jump = window
                .windows(2)
                .filter_map(|w| {
                    let dn = (w[1].n_mean()? - w[0].n_mean()?).abs();
                    let dm = (w[1].m_z()? - w[0].m_z()?).abs();
                    Some(dn.max(dm))
                })
                .fold(0.0, f64::max);
            let branches_cross = window.windows(2).any(|w| {
                let (Some(p), Some(q)) = (&w[0].result, &w[1].result) else { return false };
                let switched = (p.selected == Branch::Normal && q.selected == Branch::Superradiant)
                    || (p.selected == Branch::Superradiant && q.selected == Branch::Normal);
                let distinct = |r: &PointResult| r.branch_photons().is_some_and(|(a, b)| (a - b).abs() > th.jump);
                switched && (distinct(p) || distinct(q))
            });
            points.push(BoundaryPoint {
                line_value,
                crossing,
                rising: b > 0.0,
                order: if max_jump > th.jump { Order::First } else { Order::Second },
                max_jump,
                branches_cross,
            });
        }
    }
    PhaseBoundary { line_axis, other_axis, detector, points }
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Results table in the fixed column layout.
pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for row in rows {
        let spec_ex = row.model.exchange();
        let mut rec = vec![row.model.n.to_string(), num(row.model.g), num(spec_ex.x), num(spec_ex.y), num(spec_ex.z)];
        match &row.result {
            Some(r) => {
                let o = &r.observables;
                rec.extend([
                    num(o.e0),
                    num(o.n_mean),
                    num(o.m_z),
                    opt(o.zz_bulk),
                    opt(o.stag_bulk),
                    opt(row.alpha),
                    r.xx_decay.map(|d| d.class.label().to_string()).unwrap_or_default(),
                    row.phase.map(|p| p.phase.label().to_string()).unwrap_or_default(),
                    r.selected.label().to_string(),
                ]);
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 9)),
        }
        rec.push(row.status.label());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn boundary_csv(b: &PhaseBoundary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let other = b.other_axis.map(|p| p.name()).unwrap_or("line");
    w.write_record([other, b.line_axis.name(), "direction", "order", "max_jump", "branches_cross"])
        .expect("in-memory write");
    for p in &b.points {
        w.write_record([
            opt(p.line_value),
            num(p.crossing),
            if p.rising { "rising" } else { "falling" }.to_string(),
            p.order.label().to_string(),
            num(p.max_jump),
            p.branches_cross.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn scaling_csv(cells: &[CellScaling]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["g", "Jx", "Jy", "Jz", "alpha", "r_squared", "points", "class", "status"]).expect("in-memory write");
    for c in cells {
        let ex = c.model.exchange();
        let mut rec = vec![num(c.model.g), num(ex.x), num(ex.y), num(ex.z)];
        match &c.fit {
            Ok(f) => rec.extend([
                opt(f.alpha),
                if f.r_squared.is_nan() { String::new() } else { num(f.r_squared) },
                f.points.to_string(),
                format!("{:?}", f.class).to_lowercase(),
                "ok".into(),
            ]),
            Err(e) => rec.extend([String::new(), String::new(), String::new(), String::new(), format!("error: {e}")]),
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'a str,
    version: &'a str,
    kind: &'a str,
    columns: &'a [&'a str],
    files: Vec<String>,
    plan: &'a Config,
}

fn sidecar(plan: &SweepPlan, kind: &str, files: &[PathBuf]) -> String {
    let mut cfg = plan.config.clone();
    // Width does not change the results; keep the metadata identical across widths.
    cfg.output.workers = None;
    let meta = Sidecar {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        kind,
        columns: &COLUMNS,
        files: files.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
        plan: &cfg,
    };
    toml::to_string(&meta).expect("metadata is serialisable")
}

fn write_file(path: &Path, text: &str) -> Result<(), SweepError> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<(), SweepError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Run a grid sweep: results CSV, boundary CSV and metadata sidecar.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutcome, SweepError> {
    let (rows, scaling) = compute_rows(plan)?;
    let boundary = extract_boundary(plan, &rows, &scaling);
    ensure_dir(&plan.config.output.dir)?;
    let mut files = vec![plan.out_path(".csv"), plan.out_path(".boundary.csv")];
    write_file(&files[0], &rows_csv(&rows))?;
    write_file(&files[1], &boundary_csv(&boundary))?;
    if !scaling.is_empty() {
        files.push(plan.out_path(".alpha.csv"));
        write_file(&files[2], &scaling_csv(&scaling))?;
    }
    let meta = plan.out_path(".meta.toml");
    write_file(&meta, &sidecar(plan, "sweep", &files))?;
    files.push(meta);
    Ok(SweepOutcome { rows, scaling, boundary, files })
}

/// Run a size-scaling study: per-cell `α` table plus the per-size rows.
pub fn run_scaling(plan: &SweepPlan) -> Result<SweepOutcome, SweepError> {
    let sizes = plan.sizes();
    if sizes.len() < SCALING_MIN_SIZES {
        return Err(ConfigError::Invalid(format!(
            "a scaling study needs at least {SCALING_MIN_SIZES} distinct sizes, got {}",
            sizes.len()
        ))
        .into());
    }
    let (rows, scaling) = compute_rows(plan)?;
    let boundary = extract_boundary(plan, &rows, &scaling);
    ensure_dir(&plan.config.output.dir)?;
    let files = vec![plan.out_path(".alpha.csv"), plan.out_path(".csv")];
    write_file(&files[0], &scaling_csv(&scaling))?;
    write_file(&files[1], &rows_csv(&rows))?;
    let meta = plan.out_path(".meta.toml");
    let mut all = files.clone();
    write_file(&meta, &sidecar(plan, "scaling", &files))?;
    all.push(meta);
    Ok(SweepOutcome { rows, scaling, boundary, files: all })
}

#[derive(Serialize)]
struct PointFile<'a> {
    selected: Branch,
    phase: Option<PhaseLabel>,
    xx_decay: Option<DecayFit>,
    observables: &'a ObservableSet,
    report: &'a ScfReport,
    rival: Option<&'a ScfReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub result: PointResult,
    pub phase: PhaseLabel,
    pub files: Vec<PathBuf>,
}

/// Solve the model point of the plan and persist report and row, also when
/// the solve did not converge.
pub fn run_point(plan: &SweepPlan) -> Result<PointOutcome, SweepError> {
    let cfg = &plan.config;
    let spec = cfg.model.spec().map_err(ConfigError::from)?;
    let result = plan.pool()?.install(|| solve_point(&spec, cfg.sweep.branches, &cfg.scf, &cfg.solver, &cfg.thresholds))?;
    let phase = classify_phase(&result.observables, None, result.xx_decay.map(|d| d.class), &cfg.thresholds.phase());
    ensure_dir(&cfg.output.dir)?;
    let report_path = plan.out_path(".report.toml");
    let file = PointFile {
        selected: result.selected,
        phase: Some(phase),
        xx_decay: result.xx_decay,
        observables: &result.observables,
        report: &result.report,
        rival: result.rival.as_ref(),
    };
    let mut text = String::new();
    let _ = writeln!(text, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    text.push_str(&toml::to_string(&file).expect("report is serialisable"));
    write_file(&report_path, &text)?;
    let status = if result.converged() { PointStatus::Ok } else { PointStatus::NotConverged };
    let row = SweepRow { cell: 0, model: cfg.model, result: Some(result.clone()), alpha: None, phase: Some(phase), status };
    let csv_path = plan.out_path(".csv");
    write_file(&csv_path, &rows_csv(std::slice::from_ref(&row)))?;
    Ok(PointOutcome { result, phase, files: vec![report_path, csv_path] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AxisSpec, PresetKind};

    fn plan(axes: Vec<AxisSpec>) -> SweepPlan {
        let mut c = Config::default();
        c.model.preset = PresetKind::DickeIsing;
        c.model.n = 4;
        c.model.j = 0.1;
        c.sweep.axes = axes;
        SweepPlan::new(c).unwrap()
    }

    #[test]
    fn cells_are_row_major() {
        let p = plan(vec![
            AxisSpec { param: Param::J, min: 0.0, max: 0.1, step: 0.05 },
            AxisSpec { param: Param::G, min: 0.0, max: 0.2, step: 0.1 },
        ]);
        let c = p.cells();
        assert_eq!(c.len(), 9);
        assert_eq!((c[0].j, c[0].g), (0.0, 0.0));
        assert_eq!((c[1].j, c[1].g), (0.0, 0.1));
        assert_eq!((c[3].j, c[3].g), (0.05, 0.0));
        assert_eq!(line_axes(&p.config), (Param::G, Some(Param::J)));
    }

    #[test]
    fn sizes_include_model_size() {
        let mut p = plan(vec![]);
        p.config.sweep.sizes = vec![8, 4, 6];
        assert_eq!(p.sizes(), vec![4, 6, 8]);
    }

    #[test]
    fn scaling_detector_needs_sizes() {
        let mut c = plan(vec![]).config;
        c.sweep.detector = Detector::Scaling;
        c.sweep.sizes = vec![6, 8];
        assert!(matches!(SweepPlan::new(c), Err(SweepError::Config(_))));
    }

    #[test]
    fn auto_policy_runs_both_seeds_only_for_antiferro_z() {
        let mut m = ModelConfig { preset: PresetKind::DickeIsing, n: 4, j: -0.1, ..ModelConfig::default() };
        assert!(wants_both(BranchPolicy::Auto, &m.spec().unwrap()));
        m.j = 0.1;
        assert!(!wants_both(BranchPolicy::Auto, &m.spec().unwrap()));
        assert!(wants_both(BranchPolicy::Both, &m.spec().unwrap()));
    }

    #[test]
    fn csv_header_and_failed_row() {
        let row = SweepRow {
            cell: 0,
            model: ModelConfig::default(),
            result: None,
            alpha: None,
            phase: None,
            status: PointStatus::Failed("boom, bad".into()),
        };
        let text = rows_csv(&[row]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        let rec = lines.next().unwrap();
        assert!(rec.starts_with("8,0.000000000000e0,"));
        assert!(rec.ends_with("\"error: boom, bad\""));
    }
}
