use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dicke_ngs::benchmark::{run_criterion, summary_table, BenchmarkOptions, CRITERIA};
use dicke_ngs::config::{AxisSpec, BranchPolicy, Detector, Param, SweepConfig, WORKERS_ENV};
use dicke_ngs::oracle::{full_ground_state_with_stagger, write_dump_file, FockTruncation};
use dicke_ngs::sweep::{run_point, run_scaling, run_sweep, SweepPlan};
use dicke_ngs::{Backend, Boundary, Config, PresetKind};

const EXIT_BENCHMARK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "dicke-ngs", version, about = "Ground states of Dicke, Dicke-Ising and Dicke-XXZ chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single parameter point.
    Point(RunArgs),
    /// Solve a one- or two-axis grid and trace the phase boundary.
    Sweep(RunArgs),
    /// Fit the photon-number exponent over a list of sizes.
    Scaling(RunArgs),
    /// Run the acceptance suite.
    Benchmark(BenchArgs),
    /// Exact diagonalisation of the full truncated problem.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Dicke,
    DickeIsing,
    DickeXxz,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Open,
    Periodic,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Dense,
    Collective,
    Mps,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Auto,
    Both,
    Normal,
    Superradiant,
    Seed,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorArg {
    Threshold,
    Scaling,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Ising constant of the dicke-ising preset.
    #[arg(long, allow_negative_numbers = true)]
    j: Option<f64>,
    #[arg(long = "Jx", allow_negative_numbers = true)]
    jx: Option<f64>,
    #[arg(long = "Jy", allow_negative_numbers = true)]
    jy: Option<f64>,
    #[arg(long = "Jz", allow_negative_numbers = true)]
    jz: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long)]
    bond_dim: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    stagger_field: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol_e: Option<f64>,
    #[arg(long)]
    tol_o: Option<f64>,
    #[arg(long, value_enum)]
    branches: Option<BranchArg>,
    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,
    /// Sweep axis `param:min:max:step`, repeatable (at most two).
    #[arg(long = "axis", value_parser = parse_axis, allow_hyphen_values = true)]
    axes: Vec<AxisSpec>,
    /// Comma-separated sizes for scaling fits.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Output file stem.
    #[arg(long)]
    name: Option<String>,
    /// Output directory, created when missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker-pool width.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Restrict to these criterion numbers.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
    /// Perturb the dressed field before the frame-equality check.
    #[arg(long, hide = true)]
    mutate_dressing: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 40)]
    n_max: usize,
    /// Write the ground-state vector to this binary file.
    #[arg(long)]
    dump: Option<PathBuf>,
}

fn parse_axis(s: &str) -> Result<AxisSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [p, min, max, step] = parts.as_slice() else {
        return Err(format!("expected param:min:max:step, got `{s}`"));
    };
    let param = match p.to_ascii_lowercase().as_str() {
        "g" => Param::G,
        "j" => Param::J,
        "jx" => Param::Jx,
        "jy" => Param::Jy,
        "jz" => Param::Jz,
        other => return Err(format!("unknown axis parameter `{other}`")),
    };
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(AxisSpec { param, min: num(min)?, max: num(max)?, step: num(step)? })
}

fn build_config(a: &RunArgs) -> Result<Config, String> {
    let mut c = match &a.config {
        Some(path) => Config::load(path).map_err(|e| e.to_string())?,
        None => Config::default(),
    };
    let m = &mut c.model;
    if let Some(p) = a.preset {
        m.preset = match p {
            PresetArg::Dicke => PresetKind::Dicke,
            PresetArg::DickeIsing => PresetKind::DickeIsing,
            PresetArg::DickeXxz => PresetKind::DickeXxz,
            PresetArg::Custom => PresetKind::Custom,
        };
    }
    macro_rules! set {
        ($($src:expr => $dst:expr),* $(,)?) => { $(if let Some(v) = $src { $dst = v; })* };
    }
    set!(a.n => m.n, a.g => m.g, a.j => m.j, a.jx => m.jx, a.jy => m.jy, a.jz => m.jz,
         a.omega => m.omega, a.epsilon => m.epsilon);
    if let Some(b) = a.boundary {
        m.boundary = match b {
            BoundaryArg::Open => Boundary::Open,
            BoundaryArg::Periodic => Boundary::Periodic,
        };
    }
    if let Some(b) = a.backend {
        c.solver.backend = match b {
            BackendArg::Dense => Backend::Dense,
            BackendArg::Collective => Backend::Collective,
            BackendArg::Mps => Backend::Mps,
        };
    }
    set!(a.bond_dim => c.solver.bond_dim, a.sweeps => c.solver.sweeps, a.stagger_field => c.solver.stagger_field,
         a.max_iter => c.scf.max_iter, a.tol_e => c.scf.tol_e, a.tol_o => c.scf.tol_o);
    if let Some(b) = a.branches {
        c.sweep.branches = match b {
            BranchArg::Auto => BranchPolicy::Auto,
            BranchArg::Both => BranchPolicy::Both,
            BranchArg::Normal => BranchPolicy::Normal,
            BranchArg::Superradiant => BranchPolicy::Superradiant,
            BranchArg::Seed => BranchPolicy::Seed,
        };
    }
    if let Some(d) = a.detector {
        c.sweep.detector = match d {
            DetectorArg::Threshold => Detector::Threshold,
            DetectorArg::Scaling => Detector::Scaling,
        };
    }
    if !a.axes.is_empty() {
        c.sweep.axes = a.axes.clone();
    }
    if !a.sizes.is_empty() {
        c.sweep.sizes = a.sizes.clone();
    }
    if let Some(name) = &a.name {
        c.sweep.name = name.clone();
    }
    if let Some(out) = &a.out {
        c.output.dir = out.clone();
    }
    if a.workers.is_some() {
        c.output.workers = a.workers;
    }
    Ok(c)
}

fn plan(a: &RunArgs, default_name: &str) -> Result<SweepPlan, ExitCode> {
    let mut cfg = build_config(a).map_err(|e| config_error(&e))?;
    if a.name.is_none() && cfg.sweep.name == SweepConfig::default().name {
        cfg.sweep.name = default_name.to_string();
    }
    SweepPlan::new(cfg).map_err(|e| config_error(&e.to_string()))
}

fn config_error(msg: &str) -> ExitCode {
    eprintln!("configuration error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Point(a) => {
            let plan = plan(&a, "point")?;
            let out = run_point(&plan).map_err(|e| {
                eprintln!("point failed: {e}");
                ExitCode::from(EXIT_CONVERGENCE)
            })?;
            let o = &out.result.observables;
            println!(
                "E0 = {:.12}  n/N = {:.6e}  Mz = {:.6}  phase = {}  branch = {}  converged = {} ({} iterations)",
                o.e0,
                o.n_mean,
                o.m_z,
                out.phase.phase.label(),
                out.result.selected.label(),
                out.result.converged(),
                out.result.report.iterations
            );
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            Ok(if out.result.converged() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CONVERGENCE) })
        }
        Command::Sweep(a) => {
            let plan = plan(&a, "sweep")?;
            finish_grid(run_sweep(&plan))
        }
        Command::Scaling(a) => {
            let plan = plan(&a, "scaling")?;
            finish_grid(run_scaling(&plan))
        }
        Command::Benchmark(b) => {
            let opts = BenchmarkOptions { mutate_dressing: b.mutate_dressing };
            let ids: Vec<u8> = if b.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { b.criteria };
            let mut results = Vec::new();
            for id in ids {
                let r = run_criterion(id, &opts);
                println!("{}", r.line());
                results.push(r);
            }
            let table = summary_table(&results);
            println!("{}", table.lines().last().unwrap_or_default());
            Ok(if results.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(EXIT_BENCHMARK) })
        }
        Command::Oracle(o) => {
            let cfg = build_config(&o.run).map_err(|e| config_error(&e))?;
            let spec = cfg.model.spec().map_err(|e| config_error(&e.to_string()))?;
            let res = full_ground_state_with_stagger(&spec, &FockTruncation::new(o.n_max), cfg.solver.stagger_field)
                .map_err(|e| {
                    eprintln!("oracle failed: {e}");
                    ExitCode::from(EXIT_CONVERGENCE)
                })?;
            let obs = res.state.observables();
            println!(
                "E = {:.12}  E0 = {:.12}  n/N = {:.6e}  Mz = {:.6}  cutoff margin = {:.2e}",
                res.energy,
                (res.energy - 0.5 * spec.omega) / spec.n as f64,
                obs.n_mean,
                obs.m_z,
                res.margin
            );
            if let Some(path) = o.dump {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| {
                        eprintln!("cannot create {}: {e}", dir.display());
                        ExitCode::from(EXIT_CONFIG)
                    })?;
                }
                write_dump_file(&res, &path).map_err(|e| {
                    eprintln!("cannot write dump: {e}");
                    ExitCode::from(EXIT_CONFIG)
                })?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn finish_grid(r: Result<dicke_ngs::sweep::SweepOutcome, dicke_ngs::SweepError>) -> Result<ExitCode, ExitCode> {
    let out = r.map_err(|e| {
        eprintln!("run failed: {e}");
        match e {
            dicke_ngs::SweepError::Config(_) => ExitCode::from(EXIT_CONFIG),
            _ => ExitCode::from(EXIT_CONVERGENCE),
        }
    })?;
    for p in &out.boundary.points {
        let line = match (out.boundary.other_axis, p.line_value) {
            (Some(a), Some(v)) => format!("{} = {v:.4}: ", a.name()),
            _ => String::new(),
        };
        println!(
            "boundary {line}{} = {:.4} ({} order, jump {:.3})",
            out.boundary.line_axis.name(),
            p.crossing,
            p.order.label(),
            p.max_jump
        );
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    let bad = out.rows.iter().filter(|r| r.status != dicke_ngs::sweep::PointStatus::Ok).count();
    if bad > 0 {
        eprintln!("{bad} of {} points did not converge or failed", out.rows.len());
        return Ok(ExitCode::from(EXIT_CONVERGENCE));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) | Err(code) => code,
    }
}
