//! Configuration-driven experiment runner.
//!
//! Exit codes: 0 all checks pass, 2 some check fails, 1 usage or config
//! error, 3 numerical failure (divergence, singular Gramian, ...).

mod config;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wave_observe::dynamics::{duhamel_all, energy, integrate, linear_propagate, Nonlinearity, TimeGrid, Trajectory, WaveSystem};
use wave_observe::experiments::{end_to_end_reconstruction, nonlinear_obs_ratio, nonlinearity_gain, Check, EndToEndSetup, ExperimentResult};
use wave_observe::observability::{assemble_gramian, gcc_time, BumpFunction, Gramian, ObservationSignal, ObservationWindow, Subspace};
use wave_observe::plate::{eigen_ucp_check, plate_weak_observability_constant, schrodinger_gramian, CutoffProfile};
use wave_observe::reconstruction::{
    determining_threshold, empirical_lipschitz, linear_reconstruct, solve_fixed_point, threshold_bound, FixedPointData, FixedPointReport,
    ReconstructionConfig, LIPSCHITZ_SAMPLES,
};
use wave_observe::sampling::{random_state, rng};
use wave_observe::spectral::{norm_x_sigma, project_high, project_low, SpectralGrid, State};
use wave_observe::suite::{result_csv, run_suite, suite_csv, summary_line};
use wave_observe::Error;

use config::{ConfigError, RunConfig};

const DEFAULT_SEED: u64 = 42;
const THREADS_VAR: &str = "WAVE_OBSERVE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "wave-observe", version, about = "Spectral observability and reconstruction experiments for the 1D semilinear wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination (overrides the `output` key; stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the `seed` key)
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Integrate random initial data and record energy and norms
    Simulate,
    /// Assemble the observability Gramian
    Gramian,
    /// Ray-traced geometric control time of the window
    GccTime,
    /// Linear reconstruction round trip
    ReconstructLinear,
    /// Picard reconstruction of the high frequencies of a forward solution
    ReconstructFixedPoint,
    /// Determining-mode threshold sweep
    DeterminingModes,
    /// Schroedinger to plate observability transfer
    PlateTransfer,
    /// Monte-Carlo nonlinear observability ratio
    ObsRatio,
    /// Smoothing gain and Lipschitz estimate of the nonlinearity
    GainCheck,
    /// Reconstruction from a windowed stationary solution
    EndToEnd,
    /// Every acceptance experiment
    Suite,
}

enum Failure {
    Usage(String),
    Numeric { error: Error, report: Option<ExperimentResult> },
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        match error {
            Error::InvalidParameter(_) | Error::IndexOutOfRange { .. } | Error::CutoffOutOfRange { .. } | Error::SizeMismatch { .. } | Error::GridMismatch(_) => {
                Failure::Usage(error.to_string())
            }
            _ => Failure::Numeric { error, report: None },
        }
    }
}

type Outcome = Result<Output, Failure>;

/// CSV body plus the result it was rendered from.
struct Output {
    csv: String,
    results: Vec<ExperimentResult>,
}

impl Output {
    fn single(r: ExperimentResult) -> Self {
        Self { csv: result_csv(&r), results: vec![r] }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let cfg = match load_config(cli.config.as_ref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let out = cli.out.clone().or_else(|| cfg.raw("output").map(PathBuf::from));
    let seed = match cli.seed.map_or_else(|| cfg.u64_or("seed", DEFAULT_SEED), Ok) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command, &cfg, seed) {
        Ok(output) => {
            if let Err(msg) = emit(&output.csv, out.as_ref()) {
                eprintln!("error: {msg}");
                return ExitCode::from(1);
            }
            let pass = output.results.iter().all(ExperimentResult::verdict);
            for r in &output.results {
                eprintln!("{}", summary_line(r));
            }
            if output.results.len() > 1 {
                let passed = output.results.iter().filter(|r| r.verdict()).count();
                eprintln!("suite: {passed}/{} experiments pass", output.results.len());
            }
            ExitCode::from(if pass { 0 } else { 2 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric { error, report }) => {
            if let Some(r) = report {
                if let Err(msg) = emit(&result_csv(&r), out.as_ref()) {
                    eprintln!("error: {msg}");
                }
                eprintln!("{}", summary_line(&r));
            }
            eprintln!("numerical failure: {error}");
            ExitCode::from(3)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("{THREADS_VAR} must be a positive integer, got '{raw}'"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be a positive integer, got '{raw}'"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, String> {
    let Some(p) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
    RunConfig::parse(&text).map_err(|e| e.to_string())
}

fn emit(csv: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, csv).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn dispatch(cmd: Command, cfg: &RunConfig, seed: u64) -> Outcome {
    match cmd {
        Command::Simulate => simulate(cfg, seed),
        Command::Gramian => gramian(cfg),
        Command::GccTime => gcc(cfg),
        Command::ReconstructLinear => reconstruct_linear(cfg, seed),
        Command::ReconstructFixedPoint => reconstruct_fixed_point(cfg, seed),
        Command::DeterminingModes => determining_modes(cfg, seed),
        Command::PlateTransfer => plate_transfer(cfg),
        Command::ObsRatio => obs_ratio(cfg, seed),
        Command::GainCheck => gain_check(cfg, seed),
        Command::EndToEnd => end_to_end(cfg),
        Command::Suite => {
            let results = run_suite(seed)?;
            Ok(Output { csv: suite_csv(&results), results })
        }
    }
}

// ---- shared config readers ----

fn grid(cfg: &RunConfig) -> Result<SpectralGrid, Failure> {
    let length = cfg.f64_or("L", PI)?;
    let n = cfg.usize_req("N")?;
    let beta = cfg.f64_or("beta", 0.0)?;
    Ok(match cfg.has("quad_points") {
        true => SpectralGrid::with_quad_points(length, n, cfg.usize_req("quad_points")?, beta)?,
        false => SpectralGrid::new(length, n, beta)?,
    })
}

fn time_grid(cfg: &RunConfig) -> Result<TimeGrid, Failure> {
    let t = cfg.f64_req("T")?;
    let m = cfg.usize_req("M")?;
    Ok(TimeGrid::new(t, m)?)
}

fn window(cfg: &RunConfig, default_margin: f64) -> Result<ObservationWindow, Failure> {
    let length = cfg.f64_or("L", PI)?;
    let intervals = cfg.intervals_or("omega", &[(0.5, 1.5)])?;
    Ok(ObservationWindow::new(intervals, cfg.f64_or("plateau_margin", default_margin)?, length)?)
}

/// `bump = window` (default) or `bump = one` for b = 1.
fn bump(cfg: &RunConfig, grid: &SpectralGrid, default_margin: f64) -> Result<BumpFunction, Failure> {
    match cfg.raw("bump").unwrap_or("window") {
        "window" => Ok(BumpFunction::from_window(&window(cfg, default_margin)?, grid)),
        "one" => Ok(BumpFunction::constant(grid, 1.0)?),
        other => Err(Failure::Usage(format!("invalid value for 'bump': expected window or one, got '{other}'"))),
    }
}

/// `f = c1,c2,c3,...` for f(u) = c1 u + c2 u^2 + c3 u^3 + ...
fn nonlinearity(cfg: &RunConfig, default: &[f64]) -> Result<Nonlinearity, Failure> {
    Ok(Nonlinearity::new(cfg.list_or("f", default)?)?)
}

fn sigma(cfg: &RunConfig, default: f64) -> Result<f64, Failure> {
    let s = cfg.f64_or("sigma", default)?;
    if !(s >= 0.0 && s <= 1.0) {
        return Err(Failure::Usage(format!("invalid value for 'sigma': must lie in [0,1], got {s}")));
    }
    Ok(s)
}

fn cutoff(cfg: &RunConfig, grid: &SpectralGrid) -> Result<usize, Failure> {
    let n = cfg.usize_req("n")?;
    if n == 0 || n >= grid.n() {
        return Err(Failure::Usage(format!("invalid value for 'n': must lie in 1..{}, got {n}", grid.n())));
    }
    Ok(n)
}

fn observable(g: &Gramian) -> Result<(), Failure> {
    g.check_observable().map_err(Failure::from)
}

// ---- subcommands ----

fn simulate(cfg: &RunConfig, seed: u64) -> Outcome {
    let grid = grid(cfg)?;
    let tg = time_grid(cfg)?;
    let sigma = sigma(cfg, 0.6)?;
    let amplitude = cfg.f64_or("amplitude", cfg.f64_or("R0", 0.5)?)?;
    let system = WaveSystem::uniform(grid.clone(), nonlinearity(cfg, &[0.0, 0.0, 1.0])?);
    let u0 = random_state(&grid, sigma, amplitude, 0, &mut rng(seed));
    let traj = integrate(&u0, &system, &tg)?;
    let energies: Vec<f64> = traj.states.iter().map(|s| energy(s, &system)).collect();
    let e0 = energies[0];
    let drift = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.abs().max(f64::MIN_POSITIVE);
    let mut r = ExperimentResult::new("simulate");
    r.scalar("seed", seed as f64)
        .scalar("initial_norm", norm_x_sigma(&u0, &grid, sigma))
        .scalar("sup_norm", traj.sup_norm(&grid, sigma))
        .scalar("relative_energy_drift", drift)
        .series("t", tg.times())
        .series("energy", energies)
        .series("norm", traj.states.iter().map(|s| norm_x_sigma(s, &grid, sigma)).collect())
        .check(Check::below("relative_energy_drift", drift, 1e-3));
    Ok(Output::single(r))
}

fn gramian(cfg: &RunConfig) -> Outcome {
    let grid = grid(cfg)?;
    let tg = time_grid(cfg)?;
    let sigma = sigma(cfg, 0.0)?;
    let subspace = match cfg.usize_or("n", 0)? {
        0 => Subspace::Full,
        n => Subspace::High(n),
    };
    let bump = bump(cfg, &grid, 0.2)?;
    let g = assemble_gramian(&grid, &bump, &tg, sigma, subspace)?;
    observable(&g)?;
    let d = g.dim();
    let mut eig: Vec<f64> = g.eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let offdiag = (0..d).flat_map(|a| (0..d).filter(move |&b| b != a).map(move |b| (a, b))).map(|(a, b)| g.matrix[(a, b)].abs()).fold(0.0, f64::max);
    let mut r = ExperimentResult::new("gramian");
    r.scalar("lambda_min", g.lambda_min)
        .scalar("lambda_max", g.lambda_max)
        .scalar("obs_constant", g.obs_constant().unwrap_or(f64::INFINITY))
        .scalar("max_offdiag", offdiag)
        .series("index", (0..d).map(|a| a as f64).collect())
        .series("diagonal", (0..d).map(|a| g.matrix[(a, a)]).collect())
        .series("eigenvalue", eig)
        .check(Check::above("lambda_min", g.lambda_min, 0.0));
    Ok(Output::single(r))
}

fn gcc(cfg: &RunConfig) -> Outcome {
    let length = cfg.f64_or("L", PI)?;
    let w = window(cfg, 0.2)?;
    let t = gcc_time(&w, length)?;
    let mut r = ExperimentResult::new("gcc_time");
    r.scalar("gcc_time", t);
    if cfg.has("T") {
        let horizon = cfg.f64_req("T")?;
        r.scalar("T", horizon).check(Check::below("gcc_time_below_T", t, horizon));
    }
    Ok(Output::single(r))
}

fn reconstruct_linear(cfg: &RunConfig, seed: u64) -> Outcome {
    let grid = grid(cfg)?;
    let tg = time_grid(cfg)?;
    let sigma = sigma(cfg, 0.6)?;
    let n = cutoff(cfg, &grid)?;
    let bump = bump(cfg, &grid, 0.2)?;
    let gramian = assemble_gramian(&grid, &bump, &tg, sigma, Subspace::High(n))?;
    observable(&gramian)?;
    let config = ReconstructionConfig::new(n, sigma, cfg.f64_or("epsilon", 0.4)?, cfg.f64_or("R0", 0.5)?, &gramian)?;
    let mut r = rng(seed);
    let w0 = random_state(&grid, sigma, 1.0, n, &mut r);
    let a = random_state(&grid, sigma, 1.0, 0, &mut r);
    let b = random_state(&grid, sigma, 1.0, 0, &mut r);
    let h: Vec<State> = tg
        .times()
        .iter()
        .map(|t| {
            let mut s = a.scaled(t.cos());
            s.axpy((2.0 * t).sin(), &b);
            s
        })
        .collect();
    let qh: Vec<State> = h.iter().map(|s| project_high(s, n)).collect::<Result<_, _>>()?;
    let duh = duhamel_all(&qh, &tg, &grid)?;
    let truth: Vec<State> = duh.iter().enumerate().map(|(m, d)| &linear_propagate(&w0, tg.time(m), &grid) + d).collect();
    let g = ObservationSignal::record(&truth, tg, gramian.observation_matrix())?;
    let w = linear_reconstruct(&g, &h, &config, &gramian)?;
    let truth = Trajectory::new(tg, truth)?;
    let errors: Vec<f64> = w.states.iter().zip(&truth.states).map(|(a, b)| norm_x_sigma(&(a - b), &grid, sigma)).collect();
    let rel = errors.iter().copied().fold(0.0, f64::max) / truth.sup_norm(&grid, sigma);
    let mut res = ExperimentResult::new("reconstruct_linear");
    res.scalar("seed", seed as f64)
        .scalar("lambda_min", gramian.lambda_min)
        .scalar("sup_relative_error", rel)
        .series("t", tg.times())
        .series("error", errors)
        .check(Check::below("sup_relative_error", rel, 1e-8));
    Ok(Output::single(res))
}

fn report_result(name: &str, rep: &FixedPointReport) -> ExperimentResult {
    let mut r = ExperimentResult::new(name);
    r.scalar("converged", if rep.converged { 1.0 } else { 0.0 })
        .scalar("iterations", rep.iterations as f64)
        .scalar("contraction_estimate", rep.contraction_estimate)
        .scalar("threshold_bound", rep.threshold_bound)
        .scalar("lipschitz", rep.lipschitz)
        .scalar("signal_norm", rep.signal_norm)
        .series("iteration", (1..=rep.residuals.len()).map(|k| k as f64).collect())
        .series("residual", rep.residuals.clone())
        .check(Check::above("converged", if rep.converged { 1.0 } else { 0.0 }, 0.5));
    r
}

fn fixed_point_failure(name: &str, n: usize, error: Error) -> Failure {
    let report = match &error {
        Error::Diverged(rep) | Error::MaxIterExceeded(rep) => Some(report_result(name, rep)),
        Error::BallViolation { norm, radius, node } => {
            let mut r = ExperimentResult::new(name);
            r.scalar("n", n as f64)
                .scalar("ball_norm", *norm)
                .scalar("ball_radius", *radius)
                .scalar("node", *node as f64)
                .check(Check::above("converged", 0.0, 0.5));
            Some(r)
        }
        _ => None,
    };
    match Failure::from(error) {
        Failure::Numeric { error, .. } => Failure::Numeric { error, report },
        usage => usage,
    }
}

fn reconstruct_fixed_point(cfg: &RunConfig, seed: u64) -> Outcome {
    let grid = grid(cfg)?;
    let tg = time_grid(cfg)?;
    let sigma = sigma(cfg, 0.6)?;
    let n = cutoff(cfg, &grid)?;
    let r0 = cfg.f64_or("R0", 0.5)?;
    let amplitude = cfg.f64_or("amplitude", r0)?;
    let system = WaveSystem::uniform(grid.clone(), nonlinearity(cfg, &[0.0, 0.0, 1.0])?);
    let bump = bump(cfg, &grid, 0.2)?;
    let gramian = assemble_gramian(&grid, &bump, &tg, sigma, Subspace::High(n))?;
    observable(&gramian)?;
    let mut config = ReconstructionConfig::new(n, sigma, cfg.f64_or("epsilon", 0.4)?, r0, &gramian)?;
    config.eta = cfg.f64_or("eta", config.eta)?;
    config.fp_tol = cfg.f64_or("fp_tol", config.fp_tol)?;
    config.max_iter = cfg.usize_or("max_iter", config.max_iter)?;
    config.seed = seed;
    config.validate()?;

    let u0 = random_state(&grid, sigma, amplitude, 0, &mut rng(seed));
    let traj = integrate(&u0, &system, &tg)?;
    let v: Vec<State> = traj.states.iter().map(|s| project_low(s, n)).collect::<Result<_, _>>()?;
    let q: Vec<State> = traj.states.iter().map(|s| project_high(s, n)).collect::<Result<_, _>>()?;
    let g = ObservationSignal::record(&q, tg, gramian.observation_matrix())?;
    let zeros = vec![State::zeros(grid.n()); tg.m + 1];
    let data = FixedPointData { v: &v, h1: &zeros, h2: &zeros, g: &g };
    let name = "reconstruct_fixed_point";
    let (w, rep) = solve_fixed_point(data, &config, &gramian, &system).map_err(|e| fixed_point_failure(name, n, e))?;
    let truth = Trajectory::new(tg, q)?;
    let err = w.sup_distance(&truth, &grid, sigma) / truth.sup_norm(&grid, sigma);
    let mut r = report_result(name, &rep);
    r.scalar("n", n as f64)
        .scalar("seed", seed as f64)
        .scalar("sup_relative_error", err)
        .check(Check::below("sup_relative_error", err, 1e-6))
        .check(Check::below("contraction_over_bound", rep.contraction_estimate / rep.threshold_bound, 1.2 + 1e-15));
    Ok(Output::single(r))
}

fn determining_modes(cfg: &RunConfig, seed: u64) -> Outcome {
    let grid = grid(cfg)?;
    let t = cfg.f64_req("T")?;
    let epsilon = cfg.f64_or("epsilon", 1.0)?;
    let c = match cfg.has("C") {
        true => cfg.f64_req("C")?,
        false => {
            let system = WaveSystem::uniform(grid.clone(), nonlinearity(cfg, &[0.0, 0.0, 1.0])?);
            let r0 = cfg.f64_or("R0", 0.5)?;
            let samples = cfg.usize_or("samples", LIPSCHITZ_SAMPLES)?;
            empirical_lipschitz(&system, sigma(cfg, 0.6)?, epsilon, 3.0 * r0, samples, seed)
        }
    };
    let th = determining_threshold(c, t, epsilon, &grid)?;
    let mut r = ExperimentResult::new("determining_modes");
    r.scalar("C", c)
        .scalar("threshold_n", th.n as f64)
        .scalar("overflow", if th.overflow { 1.0 } else { 0.0 })
        .series("n", (0..grid.n()).map(|n| n as f64).collect())
        .series("bound", (0..grid.n()).map(|n| threshold_bound(c, t, epsilon, &grid, n)).collect())
        .check(Check::below("overflow", if th.overflow { 1.0 } else { 0.0 }, 0.5));
    Ok(Output::single(r))
}

fn plate_transfer(cfg: &RunConfig) -> Outcome {
    let grid = grid(cfg)?;
    let tg = time_grid(cfg)?;
    let profile = CutoffProfile::new(cfg.f64_or("profile_start", 0.125 * tg.t)?, cfg.f64_or("profile_end", 0.875 * tg.t)?, tg.t)?;
    let inner = TimeGrid::new(profile.inner_length(), cfg.usize_or("inner_M", tg.m / 2)?)?;
    let bump = bump(cfg, &grid, 0.2)?;
    let schr = schrodinger_gramian(&grid, &bump, &inner)?;
    let ucp = eigen_ucp_check(&bump, &grid)?;
    let weak = plate_weak_observability_constant(&grid, &bump, &profile, &tg, schr.lambda_min)?;
    let mut r = ExperimentResult::new("plate_transfer");
    r.scalar("schrodinger_lambda_min", schr.lambda_min)
        .scalar("ucp_min", ucp)
        .scalar("transfer_bound", weak.transfer_bound)
        .scalar("remainder", weak.remainder)
        .scalar("c", weak.c)
        .scalar("plate_lambda_min", weak.direct_lambda_min)
        .scalar("inconclusive", if weak.inconclusive { 1.0 } else { 0.0 })
        .check(Check::above("schrodinger_lambda_min", schr.lambda_min, 0.0))
        .check(Check::above("ucp_min", ucp, 0.0))
        .check(Check::above("plate_lambda_min", weak.direct_lambda_min, 0.0));
    Ok(Output::single(r))
}

fn obs_ratio(cfg: &RunConfig, seed: u64) -> Outcome {
    let grid = grid(cfg)?;
    let tg = time_grid(cfg)?;
    let system = WaveSystem::uniform(grid.clone(), nonlinearity(cfg, &[0.0, 0.0, 1.0])?);
    let bump = bump(cfg, &grid, 0.2)?;
    let r = nonlinear_obs_ratio(&system, &bump, &tg, cfg.f64_or("R0", 1.0)?, cfg.usize_or("samples", 200)?, seed)?;
    Ok(Output::single(r))
}

fn gain_check(cfg: &RunConfig, seed: u64) -> Outcome {
    let grid = grid(cfg)?;
    let system = WaveSystem::uniform(grid.clone(), nonlinearity(cfg, &[0.0, 0.0, 1.0])?);
    let r = nonlinearity_gain(&system, sigma(cfg, 0.6)?, cfg.f64_or("epsilon", 0.4)?, cfg.f64_or("R0", 0.5)?, cfg.usize_or("samples", 200)?, seed)?;
    Ok(Output::single(r))
}

fn end_to_end(cfg: &RunConfig) -> Outcome {
    let grid = grid(cfg)?;
    let time_grid = time_grid(cfg)?;
    let cutoffs: Vec<usize> = cfg
        .list_or("n_sweep", &[4.0, 8.0, 16.0])?
        .into_iter()
        .map(|x| {
            if x.fract() == 0.0 && x >= 1.0 && (x as usize) < grid.n() {
                Ok(x as usize)
            } else {
                Err(Failure::Usage(format!("invalid value for 'n_sweep': cutoffs must be integers in 1..{}, got {x}", grid.n())))
            }
        })
        .collect::<Result<_, _>>()?;
    let setup = EndToEndSetup {
        bump: bump(cfg, &grid, 0.5)?,
        f: nonlinearity(cfg, &[-1.2, 0.0, 1.0])?,
        time_grid,
        sigma: sigma(cfg, 0.6)?,
        epsilon: cfg.f64_or("epsilon", 0.4)?,
        r0: cfg.f64_or("R0", 1.0)?,
        fp_tol: cfg.f64_or("fp_tol", 1e-10)?,
        max_iter: cfg.usize_or("max_iter", 200)?,
        trivial: false,
        grid,
    };
    let r = end_to_end_reconstruction(&setup, &cutoffs).map_err(|e| fixed_point_failure("end_to_end", 0, e))?;
    Ok(Output::single(r))
}
