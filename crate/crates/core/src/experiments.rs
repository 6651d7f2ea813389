//! End-to-end studies: nonlinearity gain, regularity propagation, the
//! nonlinear observability ratio and the reconstruction round trip from
//! stationary solutions.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dynamics::{apply_F, integrate, l1_time_norm, Nonlinearity, TimeGrid, WaveSystem};
use crate::error::{Error, Result};
use crate::observability::{assemble_gramian, BumpFunction, ObservationSignal, Subspace};
use crate::reconstruction::{empirical_lipschitz, reconstruct_high, FixedPointReport, ReconstructionConfig};
use crate::sampling::{random_state, random_state_in_ball, rng, sample_rng};
use crate::spectral::{norm_x_sigma, project_high, project_low, SpectralGrid, State};

/// Which side of the threshold a check must land on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// value < threshold
    Below,
    /// value > threshold
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
}

impl Check {
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, bound: Bound::Below }
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, bound: Bound::Above }
    }

    pub fn passes(&self) -> bool {
        match self.bound {
            Bound::Below => self.value < self.threshold,
            Bound::Above => self.value > self.threshold,
        }
    }
}

/// Named scalars and series plus the checks that decide the verdict.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub name: String,
    pub scalars: Vec<(String, f64)>,
    pub series: Vec<(String, Vec<f64>)>,
    pub checks: Vec<Check>,
}

impl ExperimentResult {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn scalar(&mut self, name: &str, value: f64) -> &mut Self {
        self.scalars.push((name.into(), value));
        self
    }

    pub fn series(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        self.series.push((name.into(), values));
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Passes iff every declared check passes.
    pub fn verdict(&self) -> bool {
        self.checks.iter().all(Check::passes)
    }
}

/// Sup of ||F(U)||_{X^{s+e}} and of Lipschitz quotients over the 4 R0 ball.
pub fn nonlinearity_gain(system: &WaveSystem, sigma: f64, epsilon: f64, r0: f64, samples: usize, seed: u64) -> Result<ExperimentResult> {
    if samples < 10 {
        return Err(Error::InvalidParameter(format!("nonlinearity_gain needs at least 10 samples, got {samples}")));
    }
    let grid = &system.grid;
    let states: Vec<State> = (0..samples)
        .map(|k| random_state_in_ball(grid, sigma, 4.0 * r0, &mut sample_rng(seed, k as u64)))
        .collect();
    let max_norm = states
        .par_iter()
        .map(|s| norm_x_sigma(&apply_F(s, system), grid, sigma + epsilon))
        .reduce(|| 0.0, f64::max);
    let lipschitz = empirical_lipschitz(system, sigma, epsilon, 4.0 * r0, samples, seed.wrapping_add(1));
    let mut out = ExperimentResult::new("nonlinearity_gain");
    out.scalar("seed", seed as f64)
        .scalar("max_norm", max_norm)
        .scalar("max_lipschitz", lipschitz)
        .check(Check::below("max_norm_finite", max_norm, f64::INFINITY))
        .check(Check::below("max_lipschitz_finite", lipschitz, f64::INFINITY));
    Ok(out)
}

/// Integrates and compares sup_t ||U||_{X^{s+e}} with the linear part plus
/// the Duhamel bound; the linear part comes from the observability
/// estimate when a full Gramian at regularity s+e is supplied.
pub fn regularity_propagation(
    u0: &State,
    system: &WaveSystem,
    tg: &TimeGrid,
    sigma: f64,
    epsilon: f64,
    gramian: Option<&crate::observability::Gramian>,
) -> Result<ExperimentResult> {
    let grid = &system.grid;
    let s = sigma + epsilon;
    let traj = integrate(u0, system, tg)?;
    let norms: Vec<f64> = traj.states.iter().map(|x| norm_x_sigma(x, grid, s)).collect();
    let sup = norms.iter().copied().fold(0.0, f64::max);
    let initial = norm_x_sigma(u0, grid, s);
    let forces: Vec<State> = traj.states.iter().map(|x| apply_F(x, system)).collect();
    let duhamel = l1_time_norm(&forces, tg, grid, s);
    let linear = match gramian {
        Some(g) => {
            if g.subspace != Subspace::Full || (g.sigma - s).abs() > 1e-12 || g.time_grid() != tg {
                return Err(Error::GridMismatch("regularity Gramian must be full, at sigma+epsilon, on the same time grid".into()));
            }
            let c = g.obs_constant().ok_or(Error::NotObservable { lambda_min: g.lambda_min, lambda_max: g.lambda_max })?;
            let free: Vec<State> = (0..=tg.m).map(|m| crate::dynamics::linear_propagate(u0, tg.time(m), grid)).collect();
            let sig = ObservationSignal::record(&free, *tg, g.observation_matrix())?;
            c * sig.l2_norm(grid, s)
        }
        None => initial,
    };
    let rhs = linear + duhamel;
    let mut out = ExperimentResult::new("regularity_propagation");
    out.scalar("sup_norm", sup)
        .scalar("initial_norm", initial)
        .scalar("sup_ratio", if initial > 0.0 { sup / initial } else { 0.0 })
        .scalar("linear_bound", linear)
        .scalar("duhamel_bound", duhamel)
        .scalar("estimate", rhs)
        .series("norm", norms)
        .check(Check::below("sup_within_estimate", sup, rhs * (1.0 + 1e-12) + 1e-300));
    Ok(out)
}

/// int_0^T ||b d_t u||^2 dt / ||U0||^2_{X^0} over seeded random data.
pub fn nonlinear_obs_ratio(system: &WaveSystem, bump: &BumpFunction, tg: &TimeGrid, r0: f64, samples: usize, seed: u64) -> Result<ExperimentResult> {
    let grid = &system.grid;
    if bump.samples().len() != grid.quad_points() {
        return Err(Error::SizeMismatch { expected: grid.quad_points(), got: bump.samples().len() });
    }
    let mut r = rng(seed);
    let data: Vec<State> = (0..samples)
        .map(|_| {
            let scale: f64 = rand::Rng::random_range(&mut r, 0.1..=1.0);
            random_state(grid, 0.0, r0 * scale, 0, &mut r)
        })
        .collect();
    let weights = tg.weights();
    let ratios: Vec<f64> = data
        .par_iter()
        .map(|u0| -> Result<f64> {
            let traj = integrate(u0, system, tg)?;
            let obs: f64 = traj
                .states
                .iter()
                .zip(&weights)
                .map(|(s, w)| {
                    let v = grid.synthesize(&s.v);
                    w * grid.integrate(&v.iter().zip(bump.samples()).map(|(x, b)| (x * b).powi(2)).collect::<Vec<_>>())
                })
                .sum();
            Ok(obs / norm_x_sigma(u0, grid, 0.0).powi(2))
        })
        .collect::<Result<_>>()?;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let mut out = ExperimentResult::new("nonlinear_obs_ratio");
    out.scalar("seed", seed as f64)
        .scalar("samples", samples as f64)
        .scalar("min_ratio", min)
        .scalar("max_ratio", max)
        .series("ratio", ratios)
        .check(Check::above("min_ratio_floor", min, 1e-3));
    Ok(out)
}

/// Stationary solution (u, 0) of the semilinear problem.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub u: Vec<f64>,
    /// u'(0) found by shooting (0 for the trivial solution).
    pub slope: f64,
    /// Galerkin residual after the discrete polish.
    pub residual: f64,
}

fn rk4_shoot(f: &Nonlinearity, slope: f64, length: f64, stops: &[f64], steps_per_unit: usize) -> (Vec<f64>, f64) {
    let rhs = |y: [f64; 2]| [y[1], f.eval(y[0])];
    let mut y = [0.0, slope];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(stops.len());
    let advance = |y: &mut [f64; 2], t: &mut f64, target: f64| {
        let steps = (((target - *t) * steps_per_unit as f64).ceil() as usize).max(1);
        let h = (target - *t) / steps as f64;
        for _ in 0..steps {
            let k1 = rhs(*y);
            let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
        *t = target;
    };
    for &s in stops {
        advance(&mut y, &mut t, s);
        out.push(y[0]);
    }
    advance(&mut y, &mut t, length);
    (out, y[0])
}

/// Nontrivial positive solution of -u'' + f(u) = 0, u(0) = u(L) = 0 by
/// shooting with bisection on u'(0) (tolerance 1e-10 on u(L)).
pub fn shoot_equilibrium(f: &Nonlinearity, length: f64, nodes: &[f64]) -> Result<(Vec<f64>, f64)> {
    const STEPS: usize = 4000;
    let end = |s: f64| rk4_shoot(f, s, length, &[], STEPS).1;
    let mut lo = 1e-3;
    let mut f_lo = end(lo);
    let mut hi = lo;
    let mut f_hi = f_lo;
    let mut found = false;
    for _ in 0..200 {
        hi *= 1.05;
        f_hi = end(hi);
        if !f_hi.is_finite() {
            break;
        }
        if f_hi.signum() != f_lo.signum() {
            found = true;
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    if !found {
        return Err(Error::Shooting("no sign change of u(L) in the scanned slope range".into()));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let fm = end(mid);
        if fm.abs() < 1e-10 {
            break;
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let _ = f_hi;
    let (samples, tail) = rk4_shoot(f, mid, length, nodes, STEPS);
    if tail.abs() > 1e-8 {
        return Err(Error::Shooting(format!("bisection stalled with u(L) = {tail:e}")));
    }
    Ok((samples, mid))
}

/// w~_j^2 = (2 w_j / dt) tan(w_j dt / 2), the stiffness seen by a
/// stationary state of the splitting scheme.
pub fn discrete_stiffness(grid: &SpectralGrid, dt: f64) -> Vec<f64> {
    (0..grid.n())
        .map(|i| {
            let w = grid.omega(i);
            2.0 * w / dt * (0.5 * w * dt).tan()
        })
        .collect()
}

/// Newton solve of w~^2 u + Pi(chi~ f(u)) - beta u = 0 from a guess.
pub fn polish_equilibrium(system: &WaveSystem, guess: &[f64], dt: f64) -> Result<Equilibrium> {
    let grid = &system.grid;
    let n = grid.n();
    let stiff = discrete_stiffness(grid, dt);
    let beta = system.beta();
    let residual = |u: &[f64]| -> DVector<f64> {
        let f = apply_F(&State { u: u.to_vec(), v: vec![0.0; n] }, system);
        DVector::from_fn(n, |i, _| stiff[i] * u[i] - f.v[i])
    };
    let mut u = guess.to_vec();
    let mut res = residual(&u);
    for _ in 0..50 {
        if res.norm() < 1e-13 {
            break;
        }
        let phys = grid.synthesize(&u);
        let deriv: Vec<f64> = phys.iter().zip(system.chi_tilde()).map(|(x, c)| c * system.f.derivative(*x)).collect();
        let mut jac: DMatrix<f64> = grid.multiplier_matrix(&deriv);
        for i in 0..n {
            jac[(i, i)] += stiff[i] - beta;
        }
        let step = jac.lu().solve(&res).ok_or_else(|| Error::Shooting("singular Jacobian in the equilibrium polish".into()))?;
        for (x, d) in u.iter_mut().zip(step.iter()) {
            *x -= d;
        }
        res = residual(&u);
    }
    Ok(Equilibrium { u, slope: 0.0, residual: res.norm() })
}

/// Shooting followed by the discrete polish (chi~ must be 1 for the
/// shooting guess to be meaningful).
pub fn find_equilibrium(system: &WaveSystem, dt: f64) -> Result<Equilibrium> {
    let grid = &system.grid;
    let (samples, slope) = shoot_equilibrium(&system.f, grid.length(), grid.nodes())?;
    let guess = grid.analyze(&samples);
    let mut eq = polish_equilibrium(system, &guess, dt)?;
    eq.slope = slope;
    Ok(eq)
}

/// Parameters of the round trip.
#[derive(Debug, Clone)]
pub struct EndToEndSetup {
    pub grid: SpectralGrid,
    pub f: Nonlinearity,
    pub bump: BumpFunction,
    pub time_grid: TimeGrid,
    pub sigma: f64,
    pub epsilon: f64,
    pub r0: f64,
    pub fp_tol: f64,
    pub max_iter: usize,
    /// Use u = 0 instead of the shooting solution.
    pub trivial: bool,
}

/// One reconstruction of Q_n Z for Z = ((1-chi) u, 0) from P_n Z.
#[derive(Debug, Clone)]
pub struct EndToEndRun {
    pub n: usize,
    pub error: f64,
    pub report: FixedPointReport,
}

/// Windowed stationary data shared by every cutoff.
#[derive(Debug, Clone)]
pub struct WindowedEquilibrium {
    pub equilibrium: Equilibrium,
    pub system: WaveSystem,
    pub z: State,
    pub h1: State,
    pub h2: State,
}

pub fn windowed_equilibrium(setup: &EndToEndSetup) -> Result<WindowedEquilibrium> {
    let grid = &setup.grid;
    let n = grid.n();
    let dt = setup.time_grid.dt();
    let full = WaveSystem::uniform(grid.clone(), setup.f.clone());
    let equilibrium = if setup.trivial {
        Equilibrium { u: vec![0.0; n], slope: 0.0, residual: 0.0 }
    } else {
        find_equilibrium(&full, dt)?
    };
    let chi = setup.bump.samples();
    let chi_u = grid.analyze(&grid.synthesize(&equilibrium.u).iter().zip(chi).map(|(u, c)| u * c).collect::<Vec<_>>());
    let z: Vec<f64> = equilibrium.u.iter().zip(&chi_u).map(|(u, c)| u - c).collect();
    let system = WaveSystem::new(grid.clone(), setup.f.clone(), chi.iter().map(|c| 1.0 - c).collect())?;
    let stiff = discrete_stiffness(grid, dt);
    let force = apply_F(&State { u: equilibrium.u.clone(), v: vec![0.0; n] }, &system);
    let h2v: Vec<f64> = (0..n).map(|i| stiff[i] * z[i] - force.v[i]).collect();
    Ok(WindowedEquilibrium {
        equilibrium,
        system,
        z: State { u: z, v: vec![0.0; n] },
        h1: State { u: chi_u, v: vec![0.0; n] },
        h2: State { u: vec![0.0; n], v: h2v },
    })
}

/// Reconstructs Q_n Z for one cutoff and measures the sup-t relative error.
pub fn end_to_end_run(setup: &EndToEndSetup, data: &WindowedEquilibrium, n: usize) -> Result<EndToEndRun> {
    let grid = &setup.grid;
    let tg = setup.time_grid;
    let gramian = assemble_gramian(grid, &setup.bump, &tg, setup.sigma, Subspace::High(n))?;
    let mut config = ReconstructionConfig::new(n, setup.sigma, setup.epsilon, setup.r0, &gramian)?;
    config.fp_tol = setup.fp_tol;
    config.max_iter = setup.max_iter;
    let nodes = tg.m + 1;
    let v = vec![project_low(&data.z, n)?; nodes];
    let h1 = vec![data.h1.clone(); nodes];
    let h2 = vec![data.h2.clone(); nodes];
    let (w, report) = reconstruct_high(&v, &h1, &h2, &config, &gramian, &data.system)?;
    let truth = project_high(&data.z, n)?;
    let scale = norm_x_sigma(&truth, grid, setup.sigma);
    let err = w.states.iter().map(|s| norm_x_sigma(&(s - &truth), grid, setup.sigma)).fold(0.0, f64::max);
    Ok(EndToEndRun { n, error: if scale > 0.0 { err / scale } else { err }, report })
}

/// Round trip over a sweep of cutoffs; verdict at 1e-6 relative error and
/// nonincreasing error in n (up to a 1e-9 floor).
pub fn end_to_end_reconstruction(setup: &EndToEndSetup, cutoffs: &[usize]) -> Result<ExperimentResult> {
    let data = windowed_equilibrium(setup)?;
    let runs: Vec<EndToEndRun> = cutoffs.iter().map(|&n| end_to_end_run(setup, &data, n)).collect::<Result<_>>()?;
    let errors: Vec<f64> = runs.iter().map(|r| r.error).collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let growth = errors.windows(2).map(|w| w[1] - w[0].max(1e-9)).fold(f64::NEG_INFINITY, f64::max);
    let mut out = ExperimentResult::new("end_to_end");
    out.scalar("equilibrium_amplitude", norm_x_sigma(&State { u: data.equilibrium.u.clone(), v: vec![0.0; setup.grid.n()] }, &setup.grid, setup.sigma))
        .scalar("equilibrium_residual", data.equilibrium.residual)
        .scalar("shooting_slope", data.equilibrium.slope)
        .scalar("max_error", worst)
        .series("n", cutoffs.iter().map(|&n| n as f64).collect())
        .series("error", errors)
        .series("iterations", runs.iter().map(|r| r.report.iterations as f64).collect())
        .series("contraction", runs.iter().map(|r| r.report.contraction_estimate).collect())
        .check(Check::below("max_error", worst, 1e-6));
    if cutoffs.len() > 1 {
        out.check(Check::below("error_growth_in_n", growth, 1e-12));
    }
    Ok(out)
}
