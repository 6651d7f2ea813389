//! Observed Cauchy solver F_L, the fixed-point map Phi and its Picard
//! solver, the high-frequency reconstruction operator and determining modes.

use rayon::prelude::*;

use crate::dynamics::{apply_F, apply_F_batch, duhamel_all, l1_time_norm, Rotation, Trajectory, WaveSystem};
use crate::error::{Error, Result};
use crate::observability::{pseudo_inverse_apply, smoothstep, Gramian, Subspace};
use crate::sampling::{random_state, random_state_in_ball, rng, sample_rng};
use crate::spectral::{norm_x_sigma, project_high, SpectralGrid, State};

pub use crate::observability::ObservationSignal;

/// Pairs drawn by the empirical Lipschitz estimate.
pub const LIPSCHITZ_SAMPLES: usize = 200;
/// Consecutive residual increases treated as divergence.
pub const DIVERGENCE_RUN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionConfig {
    pub n: usize,
    pub sigma: f64,
    pub epsilon: f64,
    pub r0: f64,
    pub eta: f64,
    pub fp_tol: f64,
    pub max_iter: usize,
    /// Seed of the Lipschitz sampling behind `threshold_bound`.
    pub seed: u64,
}

impl ReconstructionConfig {
    /// Uses eta = 0.1 R0 / c_obs from the Gramian (or R0 when it is not observable).
    pub fn new(n: usize, sigma: f64, epsilon: f64, r0: f64, gramian: &Gramian) -> Result<Self> {
        let eta = gramian.obs_constant().map_or(r0, |c| 0.1 * r0 / c);
        let cfg = Self { n, sigma, epsilon, r0, eta, fp_tol: 1e-10, max_iter: 200, seed: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("cutoff n must be >= 1".into()));
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.fp_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("fp_tol must be positive, got {}", self.fp_tol)));
        }
        if !(self.r0 > 0.0) {
            return Err(Error::InvalidParameter(format!("R0 must be positive, got {}", self.r0)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1], got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub iterations: usize,
    /// sup_t ||W^{k+1} - W^k||_{X^sigma} per Picard step.
    pub residuals: Vec<f64>,
    /// Geometric mean of successive residual ratios.
    pub contraction_estimate: f64,
    pub converged: bool,
    /// C_emp T / (1 + lambda_{n+1})^epsilon.
    pub threshold_bound: f64,
    pub lipschitz: f64,
    /// ||G||_{L^2 X^sigma}, for comparison with eta.
    pub signal_norm: f64,
}

fn check_gramian(config: &ReconstructionConfig, gramian: &Gramian) -> Result<()> {
    if gramian.subspace != Subspace::High(config.n) {
        return Err(Error::GridMismatch(format!("Gramian subspace {:?} does not match cutoff n = {}", gramian.subspace, config.n)));
    }
    if (gramian.sigma - config.sigma).abs() > 1e-15 {
        return Err(Error::GridMismatch(format!("Gramian sigma {} differs from config sigma {}", gramian.sigma, config.sigma)));
    }
    Ok(())
}

fn check_len(states: &[State], expected: usize, n: usize) -> Result<()> {
    if states.len() != expected {
        return Err(Error::SizeMismatch { expected, got: states.len() });
    }
    if let Some(s) = states.iter().find(|s| s.len() != n) {
        return Err(Error::SizeMismatch { expected: n, got: s.len() });
    }
    Ok(())
}

/// W(t) = e^{tA} W0 + I(t) Q_n H with W0 the least-squares fit of G - C I(Q_n H).
pub fn linear_reconstruct(g: &ObservationSignal, h: &[State], config: &ReconstructionConfig, gramian: &Gramian) -> Result<Trajectory> {
    check_gramian(config, gramian)?;
    let tg = *gramian.time_grid();
    if g.time_grid != tg {
        return Err(Error::GridMismatch("signal and Gramian use different time grids".into()));
    }
    let grid = gramian.grid();
    check_len(h, tg.m + 1, grid.n())?;
    let qh: Vec<State> = h.iter().map(|s| project_high(s, config.n)).collect::<Result<_>>()?;
    let duh = duhamel_all(&qh, &tg, grid)?;
    let observed = ObservationSignal::record(&duh, tg, gramian.observation_matrix())?;
    let w0 = pseudo_inverse_apply(gramian, &g.sub(&observed))?;
    let states = duh
        .into_par_iter()
        .enumerate()
        .map(|(m, d)| {
            let mut s = Rotation::wave(grid, tg.time(m)).apply(&w0);
            s.axpy(1.0, &d);
            s
        })
        .collect();
    Trajectory::new(tg, states)
}

fn check_ball(sum: &[State], grid: &SpectralGrid, config: &ReconstructionConfig) -> Result<()> {
    let radius = 4.0 * config.r0;
    for (node, s) in sum.iter().enumerate() {
        let norm = norm_x_sigma(s, grid, config.sigma);
        if norm > radius {
            return Err(Error::BallViolation { norm, radius, node });
        }
    }
    Ok(())
}

/// Inputs shared by every application of Phi.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointData<'a> {
    /// Low-frequency part P_n U, folded into H1.
    pub v: &'a [State],
    pub h1: &'a [State],
    pub h2: &'a [State],
    pub g: &'a ObservationSignal,
}

/// Phi(W) = F_L(G, F(W + V + H1) + H2).
pub fn phi_step(w: &Trajectory, data: FixedPointData<'_>, config: &ReconstructionConfig, gramian: &Gramian, system: &WaveSystem) -> Result<Trajectory> {
    let grid = gramian.grid();
    let len = gramian.time_grid().m + 1;
    check_len(&w.states, len, grid.n())?;
    check_len(data.v, len, grid.n())?;
    check_len(data.h1, len, grid.n())?;
    check_len(data.h2, len, grid.n())?;
    let total: Vec<State> = w
        .states
        .iter()
        .zip(data.v)
        .zip(data.h1)
        .map(|((a, b), c)| {
            let mut s = a + b;
            s.axpy(1.0, c);
            s
        })
        .collect();
    check_ball(&total, grid, config)?;
    let mut source = apply_F_batch(&total, system);
    for (s, h2) in source.iter_mut().zip(data.h2) {
        s.axpy(1.0, h2);
    }
    linear_reconstruct(data.g, &source, config, gramian)
}

/// sup over 200 sampled pairs in the ball of ||F(U)-F(V)||_{X^{s+e}} / ||U-V||_{X^s}.
pub fn empirical_lipschitz(system: &WaveSystem, sigma: f64, epsilon: f64, radius: f64, samples: usize, seed: u64) -> f64 {
    let grid = &system.grid;
    let pairs: Vec<(State, State)> = (0..samples)
        .map(|i| {
            let a = random_state_in_ball(grid, sigma, radius, &mut sample_rng(seed, 2 * i as u64));
            let mut r = sample_rng(seed, 2 * i as u64 + 1);
            let b = if i % 2 == 0 {
                random_state_in_ball(grid, sigma, radius, &mut r)
            } else {
                let mut b = a.clone();
                b.axpy(1.0, &random_state(grid, sigma, 1e-3 * radius, 0, &mut r));
                b
            };
            (a, b)
        })
        .collect();
    pairs
        .par_iter()
        .map(|(a, b)| {
            let num = norm_x_sigma(&(&apply_F(a, system) - &apply_F(b, system)), grid, sigma + epsilon);
            let den = norm_x_sigma(&(a - b), grid, sigma);
            if den > 0.0 { num / den } else { 0.0 }
        })
        .reduce(|| 0.0, f64::max)
}

fn bracket(grid: &SpectralGrid, k: usize, epsilon: f64) -> f64 {
    (1.0 + grid.eigenvalues()[k]).powf(epsilon)
}

/// C T / (1 + lambda_{n+1})^epsilon.
pub fn threshold_bound(lipschitz: f64, t: f64, epsilon: f64, grid: &SpectralGrid, n: usize) -> f64 {
    if n >= grid.n() {
        return 0.0;
    }
    lipschitz * t / bracket(grid, n, epsilon)
}

fn geometric_ratio(residuals: &[f64]) -> f64 {
    let logs: Vec<f64> = residuals.windows(2).filter(|w| w[0] > 0.0 && w[1] > 0.0).map(|w| (w[1] / w[0]).ln()).collect();
    if logs.is_empty() {
        return 0.0;
    }
    (logs.iter().sum::<f64>() / logs.len() as f64).exp()
}

/// Picard iteration of Phi from W = 0.
pub fn solve_fixed_point(data: FixedPointData<'_>, config: &ReconstructionConfig, gramian: &Gramian, system: &WaveSystem) -> Result<(Trajectory, FixedPointReport)> {
    let w0 = Trajectory::zeros(*gramian.time_grid(), gramian.grid().n());
    solve_fixed_point_from(w0, data, config, gramian, system)
}

/// Picard iteration of Phi from a given initial guess.
pub fn solve_fixed_point_from(
    initial: Trajectory,
    data: FixedPointData<'_>,
    config: &ReconstructionConfig,
    gramian: &Gramian,
    system: &WaveSystem,
) -> Result<(Trajectory, FixedPointReport)> {
    config.validate()?;
    check_gramian(config, gramian)?;
    let grid = gramian.grid();
    let lipschitz = if system.f.is_zero() && system.beta() == 0.0 {
        0.0
    } else {
        empirical_lipschitz(system, config.sigma, config.epsilon, 3.0 * config.r0, LIPSCHITZ_SAMPLES, config.seed)
    };
    let mut report = FixedPointReport {
        iterations: 0,
        residuals: Vec::new(),
        contraction_estimate: 0.0,
        converged: false,
        threshold_bound: threshold_bound(lipschitz, gramian.t, config.epsilon, grid, config.n),
        lipschitz,
        signal_norm: data.g.l2_norm(grid, config.sigma),
    };
    let mut w = initial;
    let mut increases = 0;
    for k in 1..=config.max_iter {
        let next = phi_step(&w, data, config, gramian, system)?;
        let r = next.sup_distance(&w, grid, config.sigma);
        let scale = 1.0 + next.sup_norm(grid, config.sigma);
        if let Some(&prev) = report.residuals.last() {
            increases = if r > prev { increases + 1 } else { 0 };
        }
        report.residuals.push(r);
        report.contraction_estimate = geometric_ratio(&report.residuals);
        w = next;
        if r <= config.fp_tol * scale {
            report.iterations = (k - 1).max(1);
            report.converged = true;
            return Ok((w, report));
        }
        if !r.is_finite() || increases >= DIVERGENCE_RUN {
            report.iterations = k;
            return Err(Error::Diverged(Box::new(report)));
        }
    }
    report.iterations = config.max_iter;
    Err(Error::MaxIterExceeded(Box::new(report)))
}

/// chi(s): 1 on [0, 1/2], 0 on [1, inf), quintic in between.
pub fn cutoff(s: f64) -> f64 {
    1.0 - smoothstep(2.0 * s.abs() - 1.0)
}

/// R(V, H1, H2) = R~(V + H1, H2, -chi(||C V|| / eta) C V).
pub fn reconstruct_high(
    v: &[State],
    h1: &[State],
    h2: &[State],
    config: &ReconstructionConfig,
    gramian: &Gramian,
    system: &WaveSystem,
) -> Result<(Trajectory, FixedPointReport)> {
    let tg = *gramian.time_grid();
    check_len(v, tg.m + 1, gramian.grid().n())?;
    let cv = ObservationSignal::record(v, tg, gramian.observation_matrix())?;
    let weight = cutoff(cv.l2_norm(gramian.grid(), config.sigma) / config.eta);
    let g = cv.scaled(-weight);
    solve_fixed_point(FixedPointData { v, h1, h2, g: &g }, config, gramian, system)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeterminingThreshold {
    pub n: usize,
    /// No cutoff below N satisfies the inequality; `n` is then N.
    pub overflow: bool,
}

/// Smallest n with C T (1 + lambda_{n+1})^{-epsilon} < 1.
pub fn determining_threshold(lipschitz_c: f64, t: f64, epsilon: f64, grid: &SpectralGrid) -> Result<DeterminingThreshold> {
    if !(lipschitz_c > 0.0) {
        return Err(Error::InvalidParameter(format!("Lipschitz constant must be positive, got {lipschitz_c}")));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    Ok((0..grid.n())
        .find(|&n| lipschitz_c * t / bracket(grid, n, epsilon) < 1.0)
        .map_or(DeterminingThreshold { n: grid.n(), overflow: true }, |n| DeterminingThreshold { n, overflow: false }))
}

/// Solves from `trials` initial guesses and returns the largest pairwise
/// sup_t X^sigma distance between the fixed points.
pub fn uniqueness_check(
    data: FixedPointData<'_>,
    config: &ReconstructionConfig,
    gramian: &Gramian,
    system: &WaveSystem,
    trials: usize,
) -> Result<f64> {
    let grid = gramian.grid();
    let tg = *gramian.time_grid();
    let mut r = rng(config.seed ^ 0x5eed);
    let guesses: Vec<Trajectory> = (0..trials)
        .map(|i| {
            if i == 0 {
                return Trajectory::zeros(tg, grid.n());
            }
            let xi = random_state(grid, config.sigma, 0.5 * config.r0, config.n, &mut r);
            let states = (0..=tg.m).map(|m| Rotation::wave(grid, tg.time(m)).apply(&xi)).collect();
            Trajectory { time_grid: tg, states }
        })
        .collect();
    let solutions: Vec<Trajectory> = guesses
        .into_iter()
        .map(|w| solve_fixed_point_from(w, data, config, gramian, system).map(|(w, _)| w))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            worst = worst.max(solutions[i].sup_distance(&solutions[j], grid, config.sigma));
        }
    }
    Ok(worst)
}

/// ||F_L(G,H)||_{C0 X^s} / (||G||_{L2 X^s} + ||Q_n H||_{L1 X^s}).
pub fn linear_estimate_ratio(g: &ObservationSignal, h: &[State], config: &ReconstructionConfig, gramian: &Gramian) -> Result<f64> {
    let w = linear_reconstruct(g, h, config, gramian)?;
    let grid = gramian.grid();
    let qh: Vec<State> = h.iter().map(|s| project_high(s, config.n)).collect::<Result<_>>()?;
    let den = g.l2_norm(grid, config.sigma) + l1_time_norm(&qh, gramian.time_grid(), grid, config.sigma);
    Ok(if den > 0.0 { w.sup_norm(grid, config.sigma) / den } else { 0.0 })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;
    use std::f64::consts::PI;

    #[test]
    fn threshold_enumeration() {
        let g = SpectralGrid::new(PI, 32, 0.0).unwrap();
        assert_eq!(determining_threshold(10.0, 1.0, 1.0, &g).unwrap(), DeterminingThreshold { n: 3, overflow: false });
        assert_eq!(determining_threshold(0.5, 1.0, 1.0, &g).unwrap().n, 0);
        assert!(determining_threshold(10.0, 1.0, 1e-9, &g).unwrap().overflow);
        assert!(determining_threshold(0.0, 1.0, 1.0, &g).is_err());
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert_eq!(cutoff(3.0), 0.0);
        assert!(cutoff(0.75) > 0.0 && cutoff(0.75) < 1.0);
    }

    #[test]
    fn geometric_mean_of_ratios() {
        let r = geometric_ratio(&[1.0, 0.5, 0.25, 0.125]);
        assert!((r - 0.5).abs() < 1e-14);
        assert_eq!(geometric_ratio(&[1.0]), 0.0);
    }
}
