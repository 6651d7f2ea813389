mod common;

use common::{pi_grid, standard_bump, time_grid};
use wave_observe::dynamics::{integrate, linear_propagate, Nonlinearity, TimeGrid, Trajectory, WaveSystem};
use wave_observe::experiments::{end_to_end_run, windowed_equilibrium, EndToEndSetup};
use wave_observe::observability::{assemble_gramian, Gramian, ObservationSignal, Subspace};
use wave_observe::reconstruction::{
    cutoff, determining_threshold, empirical_lipschitz, linear_estimate_ratio, linear_reconstruct, phi_step, reconstruct_high, solve_fixed_point, uniqueness_check, FixedPointData,
    ReconstructionConfig,
};
use wave_observe::sampling::{random_state, rng};
use wave_observe::spectral::{norm_x_sigma, project_high, project_low, SpectralGrid, State};
use wave_observe::Error;

const SIGMA: f64 = 0.6;

struct Problem {
    grid: SpectralGrid,
    tg: TimeGrid,
    system: WaveSystem,
    gramian: Gramian,
    config: ReconstructionConfig,
    v: Vec<State>,
    zeros: Vec<State>,
    g: ObservationSignal,
    truth: Trajectory,
}

fn problem(f: Nonlinearity, n: usize, amplitude: f64, seed: u64) -> Problem {
    let grid = pi_grid(32);
    let tg = time_grid(7.0, 1024);
    let system = WaveSystem::uniform(grid.clone(), f);
    let gramian = assemble_gramian(&grid, &standard_bump(&grid), &tg, SIGMA, Subspace::High(n)).unwrap();
    let mut config = ReconstructionConfig::new(n, SIGMA, 0.4, 0.5, &gramian).unwrap();
    config.seed = seed;
    let u0 = random_state(&grid, SIGMA, amplitude, 0, &mut rng(seed));
    let traj = integrate(&u0, &system, &tg).unwrap();
    let v: Vec<State> = traj.states.iter().map(|s| project_low(s, n).unwrap()).collect();
    let q: Vec<State> = traj.states.iter().map(|s| project_high(s, n).unwrap()).collect();
    let g = ObservationSignal::record(&q, tg, gramian.observation_matrix()).unwrap();
    Problem { zeros: vec![State::zeros(32); tg.m + 1], truth: Trajectory::new(tg, q).unwrap(), grid, tg, system, gramian, config, v, g }
}

impl Problem {
    fn data(&self) -> FixedPointData<'_> {
        FixedPointData { v: &self.v, h1: &self.zeros, h2: &self.zeros, g: &self.g }
    }

    fn rel_error(&self, w: &Trajectory) -> f64 {
        w.sup_distance(&self.truth, &self.grid, SIGMA) / self.truth.sup_norm(&self.grid, SIGMA)
    }
}

fn random_source(grid: &SpectralGrid, tg: &TimeGrid, seed: u64) -> Vec<State> {
    let mut r = rng(seed);
    let a = random_state(grid, SIGMA, 1.0, 0, &mut r);
    let b = random_state(grid, SIGMA, 1.0, 0, &mut r);
    tg.times()
        .iter()
        .map(|t| {
            let mut s = a.scaled(t.cos());
            s.axpy((3.0 * t).sin(), &b);
            s
        })
        .collect()
}

#[test]
fn zero_inputs_reconstruct_zero() {
    let p = problem(Nonlinearity::zero(), 8, 0.5, 1);
    let w = linear_reconstruct(&ObservationSignal::zeros(p.tg, 32), &p.zeros, &p.config, &p.gramian).unwrap();
    assert_eq!(w.sup_norm(&p.grid, SIGMA), 0.0);
    let (w, _) = reconstruct_high(&p.zeros, &p.zeros, &p.zeros, &p.config, &p.gramian, &WaveSystem::uniform(p.grid.clone(), Nonlinearity::cubic())).unwrap();
    assert_eq!(w.sup_norm(&p.grid, SIGMA), 0.0);
}

#[test]
fn free_wave_initial_state_recovered() {
    let p = problem(Nonlinearity::zero(), 8, 0.5, 2);
    let w0 = random_state(&p.grid, SIGMA, 1.0, 8, &mut rng(20));
    let states: Vec<State> = p.tg.times().iter().map(|&t| linear_propagate(&w0, t, &p.grid)).collect();
    let g = ObservationSignal::record(&states, p.tg, p.gramian.observation_matrix()).unwrap();
    let w = linear_reconstruct(&g, &p.zeros, &p.config, &p.gramian).unwrap();
    assert!(norm_x_sigma(&(&w.states[0] - &w0), &p.grid, SIGMA) / norm_x_sigma(&w0, &p.grid, SIGMA) < 1e-8);
}

#[test]
fn observed_cauchy_solver_is_linear() {
    let p = problem(Nonlinearity::zero(), 8, 0.5, 3);
    let h1 = random_source(&p.grid, &p.tg, 30);
    let h2 = random_source(&p.grid, &p.tg, 31);
    let g1 = ObservationSignal::record(&random_source(&p.grid, &p.tg, 32), p.tg, p.gramian.observation_matrix()).unwrap();
    let g2 = ObservationSignal::record(&random_source(&p.grid, &p.tg, 33), p.tg, p.gramian.observation_matrix()).unwrap();
    let (a, b) = (0.7, -1.9);
    let mix_h: Vec<State> = h1.iter().zip(&h2).map(|(x, y)| &(a * x) + &(b * y)).collect();
    let mix_g = g1.scaled(a).sub(&g2.scaled(-b));
    let lhs = linear_reconstruct(&mix_g, &mix_h, &p.config, &p.gramian).unwrap();
    let r1 = linear_reconstruct(&g1, &h1, &p.config, &p.gramian).unwrap();
    let r2 = linear_reconstruct(&g2, &h2, &p.config, &p.gramian).unwrap();
    let scale = lhs.sup_norm(&p.grid, SIGMA);
    for ((l, x), y) in lhs.states.iter().zip(&r1.states).zip(&r2.states) {
        let rhs = &(a * x) + &(b * y);
        assert!(norm_x_sigma(&(l - &rhs), &p.grid, SIGMA) < 1e-10 * scale);
    }
}

#[test]
fn linear_estimate_constant_is_uniform_in_cutoff() {
    let grid = pi_grid(64);
    let bump = standard_bump(&grid);
    let tg = time_grid(7.0, 1024);
    let ks: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&n| {
            let gr = assemble_gramian(&grid, &bump, &tg, SIGMA, Subspace::High(n)).unwrap();
            let cfg = ReconstructionConfig::new(n, SIGMA, 0.4, 0.5, &gr).unwrap();
            // K is the best constant: sup over pure-signal, pure-source and mixed inputs
            let no_signal = ObservationSignal::zeros(tg, 64);
            let no_source = vec![State::zeros(64); tg.m + 1];
            (0..4u64)
                .flat_map(|seed| {
                    let w0 = random_state(&grid, SIGMA, 1.0, n, &mut rng(seed));
                    let states: Vec<State> = tg.times().iter().map(|&t| linear_propagate(&w0, t, &grid)).collect();
                    let g = ObservationSignal::record(&states, tg, gr.observation_matrix()).unwrap();
                    let h = random_source(&grid, &tg, 100 + seed);
                    [
                        linear_estimate_ratio(&g, &h, &cfg, &gr).unwrap(),
                        linear_estimate_ratio(&g, &no_source, &cfg, &gr).unwrap(),
                        linear_estimate_ratio(&no_signal, &h, &cfg, &gr).unwrap(),
                    ]
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let lo = ks.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ks.iter().copied().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo < 1.25, "{ks:?}");
}

#[test]
fn linear_problem_converges_in_one_iteration() {
    let p = problem(Nonlinearity::zero(), 8, 0.5, 4);
    let (w, rep) = solve_fixed_point(p.data(), &p.config, &p.gramian, &p.system).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.iterations, 1);
    assert_eq!(rep.lipschitz, 0.0);
    assert!(p.rel_error(&w) < 1e-8);
    let dist = uniqueness_check(p.data(), &p.config, &p.gramian, &p.system, 4).unwrap();
    assert!(dist < 1e-12, "{dist}");
}

#[test]
fn fixed_point_is_invariant_under_phi() {
    let p = problem(Nonlinearity::cubic(), 8, 0.5, 5);
    let (w, rep) = solve_fixed_point(p.data(), &p.config, &p.gramian, &p.system).unwrap();
    assert!(rep.converged);
    let next = phi_step(&w, p.data(), &p.config, &p.gramian, &p.system).unwrap();
    let scale = 1.0 + w.sup_norm(&p.grid, SIGMA);
    assert!(next.sup_distance(&w, &p.grid, SIGMA) <= p.config.fp_tol * scale);
    assert!(p.rel_error(&w) < 1e-6);
}

#[test]
fn phi_contracts_pairs_within_the_a_priori_bound() {
    // cutoff taken from the threshold of the same empirical constant
    let probe = problem(Nonlinearity::cubic(), 8, 0.5, 6);
    let c = empirical_lipschitz(&probe.system, SIGMA, 0.4, 3.0 * probe.config.r0, 200, probe.config.seed);
    let th = determining_threshold(c, 7.0, 0.4, &probe.grid).unwrap();
    assert!(!th.overflow && th.n < 32, "{th:?}");
    let n = th.n;
    let p = problem(Nonlinearity::cubic(), n, 0.5, 6);
    let (_, rep) = solve_fixed_point(p.data(), &p.config, &p.gramian, &p.system).unwrap();
    assert!(rep.converged);
    assert!(rep.threshold_bound < 1.0, "{}", rep.threshold_bound);
    assert!(rep.contraction_estimate <= 1.2 * rep.threshold_bound);
    let mut r = rng(60);
    for _ in 0..3 {
        let make = |r: &mut rand_chacha::ChaCha8Rng| {
            let xi = random_state(&p.grid, SIGMA, 0.3 * p.config.r0, n, r);
            let states = p.tg.times().iter().map(|&t| linear_propagate(&xi, t, &p.grid)).collect();
            Trajectory::new(p.tg, states).unwrap()
        };
        let (a, b) = (make(&mut r), make(&mut r));
        let pa = phi_step(&a, p.data(), &p.config, &p.gramian, &p.system).unwrap();
        let pb = phi_step(&b, p.data(), &p.config, &p.gramian, &p.system).unwrap();
        let ratio = pa.sup_distance(&pb, &p.grid, SIGMA) / a.sup_distance(&b, &p.grid, SIGMA);
        assert!(ratio <= rep.threshold_bound, "{ratio} > {}", rep.threshold_bound);
    }
}

#[test]
fn residuals_decrease_geometrically() {
    let p = problem(Nonlinearity::cubic(), 8, 0.5, 7);
    let (_, rep) = solve_fixed_point(p.data(), &p.config, &p.gramian, &p.system).unwrap();
    assert!(rep.residuals.windows(2).all(|w| w[1] < w[0]), "{:?}", rep.residuals);
}

#[test]
fn single_trial_uniqueness_is_zero() {
    let p = problem(Nonlinearity::cubic(), 8, 0.5, 8);
    assert_eq!(uniqueness_check(p.data(), &p.config, &p.gramian, &p.system, 1).unwrap(), 0.0);
}

#[test]
fn below_threshold_the_report_is_honest() {
    // f = 5u + 20u^3 is far outside the contraction regime at n = 1
    let f = Nonlinearity::new(vec![5.0, 0.0, 20.0]).unwrap();
    let low = problem(f.clone(), 1, 0.5, 9);
    match solve_fixed_point(low.data(), &low.config, &low.gramian, &low.system) {
        Err(Error::Diverged(rep)) | Err(Error::MaxIterExceeded(rep)) => {
            assert!(!rep.converged);
            assert!(rep.threshold_bound > 1.0);
            assert!(!rep.residuals.is_empty());
        }
        Err(Error::BallViolation { norm, radius, .. }) => assert!(norm > radius),
        Ok((_, rep)) => assert!(rep.contraction_estimate > 0.1, "converged suspiciously fast: {rep:?}"),
        Err(e) => panic!("unexpected error {e}"),
    }
    let high = problem(f, 8, 0.5, 9);
    let (w, rep) = solve_fixed_point(high.data(), &high.config, &high.gramian, &high.system).unwrap();
    assert!(rep.converged);
    assert!(high.rel_error(&w) < 1e-6);
}

#[test]
fn ball_violation_is_flagged() {
    let p = problem(Nonlinearity::cubic(), 8, 3.0, 10);
    assert!(matches!(solve_fixed_point(p.data(), &p.config, &p.gramian, &p.system), Err(Error::BallViolation { .. })));
}

#[test]
fn large_low_frequency_observation_is_cut_off() {
    let p = problem(Nonlinearity::cubic(), 8, 0.5, 11);
    // ||C V|| far above eta: the cutoff sends the signal to zero
    let cv = ObservationSignal::record(&p.v, p.tg, p.gramian.observation_matrix()).unwrap();
    let mut cfg = p.config.clone();
    cfg.eta = 0.25 * cv.l2_norm(&p.grid, SIGMA);
    assert_eq!(cutoff(4.0), 0.0);
    let (w, _) = reconstruct_high(&p.v, &p.zeros, &p.zeros, &cfg, &p.gramian, &p.system).unwrap();
    let zero = ObservationSignal::zeros(p.tg, 32);
    let data = FixedPointData { v: &p.v, h1: &p.zeros, h2: &p.zeros, g: &zero };
    let (expected, _) = solve_fixed_point(data, &cfg, &p.gramian, &p.system).unwrap();
    assert!(w.sup_distance(&expected, &p.grid, SIGMA) <= 1e-14 * (1.0 + expected.sup_norm(&p.grid, SIGMA)));
}

fn equilibrium_setup(m: usize, trivial: bool) -> EndToEndSetup {
    let grid = pi_grid(64);
    EndToEndSetup {
        bump: common::window_bump(&grid, 0.5, 1.5, 0.5),
        grid,
        f: Nonlinearity::double_well(1.2, 1.0),
        time_grid: time_grid(7.0, m),
        sigma: SIGMA,
        epsilon: 0.4,
        r0: 1.0,
        fp_tol: 1e-10,
        max_iter: 200,
        trivial,
    }
}

#[test]
fn stationary_solution_high_modes_recovered() {
    let setup = equilibrium_setup(1024, false);
    let data = windowed_equilibrium(&setup).unwrap();
    let run = end_to_end_run(&setup, &data, 8).unwrap();
    assert!(run.report.converged);
    assert!(run.error < 1e-7, "{}", run.error);
}

#[test]
fn trivial_equilibrium_reconstructs_exact_zeros() {
    let setup = equilibrium_setup(512, true);
    let data = windowed_equilibrium(&setup).unwrap();
    assert!(data.z.u.iter().all(|&x| x == 0.0));
    let run = end_to_end_run(&setup, &data, 8).unwrap();
    assert_eq!(run.error, 0.0);
}

#[test]
fn stationary_error_stays_at_the_floor_under_refinement() {
    let errs: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&m| {
            let setup = equilibrium_setup(m, false);
            end_to_end_run(&setup, &windowed_equilibrium(&setup).unwrap(), 8).unwrap().error
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0].max(1e-9)), "{errs:?}");
}
