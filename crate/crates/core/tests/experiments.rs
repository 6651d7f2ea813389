mod common;

use std::f64::consts::PI;

use common::{pi_grid, standard_bump, time_grid, window_bump};
use wave_observe::dynamics::{apply_F, Nonlinearity, WaveSystem};
use wave_observe::experiments::{
    end_to_end_reconstruction, find_equilibrium, nonlinear_obs_ratio, nonlinearity_gain, regularity_propagation, EndToEndSetup,
};
use wave_observe::observability::{assemble_gramian, BumpFunction, Subspace};
use wave_observe::sampling::{random_state, rng};
use wave_observe::spectral::{norm_x_sigma, State};

// ||(e_1)^3||_{X^s} for the velocity slot: (2/pi) sqrt((3/4)^2 + (1/4)^2 9^s)
fn cube_of_first_mode(s: f64) -> f64 {
    2.0 / PI * ((0.75f64).powi(2) + (0.25f64).powi(2) * 9f64.powf(s)).sqrt()
}

#[test]
fn gain_vanishes_without_nonlinearity() {
    let sys = WaveSystem::uniform(pi_grid(16), Nonlinearity::zero());
    let r = nonlinearity_gain(&sys, 0.6, 0.4, 1.0, 50, 1).unwrap();
    assert_eq!(r.get("max_norm"), Some(0.0));
    assert_eq!(r.get("max_lipschitz"), Some(0.0));
    assert!(r.verdict());
}

#[test]
fn single_mode_gain_matches_sine_cube_identity() {
    let g = pi_grid(16);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::cubic());
    let (sigma, eps) = (0.6, 0.4);
    for a in [0.1, 0.7, 2.0] {
        let u = State::mode(16, 1).unwrap().scaled(a);
        let got = norm_x_sigma(&apply_F(&u, &sys), &g, sigma + eps);
        let want = a.powi(3) * cube_of_first_mode(sigma + eps);
        assert!((got - want).abs() < 1e-13 * want.max(1.0), "a={a}: {got} vs {want}");
    }
    // pair quotient on the e_1 line: |a^3 - b^3| / |a - b| times the same factor
    let (a, b) = (0.9, 0.4);
    let fu = apply_F(&State::mode(16, 1).unwrap().scaled(a), &sys);
    let fv = apply_F(&State::mode(16, 1).unwrap().scaled(b), &sys);
    let q = norm_x_sigma(&(&fu - &fv), &g, sigma + eps) / (a - b);
    let want = (a * a + a * b + b * b) * cube_of_first_mode(sigma + eps);
    assert!((q - want).abs() < 1e-13, "{q} vs {want}");
}

#[test]
fn gain_is_stable_under_truncation_doubling() {
    let measure = |n: usize| {
        let sys = WaveSystem::uniform(pi_grid(n), Nonlinearity::cubic());
        nonlinearity_gain(&sys, 0.6, 0.4, 1.0, 200, 3).unwrap()
    };
    let (coarse, fine) = (measure(32), measure(64));
    assert!(coarse.verdict() && fine.verdict());
    for key in ["max_norm", "max_lipschitz"] {
        let (a, b) = (coarse.get(key).unwrap(), fine.get(key).unwrap());
        assert!(a.is_finite() && a > 0.0);
        assert!((a - b).abs() / b < 0.1, "{key}: {a} -> {b}");
    }
}

#[test]
fn linear_flow_keeps_its_norm() {
    let g = pi_grid(32);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::zero());
    let u0 = random_state(&g, 1.0, 1.0, 0, &mut rng(2));
    let r = regularity_propagation(&u0, &sys, &time_grid(5.0, 500), 0.6, 0.4, None).unwrap();
    assert!((r.get("sup_ratio").unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r.get("duhamel_bound"), Some(0.0));
    assert!(r.verdict());
}

#[test]
fn equilibrium_data_has_constant_norms() {
    let g = pi_grid(32);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::double_well(1.2, 1.0));
    let tg = time_grid(4.0, 800);
    let eq = find_equilibrium(&sys, tg.dt()).unwrap();
    let u0 = State::new(eq.u.clone(), vec![0.0; 32]).unwrap();
    let r = regularity_propagation(&u0, &sys, &tg, 0.6, 0.4, None).unwrap();
    let norms = &r.series.iter().find(|(k, _)| k == "norm").unwrap().1;
    let first = norms[0];
    assert!(first > 0.1);
    assert!(norms.iter().all(|x| (x - first).abs() < 1e-9 * first), "spread {:?}", norms.iter().fold(0.0f64, |m, x| m.max((x - first).abs())));
}

#[test]
fn observed_estimate_bounds_cubic_flow() {
    let g = pi_grid(16);
    let tg = time_grid(7.0, 1024);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::cubic());
    let gr = assemble_gramian(&g, &standard_bump(&g), &tg, 1.0, Subspace::Full).unwrap();
    for seed in [1, 2, 3] {
        let u0 = random_state(&g, 1.0, 0.5, 0, &mut rng(seed));
        let r = regularity_propagation(&u0, &sys, &tg, 0.6, 0.4, Some(&gr)).unwrap();
        assert!(r.verdict(), "seed {seed}: sup {:?} estimate {:?}", r.get("sup_norm"), r.get("estimate"));
    }
    let wrong = assemble_gramian(&g, &standard_bump(&g), &tg, 0.6, Subspace::Full).unwrap();
    let u0 = random_state(&g, 1.0, 0.5, 0, &mut rng(4));
    assert!(regularity_propagation(&u0, &sys, &tg, 0.6, 0.4, Some(&wrong)).is_err());
}

#[test]
fn free_wave_fully_observed_over_a_period_gives_pi() {
    let g = pi_grid(16);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::zero());
    let one = BumpFunction::constant(&g, 1.0).unwrap();
    let r = nonlinear_obs_ratio(&sys, &one, &time_grid(2.0 * PI, 256), 1.0, 20, 7).unwrap();
    assert!((r.get("min_ratio").unwrap() - PI).abs() < 1e-10);
    assert!((r.get("max_ratio").unwrap() - PI).abs() < 1e-10);
}

#[test]
fn observation_ratio_shrinks_with_the_window() {
    let g = pi_grid(16);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::cubic());
    let tg = time_grid(7.0, 1024);
    let ratios = |a: f64, b: f64| -> Vec<f64> {
        let r = nonlinear_obs_ratio(&sys, &window_bump(&g, a, b, 0.2), &tg, 1.0, 20, 11).unwrap();
        r.series.into_iter().find(|(k, _)| k == "ratio").unwrap().1
    };
    let wide = ratios(0.4, 1.6);
    let mid = ratios(0.5, 1.5);
    let narrow = ratios(0.7, 1.3);
    for i in 0..wide.len() {
        assert!(narrow[i] <= mid[i] && mid[i] <= wide[i], "sample {i}");
    }
}

#[test]
fn trivial_round_trip_is_exact() {
    let g = pi_grid(16);
    let setup = EndToEndSetup {
        bump: window_bump(&g, 0.5, 1.5, 0.5),
        grid: g,
        f: Nonlinearity::double_well(1.2, 1.0),
        time_grid: time_grid(7.0, 512),
        sigma: 0.6,
        epsilon: 0.4,
        r0: 1.0,
        fp_tol: 1e-10,
        max_iter: 50,
        trivial: true,
    };
    let r = end_to_end_reconstruction(&setup, &[2, 4]).unwrap();
    assert_eq!(r.get("max_error"), Some(0.0));
    assert_eq!(r.get("equilibrium_amplitude"), Some(0.0));
    assert!(r.verdict());
}

#[test]
fn seeded_experiments_repeat_exactly() {
    let g = pi_grid(16);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::cubic());
    let tg = time_grid(3.0, 256);
    let a = nonlinear_obs_ratio(&sys, &standard_bump(&g), &tg, 1.0, 8, 5).unwrap();
    let b = nonlinear_obs_ratio(&sys, &standard_bump(&g), &tg, 1.0, 8, 5).unwrap();
    assert_eq!(a, b);
    let c = nonlinear_obs_ratio(&sys, &standard_bump(&g), &tg, 1.0, 8, 6).unwrap();
    assert_ne!(a.series, c.series);
    assert_eq!(nonlinearity_gain(&sys, 0.6, 0.4, 1.0, 30, 9).unwrap(), nonlinearity_gain(&sys, 0.6, 0.4, 1.0, 30, 9).unwrap());
}
