mod common;

use std::f64::consts::PI;

use common::{max_abs_diff, pi_grid, simpson, sine, time_grid};
use wave_observe::dynamics::{apply_F, duhamel, duhamel_all, energy, integrate, linear_propagate, Nonlinearity, WaveSystem};
use wave_observe::sampling::{random_state, rng};
use wave_observe::spectral::{norm_x_sigma, SpectralGrid, State};

#[test]
fn eigenvalues_follow_the_square_law() {
    assert_eq!(pi_grid(8).eigenvalue(1).unwrap(), 1.0);
    assert_eq!(pi_grid(8).eigenvalue(5).unwrap(), 25.0);
    assert!((SpectralGrid::new(2.0 * PI, 8, 0.0).unwrap().eigenvalue(2).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn two_mode_norm_by_hand() {
    let g = pi_grid(4);
    let s = State::new(vec![1.0, 1.0, 0.0, 0.0], vec![0.0; 4]).unwrap();
    // sigma = 0: lambda_1 + lambda_2 = 1 + 4
    assert!((norm_x_sigma(&s, &g, 0.0) - 5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn synthesis_matches_direct_sine_evaluation() {
    let g = pi_grid(16);
    let mut r = rng(3);
    let c = random_state(&g, 0.0, 1.0, 0, &mut r).u;
    let samples = g.to_physical(&c).unwrap();
    let direct: Vec<f64> = g.nodes().iter().map(|&x| (1..=16).map(|j| c[j - 1] * sine(j, x, PI)).sum()).collect();
    assert!(max_abs_diff(&samples, &direct) < 1e-13);
    let back = g.to_coeffs(&samples).unwrap();
    assert!(max_abs_diff(&back, &c) < 1e-12);
    assert!(g.to_physical(&[0.0; 16]).unwrap().iter().all(|&x| x == 0.0));
}

#[test]
fn parseval_against_dense_quadrature() {
    for n in [8, 32, 128] {
        let g = pi_grid(n);
        let c = random_state(&g, 0.0, 1.0, 0, &mut rng(n as u64)).u;
        let f = |x: f64| (1..=n).map(|j| c[j - 1] * sine(j, x, PI)).sum::<f64>().powi(2);
        // the integrand is a trigonometric polynomial of degree 2n
        let quad = simpson(f, 0.0, PI, 40 * n);
        let sum: f64 = c.iter().map(|x| x * x).sum();
        assert!((quad - sum).abs() / sum < 1e-10, "n={n}: {quad} vs {sum}");
    }
}

#[test]
fn cubic_of_first_mode_matches_sine_cube_expansion() {
    // sin^3 = (3 sin x - sin 3x) / 4, so (e_1)^3 = (2/pi)(3/4 e_1 - 1/4 e_3)
    let g = pi_grid(8);
    let sys = WaveSystem::uniform(g, Nonlinearity::cubic());
    let out = apply_F(&State::mode(8, 1).unwrap(), &sys);
    let mut expected = vec![0.0; 8];
    expected[0] = -0.75 * 2.0 / PI;
    expected[2] = 0.25 * 2.0 / PI;
    assert!(max_abs_diff(&out.v, &expected) < 1e-14, "{:?}", out.v);
    assert!(out.u.iter().all(|&x| x == 0.0));
}

#[test]
fn propagation_group_property() {
    let g = pi_grid(32);
    let s = random_state(&g, 0.6, 1.0, 0, &mut rng(1));
    let back = linear_propagate(&linear_propagate(&s, 1.7, &g), -1.7, &g);
    assert!(norm_x_sigma(&(&back - &s), &g, 0.6) < 1e-13);
    let one = linear_propagate(&State::mode(32, 1).unwrap(), 2.0 * PI, &g);
    assert!(norm_x_sigma(&(&one - &State::mode(32, 1).unwrap()), &g, 1.0) < 1e-14);
}

#[test]
fn duhamel_of_propagated_source_is_linear_in_time() {
    let g = pi_grid(16);
    let w = random_state(&g, 0.0, 1.0, 0, &mut rng(2));
    let tg = time_grid(3.0, 300);
    let src: Vec<State> = tg.times().iter().map(|&s| linear_propagate(&w, s, &g)).collect();
    for m in [1, 150, 300] {
        let got = duhamel(&src, m, &tg, &g).unwrap();
        let t = tg.time(m);
        let exact = linear_propagate(&w, t, &g).scaled(t);
        assert!(norm_x_sigma(&(&got - &exact), &g, 0.0) < 1e-12 * (1.0 + t));
    }
    let zero = vec![State::zeros(16); 301];
    assert!(duhamel_all(&zero, &tg, &g).unwrap().iter().all(|s| s.u.iter().chain(&s.v).all(|&x| x == 0.0)));
}

#[test]
fn duhamel_trapezoid_is_second_order() {
    let g = pi_grid(8);
    let w = random_state(&g, 0.0, 1.0, 0, &mut rng(4));
    let end = |m: usize| {
        let tg = time_grid(2.0, m);
        let src: Vec<State> = tg.times().iter().map(|&s| w.scaled((3.0 * s).cos())).collect();
        duhamel(&src, m, &tg, &g).unwrap()
    };
    let fine = end(1 << 14);
    let errs: Vec<f64> = [128, 256, 512].iter().map(|&m| norm_x_sigma(&(&end(m) - &fine), &g, 0.0)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}, errors {errs:?}");
    }
}

#[test]
fn linear_integration_is_exact() {
    let g = pi_grid(32);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::zero());
    let u0 = random_state(&g, 0.6, 1.0, 0, &mut rng(5));
    let tg = time_grid(5.0, 500);
    let traj = integrate(&u0, &sys, &tg).unwrap();
    for (m, s) in traj.states.iter().enumerate() {
        assert!(norm_x_sigma(&(s - &linear_propagate(&u0, tg.time(m), &g)), &g, 0.6) < 1e-12);
    }
    let zero = integrate(&State::zeros(32), &WaveSystem::uniform(g.clone(), Nonlinearity::cubic()), &tg).unwrap();
    assert_eq!(zero.sup_norm(&g, 1.0), 0.0);
}

#[test]
fn splitting_self_convergence_is_second_order() {
    let g = pi_grid(16);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::cubic());
    let mut u0 = State::zeros(16);
    u0.u[0] = 0.1;
    let end = |m: usize| integrate(&u0, &sys, &time_grid(1.0, m)).unwrap().states.pop().unwrap();
    let fine = end(8192);
    let errs: Vec<f64> = [32, 64, 128].iter().map(|&m| norm_x_sigma(&(&end(m) - &fine), &g, 0.0)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}, errors {errs:?}");
    }
}

#[test]
fn energy_drift_is_second_order() {
    let g = pi_grid(16);
    let sys = WaveSystem::uniform(g.clone(), Nonlinearity::cubic());
    let u0 = random_state(&g, 0.0, 1.0, 0, &mut rng(6));
    let drift = |m: usize| {
        let traj = integrate(&u0, &sys, &time_grid(4.0, m)).unwrap();
        let e0 = energy(&traj.states[0], &sys);
        traj.states.iter().map(|s| (energy(s, &sys) - e0).abs()).fold(0.0, f64::max)
    };
    let d: Vec<f64> = [400, 800, 1600].iter().map(|&m| drift(m)).collect();
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.4..4.6).contains(&ratio), "ratio {ratio}, drifts {d:?}");
    }
}

#[test]
fn free_flow_preserves_every_norm() {
    let g = pi_grid(32);
    let s = random_state(&g, 1.0, 1.0, 0, &mut rng(7));
    for sigma in [0.0, 0.3, 0.6, 1.0] {
        for t in [0.1, 1.0, 13.0] {
            let a = norm_x_sigma(&s, &g, sigma);
            assert!((norm_x_sigma(&linear_propagate(&s, t, &g), &g, sigma) - a).abs() < 1e-12 * a.max(1.0));
        }
    }
}
