//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use wave_observe::dynamics::TimeGrid;
use wave_observe::observability::{BumpFunction, ObservationWindow};
use wave_observe::spectral::SpectralGrid;

/// sqrt(2/L) sin(j pi x / L), evaluated directly.
pub fn sine(j: usize, x: f64, length: f64) -> f64 {
    (2.0 / length).sqrt() * (j as f64 * PI * x / length).sin()
}

/// Composite Simpson rule on [a, b] with `panels` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h)).sum();
    h / 3.0 * (f(a) + f(b) + inner)
}

/// Quintic bump with unit plateau on [a, b] and ramps of width `margin`,
/// written out independently of the library.
pub fn bump_value(x: f64, a: f64, b: f64, margin: f64) -> f64 {
    let d = if x < a { a - x } else if x > b { x - b } else { 0.0 };
    let t = (d / margin).clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

pub fn pi_grid(n: usize) -> SpectralGrid {
    SpectralGrid::new(PI, n, 0.0).unwrap()
}

pub fn window_bump(grid: &SpectralGrid, a: f64, b: f64, margin: f64) -> BumpFunction {
    let w = ObservationWindow::new(vec![(a, b)], margin, grid.length()).unwrap();
    BumpFunction::from_window(&w, grid)
}

pub fn standard_bump(grid: &SpectralGrid) -> BumpFunction {
    window_bump(grid, 0.5, 1.5, 0.2)
}

pub fn time_grid(t: f64, m: usize) -> TimeGrid {
    TimeGrid::new(t, m).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
