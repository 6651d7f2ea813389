//! Exact linear flow, the semilinear nonlinearity, Duhamel sums and the
//! splitting integrator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::{norm_x_sigma, SpectralGrid, State};

/// Polynomial f(u) = sum_k c_k u^k with k >= 1, so f(0) = 0 by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    // coeffs[k] multiplies u^(k+1)
    coeffs: Vec<f64>,
}

impl Nonlinearity {
    /// `coeffs[k]` is the coefficient of u^(k+1).
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("nonlinearity coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn cubic() -> Self {
        Self { coeffs: vec![0.0, 0.0, 1.0] }
    }

    /// -a u + b u^3
    pub fn double_well(a: f64, b: f64) -> Self {
        Self { coeffs: vec![-a, 0.0, b] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c) * u
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.coeffs.iter().enumerate().rev().fold(0.0, |acc, (k, c)| acc * u + (k + 1) as f64 * c)
    }

    /// Primitive P with P(0) = 0.
    pub fn primitive(&self, u: f64) -> f64 {
        self.coeffs.iter().enumerate().rev().fold(0.0, |acc, (k, c)| acc * u + c / (k + 2) as f64) * u * u
    }

    /// s f(s) >= 0, checked on a symmetric sample of [-r, r].
    pub fn is_defocusing_on(&self, r: f64) -> bool {
        (0..=400).all(|i| {
            let s = -r + 2.0 * r * i as f64 / 400.0;
            s * self.eval(s) >= -1e-14
        })
    }
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Self::cubic()
    }
}

/// The semilinear system  U' = A U + F(U),  F(U) = (0, -Pi(chi~ f(u)) + beta u).
#[derive(Debug, Clone)]
pub struct WaveSystem {
    pub grid: SpectralGrid,
    pub f: Nonlinearity,
    chi_tilde: Vec<f64>,
}

impl WaveSystem {
    pub fn new(grid: SpectralGrid, f: Nonlinearity, chi_tilde: Vec<f64>) -> Result<Self> {
        if chi_tilde.len() != grid.quad_points() {
            return Err(Error::SizeMismatch { expected: grid.quad_points(), got: chi_tilde.len() });
        }
        if chi_tilde.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidParameter("chi_tilde samples must lie in [0,1]".into()));
        }
        Ok(Self { grid, f, chi_tilde })
    }

    /// chi~ identically 1.
    pub fn uniform(grid: SpectralGrid, f: Nonlinearity) -> Self {
        let chi_tilde = vec![1.0; grid.quad_points()];
        Self { grid, f, chi_tilde }
    }

    pub fn beta(&self) -> f64 {
        self.grid.beta()
    }

    pub fn chi_tilde(&self) -> &[f64] {
        &self.chi_tilde
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }
}

/// Uniform grid t_m = m T / M, m = 0..M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t: f64,
    pub m: usize,
}

impl TimeGrid {
    pub fn new(t: f64, m: usize) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon T must be positive, got {t}")));
        }
        if m < 2 {
            return Err(Error::InvalidParameter(format!("step count M must be >= 2, got {m}")));
        }
        Ok(Self { t, m })
    }

    pub fn dt(&self) -> f64 {
        self.t / self.m as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.m).map(|m| self.time(m)).collect()
    }

    /// Trapezoid weights on the M+1 nodes.
    pub fn weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.m + 1];
        w[0] = 0.5 * dt;
        w[self.m] = 0.5 * dt;
        w
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub time_grid: TimeGrid,
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn new(time_grid: TimeGrid, states: Vec<State>) -> Result<Self> {
        if states.len() != time_grid.m + 1 {
            return Err(Error::SizeMismatch { expected: time_grid.m + 1, got: states.len() });
        }
        Ok(Self { time_grid, states })
    }

    pub fn zeros(time_grid: TimeGrid, n: usize) -> Self {
        Self { time_grid, states: vec![State::zeros(n); time_grid.m + 1] }
    }

    /// sup_t ||U(t)||_{X^sigma}
    pub fn sup_norm(&self, grid: &SpectralGrid, sigma: f64) -> f64 {
        self.states.iter().map(|s| norm_x_sigma(s, grid, sigma)).fold(0.0, f64::max)
    }

    /// Trapezoid L^2 in time of the X^sigma norm.
    pub fn l2_norm(&self, grid: &SpectralGrid, sigma: f64) -> f64 {
        l2_time_norm(&self.states, &self.time_grid, grid, sigma)
    }

    /// sup_t ||U(t) - V(t)||_{X^sigma}
    pub fn sup_distance(&self, other: &Trajectory, grid: &SpectralGrid, sigma: f64) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| norm_x_sigma(&(a - b), grid, sigma))
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Trajectory) -> Trajectory {
        Trajectory { time_grid: self.time_grid, states: self.states.iter().zip(&other.states).map(|(a, b)| a + b).collect() }
    }
}

pub(crate) fn l2_time_norm(states: &[State], tg: &TimeGrid, grid: &SpectralGrid, sigma: f64) -> f64 {
    tg.weights()
        .iter()
        .zip(states)
        .map(|(w, s)| w * norm_x_sigma(s, grid, sigma).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn l1_time_norm(states: &[State], tg: &TimeGrid, grid: &SpectralGrid, sigma: f64) -> f64 {
    tg.weights().iter().zip(states).map(|(w, s)| w * norm_x_sigma(s, grid, sigma)).sum()
}

/// Per-mode rotation by e^{tA} for a fixed t, with frequencies w_j.
#[derive(Debug, Clone)]
pub(crate) struct Rotation {
    cos: Vec<f64>,
    sin: Vec<f64>,
    omega: Vec<f64>,
}

impl Rotation {
    pub(crate) fn new(omega: Vec<f64>, t: f64) -> Self {
        let cos = omega.iter().map(|w| (w * t).cos()).collect();
        let sin = omega.iter().map(|w| (w * t).sin()).collect();
        Self { cos, sin, omega }
    }

    pub(crate) fn wave(grid: &SpectralGrid, t: f64) -> Self {
        Self::new((0..grid.n()).map(|i| grid.omega(i)).collect(), t)
    }

    pub(crate) fn apply_in_place(&self, s: &mut State) {
        for i in 0..s.len() {
            let (u, v) = (s.u[i], s.v[i]);
            let (c, sn, w) = (self.cos[i], self.sin[i], self.omega[i]);
            s.u[i] = c * u + sn / w * v;
            s.v[i] = -w * sn * u + c * v;
        }
    }

    pub(crate) fn apply(&self, s: &State) -> State {
        let mut out = s.clone();
        self.apply_in_place(&mut out);
        out
    }
}

/// e^{tA} applied mode by mode with w_j = sqrt(l_j + beta).
pub fn linear_propagate(state: &State, t: f64, grid: &SpectralGrid) -> State {
    Rotation::wave(grid, t).apply(state)
}

/// F(U) = (0, -Pi(chi~ f(u)) + beta u) by collocation.
#[allow(non_snake_case)]
pub fn apply_F(state: &State, system: &WaveSystem) -> State {
    let n = system.n();
    let mut out = State::zeros(n);
    if !system.f.is_zero() {
        let phys = system.grid.synthesize(&state.u);
        let g: Vec<f64> = phys.iter().zip(system.chi_tilde()).map(|(u, c)| c * system.f.eval(*u)).collect();
        let proj = system.grid.analyze(&g);
        for (o, p) in out.v.iter_mut().zip(proj) {
            *o = -p;
        }
    }
    let beta = system.beta();
    if beta != 0.0 {
        for (o, u) in out.v.iter_mut().zip(&state.u) {
            *o += beta * u;
        }
    }
    out
}

/// F applied to many states at once through dense matrix products.
#[allow(non_snake_case)]
pub fn apply_F_batch(states: &[State], system: &WaveSystem) -> Vec<State> {
    let n = system.n();
    let cols = states.len();
    let beta = system.beta();
    let mut out: Vec<State> = states
        .iter()
        .map(|s| State { u: vec![0.0; n], v: s.u.iter().map(|u| beta * u).collect() })
        .collect();
    if system.f.is_zero() || cols == 0 {
        return out;
    }
    let grid = &system.grid;
    let coeffs = DMatrix::from_fn(n, cols, |j, c| states[c].u[j]);
    let mut phys = grid.synthesis() * coeffs;
    for c in 0..cols {
        for (k, chi) in system.chi_tilde().iter().enumerate() {
            let x = phys[(k, c)];
            phys[(k, c)] = chi * system.f.eval(x);
        }
    }
    let proj = grid.synthesis().tr_mul(&phys) * grid.weight();
    for (c, o) in out.iter_mut().enumerate() {
        for j in 0..n {
            o.v[j] -= proj[(j, c)];
        }
    }
    out
}

/// Trapezoid approximation of I(t_m) g = int_0^{t_m} e^{(t_m - s)A} g(s) ds.
pub fn duhamel(source: &[State], t_index: usize, time_grid: &TimeGrid, grid: &SpectralGrid) -> Result<State> {
    if t_index > time_grid.m || t_index >= source.len() {
        return Err(Error::IndexOutOfRange { index: t_index, n: time_grid.m.min(source.len().saturating_sub(1)) });
    }
    Ok(duhamel_recursion(&source[..=t_index], time_grid.dt(), grid).pop().unwrap_or_else(|| State::zeros(grid.n())))
}

/// Duhamel sums at every node of the grid.
pub fn duhamel_all(source: &[State], time_grid: &TimeGrid, grid: &SpectralGrid) -> Result<Vec<State>> {
    if source.len() != time_grid.m + 1 {
        return Err(Error::SizeMismatch { expected: time_grid.m + 1, got: source.len() });
    }
    Ok(duhamel_recursion(source, time_grid.dt(), grid))
}

// I_{m+1} = e^{dt A}(I_m + dt/2 g_m) + dt/2 g_{m+1}, equal to the composite
// trapezoid rule for the propagated integrand.
fn duhamel_recursion(source: &[State], dt: f64, grid: &SpectralGrid) -> Vec<State> {
    let n = grid.n();
    let rot = Rotation::wave(grid, dt);
    let mut out = Vec::with_capacity(source.len());
    let mut acc = State::zeros(n);
    out.push(acc.clone());
    for win in source.windows(2) {
        acc.axpy(0.5 * dt, &win[0]);
        rot.apply_in_place(&mut acc);
        acc.axpy(0.5 * dt, &win[1]);
        out.push(acc.clone());
    }
    out
}

/// Kick-drift-kick Strang splitting.
pub fn integrate(u0: &State, system: &WaveSystem, time_grid: &TimeGrid) -> Result<Trajectory> {
    let n = system.n();
    if u0.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: u0.len() });
    }
    let dt = time_grid.dt();
    let rot = Rotation::wave(&system.grid, dt);
    let mut states = Vec::with_capacity(time_grid.m + 1);
    let mut cur = u0.clone();
    let mut force = apply_F(&cur, system);
    states.push(cur.clone());
    for step in 1..=time_grid.m {
        cur.axpy(0.5 * dt, &force);
        rot.apply_in_place(&mut cur);
        force = apply_F(&cur, system);
        cur.axpy(0.5 * dt, &force);
        if !cur.is_finite() {
            return Err(Error::IntegrationFailure { step });
        }
        states.push(cur.clone());
    }
    Ok(Trajectory { time_grid: *time_grid, states })
}

/// E = 1/2 ||U||^2_{X^0} - beta/2 ||u||^2 + int chi~ P(u).
pub fn energy(state: &State, system: &WaveSystem) -> f64 {
    let grid = &system.grid;
    let quad = 0.5 * norm_x_sigma(state, grid, 0.0).powi(2) - 0.5 * grid.beta() * state.u.iter().map(|x| x * x).sum::<f64>();
    if system.f.is_zero() {
        return quad;
    }
    let phys = grid.synthesize(&state.u);
    let pot: Vec<f64> = phys.iter().zip(system.chi_tilde()).map(|(u, c)| c * system.f.primitive(*u)).collect();
    quad + grid.integrate(&pot)
}
