//! Observation through a smooth bump, observability Gramians, the
//! least-squares inverse of the observation map, and 1D ray tracing.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::spectral::{SpectralGrid, State};

/// Relative tolerance for the observability verdict.
pub const OBSERVABLE_RTOL: f64 = 1e-10;

/// Number of starting points used by [`gcc_time`].
pub const GCC_SAMPLES: usize = 10_000;

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0,1].
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

/// Observation set: disjoint plateau intervals plus the ramp width.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWindow {
    intervals: Vec<(f64, f64)>,
    plateau_margin: f64,
}

impl ObservationWindow {
    pub fn new(mut intervals: Vec<(f64, f64)>, plateau_margin: f64, length: f64) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParameter("observation window needs at least one interval".into()));
        }
        if !(plateau_margin > 0.0) {
            return Err(Error::InvalidParameter(format!("plateau_margin must be positive, got {plateau_margin}")));
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &intervals {
            if !(a < b) || a < 0.0 || b > length {
                return Err(Error::InvalidParameter(format!("interval ({a}, {b}) is not a nonempty subinterval of (0, {length})")));
            }
        }
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::InvalidParameter("observation intervals overlap".into()));
            }
        }
        Ok(Self { intervals, plateau_margin })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn plateau_margin(&self) -> f64 {
        self.plateau_margin
    }
}

/// Samples of b_omega on the collocation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFunction {
    samples: Vec<f64>,
}

impl BumpFunction {
    /// 1 on the closed plateau, quintic ramps of width `plateau_margin` outside.
    pub fn from_window(window: &ObservationWindow, grid: &SpectralGrid) -> Self {
        let samples = grid
            .nodes()
            .iter()
            .map(|&x| {
                window
                    .intervals()
                    .iter()
                    .map(|&(a, b)| {
                        let d = if x < a { a - x } else if x > b { x - b } else { 0.0 };
                        1.0 - smoothstep(d / window.plateau_margin())
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        Self { samples }
    }

    pub fn constant(grid: &SpectralGrid, value: f64) -> Result<Self> {
        Self::from_samples(vec![value; grid.quad_points()])
    }

    pub fn empty(grid: &SpectralGrid) -> Self {
        Self { samples: vec![0.0; grid.quad_points()] }
    }

    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidParameter("bump samples must lie in [0,1]".into()));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn check(&self, grid: &SpectralGrid) -> Result<()> {
        if self.samples.len() != grid.quad_points() {
            return Err(Error::SizeMismatch { expected: grid.quad_points(), got: self.samples.len() });
        }
        Ok(())
    }

    /// Galerkin matrix B_ij = <b e_j, e_i>.
    pub fn matrix(&self, grid: &SpectralGrid) -> Result<DMatrix<f64>> {
        self.check(grid)?;
        Ok(grid.multiplier_matrix(&self.samples))
    }
}

/// C U = (0, Pi(b v)).
pub fn observe(state: &State, bump: &BumpFunction, grid: &SpectralGrid) -> Result<State> {
    bump.check(grid)?;
    if state.len() != grid.n() {
        return Err(Error::SizeMismatch { expected: grid.n(), got: state.len() });
    }
    let phys = grid.synthesize(&state.v);
    let prod: Vec<f64> = phys.iter().zip(bump.samples()).map(|(v, b)| v * b).collect();
    Ok(State { u: vec![0.0; grid.n()], v: grid.analyze(&prod) })
}

/// Observed output C U(t_m) on a time grid; position parts are zero.
#[derive(Debug, Clone)]
pub struct ObservationSignal {
    pub time_grid: TimeGrid,
    pub values: Vec<State>,
}

impl ObservationSignal {
    pub fn new(time_grid: TimeGrid, values: Vec<State>) -> Result<Self> {
        if values.len() != time_grid.m + 1 {
            return Err(Error::SizeMismatch { expected: time_grid.m + 1, got: values.len() });
        }
        if values.iter().any(|s| s.u.iter().any(|&x| x != 0.0)) {
            return Err(Error::InvalidParameter("observation signal must have zero position components".into()));
        }
        Ok(Self { time_grid, values })
    }

    pub fn zeros(time_grid: TimeGrid, n: usize) -> Self {
        Self { time_grid, values: vec![State::zeros(n); time_grid.m + 1] }
    }

    /// Observes every node with the Galerkin matrix B.
    pub fn record(states: &[State], time_grid: TimeGrid, b: &DMatrix<f64>) -> Result<Self> {
        if states.len() != time_grid.m + 1 {
            return Err(Error::SizeMismatch { expected: time_grid.m + 1, got: states.len() });
        }
        let n = b.nrows();
        let vs = DMatrix::from_fn(n, states.len(), |j, m| states[m].v[j]);
        let obs = b * vs;
        let values = (0..states.len()).map(|m| State { u: vec![0.0; n], v: obs.column(m).iter().copied().collect() }).collect();
        Ok(Self { time_grid, values })
    }

    /// ||G||_{L^2 X^sigma}
    pub fn l2_norm(&self, grid: &SpectralGrid, sigma: f64) -> f64 {
        crate::dynamics::l2_time_norm(&self.values, &self.time_grid, grid, sigma)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { time_grid: self.time_grid, values: self.values.iter().map(|s| s.scaled(a)).collect() }
    }

    pub fn sub(&self, other: &ObservationSignal) -> Self {
        Self { time_grid: self.time_grid, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }
}

/// Which modes a Gramian acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    /// Modes 1..=N.
    Full,
    /// Modes n+1..=N.
    High(usize),
}

impl Subspace {
    /// 0-based index of the first mode kept.
    pub fn offset(&self) -> usize {
        match *self {
            Subspace::Full => 0,
            Subspace::High(n) => n,
        }
    }
}

/// Time-sampled observation Gramian in X^sigma-normalized coordinates.
///
/// Coordinates are ordered (position modes, velocity modes) over the
/// subspace; position coordinate a of mode j is the state (e_j / (l_j+b)^{(1+s)/2}, 0).
#[derive(Debug, Clone)]
pub struct Gramian {
    pub subspace: Subspace,
    pub sigma: f64,
    pub t: f64,
    pub matrix: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
    time_grid: TimeGrid,
    grid: SpectralGrid,
    obs: DMatrix<f64>,
}

// phi_a(t): v-coefficient of e^{tA} applied to normalized basis vector a.
fn basis_profile(grid: &SpectralGrid, offset: usize, sigma: f64, a: usize, t: f64) -> f64 {
    let d = grid.n() - offset;
    let i = offset + (a % d);
    let mu = grid.shifted(i);
    let w = mu.sqrt();
    if a < d {
        -w * (w * t).sin() / mu.powf(0.5 * (1.0 + sigma))
    } else {
        (w * t).cos() / mu.powf(0.5 * sigma)
    }
}

pub fn assemble_gramian(grid: &SpectralGrid, bump: &BumpFunction, time_grid: &TimeGrid, sigma: f64, subspace: Subspace) -> Result<Gramian> {
    let n = grid.n();
    let offset = subspace.offset();
    if offset >= n {
        return Err(Error::CutoffOutOfRange { cutoff: offset, n: n.saturating_sub(1) });
    }
    if !(0.0..=2.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("sigma must lie in [0,2], got {sigma}")));
    }
    let obs = bump.matrix(grid)?;
    let d = n - offset;
    let dsig = DVector::from_fn(n, |i, _| grid.shifted(i).powf(sigma));
    let weighted = obs.transpose() * DMatrix::from_diagonal(&dsig) * &obs;

    let weights = time_grid.weights();
    let times = time_grid.times();
    let psi = DMatrix::from_fn(times.len(), 2 * d, |m, a| weights[m].sqrt() * basis_profile(grid, offset, sigma, a, times[m]));
    let temporal = psi.tr_mul(&psi);
    let mut matrix = DMatrix::from_fn(2 * d, 2 * d, |a, b| temporal[(a, b)] * weighted[(offset + a % d, offset + b % d)]);
    matrix = (&matrix + matrix.transpose()) * 0.5;
    let eigen = SymmetricEigen::new(matrix.clone());
    let lambda_min = eigen.eigenvalues.min();
    let lambda_max = eigen.eigenvalues.max();
    Ok(Gramian { subspace, sigma, t: time_grid.t, matrix, lambda_min, lambda_max, eigen, time_grid: *time_grid, grid: grid.clone(), obs })
}

impl Gramian {
    pub fn is_observable(&self) -> bool {
        self.lambda_min > OBSERVABLE_RTOL * self.lambda_max
    }

    /// lambda_min^{-1/2}, the truncated observability constant.
    pub fn obs_constant(&self) -> Option<f64> {
        self.is_observable().then(|| self.lambda_min.powf(-0.5))
    }

    pub fn check_observable(&self) -> Result<()> {
        if self.is_observable() {
            Ok(())
        } else {
            Err(Error::NotObservable { lambda_min: self.lambda_min, lambda_max: self.lambda_max })
        }
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Galerkin observation matrix B.
    pub fn observation_matrix(&self) -> &DMatrix<f64> {
        &self.obs
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigen.eigenvalues
    }

    /// State represented by normalized coordinates.
    pub fn coords_to_state(&self, c: &DVector<f64>) -> State {
        let n = self.grid.n();
        let offset = self.subspace.offset();
        let d = n - offset;
        let mut s = State::zeros(n);
        for k in 0..d {
            let mu = self.grid.shifted(offset + k);
            s.u[offset + k] = c[k] / mu.powf(0.5 * (1.0 + self.sigma));
            s.v[offset + k] = c[d + k] / mu.powf(0.5 * self.sigma);
        }
        s
    }

    /// Normalized coordinates of the subspace component of a state.
    pub fn state_to_coords(&self, s: &State) -> DVector<f64> {
        let n = self.grid.n();
        let offset = self.subspace.offset();
        let d = n - offset;
        DVector::from_fn(2 * d, |a, _| {
            let i = offset + a % d;
            let mu = self.grid.shifted(i);
            if a < d {
                s.u[i] * mu.powf(0.5 * (1.0 + self.sigma))
            } else {
                s.v[i] * mu.powf(0.5 * self.sigma)
            }
        })
    }

    /// The adjoint O* y of the sampled observation map, in coordinates.
    fn adjoint(&self, signal: &ObservationSignal) -> DVector<f64> {
        let n = self.grid.n();
        let offset = self.subspace.offset();
        let d = n - offset;
        let weights = self.time_grid.weights();
        let times = self.time_grid.times();
        let ys = DMatrix::from_fn(n, signal.values.len(), |i, m| self.grid.shifted(i).powf(self.sigma) * signal.values[m].v[i]);
        let r = self.obs.tr_mul(&ys);
        let rhs: Vec<f64> = (0..2 * d)
            .into_par_iter()
            .map(|a| {
                let i = offset + a % d;
                (0..times.len()).map(|m| weights[m] * basis_profile(&self.grid, offset, self.sigma, a, times[m]) * r[(i, m)]).sum()
            })
            .collect();
        DVector::from_vec(rhs)
    }

    /// Solves G c = rhs through the stored eigendecomposition.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_observable()?;
        let v = &self.eigen.eigenvectors;
        let mut proj = v.tr_mul(rhs);
        for (p, l) in proj.iter_mut().zip(self.eigen.eigenvalues.iter()) {
            *p /= l;
        }
        Ok(v * proj)
    }
}

/// Least-squares W0 in the Gramian's subspace for the sampled signal.
pub fn pseudo_inverse_apply(gramian: &Gramian, signal: &ObservationSignal) -> Result<State> {
    if signal.time_grid != gramian.time_grid {
        return Err(Error::GridMismatch("signal and Gramian use different time grids".into()));
    }
    if signal.values.first().map(|s| s.len()) != Some(gramian.grid.n()) {
        return Err(Error::SizeMismatch { expected: gramian.grid.n(), got: signal.values.first().map_or(0, |s| s.len()) });
    }
    let rhs = gramian.adjoint(signal);
    let c = gramian.solve(&rhs)?;
    Ok(gramian.coords_to_state(&c))
}

/// Longest first-entry time of a reflecting unit-speed ray into the open
/// plateau, over sampled starts and both directions.
pub fn gcc_time(window: &ObservationWindow, length: f64) -> Result<f64> {
    if window.intervals().is_empty() {
        return Err(Error::InvalidParameter("empty observation window".into()));
    }
    let period = 2.0 * length;
    // Unfold the reflecting segment onto a circle of length 2L.
    let mut arcs = Vec::new();
    for &(a, b) in window.intervals() {
        arcs.push((a, b));
        arcs.push((period - b, period - a));
    }
    let first_entry = |y: f64| -> f64 {
        arcs.iter()
            .map(|&(a, b)| if y > a && y < b { 0.0 } else { (a - y).rem_euclid(period) })
            .fold(f64::INFINITY, f64::min)
    };
    let worst = (0..=GCC_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let x = length * i as f64 / GCC_SAMPLES as f64;
            first_entry(x).max(first_entry((period - x).rem_euclid(period)))
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Operator norm of [b, Delta] from H^{sigma+2} to H^{sigma+epsilon} over
/// the truncated basis.
pub fn commutator_check(bump: &BumpFunction, grid: &SpectralGrid, sigma: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&sigma) || (sigma - 0.5).abs() < 1e-12 {
        return Err(Error::InvalidParameter(format!("sigma must lie in [0,1] minus {{1/2}}, got {sigma}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1], got {epsilon}")));
    }
    let b = bump.matrix(grid)?;
    let lam = grid.eigenvalues();
    let k = DMatrix::from_fn(grid.n(), grid.n(), |i, j| {
        (lam[i] - lam[j]) * b[(i, j)] * lam[i].powf(0.5 * (sigma + epsilon)) * lam[j].powf(-0.5 * (sigma + 2.0))
    });
    Ok(k.singular_values().max())
}
