//! Hinged plate on the interval, the Schrodinger group, the z+/z- splitting
//! and the transfer of Schrodinger observability to the plate.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::{Rotation, TimeGrid};
use crate::error::{Error, Result};
use crate::observability::BumpFunction;
use crate::spectral::{SpectralGrid, State};

/// Largest dt*(l_j + l_k) accepted by the oscillatory quadratures.
pub const RESOLUTION_LIMIT: f64 = 0.5;

/// e^{tA} for the plate: per-mode rotation with frequency l_j.
pub fn plate_propagate(state: &State, t: f64, grid: &SpectralGrid) -> State {
    Rotation::new(grid.eigenvalues().to_vec(), t).apply(state)
}

/// ||(z0, z1)||_{H_s x H_{s-2}}
pub fn plate_norm(state: &State, grid: &SpectralGrid, s: f64) -> f64 {
    grid.eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, l)| l.powf(s) * state.u[i].powi(2) + l.powf(s - 2.0) * state.v[i].powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub z_plus: Vec<Complex64>,
    pub z_minus: Vec<Complex64>,
}

impl SplitPair {
    /// sum l^s (|z+|^2 + |z-|^2)
    pub fn norm_sq(&self, grid: &SpectralGrid, s: f64) -> f64 {
        grid.eigenvalues()
            .iter()
            .zip(self.z_plus.iter().zip(&self.z_minus))
            .map(|(l, (p, m))| l.powf(s) * (p.norm_sqr() + m.norm_sqr()))
            .sum()
    }
}

/// z+- = (z0 -+ i z1 / l) / 2
pub fn split(state: &State, grid: &SpectralGrid) -> Result<SplitPair> {
    if state.len() != grid.n() {
        return Err(Error::SizeMismatch { expected: grid.n(), got: state.len() });
    }
    let lam = grid.eigenvalues();
    let z_plus = (0..grid.n()).map(|i| Complex64::new(0.5 * state.u[i], -0.5 * state.v[i] / lam[i])).collect();
    let z_minus = (0..grid.n()).map(|i| Complex64::new(0.5 * state.u[i], 0.5 * state.v[i] / lam[i])).collect();
    Ok(SplitPair { z_plus, z_minus })
}

/// z0 = z+ + z-, z1 = i l (z+ - z-), real parts.
pub fn unsplit(pair: &SplitPair, grid: &SpectralGrid) -> Result<State> {
    let n = grid.n();
    if pair.z_plus.len() != n || pair.z_minus.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: pair.z_plus.len().min(pair.z_minus.len()) });
    }
    let lam = grid.eigenvalues();
    let i = Complex64::i();
    let u = (0..n).map(|k| (pair.z_plus[k] + pair.z_minus[k]).re).collect();
    let v = (0..n).map(|k| (i * lam[k] * (pair.z_plus[k] - pair.z_minus[k])).re).collect();
    State::new(u, v)
}

// C-infinity transition from 0 (x <= 0) to 1 (x >= 1).
fn transition(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Smooth rho on [0, T]: 1 on [start, end], compactly supported in (0, T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub start: f64,
    pub end: f64,
    pub t: f64,
}

impl CutoffProfile {
    pub fn new(start: f64, end: f64, t: f64) -> Result<Self> {
        if !(0.0 < start && start < end && end < t) {
            return Err(Error::InvalidParameter(format!("profile needs 0 < start < end < T, got ({start}, {end}, {t})")));
        }
        Ok(Self { start, end, t })
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= self.start {
            transition(t / self.start)
        } else if t >= self.end {
            transition((self.t - t) / (self.t - self.end))
        } else {
            1.0
        }
    }

    pub fn samples(&self, tg: &TimeGrid) -> Vec<f64> {
        tg.times().into_iter().map(|t| self.value(t)).collect()
    }

    /// Length of the window where rho = 1.
    pub fn inner_length(&self) -> f64 {
        self.end - self.start
    }

    /// int |d^N/dt^N rho^2| dt, the integration-by-parts constant.
    pub fn ibp_constant(&self, order: usize) -> f64 {
        let ramp = |width: f64| {
            let steps = 20_000;
            let h = 1.0 / steps as f64;
            let total: f64 = (1..steps)
                .map(|k| {
                    let jet = transition_jet(k as f64 * h, order);
                    let sq = jet_mul(&jet, &jet);
                    sq[order].abs()
                })
                .sum();
            // d/dt = (1/width) d/dx, dt = width dx
            total * h * factorial(order) * width.powi(1 - order as i32)
        };
        ramp(self.start) + ramp(self.t - self.end)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

// Truncated Taylor series arithmetic; c[k] = f^(k)(x) / k!.
fn jet_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len()).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
}

fn jet_recip(a: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; a.len()];
    g[0] = 1.0 / a[0];
    for k in 1..a.len() {
        g[k] = -(1..=k).map(|i| a[i] * g[k - i]).sum::<f64>() / a[0];
    }
    g
}

fn jet_exp(a: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; a.len()];
    g[0] = a[0].exp();
    for k in 1..a.len() {
        g[k] = (1..=k).map(|i| i as f64 * a[i] * g[k - i]).sum::<f64>() / k as f64;
    }
    g
}

fn transition_jet(x: f64, order: usize) -> Vec<f64> {
    let mut xs = vec![0.0; order + 1];
    xs[0] = x;
    if order >= 1 {
        xs[1] = 1.0;
    }
    let ys: Vec<f64> = xs.iter().enumerate().map(|(k, c)| if k == 0 { 1.0 - c } else { -c }).collect();
    let a = jet_exp(&jet_recip(&xs).iter().map(|c| -c).collect::<Vec<_>>());
    let b = jet_exp(&jet_recip(&ys).iter().map(|c| -c).collect::<Vec<_>>());
    let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
    jet_mul(&a, &jet_recip(&sum))
}

// int rho^2 e^{i xi t} dt by trapezoid, for every pair (j, k).
fn interaction_matrix(profile: &CutoffProfile, grid: &SpectralGrid, tg: &TimeGrid) -> DMatrix<Complex64> {
    let times = tg.times();
    let lam = grid.eigenvalues();
    let weight: Vec<f64> = tg.weights().iter().zip(&times).map(|(w, t)| w * profile.value(*t).powi(2)).collect();
    let phases = DMatrix::from_fn(times.len(), grid.n(), |m, j| Complex64::from_polar(1.0, lam[j] * times[m]));
    let weighted = DMatrix::from_fn(times.len(), grid.n(), |m, j| phases[(m, j)] * weight[m]);
    phases.transpose() * weighted
}

fn check_resolution(tg: &TimeGrid, xi: f64) -> Result<()> {
    let r = tg.dt() * xi;
    if r > RESOLUTION_LIMIT {
        return Err(Error::UnderResolved(r));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionBound {
    pub measured: f64,
    pub bound: f64,
}

/// |int rho^2 e^{it(l_j+l_k)}| against C_N (l_j + l_k)^{-N}.
pub fn interaction_bound(profile: &CutoffProfile, j: usize, k: usize, order: usize, grid: &SpectralGrid, tg: &TimeGrid) -> Result<InteractionBound> {
    if order < 1 {
        return Err(Error::InvalidParameter("interaction order N must be >= 1".into()));
    }
    pair_bound(profile, profile.ibp_constant(order), j, k, order, grid, tg)
}

/// [`interaction_bound`] for every pair 1 <= j, k <= max_mode, sharing one C_N.
pub fn interaction_bounds(profile: &CutoffProfile, max_mode: usize, order: usize, grid: &SpectralGrid, tg: &TimeGrid) -> Result<Vec<(usize, usize, InteractionBound)>> {
    if order < 1 {
        return Err(Error::InvalidParameter("interaction order N must be >= 1".into()));
    }
    let c_n = profile.ibp_constant(order);
    let mut out = Vec::with_capacity(max_mode * max_mode);
    for j in 1..=max_mode {
        for k in 1..=max_mode {
            out.push((j, k, pair_bound(profile, c_n, j, k, order, grid, tg)?));
        }
    }
    Ok(out)
}

fn pair_bound(profile: &CutoffProfile, c_n: f64, j: usize, k: usize, order: usize, grid: &SpectralGrid, tg: &TimeGrid) -> Result<InteractionBound> {
    let xi = grid.eigenvalue(j)? + grid.eigenvalue(k)?;
    check_resolution(tg, xi)?;
    let times = tg.times();
    let (mut re, mut im) = (0.0, 0.0);
    for (w, t) in tg.weights().iter().zip(&times) {
        let r2 = w * profile.value(*t).powi(2);
        re += r2 * (xi * t).cos();
        im += r2 * (xi * t).sin();
    }
    let measured = re.hypot(im);
    Ok(InteractionBound { measured, bound: c_n * xi.powi(-(order as i32)) })
}

/// sum over all pairs of |int rho^2 e^{it(l_j+l_k)}|.
pub fn interaction_sum(profile: &CutoffProfile, grid: &SpectralGrid, tg: &TimeGrid) -> Result<f64> {
    check_resolution(tg, 2.0 * grid.eigenvalues()[grid.n() - 1])?;
    Ok(interaction_matrix(profile, grid, tg).iter().map(|c| c.norm()).sum())
}

/// Real symmetric Gramian with its extremal eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralGramian {
    pub matrix: DMatrix<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl SpectralGramian {
    fn from_matrix(m: DMatrix<f64>) -> Self {
        let m = (&m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(m.clone());
        Self { lambda_min: eig.eigenvalues.min(), lambda_max: eig.eigenvalues.max(), matrix: m }
    }
}

fn squared_bump_matrix(bump: &BumpFunction, grid: &SpectralGrid) -> Result<DMatrix<f64>> {
    let sq = BumpFunction::from_samples(bump.samples().iter().map(|b| b * b).collect())?;
    sq.matrix(grid)
}

/// Gramian of psi0 -> b e^{itA0} psi0 in L^2, as the real 2N x 2N embedding
/// [[Re, -Im], [Im, Re]] of the Hermitian N x N Gramian.
pub fn schrodinger_gramian(grid: &SpectralGrid, bump: &BumpFunction, tg: &TimeGrid) -> Result<SpectralGramian> {
    let n = grid.n();
    let lam = grid.eigenvalues();
    check_resolution(tg, lam[n - 1] - lam[0])?;
    let bt = squared_bump_matrix(bump, grid)?;
    let times = tg.times();
    let weights = tg.weights();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let d = lam[k] - lam[j];
            let s: Complex64 = times.iter().zip(&weights).map(|(t, w)| Complex64::from_polar(*w, d * t)).sum();
            h[(j, k)] = s * bt[(j, k)];
            h[(k, j)] = h[(j, k)].conj();
        }
    }
    let real = DMatrix::from_fn(2 * n, 2 * n, |a, b| {
        let c = h[(a % n, b % n)];
        match (a < n, b < n) {
            (true, true) | (false, false) => c.re,
            (true, false) => -c.im,
            (false, true) => c.im,
        }
    });
    Ok(SpectralGramian::from_matrix(real))
}

/// Gramian of int_0^T ||b d_t z||^2 on H2 x H0-normalized coordinates
/// (e_j / l_j, 0) and (0, e_j).
pub fn plate_gramian(grid: &SpectralGrid, bump: &BumpFunction, tg: &TimeGrid) -> Result<SpectralGramian> {
    let n = grid.n();
    let lam = grid.eigenvalues();
    check_resolution(tg, lam[n - 1])?;
    let bt = squared_bump_matrix(bump, grid)?;
    let times = tg.times();
    let weights = tg.weights();
    let psi = DMatrix::from_fn(times.len(), 2 * n, |m, a| {
        let w = lam[a % n];
        let p = if a < n { -(w * times[m]).sin() } else { (w * times[m]).cos() };
        weights[m].sqrt() * p
    });
    let temporal = psi.tr_mul(&psi);
    Ok(SpectralGramian::from_matrix(DMatrix::from_fn(2 * n, 2 * n, |a, b| temporal[(a, b)] * bt[(a % n, b % n)])))
}

/// Lower bound assembled from the split Schrodinger terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakObservability {
    /// Coefficient of ||z||^2_{H2 x H0}: half the Schrodinger constant.
    pub c: f64,
    /// Coefficient of ||z||^2_{H0 x H-2} absorbing every interaction pair.
    pub remainder: f64,
    /// Full lower bound in H2 x H0 after bounding interactions in that norm.
    pub transfer_bound: f64,
    /// lambda_min of the directly assembled plate Gramian on [0, T].
    pub direct_lambda_min: f64,
    /// remainder > c: the weak inequality does not certify anything here.
    pub inconclusive: bool,
}

/// Weak plate observability from a Schrodinger constant on the inner window.
pub fn plate_weak_observability_constant(
    grid: &SpectralGrid,
    bump: &BumpFunction,
    profile: &CutoffProfile,
    tg: &TimeGrid,
    schr_constant: f64,
) -> Result<WeakObservability> {
    if (profile.t - tg.t).abs() > 1e-12 * tg.t {
        return Err(Error::GridMismatch(format!("profile horizon {} differs from time grid horizon {}", profile.t, tg.t)));
    }
    let n = grid.n();
    let lam = grid.eigenvalues();
    check_resolution(tg, 2.0 * lam[n - 1])?;
    let bt = squared_bump_matrix(bump, grid)?;
    let r = interaction_matrix(profile, grid, tg);
    let p = DMatrix::from_fn(n, n, |j, k| r[(j, k)] * bt[(j, k)]);
    let m = DMatrix::from_fn(n, n, |j, k| p[(j, k)] * (lam[j] * lam[k]));
    let p_norm = p.singular_values().max();
    let m_norm = m.singular_values().max();
    let c = 0.5 * schr_constant;
    let remainder = 0.5 * m_norm;
    let direct = plate_gramian(grid, bump, tg)?;
    Ok(WeakObservability {
        c,
        remainder,
        transfer_bound: 0.5 * (schr_constant - p_norm),
        direct_lambda_min: direct.lambda_min,
        inconclusive: remainder > c,
    })
}

/// min_j ||b e_j||_{L^2}
pub fn eigen_ucp_check(bump: &BumpFunction, grid: &SpectralGrid) -> Result<f64> {
    let bt = squared_bump_matrix(bump, grid)?;
    Ok((0..grid.n()).map(|j| bt[(j, j)].max(0.0).sqrt()).fold(f64::INFINITY, f64::min))
}
