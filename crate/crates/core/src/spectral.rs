//! Sine eigenbasis of the Dirichlet Laplacian on (0, L), the X^sigma scale
//! and the collocation transforms.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Truncated eigenbasis e_j(x) = sqrt(2/L) sin(j pi x / L), j = 1..N, sampled on
/// the interior collocation nodes x_k = k L / (Q+1), k = 1..Q.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    length: f64,
    n: usize,
    quad_points: usize,
    beta: f64,
    eigenvalues: Vec<f64>,
    nodes: Vec<f64>,
    // Q x N, synth[(k, j)] = e_{j+1}(x_k)
    synth: DMatrix<f64>,
}

/// Smallest collocation size allowed for N modes.
pub fn min_quad_points(n: usize) -> usize {
    (3 * n).div_ceil(2)
}

impl SpectralGrid {
    /// Grid with the default collocation size 2N, which projects cubic
    /// products exactly.
    pub fn new(length: f64, n: usize, beta: f64) -> Result<Self> {
        Self::with_quad_points(length, n, 2 * n, beta)
    }

    pub fn with_quad_points(length: f64, n: usize, quad_points: usize, beta: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("domain length must be positive, got {length}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("truncation N must be positive".into()));
        }
        if quad_points < min_quad_points(n) {
            return Err(Error::InvalidParameter(format!(
                "quad_points {quad_points} below dealiasing minimum {}",
                min_quad_points(n)
            )));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
        }
        let eigenvalues = (1..=n).map(|j| (j as f64 * (PI / length)).powi(2)).collect();
        let h = length / (quad_points + 1) as f64;
        let nodes: Vec<f64> = (1..=quad_points).map(|k| k as f64 * h).collect();
        let amp = (2.0 / length).sqrt();
        let synth = DMatrix::from_fn(quad_points, n, |k, j| amp * ((j + 1) as f64 * PI * nodes[k] / length).sin());
        Ok(Self { length, n, quad_points, beta, eigenvalues, nodes, synth })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quad_points(&self) -> usize {
        self.quad_points
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// (j pi / L)^2 for 1 <= j <= N.
    pub fn eigenvalue(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.n {
            return Err(Error::IndexOutOfRange { index: j, n: self.n });
        }
        Ok(self.eigenvalues[j - 1])
    }

    /// Shifted eigenvalue lambda + beta of the 0-based mode `i`.
    pub fn shifted(&self, i: usize) -> f64 {
        self.eigenvalues[i] + self.beta
    }

    /// Wave frequency sqrt(lambda + beta) of the 0-based mode `i`.
    pub fn omega(&self, i: usize) -> f64 {
        self.shifted(i).sqrt()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weight L/(Q+1).
    pub fn weight(&self) -> f64 {
        self.length / (self.quad_points + 1) as f64
    }

    pub fn synthesis(&self) -> &DMatrix<f64> {
        &self.synth
    }

    pub fn to_physical(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: coeffs.len() });
        }
        Ok(self.synthesize(coeffs))
    }

    pub fn to_coeffs(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.quad_points {
            return Err(Error::SizeMismatch { expected: self.quad_points, got: samples.len() });
        }
        Ok(self.analyze(samples))
    }

    pub(crate) fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.quad_points];
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let col = self.synth.column(j);
            for (o, s) in out.iter_mut().zip(col.iter()) {
                *o += c * s;
            }
        }
        out
    }

    pub(crate) fn analyze(&self, samples: &[f64]) -> Vec<f64> {
        let h = self.weight();
        (0..self.n)
            .map(|j| h * self.synth.column(j).iter().zip(samples).map(|(s, x)| s * x).sum::<f64>())
            .collect()
    }

    /// Galerkin matrix h * S^T diag(w) S of multiplication by a sampled function.
    pub fn multiplier_matrix(&self, samples: &[f64]) -> DMatrix<f64> {
        let h = self.weight();
        let mut scaled = self.synth.clone();
        for (k, w) in samples.iter().enumerate() {
            scaled.row_mut(k).scale_mut(*w);
        }
        self.synth.transpose() * scaled * h
    }

    /// Quadrature of a sampled function over (0, L) on the collocation nodes.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        self.weight() * samples.iter().sum::<f64>()
    }
}

/// Regularity index sigma together with the nonlinearity gain epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex {
    pub sigma: f64,
    pub epsilon: f64,
}

impl SobolevIndex {
    pub fn new(sigma: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sigma) {
            return Err(Error::InvalidParameter(format!("sigma must lie in [0,1], got {sigma}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1], got {epsilon}")));
        }
        Ok(Self { sigma, epsilon })
    }
}

/// Coefficients (u, v) of position and velocity in the sine basis.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        Self { u: vec![0.0; n], v: vec![0.0; n] }
    }

    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::SizeMismatch { expected: u.len(), got: v.len() });
        }
        Ok(Self { u, v })
    }

    /// (e_j, 0) for the 1-based mode j.
    pub fn mode(n: usize, j: usize) -> Result<Self> {
        if j == 0 || j > n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        let mut s = Self::zeros(n);
        s.u[j - 1] = 1.0;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn axpy(&mut self, a: f64, other: &State) {
        for (x, y) in self.u.iter_mut().zip(&other.u) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
    }

    pub fn scaled(&self, a: f64) -> State {
        State { u: self.u.iter().map(|x| a * x).collect(), v: self.v.iter().map(|x| a * x).collect() }
    }
}

impl Add for &State {
    type Output = State;
    fn add(self, rhs: &State) -> State {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &State {
    type Output = State;
    fn sub(self, rhs: &State) -> State {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<&State> for f64 {
    type Output = State;
    fn mul(self, rhs: &State) -> State {
        rhs.scaled(self)
    }
}

/// sqrt( sum (l+b)^{1+s} u^2 + (l+b)^s v^2 ).
pub fn norm_x_sigma(state: &State, grid: &SpectralGrid, sigma: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..state.len().min(grid.n()) {
        let mu = grid.shifted(i);
        let wv = mu.powf(sigma);
        acc += mu * wv * state.u[i] * state.u[i] + wv * state.v[i] * state.v[i];
    }
    acc.sqrt()
}

/// Keeps modes 1..=n.
pub fn project_low(state: &State, n: usize) -> Result<State> {
    if n > state.len() {
        return Err(Error::CutoffOutOfRange { cutoff: n, n: state.len() });
    }
    let mut out = state.clone();
    out.u[n..].iter_mut().for_each(|x| *x = 0.0);
    out.v[n..].iter_mut().for_each(|x| *x = 0.0);
    Ok(out)
}

/// Keeps modes n+1..=N.
pub fn project_high(state: &State, n: usize) -> Result<State> {
    if n > state.len() {
        return Err(Error::CutoffOutOfRange { cutoff: n, n: state.len() });
    }
    let mut out = state.clone();
    out.u[..n].iter_mut().for_each(|x| *x = 0.0);
    out.v[..n].iter_mut().for_each(|x| *x = 0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_closed_form() {
        let g = SpectralGrid::new(PI, 8, 0.0).unwrap();
        assert_eq!(g.eigenvalue(1).unwrap(), 1.0);
        assert!((g.eigenvalue(5).unwrap() - 25.0).abs() < 1e-12);
        assert!(g.eigenvalue(0).is_err());
        assert!(g.eigenvalue(9).is_err());
        let g2 = SpectralGrid::new(2.0 * PI, 4, 0.0).unwrap();
        assert!((g2.eigenvalue(2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_collocation() {
        assert!(SpectralGrid::with_quad_points(PI, 16, 23, 0.0).is_err());
        assert!(SpectralGrid::with_quad_points(PI, 16, 24, 0.0).is_ok());
    }

    #[test]
    fn norm_examples() {
        let g = SpectralGrid::new(PI, 4, 0.0).unwrap();
        let e2 = State::mode(4, 2).unwrap();
        assert!((norm_x_sigma(&e2, &g, 1.0) - 4.0).abs() < 1e-12);
        assert_eq!(norm_x_sigma(&State::zeros(4), &g, 0.3), 0.0);
        let mut s = State::zeros(4);
        s.u[0] = 1.0;
        s.u[1] = 1.0;
        assert!((norm_x_sigma(&s, &g, 0.0) - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn projections() {
        let mut s = State::zeros(4);
        s.u[0] = 1.0;
        s.u[2] = 1.0;
        let lo = project_low(&s, 2).unwrap();
        assert_eq!(lo, State::mode(4, 1).unwrap());
        assert_eq!(project_low(&s, 4).unwrap(), s);
        assert_eq!(project_high(&s, 4).unwrap(), State::zeros(4));
        assert!(project_high(&s, 5).is_err());
    }

    #[test]
    fn delta_synthesizes_first_mode() {
        let g = SpectralGrid::new(PI, 6, 0.0).unwrap();
        let mut c = vec![0.0; 6];
        c[0] = 1.0;
        let x = g.to_physical(&c).unwrap();
        for (xk, node) in x.iter().zip(g.nodes()) {
            assert!((xk - (2.0 / PI).sqrt() * node.sin()).abs() < 1e-15);
        }
        assert!(g.to_physical(&[0.0; 6]).unwrap().iter().all(|&v| v == 0.0));
        assert!(g.to_physical(&[0.0; 5]).is_err());
        assert!(g.to_coeffs(&[0.0; 5]).is_err());
    }
}
