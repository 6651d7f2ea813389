//! Seeded random data whose X^sigma weights decay like j^{-2}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{norm_x_sigma, SpectralGrid, State};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for sample k. Coefficients are drawn mode by mode, so
/// a state drawn at 2N extends the one drawn at N from the same stream.
pub fn sample_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut r = rng(seed);
    r.set_stream(k);
    r
}

/// Random state supported on modes offset+1..=N, rescaled to the given
/// X^sigma norm. Coefficients are uniform in [-1,1] times j^{-(2+sigma)} for
/// u and j^{-(1+sigma)} for v, so each weighted term is O(j^{-2}) and the
/// law has a limit as N grows.
pub fn random_state<R: Rng>(grid: &SpectralGrid, sigma: f64, norm: f64, offset: usize, rng: &mut R) -> State {
    let n = grid.n();
    let mut s = State::zeros(n);
    for j in 0..n {
        let k = (j + 1) as f64;
        let a: f64 = rng.random_range(-1.0..=1.0);
        let b: f64 = rng.random_range(-1.0..=1.0);
        if j >= offset {
            s.u[j] = a * k.powf(-(2.0 + sigma));
            s.v[j] = b * k.powf(-(1.0 + sigma));
        }
    }
    let cur = norm_x_sigma(&s, grid, sigma);
    if cur > 0.0 {
        s = s.scaled(norm / cur);
    }
    s
}

/// Random state with X^sigma norm drawn uniformly in (0, radius].
pub fn random_state_in_ball<R: Rng>(grid: &SpectralGrid, sigma: f64, radius: f64, rng: &mut R) -> State {
    let r: f64 = rng.random_range(0.0..1.0);
    random_state(grid, sigma, radius * (1.0 - r), 0, rng)
}
