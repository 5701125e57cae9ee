use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingStrategy {
    /// Seeded sample without replacement.
    Random { seed: u64 },
    /// `floor(i * n_total / k)` for `i` in `0..k`.
    Uniform,
}

/// Picks `k` distinct frame indices out of `n_total`, ascending.
pub fn sample_frames(n_total: u64, k: u64, strategy: SamplingStrategy) -> Result<Vec<u64>> {
    if k == 0 || k > n_total {
        return Err(Error::invalid_argument(format!(
            "need 0 < k <= n_total, got k={k}, n_total={n_total}"
        )));
    }
    match strategy {
        SamplingStrategy::Uniform => Ok((0..k)
            .map(|i| ((i as u128 * n_total as u128) / k as u128) as u64)
            .collect()),
        SamplingStrategy::Random { seed } => {
            let n = usize::try_from(n_total).map_err(|_| Error::invalid_argument("n_total too large"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked: Vec<u64> = rand::seq::index::sample(&mut rng, n, k as usize)
                .into_iter()
                .map(|i| i as u64)
                .collect();
            picked.sort_unstable();
            Ok(picked)
        }
    }
}
