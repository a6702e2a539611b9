use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Result, StatsError};

/// Point estimate plus a percentile bootstrap distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary<F> {
    pub point: F,
    pub mean: F,
    pub ci_low: F,
    pub ci_high: F,
    pub replicates: Vec<F>,
    pub b: usize,
    pub rng_seed: u64,
}

/// Percentile bootstrap: `b` with-replacement resamples of the full
/// observation set, metric recomputed per replicate. Deterministic for a
/// fixed `rng_seed`. The 2.5/97.5 percentiles bound the interval.
pub fn bootstrap<T, F, M>(
    observations: &[T],
    b: usize,
    rng_seed: u64,
    metric: M,
) -> Result<BootstrapSummary<F>>
where
    T: Clone,
    F: Float,
    M: Fn(&[T]) -> F,
{
    if observations.is_empty() {
        return Err(StatsError::EmptyObservations);
    }
    let b = b.max(1);
    let point = metric(observations);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = observations.len();
    let mut replicates = Vec::with_capacity(b);
    let mut resample = Vec::with_capacity(n);
    for _ in 0..b {
        resample.clear();
        for _ in 0..n {
            resample.push(observations[rng.gen_range(0..n)].clone());
        }
        replicates.push(metric(&resample));
    }
    let mut sorted = replicates.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = sorted.iter().fold(F::zero(), |acc, &x| acc + x) / F::from(b).unwrap();
    Ok(BootstrapSummary {
        point,
        mean,
        ci_low: percentile(&sorted, 0.025),
        ci_high: percentile(&sorted, 0.975),
        replicates,
        b,
        rng_seed,
    })
}

fn percentile<F: Float>(sorted: &[F], q: f64) -> F {
    // linear interpolation between closest ranks
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = F::from(pos - lo as f64).unwrap();
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
