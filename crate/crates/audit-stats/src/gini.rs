use num_traits::Float;

use crate::{Result, StatsError};

/// Gini index over per-provider usage counts.
///
/// Counts are sorted ascending and evaluated as
/// `sum_i (2i - n - 1) x_i / (n sum_i x_i)` with 1-based `i`. A single
/// provider yields 0; the supremum for `n` providers is `(n - 1) / n`.
pub fn gini<F: Float>(counts: &[u64]) -> Result<F> {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return Err(StatsError::EmptyCounts);
    }
    let n = counts.len();
    if n == 1 {
        return Ok(F::zero());
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    // numerator fits comfortably in i128 for count data
    let mut numer: i128 = 0;
    for (idx, &x) in sorted.iter().enumerate() {
        let i = (idx + 1) as i128;
        numer += (2 * i - n as i128 - 1) * x as i128;
    }
    let numer = F::from(numer).unwrap();
    let denom = F::from(n as u64 * total).unwrap();
    Ok(numer / denom)
}

/// Independent oracle: mean absolute difference form,
/// `sum_{i,j} |x_i - x_j| / (2 n sum_i x_i)`. Quadratic; test use only.
pub fn gini_mean_abs_diff<F: Float>(counts: &[u64]) -> Result<F> {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return Err(StatsError::EmptyCounts);
    }
    let n = counts.len();
    let mut abs_sum: u128 = 0;
    for &a in counts {
        for &b in counts {
            abs_sum += a.abs_diff(b) as u128;
        }
    }
    let numer = F::from(abs_sum).unwrap();
    let denom = F::from(2 * n as u128 * total as u128).unwrap();
    Ok(numer / denom)
}
