use num_traits::Float;

use crate::{Result, StatsError};

/// Modification ratio `N_m / N * 100%` as a float.
pub fn modification_ratio<F: Float>(modified: u64, total: u64) -> Result<F> {
    if total == 0 {
        return Err(StatsError::EmptyTally);
    }
    let ratio = F::from(modified).unwrap() / F::from(total).unwrap();
    Ok(ratio * F::from(100).unwrap())
}

/// Percentage at two decimals, computed in integer arithmetic so the
/// printed value never suffers float drift. Rounds half away from zero.
pub fn format_percent(modified: u64, total: u64) -> Result<String> {
    if total == 0 {
        return Err(StatsError::EmptyTally);
    }
    // value in hundredths of a percent: modified / total * 10000
    let scaled = modified as u128 * 10_000;
    let hundredths = (2 * scaled + total as u128) / (2 * total as u128);
    Ok(format!("{}.{:02}", hundredths / 100, hundredths % 100))
}
