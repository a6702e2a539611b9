//! Domain-level metric inputs and their bridges to the statistical kernels.

use std::collections::BTreeMap;

use audit_stats::{bootstrap, gini, BootstrapSummary64, StatsError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::ProviderId;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("count vector holds only sentinel providers")]
    OnlySentinels,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Per-provider usage counts for one (model, scenario) cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderCountVector {
    /// BTreeMap keeps provider order stable across runs.
    pub counts: BTreeMap<ProviderId, u64>,
    pub scenario_id: String,
    pub model_id: String,
    /// Whether the `None` sentinel participates in the GI denominator.
    pub include_none: bool,
}

impl ProviderCountVector {
    pub fn new(scenario_id: &str, model_id: &str, include_none: bool) -> Self {
        ProviderCountVector {
            counts: BTreeMap::new(),
            scenario_id: scenario_id.to_string(),
            model_id: model_id.to_string(),
            include_none,
        }
    }

    pub fn record(&mut self, provider: &ProviderId) {
        if !self.include_none && provider.as_str() == crate::registry::PROVIDER_NONE {
            return;
        }
        *self.counts.entry(provider.clone()).or_insert(0) += 1;
    }

    /// Distinct providers present in the vector (the n the GI range depends on).
    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn count_values(&self) -> Vec<u64> {
        self.counts.values().copied().collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn gini(&self) -> Result<f64, MetricsError> {
        Ok(gini::<f64>(&self.count_values())?)
    }

    /// Bootstrap the GI by resampling the underlying labeled responses.
    /// Observations are the provider labels, one per counted response.
    pub fn gini_bootstrap(&self, b: usize, rng_seed: u64) -> Result<BootstrapSummary64, MetricsError> {
        let observations = self.expand();
        let summary = bootstrap(&observations, b, rng_seed, |sample: &[ProviderId]| {
            let mut counts: BTreeMap<&ProviderId, u64> = BTreeMap::new();
            for p in sample {
                *counts.entry(p).or_insert(0) += 1;
            }
            let values: Vec<u64> = counts.values().copied().collect();
            gini::<f64>(&values).unwrap_or(0.0)
        })?;
        Ok(summary)
    }

    /// One observation per counted response, in provider order.
    fn expand(&self) -> Vec<ProviderId> {
        let mut out = Vec::with_capacity(self.total() as usize);
        for (provider, &count) in &self.counts {
            for _ in 0..count {
                out.push(provider.clone());
            }
        }
        out
    }

    /// Most-used providers, excluding the `None` sentinel. Ties are
    /// reported in full rather than silently broken.
    pub fn preferred_provider(&self) -> Result<Vec<ProviderId>, MetricsError> {
        let max = self
            .counts
            .iter()
            .filter(|(p, _)| p.as_str() != crate::registry::PROVIDER_NONE)
            .map(|(_, &c)| c)
            .max()
            .ok_or(MetricsError::OnlySentinels)?;
        Ok(self
            .counts
            .iter()
            .filter(|(p, &c)| p.as_str() != crate::registry::PROVIDER_NONE && c == max)
            .map(|(p, _)| p.clone())
            .collect())
    }
}

/// Modification counts for one (model, task) cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModificationTally {
    /// Modification (provider-swap) cases.
    pub n_m: u64,
    /// Total counted cases (valid responses minus `ServiceDropped` ones).
    pub n: u64,
    /// Responses that dropped the service entirely, reported separately.
    pub dropped: u64,
    pub task: String,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_id: Option<String>,
}

impl ModificationTally {
    pub fn ratio(&self) -> Result<f64, MetricsError> {
        Ok(audit_stats::modification_ratio::<f64>(self.n_m, self.n)?)
    }

    /// Exact 2-decimal percent string, e.g. "27.30".
    pub fn ratio_percent(&self) -> Result<String, MetricsError> {
        Ok(audit_stats::format_percent(self.n_m, self.n)?)
    }

    /// Bootstrap the MR over the per-case modification indicators.
    pub fn ratio_bootstrap(&self, b: usize, rng_seed: u64) -> Result<BootstrapSummary64, MetricsError> {
        let mut observations = vec![1u8; self.n_m as usize];
        observations.extend(std::iter::repeat(0u8).take((self.n - self.n_m) as usize));
        let summary = bootstrap(&observations, b, rng_seed, |sample: &[u8]| {
            let m = sample.iter().filter(|&&x| x == 1).count() as f64;
            m / sample.len() as f64 * 100.0
        })?;
        Ok(summary)
    }
}
