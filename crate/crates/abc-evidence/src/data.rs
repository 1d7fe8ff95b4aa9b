//! Observed data and sampler configuration.

use crate::error::{Result, ToolError};

/// An ordered vector of nonnegative integer counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    counts: Vec<u64>,
}

impl Dataset {
    /// A dataset must hold at least one observation.
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(ToolError::InvalidConfig(
                "dataset must contain at least one observation".into(),
            ));
        }
        Ok(Dataset { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Content hash used to assert that two evidence estimates refer to the
    /// same data before forming a Bayes factor.
    pub fn content_hash(&self) -> u64 {
        let mut hash = 0xCBF29CE484222325u64;
        for &c in &self.counts {
            for b in c.to_le_bytes() {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(0x100000001B3);
            }
        }
        hash
    }
}

/// Rejection-sampler budgets and tolerance.
///
/// The distance is fixed to the absolute difference of the scalar summary
/// statistic, so `epsilon` is on the scale of the statistic itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcConfig {
    /// Acceptance tolerance; with an integer-valued statistic any value
    /// below 1 forces exact matching.
    pub epsilon: f64,
    /// Number of accepted draws to collect.
    pub n_accept: usize,
    /// Cap on proposals per single acceptance before giving up.
    pub max_attempts_per_accept: u64,
    /// Base seed; front-ends derive per-purpose streams from it.
    pub seed: u64,
}

impl AbcConfig {
    pub const DEFAULT_EPSILON: f64 = 0.001;
    pub const DEFAULT_N_ACCEPT: usize = 10_000;
    pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000_000;

    pub fn new(epsilon: f64, n_accept: usize, max_attempts_per_accept: u64, seed: u64) -> Self {
        AbcConfig {
            epsilon,
            n_accept,
            max_attempts_per_accept,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(ToolError::InvalidConfig(format!(
                "epsilon must be a finite nonnegative number, got {}",
                self.epsilon
            )));
        }
        if self.n_accept == 0 {
            return Err(ToolError::InvalidConfig(
                "n_accept must be at least 1".into(),
            ));
        }
        if self.max_attempts_per_accept == 0 {
            return Err(ToolError::InvalidConfig(
                "max_attempts_per_accept must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for AbcConfig {
    fn default() -> Self {
        AbcConfig::new(
            Self::DEFAULT_EPSILON,
            Self::DEFAULT_N_ACCEPT,
            Self::DEFAULT_MAX_ATTEMPTS,
            0,
        )
    }
}

/// The ten-count toy dataset used as the default input throughout the CLI.
pub fn toy_dataset() -> Dataset {
    Dataset::new(vec![2, 3, 1, 1, 2, 1, 3, 1, 3, 1]).expect("nonempty")
}
