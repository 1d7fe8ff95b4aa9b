//! Nonparametric estimators for the two quantities the evidence pipeline
//! cannot evaluate exactly: the posterior ordinate at the point estimate and
//! the likelihood of the observed data at that point.
//!
//! The posterior ordinate uses a Gaussian-kernel density estimate with
//! Silverman's bandwidth `h = 0.9 * min(sd, IQR / 1.34) * N^(-1/5)`. The
//! likelihood of a discrete dataset is estimated from the empirical pmf of a
//! large batch of simulated observations, optionally with additive smoothing
//! `(count + alpha) / (M + alpha * K)` over the value range `{0, ..., K-1}`
//! spanned by observed and simulated data. By default `alpha = 0` and an
//! observed value that never showed up among the simulations is a hard
//! error instead of a silently smoothed-over hole.

use std::collections::BTreeMap;

use crate::data::Dataset;
use crate::error::{Result, ToolError};
use crate::models::{ModelSpec, ObservationSampler};
use crate::rng::RngStream;

/// Kernel density estimate evaluated at one point.
#[derive(Debug, Clone, Copy)]
pub struct KdeEstimate {
    /// Evaluation location.
    pub point: f64,
    /// Log of the estimated density at `point`.
    pub log_density: f64,
    /// Silverman bandwidth actually used.
    pub bandwidth: f64,
    /// Number of draws behind the estimate.
    pub sample_size: usize,
}

/// Simulation-based log likelihood of a dataset at a fixed parameter.
#[derive(Debug, Clone)]
pub struct SimulatedLikelihood {
    /// `sum_i log p_hat(y_i)`.
    pub log_likelihood: f64,
    /// Frequency of each simulated value among the `m_sims` draws.
    pub per_value_counts: BTreeMap<u64, u64>,
    /// Number of simulated observations.
    pub m_sims: u64,
    /// Additive smoothing constant used.
    pub smoothing: f64,
}

impl SimulatedLikelihood {
    /// Smoothed probability of value `k`; zero-count values inside the
    /// support range get `alpha / (M + alpha K)`.
    pub fn pmf(&self, k: u64) -> f64 {
        let support = self.support_size() as f64;
        let count = self.per_value_counts.get(&k).copied().unwrap_or(0) as f64;
        (count + self.smoothing) / (self.m_sims as f64 + self.smoothing * support)
    }

    /// Size of the value range `{0, ..., max}` the pmf is normalized over.
    pub fn support_size(&self) -> u64 {
        self.per_value_counts
            .keys()
            .next_back()
            .map_or(1, |&max| max + 1)
    }
}

/// Gaussian-kernel log density of `draws` at `point`, Silverman bandwidth.
pub fn kde_log_ordinate(draws: &[f64], point: f64) -> Result<KdeEstimate> {
    if draws.len() < 2 {
        return Err(ToolError::DegenerateSample(format!(
            "kernel density estimation needs at least 2 draws, got {}",
            draws.len()
        )));
    }
    if !point.is_finite() {
        return Err(ToolError::InvalidConfig(format!(
            "evaluation point must be finite, got {point}"
        )));
    }
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();

    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);

    let spread = sd.min(iqr / 1.34);
    let bandwidth = 0.9 * spread * n.powf(-0.2);
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(ToolError::DegenerateSample(format!(
            "zero or invalid bandwidth (sd = {sd}, iqr = {iqr}); draws are too concentrated"
        )));
    }

    // log-sum-exp over kernel exponents keeps far-away points from
    // underflowing the whole estimate.
    let mut max_exp = f64::NEG_INFINITY;
    let exps: Vec<f64> = sorted
        .iter()
        .map(|&x| {
            let z = (point - x) / bandwidth;
            let e = -0.5 * z * z;
            if e > max_exp {
                max_exp = e;
            }
            e
        })
        .collect();
    let sum: f64 = exps.iter().map(|&e| (e - max_exp).exp()).sum();
    let log_density = max_exp + sum.ln()
        - n.ln()
        - bandwidth.ln()
        - 0.5 * (2.0 * std::f64::consts::PI).ln();

    Ok(KdeEstimate {
        point,
        log_density,
        bandwidth,
        sample_size: draws.len(),
    })
}

/// Linear-interpolation quantile of pre-sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Estimate `sum_i log p(y_i; theta_hat)` from `m_sims` simulated
/// observations at `theta_hat`.
pub fn simulated_log_likelihood(
    model: ModelSpec,
    theta_hat: f64,
    dataset: &Dataset,
    m_sims: u64,
    smoothing: f64,
    rng: &mut RngStream,
) -> Result<SimulatedLikelihood> {
    if m_sims < 10_000 {
        return Err(ToolError::InvalidConfig(format!(
            "m_sims must be at least 10000, got {m_sims}"
        )));
    }
    if !smoothing.is_finite() || smoothing < 0.0 {
        return Err(ToolError::InvalidConfig(format!(
            "smoothing must be a finite nonnegative number, got {smoothing}"
        )));
    }
    let sampler = ObservationSampler::new(model, theta_hat)?;

    let mut per_value_counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..m_sims {
        *per_value_counts.entry(sampler.sample(rng)).or_insert(0) += 1;
    }

    // The pmf is normalized over {0, ..., max(observed, simulated)} so that
    // smoothing mass covers every value the estimate can be asked about.
    let max_sim = per_value_counts.keys().next_back().copied().unwrap_or(0);
    let max_obs = dataset.counts().iter().copied().max().unwrap_or(0);
    let max_value = max_sim.max(max_obs);
    per_value_counts.entry(max_value).or_insert(0);
    let support = (max_value + 1) as f64;

    let denom = m_sims as f64 + smoothing * support;
    let mut log_likelihood = 0.0;
    for &y in dataset.counts() {
        let count = per_value_counts.get(&y).copied().unwrap_or(0);
        if count == 0 && smoothing == 0.0 {
            return Err(ToolError::UnseenObservation(format!(
                "observed value {y} never appeared among {m_sims} simulations at \
                 theta = {theta_hat}; the unsmoothed estimate would be -inf"
            )));
        }
        log_likelihood += ((count as f64 + smoothing) / denom).ln();
    }

    Ok(SimulatedLikelihood {
        log_likelihood,
        per_value_counts,
        m_sims,
        smoothing,
    })
}
