//! Marginal likelihood estimation from an ABC posterior sample.
//!
//! The pipeline rests on a single identity: at any parameter value, the
//! marginal likelihood equals `likelihood * prior / posterior`. When the
//! sampler conditions on a sufficient statistic, the posterior given the
//! statistic *is* the posterior given the data, so every ingredient of the
//! identity is available without ever evaluating the likelihood function:
//!
//! 1. draw a posterior sample with ABC and take its mean `theta_hat`;
//! 2. estimate the posterior ordinate at `theta_hat` by KDE over the draws;
//! 3. simulate a large batch of observations at `theta_hat`;
//! 4. estimate the likelihood of the data from the batch's empirical pmf;
//! 5. assemble `log p(y) = log L + log prior - log posterior ordinate`.
//!
//! The prior ordinate is exact (the prior is always known here); only the
//! likelihood and the posterior ordinate are estimated.

use rayon::prelude::*;

use crate::abc::abc_posterior_with_statistic;
use crate::data::{AbcConfig, Dataset};
use crate::density::{kde_log_ordinate, simulated_log_likelihood};
use crate::error::{Result, ToolError};
use crate::models::{ModelSpec, SummaryStatistic};
use crate::rng::{RngStream, derive_seed, make_stream};

/// Which point of the posterior sample the identity is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointEstimate {
    /// Posterior mean (the default).
    #[default]
    Mean,
    /// Posterior median, exposed as a sensitivity probe.
    Median,
}

impl PointEstimate {
    pub fn name(self) -> &'static str {
        match self {
            PointEstimate::Mean => "mean",
            PointEstimate::Median => "median",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mean" => Ok(PointEstimate::Mean),
            "median" => Ok(PointEstimate::Median),
            other => Err(ToolError::InvalidConfig(format!(
                "unknown point estimate '{other}' (expected mean or median)"
            ))),
        }
    }
}

/// Estimator knobs on top of the sampler budgets in [`AbcConfig`].
#[derive(Debug, Clone, Copy)]
pub struct EstimatorSettings {
    /// Number of simulated observations behind the likelihood estimate.
    pub m_sims: u64,
    /// Additive smoothing for the empirical pmf; 0 means unseen observed
    /// values are a hard error.
    pub smoothing: f64,
    /// Evaluation point of the identity.
    pub point_estimate: PointEstimate,
    /// Statistic the sampler conditions on. Anything but the sufficient
    /// total turns the result into a knowingly approximate evidence value.
    pub statistic: SummaryStatistic,
}

impl EstimatorSettings {
    pub const DEFAULT_M_SIMS: u64 = 1_000_000;
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings {
            m_sims: Self::DEFAULT_M_SIMS,
            smoothing: 0.0,
            point_estimate: PointEstimate::Mean,
            statistic: SummaryStatistic::TotalCount,
        }
    }
}

/// Sampler diagnostics carried along with an estimate.
#[derive(Debug, Clone, Copy)]
pub struct AbcDiagnostics {
    pub acceptance_rate: f64,
    pub attempts: u64,
}

/// The budgets an estimate was produced under.
#[derive(Debug, Clone, Copy)]
pub struct Budgets {
    pub n_accept: usize,
    pub m_sims: u64,
    pub epsilon: f64,
    pub smoothing: f64,
}

/// A log marginal likelihood estimate with its three ingredients and enough
/// metadata to audit or reproduce it.
#[derive(Debug, Clone)]
pub struct EvidenceEstimate {
    pub model: ModelSpec,
    pub log_evidence: f64,
    pub theta_hat: f64,
    pub log_lik_hat: f64,
    pub log_prior_at_hat: f64,
    pub log_post_ordinate_hat: f64,
    pub kde_bandwidth: f64,
    pub statistic: SummaryStatistic,
    pub abc: AbcDiagnostics,
    pub budgets: Budgets,
    /// Content hash of the dataset the estimate refers to.
    pub dataset_hash: u64,
}

/// Run the full pipeline for one model and dataset.
pub fn estimate_log_evidence(
    model: ModelSpec,
    dataset: &Dataset,
    cfg: &AbcConfig,
    settings: &EstimatorSettings,
    rng: &RngStream,
) -> Result<EvidenceEstimate> {
    cfg.validate()?;

    let mut abc_rng = rng.derive("abc");
    let sample =
        abc_posterior_with_statistic(model, dataset, settings.statistic, cfg, &mut abc_rng)?;

    let theta_hat = match settings.point_estimate {
        PointEstimate::Mean => sample.mean(),
        PointEstimate::Median => sample.median(),
    };

    let kde = kde_log_ordinate(&sample.draws, theta_hat)?;

    let mut lik_rng = rng.derive("lik");
    let lik = simulated_log_likelihood(
        model,
        theta_hat,
        dataset,
        settings.m_sims,
        settings.smoothing,
        &mut lik_rng,
    )?;

    let log_prior_at_hat = model.log_prior_density(theta_hat)?;
    let log_evidence = lik.log_likelihood + log_prior_at_hat - kde.log_density;

    Ok(EvidenceEstimate {
        model,
        log_evidence,
        theta_hat,
        log_lik_hat: lik.log_likelihood,
        log_prior_at_hat,
        log_post_ordinate_hat: kde.log_density,
        kde_bandwidth: kde.bandwidth,
        statistic: settings.statistic,
        abc: AbcDiagnostics {
            acceptance_rate: sample.acceptance_rate(),
            attempts: sample.attempts,
        },
        budgets: Budgets {
            n_accept: cfg.n_accept,
            m_sims: settings.m_sims,
            epsilon: cfg.epsilon,
            smoothing: settings.smoothing,
        },
        dataset_hash: dataset.content_hash(),
    })
}

/// `log B12 = log p1(y) - log p2(y)`. Refuses to compare estimates that were
/// not produced from the same dataset — that mistake is silent otherwise.
pub fn log_bayes_factor(e1: &EvidenceEstimate, e2: &EvidenceEstimate) -> Result<f64> {
    if e1.dataset_hash != e2.dataset_hash {
        return Err(ToolError::InvalidConfig(
            "evidence estimates refer to different datasets; a Bayes factor \
             between them is meaningless"
                .into(),
        ));
    }
    Ok(e1.log_evidence - e2.log_evidence)
}

/// A batch of independent evidence estimates of the same dataset.
#[derive(Debug, Clone)]
pub struct ReplicateEvidence {
    pub estimates: Vec<EvidenceEstimate>,
    pub mean_log_evidence: f64,
    pub sd_log_evidence: f64,
}

/// Repeat the pipeline `n_replicates` times with seeds derived from
/// `base_seed`, in parallel. Each replicate is fully determined by its
/// derived seed, so results do not depend on worker count or scheduling.
pub fn replicate_evidence(
    model: ModelSpec,
    dataset: &Dataset,
    cfg: &AbcConfig,
    settings: &EstimatorSettings,
    n_replicates: usize,
    base_seed: u64,
) -> Result<ReplicateEvidence> {
    if n_replicates < 2 {
        return Err(ToolError::InvalidConfig(format!(
            "replicate studies need at least 2 replicates, got {n_replicates}"
        )));
    }
    let estimates: Vec<EvidenceEstimate> = (0..n_replicates)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(base_seed, r as u64);
            let rng = make_stream(seed, "evidence");
            estimate_log_evidence(model, dataset, cfg, settings, &rng).map_err(|e| {
                ToolError::from_kind_message(
                    e.kind(),
                    format!("replicate {r} (seed {seed}) failed: {e}"),
                )
            })
        })
        .collect::<Result<_>>()?;

    let n = estimates.len() as f64;
    let mean = estimates.iter().map(|e| e.log_evidence).sum::<f64>() / n;
    let var = estimates
        .iter()
        .map(|e| (e.log_evidence - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);

    Ok(ReplicateEvidence {
        estimates,
        mean_log_evidence: mean,
        sd_log_evidence: var.sqrt(),
    })
}
