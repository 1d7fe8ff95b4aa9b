//! Likelihood-free marginal likelihood estimation for count models.
//!
//! Rejection ABC conditioned on a sufficient summary statistic recovers a
//! model's posterior without touching the likelihood function. This crate
//! pushes that one step further: because the marginal likelihood equals
//! `likelihood * prior / posterior` at any parameter value, an ABC posterior
//! sample plus a batch of forward simulations is enough to estimate the
//! model evidence itself — the quantity Bayes factors are made of, and the
//! one the classic ABC model-choice sampler gets systematically wrong even
//! with a statistic that is sufficient for the parameters of both models.
//!
//! What ships:
//!
//! * [`models`] — two conjugate count models (Poisson rate with an `Exp(1)`
//!   prior, geometric success probability with a uniform prior) whose exact
//!   likelihood, posterior, and marginal likelihood double as test oracles;
//! * [`abc`] — the single-model rejection sampler and the cross-model
//!   model-choice sampler;
//! * [`density`] — a Gaussian KDE for the posterior ordinate and an
//!   empirical-pmf likelihood estimator;
//! * [`evidence`] — the estimator pipeline gluing the above together, plus
//!   Bayes factors and replicate studies;
//! * [`harness`] — the `abc-evidence` CLI: reproducible experiments with
//!   CSV/SVG artifacts.
//!
//! # Quick start
//!
//! ```
//! use abc_evidence::abc::abc_posterior;
//! use abc_evidence::data::{AbcConfig, Dataset};
//! use abc_evidence::evidence::{EstimatorSettings, estimate_log_evidence};
//! use abc_evidence::models::ModelSpec;
//! use abc_evidence::rng::make_stream;
//!
//! let data = Dataset::new(vec![2, 3, 1, 1, 2, 1, 3, 1, 3, 1])?;
//! let cfg = AbcConfig::new(0.001, 2_000, 10_000_000, 42);
//!
//! // Posterior sample given the total count (exact conditioning here,
//! // because the statistic is integer-valued and epsilon < 1).
//! let mut rng = make_stream(42, "abc");
//! let sample = abc_posterior(ModelSpec::PoissonExp, &data, &cfg, &mut rng)?;
//! assert!(sample.matched_stats.iter().all(|&s| s == 18));
//!
//! // Full evidence estimate, compared against the conjugate closed form.
//! let settings = EstimatorSettings { m_sims: 100_000, ..Default::default() };
//! let est = estimate_log_evidence(
//!     ModelSpec::PoissonExp, &data, &cfg, &settings, &make_stream(42, "evidence"))?;
//! let exact = ModelSpec::PoissonExp.exact_log_marginal(&data);
//! assert!((est.log_evidence - exact).abs() < 0.2);
//! # Ok::<(), abc_evidence::error::ToolError>(())
//! ```

pub mod abc;
pub mod data;
pub mod density;
pub mod error;
pub mod evidence;
pub mod harness;
pub mod models;
pub mod rng;

pub use abc::{ModelChoiceSample, PosteriorSample, abc_model_choice, abc_posterior};
pub use data::{AbcConfig, Dataset};
pub use density::{KdeEstimate, SimulatedLikelihood, kde_log_ordinate, simulated_log_likelihood};
pub use error::{ErrorKind, Result, ToolError};
pub use evidence::{
    EstimatorSettings, EvidenceEstimate, PointEstimate, estimate_log_evidence, log_bayes_factor,
    replicate_evidence,
};
pub use models::{ModelSpec, SuffStat, SummaryStatistic, sufficient_stat};
pub use rng::{RngStream, make_stream};

/// The guide chapters double as compile-and-run tests: every fenced Rust
/// block below is executed by `cargo test --doc`, which keeps the book in
/// sync with the crate it documents.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/rejection-abc.md")]
    mod rejection_abc {}
    #[doc = include_str!("../../../book/src/conjugate-models.md")]
    mod conjugate_models {}
    #[doc = include_str!("../../../book/src/evidence-from-summaries.md")]
    mod evidence_from_summaries {}
    #[doc = include_str!("../../../book/src/model-choice-pitfall.md")]
    mod model_choice_pitfall {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
