//! Generative count models with conjugate closed forms.
//!
//! Two models ship:
//!
//! * [`ModelSpec::PoissonExp`] — observations `y ~ Poisson(lambda)` with the
//!   rate prior `lambda ~ Exp(1)`. The posterior given a total count `s` from
//!   `n` observations is `Gamma(s + 1, n + 1)` (shape, rate) and the marginal
//!   likelihood is `Gamma(s+1) / ((n+1)^(s+1) * prod_i y_i!)`.
//! * [`ModelSpec::GeometricUniform`] — observations counted as failures
//!   before the first success, `P(y) = p (1-p)^y`, with `p ~ Uniform(0, 1)`.
//!   The posterior is `Beta(n + 1, s + 1)` and the marginal likelihood is
//!   `B(n + 1, s + 1)`.
//!
//! The closed forms make these models double as ground-truth oracles for the
//! simulation-based estimators elsewhere in the crate: likelihood, posterior
//! ordinate, and marginal likelihood are all available exactly.
//!
//! Both parameter supports are open intervals; boundary values are rejected,
//! never clamped. Log-factorials go through the log-gamma function so totals
//! up to about 10^6 stay finite.

use rand_distr::{Distribution, Exp, Geometric, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::data::Dataset;
use crate::error::{Result, ToolError};
use crate::rng::RngStream;

/// One of the supported generative models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    PoissonExp,
    GeometricUniform,
}

impl ModelSpec {
    pub const ALL: [ModelSpec; 2] = [ModelSpec::PoissonExp, ModelSpec::GeometricUniform];

    pub fn name(self) -> &'static str {
        match self {
            ModelSpec::PoissonExp => "poisson-exp",
            ModelSpec::GeometricUniform => "geometric-uniform",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "poisson-exp" => Ok(ModelSpec::PoissonExp),
            "geometric-uniform" => Ok(ModelSpec::GeometricUniform),
            other => Err(ToolError::InvalidConfig(format!(
                "unknown model '{other}' (expected poisson-exp or geometric-uniform)"
            ))),
        }
    }

    /// Open parameter support: `(0, inf)` for the Poisson rate, `(0, 1)` for
    /// the geometric success probability.
    pub fn parameter_support(self) -> (f64, f64) {
        match self {
            ModelSpec::PoissonExp => (0.0, f64::INFINITY),
            ModelSpec::GeometricUniform => (0.0, 1.0),
        }
    }

    pub fn supports(self, theta: f64) -> bool {
        let (lo, hi) = self.parameter_support();
        theta.is_finite() && theta > lo && theta < hi
    }

    fn require_support(self, theta: f64) -> Result<()> {
        if self.supports(theta) {
            Ok(())
        } else {
            let (lo, hi) = self.parameter_support();
            Err(ToolError::InvalidConfig(format!(
                "theta = {theta} outside the open support ({lo}, {hi}) of {}",
                self.name()
            )))
        }
    }

    /// One observation from the model at `theta`.
    ///
    /// Callers in hot loops construct the distribution once per proposal via
    /// [`ObservationSampler`]; this convenience wrapper is for one-off draws.
    pub fn sample_observation(self, theta: f64, rng: &mut RngStream) -> Result<u64> {
        Ok(ObservationSampler::new(self, theta)?.sample(rng))
    }

    /// `n` independent draws from the model at `theta`.
    pub fn simulate(self, theta: f64, n: usize, rng: &mut RngStream) -> Result<Dataset> {
        if n == 0 {
            return Err(ToolError::InvalidConfig(
                "cannot simulate a dataset of size 0".into(),
            ));
        }
        let sampler = ObservationSampler::new(self, theta)?;
        Dataset::new((0..n).map(|_| sampler.sample(rng)).collect())
    }

    /// A draw from the prior: `Exp(1)` or `Uniform(0, 1)`, resampled in the
    /// (measure-zero) event that it lands on the support boundary.
    pub fn prior_sample(self, rng: &mut RngStream) -> f64 {
        loop {
            let theta = match self {
                ModelSpec::PoissonExp => Exp::new(1.0).expect("rate 1").sample(rng),
                ModelSpec::GeometricUniform => rng.next_f64(),
            };
            if self.supports(theta) {
                return theta;
            }
        }
    }

    /// Log prior density at `theta`: `-theta` under `Exp(1)`, `0` under
    /// `Uniform(0, 1)`.
    pub fn log_prior_density(self, theta: f64) -> Result<f64> {
        self.require_support(theta)?;
        Ok(match self {
            ModelSpec::PoissonExp => -theta,
            ModelSpec::GeometricUniform => 0.0,
        })
    }

    /// Exact log likelihood of the dataset at `theta`.
    pub fn exact_log_likelihood(self, theta: f64, dataset: &Dataset) -> Result<f64> {
        self.require_support(theta)?;
        let n = dataset.len() as f64;
        let s = dataset.total() as f64;
        Ok(match self {
            ModelSpec::PoissonExp => {
                let log_fact: f64 = dataset
                    .counts()
                    .iter()
                    .map(|&y| ln_gamma(y as f64 + 1.0))
                    .sum();
                s * theta.ln() - n * theta - log_fact
            }
            ModelSpec::GeometricUniform => n * theta.ln() + s * (-theta).ln_1p(),
        })
    }

    /// Exact log posterior density at `theta`, via conjugacy:
    /// `Gamma(s + 1, n + 1)` or `Beta(n + 1, s + 1)`.
    pub fn exact_log_posterior_density(self, dataset: &Dataset, theta: f64) -> Result<f64> {
        self.require_support(theta)?;
        let n = dataset.len() as f64;
        let s = dataset.total() as f64;
        Ok(match self {
            ModelSpec::PoissonExp => {
                // Gamma(shape a = s + 1, rate b = n + 1)
                let a = s + 1.0;
                let b = n + 1.0;
                a * b.ln() - ln_gamma(a) + s * theta.ln() - b * theta
            }
            ModelSpec::GeometricUniform => {
                // Beta(n + 1, s + 1)
                let a = n + 1.0;
                let b = s + 1.0;
                ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
                    + n * theta.ln()
                    + s * (-theta).ln_1p()
            }
        })
    }

    /// Exact log marginal likelihood of the dataset.
    pub fn exact_log_marginal(self, dataset: &Dataset) -> f64 {
        let n = dataset.len() as f64;
        let s = dataset.total() as f64;
        match self {
            ModelSpec::PoissonExp => {
                let log_fact: f64 = dataset
                    .counts()
                    .iter()
                    .map(|&y| ln_gamma(y as f64 + 1.0))
                    .sum();
                ln_gamma(s + 1.0) - (s + 1.0) * (n + 1.0).ln() - log_fact
            }
            ModelSpec::GeometricUniform => {
                ln_gamma(n + 1.0) + ln_gamma(s + 1.0) - ln_gamma(n + s + 2.0)
            }
        }
    }
}

/// Pre-validated observation sampler; constructing it checks the support and
/// does the per-theta setup once, so rejection loops pay per draw only.
pub struct ObservationSampler {
    inner: SamplerInner,
}

enum SamplerInner {
    Poisson(Poisson<f64>),
    Geometric(Geometric),
}

impl ObservationSampler {
    pub fn new(model: ModelSpec, theta: f64) -> Result<Self> {
        model.require_support(theta)?;
        let inner = match model {
            ModelSpec::PoissonExp => SamplerInner::Poisson(
                Poisson::new(theta)
                    .map_err(|e| ToolError::InvalidConfig(format!("poisson rate {theta}: {e}")))?,
            ),
            ModelSpec::GeometricUniform => SamplerInner::Geometric(
                Geometric::new(theta)
                    .map_err(|e| ToolError::InvalidConfig(format!("geometric p {theta}: {e}")))?,
            ),
        };
        Ok(ObservationSampler { inner })
    }

    pub fn sample(&self, rng: &mut RngStream) -> u64 {
        match &self.inner {
            SamplerInner::Poisson(d) => d.sample(rng) as u64,
            SamplerInner::Geometric(d) => d.sample(rng),
        }
    }
}

/// Value of the sufficient statistic `s(y) = sum_i y_i` together with the
/// sample size it summarizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuffStat {
    pub value: u64,
    pub n: usize,
}

/// `s(y) = sum_i y_i`, sufficient for the parameter under both models.
pub fn sufficient_stat(dataset: &Dataset) -> SuffStat {
    SuffStat {
        value: dataset.total(),
        n: dataset.len(),
    }
}

/// Scalar summaries available to the rejection sampler. Only
/// [`SummaryStatistic::TotalCount`] is sufficient; the other two exist to
/// study what happens to evidence estimates when information is thrown away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryStatistic {
    /// `sum_i y_i` — sufficient under both models.
    TotalCount,
    /// Sum over the first `ceil(n/2)` observations only.
    HalfSum,
    /// `max_i y_i`.
    MaxCount,
}

impl SummaryStatistic {
    pub const ALL: [SummaryStatistic; 3] = [
        SummaryStatistic::TotalCount,
        SummaryStatistic::HalfSum,
        SummaryStatistic::MaxCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SummaryStatistic::TotalCount => "sum",
            SummaryStatistic::HalfSum => "half-sum",
            SummaryStatistic::MaxCount => "max",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sum" => Ok(SummaryStatistic::TotalCount),
            "half-sum" => Ok(SummaryStatistic::HalfSum),
            "max" => Ok(SummaryStatistic::MaxCount),
            other => Err(ToolError::InvalidConfig(format!(
                "unknown statistic '{other}' (expected sum, half-sum, or max)"
            ))),
        }
    }

    pub fn apply(self, dataset: &Dataset) -> u64 {
        let counts = dataset.counts();
        match self {
            SummaryStatistic::TotalCount => counts.iter().sum(),
            SummaryStatistic::HalfSum => {
                let k = counts.len().div_ceil(2);
                counts[..k].iter().sum()
            }
            SummaryStatistic::MaxCount => *counts.iter().max().expect("nonempty"),
        }
    }

    /// Number of observations that determine the statistic; draws past this
    /// index can never change it.
    pub(crate) fn determined_after(self, n: usize) -> usize {
        match self {
            SummaryStatistic::HalfSum => n.div_ceil(2),
            _ => n,
        }
    }

    /// Whether the statistic is nondecreasing in each additional observation,
    /// which lets the sampler abandon a proposal as soon as the running value
    /// exceeds the acceptance window.
    pub(crate) fn monotone_accumulate(self, acc: u64, y: u64) -> u64 {
        match self {
            SummaryStatistic::TotalCount | SummaryStatistic::HalfSum => acc + y,
            SummaryStatistic::MaxCount => acc.max(y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::toy_dataset;
    use crate::rng::make_stream;

    #[test]
    fn sufficient_stat_on_toy_data() {
        let s = sufficient_stat(&toy_dataset());
        assert_eq!(s.value, 18);
        assert_eq!(s.n, 10);
        let single = Dataset::new(vec![0]).unwrap();
        assert_eq!(sufficient_stat(&single).value, 0);
        assert_eq!(sufficient_stat(&single).n, 1);
        let padded = Dataset::new(vec![5, 0, 0]).unwrap();
        assert_eq!(sufficient_stat(&padded).value, 5);
        assert_eq!(sufficient_stat(&padded).n, 3);
    }

    #[test]
    fn boundary_parameters_rejected() {
        assert!(ModelSpec::PoissonExp.log_prior_density(0.0).is_err());
        assert!(ModelSpec::PoissonExp.log_prior_density(-1.0).is_err());
        assert!(ModelSpec::PoissonExp.log_prior_density(f64::NAN).is_err());
        assert!(ModelSpec::GeometricUniform.log_prior_density(0.0).is_err());
        assert!(ModelSpec::GeometricUniform.log_prior_density(1.0).is_err());
        let mut rng = make_stream(1, "sim");
        assert!(ModelSpec::PoissonExp.simulate(0.0, 5, &mut rng).is_err());
        assert!(
            ModelSpec::GeometricUniform
                .simulate(1.0, 5, &mut rng)
                .is_err()
        );
    }

    #[test]
    fn log_prior_spot_values() {
        assert_eq!(ModelSpec::PoissonExp.log_prior_density(1.0).unwrap(), -1.0);
        assert_eq!(
            ModelSpec::GeometricUniform.log_prior_density(0.3).unwrap(),
            0.0
        );
    }

    #[test]
    fn log_likelihood_spot_values() {
        let zero = Dataset::new(vec![0]).unwrap();
        let ll = ModelSpec::PoissonExp
            .exact_log_likelihood(1.0, &zero)
            .unwrap();
        assert!((ll - (-1.0)).abs() < 1e-15);
        let ll = ModelSpec::GeometricUniform
            .exact_log_likelihood(0.5, &zero)
            .unwrap();
        assert!((ll - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_likelihood_matches_per_term_pmf_product() {
        // Independent route: plain pmf arithmetic with integer factorials.
        let data = toy_dataset();
        let theta = 2.0f64;
        let mut product = 1.0f64;
        for &y in data.counts() {
            let mut fact = 1.0;
            for k in 2..=y {
                fact *= k as f64;
            }
            product *= (-theta).exp() * theta.powi(y as i32) / fact;
        }
        let expected = product.ln();
        let got = ModelSpec::PoissonExp
            .exact_log_likelihood(theta, &data)
            .unwrap();
        assert!(
            (got - expected).abs() < 1e-12,
            "got {got}, per-term product {expected}"
        );
        // Value pinned from an independent high-precision computation.
        assert!((got - (-14.284923518725040)).abs() < 1e-12);
    }

    #[test]
    fn log_posterior_spot_values() {
        let zero = Dataset::new(vec![0]).unwrap();
        // Gamma(1, 2) is Exp(2): density 2 e^{-2 theta}.
        let lp = ModelSpec::PoissonExp
            .exact_log_posterior_density(&zero, 1.0)
            .unwrap();
        assert!((lp - (2.0f64.ln() - 2.0)).abs() < 1e-12);
        // Beta(2, 1): density 2 p.
        let lp = ModelSpec::GeometricUniform
            .exact_log_posterior_density(&zero, 0.5)
            .unwrap();
        assert!(lp.abs() < 1e-12);
    }

    #[test]
    fn log_marginal_spot_values() {
        let zero = Dataset::new(vec![0]).unwrap();
        let half = 0.5f64.ln();
        assert!((ModelSpec::PoissonExp.exact_log_marginal(&zero) - half).abs() < 1e-12);
        assert!((ModelSpec::GeometricUniform.exact_log_marginal(&zero) - half).abs() < 1e-12);
        // Toy dataset values pinned from an independent high-precision route.
        let toy = toy_dataset();
        assert!((ModelSpec::PoissonExp.exact_log_marginal(&toy) - (-15.926137743940042)).abs() < 1e-12);
        assert!(
            (ModelSpec::GeometricUniform.exact_log_marginal(&toy) - (-19.757181186059440)).abs()
                < 1e-12
        );
    }

    #[test]
    fn simulated_moments_match_analytic_values() {
        let n = 100_000;
        let mut rng = make_stream(11, "moments");
        let sample = ModelSpec::PoissonExp.simulate(2.0, n, &mut rng).unwrap();
        let mean = sample.total() as f64 / n as f64;
        assert!((mean - 2.0).abs() < 0.03, "poisson mean {mean}");

        let mut rng = make_stream(12, "moments");
        let sample = ModelSpec::GeometricUniform
            .simulate(0.5, n, &mut rng)
            .unwrap();
        let mean = sample.total() as f64 / n as f64;
        assert!((mean - 1.0).abs() < 0.03, "geometric mean {mean}");
    }

    #[test]
    fn prior_sample_means() {
        let n = 100_000;
        let mut rng = make_stream(21, "prior");
        let mean: f64 = (0..n)
            .map(|_| ModelSpec::PoissonExp.prior_sample(&mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "exp(1) mean {mean}");

        let mut rng = make_stream(22, "prior");
        let draws: Vec<f64> = (0..n)
            .map(|_| ModelSpec::GeometricUniform.prior_sample(&mut rng))
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "uniform mean {mean}");
        assert!(draws.iter().all(|&p| p > 0.0 && p < 1.0));

        let mut rng = make_stream(23, "prior");
        assert!((0..n).all(|_| ModelSpec::PoissonExp.prior_sample(&mut rng) > 0.0));
    }

    #[test]
    fn summary_statistics_on_toy_data() {
        let d = toy_dataset();
        assert_eq!(SummaryStatistic::TotalCount.apply(&d), 18);
        // first ceil(10/2) = 5 observations: 2 + 3 + 1 + 1 + 2
        assert_eq!(SummaryStatistic::HalfSum.apply(&d), 9);
        assert_eq!(SummaryStatistic::MaxCount.apply(&d), 3);
        assert!(SummaryStatistic::parse("median").is_err());
    }
}
