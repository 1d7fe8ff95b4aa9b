//! End-to-end checks of the sampling and estimation pipeline against the
//! conjugate oracles.

mod common;

use abc_evidence::abc::abc_posterior;
use abc_evidence::data::{AbcConfig, Dataset};
use abc_evidence::density::kde_log_ordinate;
use abc_evidence::evidence::{
    EstimatorSettings, estimate_log_evidence, log_bayes_factor, replicate_evidence,
};
use abc_evidence::models::ModelSpec;
use abc_evidence::rng::{derive_seed, make_stream};
use common::{ks_distance, median};
use rand_distr::{Distribution, Gamma};
use statrs::distribution::{Beta as BetaDist, ContinuousCDF, Gamma as GammaDist};

fn generated_dataset(seed: u64) -> Dataset {
    let mut rng = make_stream(seed, "data-gen");
    ModelSpec::PoissonExp.simulate(2.0, 10, &mut rng).unwrap()
}

#[test]
fn abc_draws_match_conjugate_posteriors() {
    // Ten generated datasets, both models, sampler output against the
    // closed-form posterior CDF.
    let cfg = AbcConfig::new(0.001, 10_000, 10_000_000, 0);
    for k in 0..10u64 {
        let data = generated_dataset(1_000 + k);
        let n = data.len() as f64;
        let s = data.total() as f64;

        let mut rng = make_stream(k, "abc-po");
        let sample = abc_posterior(ModelSpec::PoissonExp, &data, &cfg, &mut rng).unwrap();
        let oracle = GammaDist::new(s + 1.0, n + 1.0).unwrap();
        let d = ks_distance(&sample.draws, &|x| oracle.cdf(x));
        assert!(d <= 0.02, "poisson dataset {k}: ks {d}");

        let mut rng = make_stream(k, "abc-ge");
        let sample = abc_posterior(ModelSpec::GeometricUniform, &data, &cfg, &mut rng).unwrap();
        let oracle = BetaDist::new(n + 1.0, s + 1.0).unwrap();
        let d = ks_distance(&sample.draws, &|x| oracle.cdf(x));
        assert!(d <= 0.02, "geometric dataset {k}: ks {d}");
    }
}

#[test]
fn bayes_factors_match_oracle_within_budget() {
    let cfg = AbcConfig::new(0.001, 10_000, 10_000_000, 0);
    let settings = EstimatorSettings::default();
    for k in 0..20u64 {
        let data = generated_dataset(2_000 + k);
        let rep_seed = derive_seed(77, k);
        let po = estimate_log_evidence(
            ModelSpec::PoissonExp,
            &data,
            &cfg,
            &settings,
            &make_stream(rep_seed, "po"),
        )
        .unwrap();
        let ge = estimate_log_evidence(
            ModelSpec::GeometricUniform,
            &data,
            &cfg,
            &settings,
            &make_stream(rep_seed, "ge"),
        )
        .unwrap();
        let bf = log_bayes_factor(&po, &ge).unwrap();
        let exact = ModelSpec::PoissonExp.exact_log_marginal(&data)
            - ModelSpec::GeometricUniform.exact_log_marginal(&data);
        assert!(
            (bf - exact).abs() <= 0.15,
            "dataset {k}: bf {bf} vs exact {exact}"
        );
    }
}

#[test]
fn replicate_spread_stays_within_budget() {
    let data = Dataset::new(vec![2, 3, 1, 1, 2, 1, 3, 1, 3, 1]).unwrap();
    let cfg = AbcConfig::new(0.001, 10_000, 10_000_000, 0);
    let settings = EstimatorSettings::default();
    let reps =
        replicate_evidence(ModelSpec::PoissonExp, &data, &cfg, &settings, 20, 4242).unwrap();
    assert_eq!(reps.estimates.len(), 20);
    assert!(
        reps.sd_log_evidence <= 0.03,
        "sd over replicates {}",
        reps.sd_log_evidence
    );
    let exact = ModelSpec::PoissonExp.exact_log_marginal(&data);
    assert!(
        (reps.mean_log_evidence - exact).abs() < 0.05,
        "mean {} vs exact {exact}",
        reps.mean_log_evidence
    );
}

#[test]
fn kde_ordinate_error_shrinks_with_sample_size() {
    // Median absolute error at the distribution mean over 20 seeds, for
    // growing draw counts; the oracle is the closed-form Gamma density.
    let point = 19.0 / 11.0;
    let expected = 0.002351689761245248; // ln Gamma(19,11) density at 19/11
    let gamma = Gamma::new(19.0, 1.0 / 11.0).unwrap();
    let mut medians = Vec::new();
    for &size in &[1_000usize, 10_000, 100_000] {
        let errors: Vec<f64> = (0..20u64)
            .map(|seed| {
                let mut rng = make_stream(900 + seed, "kde-consistency");
                let draws: Vec<f64> = (0..size).map(|_| gamma.sample(&mut rng)).collect();
                let est = kde_log_ordinate(&draws, point).unwrap();
                (est.log_density - expected).abs()
            })
            .collect();
        medians.push(median(errors));
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "median ordinate errors not shrinking: {medians:?}"
    );
}
