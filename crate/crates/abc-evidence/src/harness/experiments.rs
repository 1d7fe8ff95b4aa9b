//! Experiment drivers behind the CLI: each one runs a study, writes CSV (and
//! SVG where a picture helps) into the output directory, and echoes the
//! fully-resolved configuration as `run_config.txt` so the run can be
//! reproduced byte-for-byte.

use std::path::Path;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::csvfmt::{CsvBuilder, fmt_sig};
use super::svg::{Frame, SvgDoc};
use crate::abc::{abc_model_choice, abc_posterior_with_statistic};
use crate::data::Dataset;
use crate::error::{ErrorKind, Result, ToolError};
use crate::evidence::{estimate_log_evidence, log_bayes_factor};
use crate::models::ModelSpec;
use crate::rng::{derive_seed, make_stream};

/// Entry point: set up the output directory, pin the worker pool, dispatch.
pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    prepare_out_dir(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ToolError::InvalidConfig(format!("workers: {e}")))?;
    pool.install(|| match cfg.experiment {
        ExperimentKind::Posterior => run_posterior_experiment(cfg),
        ExperimentKind::Evidence => run_evidence_experiment(cfg),
        ExperimentKind::ReplicateStudy => run_replicate_study(cfg),
        ExperimentKind::McPathology => run_mc_pathology(cfg),
        ExperimentKind::Sufficiency => run_sufficiency_degradation(cfg),
    })
}

/// Create the output directory and prove it writable by emitting the
/// resolved configuration before any computation starts.
fn prepare_out_dir(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| {
        ToolError::InvalidConfig(format!("out: cannot create {}: {e}", cfg.out.display()))
    })?;
    write_file(&cfg.out.join("run_config.txt"), &cfg.render())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| {
        ToolError::InvalidConfig(format!("out: cannot write {}: {e}", path.display()))
    })
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// One ABC posterior run: accepted draws as CSV, histogram against the exact
/// posterior density as SVG.
pub fn run_posterior_experiment(cfg: &ExperimentConfig) -> Result<()> {
    let dataset = cfg.dataset.as_ref().expect("fixed-dataset experiment");
    let mut rng = make_stream(cfg.seed, "abc");
    let sample =
        abc_posterior_with_statistic(cfg.model, dataset, cfg.statistic, &cfg.abc, &mut rng)?;

    let mut csv = CsvBuilder::new("draw_index,theta");
    for (i, theta) in sample.draws.iter().enumerate() {
        csv.row(&[i.to_string(), fmt_sig(*theta)]);
    }
    write_file(&cfg.out.join("posterior_draws.csv"), &csv.finish())?;

    let svg = posterior_overlay_svg(cfg.model, dataset, &sample.draws);
    write_file(&cfg.out.join("posterior_overlay.svg"), &svg)?;

    println!(
        "posterior: {} draws accepted in {} attempts (rate {:.4}), mean theta {:.4}",
        sample.draws.len(),
        sample.attempts,
        sample.acceptance_rate(),
        sample.mean()
    );
    println!("wrote {}", cfg.out.join("posterior_draws.csv").display());
    println!("wrote {}", cfg.out.join("posterior_overlay.svg").display());
    Ok(())
}

fn posterior_overlay_svg(model: ModelSpec, dataset: &Dataset, draws: &[f64]) -> String {
    const BINS: usize = 30;
    let lo = draws.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = draws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo).max(f64::MIN_POSITIVE) / BINS as f64;

    let mut counts = [0u64; BINS];
    for &d in draws {
        let bin = (((d - lo) / width) as usize).min(BINS - 1);
        counts[bin] += 1;
    }
    let n = draws.len() as f64;
    let densities: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();

    // Exact posterior curve over the sampled range.
    let curve: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let theta = lo + (hi - lo) * i as f64 / 200.0;
            let density = model
                .exact_log_posterior_density(dataset, theta)
                .map_or(0.0, f64::exp);
            (theta, density)
        })
        .collect();

    let y_max = densities
        .iter()
        .chain(curve.iter().map(|(_, d)| d))
        .fold(0.0f64, |a, &b| a.max(b));

    let canvas = (640.0, 440.0);
    let mut doc = SvgDoc::new(canvas.0, canvas.1);
    let frame = Frame::new((lo, hi), (0.0, y_max * 1.08), canvas);

    for (bin, &density) in densities.iter().enumerate() {
        let x0 = lo + bin as f64 * width;
        let x1 = x0 + width;
        let extra = format!(
            " stroke=\"white\" stroke-width=\"0.5\" data-count=\"{}\" data-x0=\"{}\" data-x1=\"{}\"",
            counts[bin],
            fmt_sig(x0),
            fmt_sig(x1)
        );
        doc.rect(
            frame.x(x0),
            frame.y(density),
            frame.x(x1) - frame.x(x0),
            frame.y(0.0) - frame.y(density),
            "#9ecae1",
            &extra,
        );
    }
    let curve_px: Vec<(f64, f64)> = curve
        .iter()
        .map(|&(t, d)| (frame.x(t), frame.y(d)))
        .collect();
    doc.polyline(&curve_px, "#d62728", 1.8);
    frame.draw_axes(
        &mut doc,
        "theta",
        "density",
        &format!("ABC posterior sample vs exact posterior ({})", model.name()),
    );
    doc.finish()
}

/// One evidence estimate on a fixed dataset, next to the exact value.
pub fn run_evidence_experiment(cfg: &ExperimentConfig) -> Result<()> {
    let dataset = cfg.dataset.as_ref().expect("fixed-dataset experiment");
    let settings = cfg.estimator_settings();
    let rng = make_stream(cfg.seed, "evidence");
    let est = estimate_log_evidence(cfg.model, dataset, &cfg.abc, &settings, &rng)?;
    let exact = cfg.model.exact_log_marginal(dataset);

    let mut csv = CsvBuilder::new(
        "model,log_evidence,theta_hat,log_lik_hat,log_prior_at_hat,log_post_ordinate_hat,\
         acceptance_rate,attempts,log_evidence_exact,abs_error",
    );
    csv.row(&[
        cfg.model.name().to_string(),
        fmt_sig(est.log_evidence),
        fmt_sig(est.theta_hat),
        fmt_sig(est.log_lik_hat),
        fmt_sig(est.log_prior_at_hat),
        fmt_sig(est.log_post_ordinate_hat),
        fmt_sig(est.abc.acceptance_rate),
        est.abc.attempts.to_string(),
        fmt_sig(exact),
        fmt_sig((est.log_evidence - exact).abs()),
    ]);
    write_file(&cfg.out.join("evidence.csv"), &csv.finish())?;

    println!(
        "evidence ({}): estimated {:.6}, exact {:.6}, abs error {:.6}",
        cfg.model.name(),
        est.log_evidence,
        exact,
        (est.log_evidence - exact).abs()
    );
    println!("wrote {}", cfg.out.join("evidence.csv").display());
    Ok(())
}

struct ReplicateRow {
    replicate: usize,
    seed: u64,
    n: usize,
    s: u64,
    log_evidence_abc: f64,
    log_evidence_exact: f64,
}

/// Estimated vs exact log evidence over freshly generated datasets.
pub fn run_replicate_study(cfg: &ExperimentConfig) -> Result<()> {
    let settings = cfg.estimator_settings();
    let rows: Vec<ReplicateRow> = (1..=cfg.replicates)
        .into_par_iter()
        .map(|r| -> Result<ReplicateRow> {
            let rep_seed = derive_seed(cfg.seed, r as u64);
            let mut data_rng = make_stream(rep_seed, "data-gen");
            let dataset = cfg.model.simulate(cfg.theta_true, cfg.data_n, &mut data_rng)?;
            let rng = make_stream(rep_seed, "evidence");
            let est = estimate_log_evidence(cfg.model, &dataset, &cfg.abc, &settings, &rng)
                .map_err(|e| {
                    ToolError::from_kind_message(
                        e.kind(),
                        format!("replicate {r} (seed {rep_seed}): {e}"),
                    )
                })?;
            Ok(ReplicateRow {
                replicate: r,
                seed: rep_seed,
                n: dataset.len(),
                s: dataset.total(),
                log_evidence_abc: est.log_evidence,
                log_evidence_exact: cfg.model.exact_log_marginal(&dataset),
            })
        })
        .collect::<Result<_>>()?;

    let mut csv =
        CsvBuilder::new("replicate,seed,n,s,log_evidence_abc,log_evidence_exact,abs_error");
    for row in &rows {
        csv.row(&[
            row.replicate.to_string(),
            row.seed.to_string(),
            row.n.to_string(),
            row.s.to_string(),
            fmt_sig(row.log_evidence_abc),
            fmt_sig(row.log_evidence_exact),
            fmt_sig((row.log_evidence_abc - row.log_evidence_exact).abs()),
        ]);
    }
    write_file(&cfg.out.join("replicates.csv"), &csv.finish())?;

    let svg = evidence_scatter_svg(&rows);
    write_file(&cfg.out.join("evidence_scatter.svg"), &svg)?;

    let abs_errors: Vec<f64> = rows
        .iter()
        .map(|r| (r.log_evidence_abc - r.log_evidence_exact).abs())
        .collect();
    println!(
        "replicate-study: {} replicates, median abs error {:.4}, max {:.4}",
        rows.len(),
        median(abs_errors.clone()),
        abs_errors.iter().fold(0.0f64, |a, &b| a.max(b))
    );
    println!("wrote {}", cfg.out.join("replicates.csv").display());
    println!("wrote {}", cfg.out.join("evidence_scatter.svg").display());
    Ok(())
}

fn evidence_scatter_svg(rows: &[ReplicateRow]) -> String {
    let lo = rows
        .iter()
        .flat_map(|r| [r.log_evidence_abc, r.log_evidence_exact])
        .fold(f64::INFINITY, f64::min);
    let hi = rows
        .iter()
        .flat_map(|r| [r.log_evidence_abc, r.log_evidence_exact])
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-9);
    let (lo, hi) = (lo - pad, hi + pad);

    let canvas = (520.0, 520.0);
    let mut doc = SvgDoc::new(canvas.0, canvas.1);
    let frame = Frame::new((lo, hi), (lo, hi), canvas);

    // y = x reference diagonal.
    doc.line(
        frame.x(lo),
        frame.y(lo),
        frame.x(hi),
        frame.y(hi),
        "#999999",
        1.0,
    );
    for row in rows {
        let extra = format!(
            " stroke=\"#1a476f\" stroke-width=\"0.5\" data-x=\"{}\" data-y=\"{}\"",
            fmt_sig(row.log_evidence_exact),
            fmt_sig(row.log_evidence_abc)
        );
        doc.circle(
            frame.x(row.log_evidence_exact),
            frame.y(row.log_evidence_abc),
            3.0,
            "#477ab085",
            &extra,
        );
    }
    frame.draw_axes(
        &mut doc,
        "exact log marginal likelihood",
        "estimated log marginal likelihood",
        "estimated vs exact log evidence",
    );
    doc.finish()
}

struct PathologyRow {
    n: usize,
    replicate: usize,
    log_bf_abcmc: Option<f64>,
    log_bf_exact: f64,
    log_bf_alg2: f64,
}

/// Bayes factors three ways on the same generated datasets: acceptance
/// frequencies from the cross-model sampler, the evidence-identity pipeline
/// run per model, and the exact conjugate answer.
pub fn run_mc_pathology(cfg: &ExperimentConfig) -> Result<()> {
    // The statistic is pinned to the sufficient total here: the point of the
    // study is what happens *despite* sufficiency for the parameters.
    let mut settings = cfg.estimator_settings();
    settings.statistic = crate::models::SummaryStatistic::TotalCount;
    let models = [ModelSpec::PoissonExp, ModelSpec::GeometricUniform];
    let model_prior = [0.5, 0.5];

    let tasks: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (1..=cfg.replicates).map(move |r| (n, r)))
        .collect();

    let rows: Vec<PathologyRow> = tasks
        .into_par_iter()
        .map(|(n, r)| -> Result<PathologyRow> {
            let rep_seed = derive_seed(derive_seed(cfg.seed, n as u64), r as u64);
            let mut data_rng = make_stream(rep_seed, "data-gen");
            let dataset = cfg.model.simulate(cfg.theta_true, n, &mut data_rng)?;

            let mut mc_rng = make_stream(rep_seed, "abcmc");
            let mc_sample =
                abc_model_choice(&models, &model_prior, &dataset, &cfg.abc, &mut mc_rng)?;
            let log_bf_abcmc = match mc_sample.log_bayes_factor(&model_prior, 0, 1) {
                Ok(v) => Some(v),
                Err(e) if e.kind() == ErrorKind::DegenerateSample => None,
                Err(e) => return Err(e),
            };

            let log_bf_exact = models[0].exact_log_marginal(&dataset)
                - models[1].exact_log_marginal(&dataset);

            let est_p = estimate_log_evidence(
                models[0],
                &dataset,
                &cfg.abc,
                &settings,
                &make_stream(rep_seed, "alg2-po"),
            )?;
            let est_g = estimate_log_evidence(
                models[1],
                &dataset,
                &cfg.abc,
                &settings,
                &make_stream(rep_seed, "alg2-geo"),
            )?;
            let log_bf_alg2 = log_bayes_factor(&est_p, &est_g)?;

            Ok(PathologyRow {
                n,
                replicate: r,
                log_bf_abcmc,
                log_bf_exact,
                log_bf_alg2,
            })
        })
        .collect::<Result<_>>()?;

    let mut csv = CsvBuilder::new("n,replicate,log_bf_abcmc,log_bf_exact,log_bf_alg2");
    for row in &rows {
        csv.row(&[
            row.n.to_string(),
            row.replicate.to_string(),
            row.log_bf_abcmc.map_or(String::new(), fmt_sig),
            fmt_sig(row.log_bf_exact),
            fmt_sig(row.log_bf_alg2),
        ]);
    }
    write_file(&cfg.out.join("mc_pathology.csv"), &csv.finish())?;

    for &n in &cfg.n_grid {
        let at_n: Vec<&PathologyRow> = rows.iter().filter(|r| r.n == n).collect();
        let mc_offsets: Vec<f64> = at_n
            .iter()
            .filter_map(|r| r.log_bf_abcmc.map(|v| v - r.log_bf_exact))
            .collect();
        let alg2_offsets: Vec<f64> = at_n
            .iter()
            .map(|r| r.log_bf_alg2 - r.log_bf_exact)
            .collect();
        let degenerate = at_n.len() - mc_offsets.len();
        println!(
            "mc-pathology n={n}: median(log BF offset) frequency-sampler {:+.4} \
             ({} degenerate), evidence-pipeline {:+.4}",
            if mc_offsets.is_empty() {
                f64::NAN
            } else {
                median(mc_offsets)
            },
            degenerate,
            median(alg2_offsets),
        );
    }
    println!("wrote {}", cfg.out.join("mc_pathology.csv").display());
    Ok(())
}

struct SufficiencyRow {
    statistic: &'static str,
    replicate: usize,
    log_evidence_abc: f64,
    log_evidence_exact: f64,
}

/// Evidence error under progressively lossier summary statistics. The
/// sampler then targets the posterior given the lossy statistic, so the
/// identity only holds approximately and the error should grow with the
/// information thrown away.
pub fn run_sufficiency_degradation(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.model != ModelSpec::PoissonExp {
        return Err(ToolError::InvalidConfig(
            "model: the sufficiency study is defined for poisson-exp".into(),
        ));
    }
    let per_replicate: Vec<Vec<SufficiencyRow>> = (1..=cfg.replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<SufficiencyRow>> {
            let rep_seed = derive_seed(cfg.seed, r as u64);
            let mut data_rng = make_stream(rep_seed, "data-gen");
            let dataset = cfg.model.simulate(cfg.theta_true, cfg.data_n, &mut data_rng)?;
            let exact = cfg.model.exact_log_marginal(&dataset);
            let base_rng = make_stream(rep_seed, "evidence");
            cfg.statistics
                .iter()
                .map(|&statistic| {
                    let mut settings = cfg.estimator_settings();
                    settings.statistic = statistic;
                    let rng = base_rng.derive(statistic.name());
                    let est =
                        estimate_log_evidence(cfg.model, &dataset, &cfg.abc, &settings, &rng)
                            .map_err(|e| {
                                ToolError::from_kind_message(
                                    e.kind(),
                                    format!(
                                        "replicate {r} statistic {}: {e}",
                                        statistic.name()
                                    ),
                                )
                            })?;
                    Ok(SufficiencyRow {
                        statistic: statistic.name(),
                        replicate: r,
                        log_evidence_abc: est.log_evidence,
                        log_evidence_exact: exact,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    // Group rows by statistic, replicates in order within each group.
    let mut csv =
        CsvBuilder::new("statistic,replicate,log_evidence_abc,log_evidence_exact,abs_error");
    for (idx, statistic) in cfg.statistics.iter().enumerate() {
        for rows in &per_replicate {
            let row = &rows[idx];
            csv.row(&[
                row.statistic.to_string(),
                row.replicate.to_string(),
                fmt_sig(row.log_evidence_abc),
                fmt_sig(row.log_evidence_exact),
                fmt_sig((row.log_evidence_abc - row.log_evidence_exact).abs()),
            ]);
        }
        let abs_errors: Vec<f64> = per_replicate
            .iter()
            .map(|rows| (rows[idx].log_evidence_abc - rows[idx].log_evidence_exact).abs())
            .collect();
        println!(
            "sufficiency statistic={}: median abs evidence error {:.4}",
            statistic.name(),
            median(abs_errors)
        );
    }
    write_file(&cfg.out.join("sufficiency.csv"), &csv.finish())?;
    println!("wrote {}", cfg.out.join("sufficiency.csv").display());
    Ok(())
}
