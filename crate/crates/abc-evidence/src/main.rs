//! `abc-evidence` — reproducible likelihood-free evidence experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use abc_evidence::harness::{self, RawInputs};

/// Likelihood-free marginal likelihood estimation experiments.
///
/// Experiments: posterior, evidence, replicate-study, mc-pathology,
/// sufficiency. Every run writes its fully-resolved configuration to
/// run_config.txt in the output directory; re-running with
/// `--config <that file>` reproduces all CSV outputs byte-identically.
#[derive(Parser, Debug)]
#[command(name = "abc-evidence", version, arg_required_else_help = true)]
struct Cli {
    /// Experiment to run (may also come from the config file).
    experiment: Option<String>,

    /// Flat key=value config file; flags given here override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Base seed for all random streams.
    #[arg(long)]
    seed: Option<String>,

    /// Acceptance tolerance on the summary statistic.
    #[arg(long)]
    epsilon: Option<String>,

    /// Number of accepted posterior draws.
    #[arg(long)]
    n_accept: Option<String>,

    /// Proposal cap per single acceptance.
    #[arg(long)]
    max_attempts: Option<String>,

    /// Simulated observations behind each likelihood estimate.
    #[arg(long)]
    m_sims: Option<String>,

    /// Additive smoothing for the empirical pmf (0 = hard error on unseen values).
    #[arg(long)]
    smoothing: Option<String>,

    /// Replicates for the study experiments.
    #[arg(long)]
    replicates: Option<String>,

    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<String>,

    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Dataset file: one count per line.
    #[arg(long)]
    data: Option<PathBuf>,

    /// Inline dataset, e.g. "2,3,1,1,2".
    #[arg(long)]
    counts: Option<String>,

    /// Generate the dataset: model,theta,n — e.g. "poisson-exp,2.0,10".
    #[arg(long)]
    generate: Option<String>,

    /// Model under study: poisson-exp or geometric-uniform.
    #[arg(long)]
    model: Option<String>,

    /// Parameter the study experiments generate data from.
    #[arg(long)]
    theta_true: Option<String>,

    /// Size of each generated dataset.
    #[arg(long)]
    n: Option<String>,

    /// Summary statistic for posterior/evidence runs: sum, half-sum, or max.
    #[arg(long)]
    statistic: Option<String>,

    /// Statistics the sufficiency study sweeps, comma-separated.
    #[arg(long)]
    statistics: Option<String>,

    /// Dataset sizes for the mc-pathology study, comma-separated.
    #[arg(long)]
    n_grid: Option<String>,

    /// Identity evaluation point: mean or median.
    #[arg(long)]
    point_estimate: Option<String>,
}

impl Cli {
    fn into_inputs(self) -> RawInputs {
        let mut overrides = Vec::new();
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                overrides.push((key.to_string(), v));
            }
        };
        push("seed", self.seed);
        push("epsilon", self.epsilon);
        push("n-accept", self.n_accept);
        push("max-attempts", self.max_attempts);
        push("m-sims", self.m_sims);
        push("smoothing", self.smoothing);
        push("replicates", self.replicates);
        push("workers", self.workers);
        push("out", self.out.map(|p| p.display().to_string()));
        push("data", self.data.map(|p| p.display().to_string()));
        push("counts", self.counts);
        push("generate", self.generate);
        push("model", self.model);
        push("theta-true", self.theta_true);
        push("n", self.n);
        push("statistic", self.statistic);
        push("statistics", self.statistics);
        push("n-grid", self.n_grid);
        push("point-estimate", self.point_estimate);
        RawInputs {
            experiment: self.experiment,
            config_file: self.config,
            overrides,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inputs = cli.into_inputs();
    let cfg = match harness::resolve(&inputs) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match harness::run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
