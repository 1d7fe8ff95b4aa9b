//! Experiment configuration: flat `key=value` files, CLI-flag overrides
//! (flags win), and a fully-resolved echo written next to every run's
//! outputs so any run can be reproduced from its own artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{AbcConfig, Dataset, toy_dataset};
use crate::error::{Result, ToolError};
use crate::evidence::{EstimatorSettings, PointEstimate};
use crate::models::{ModelSpec, SummaryStatistic};
use crate::rng::make_stream;

/// The experiments the CLI can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Single ABC posterior run: draws CSV plus histogram/exact overlay.
    Posterior,
    /// Single evidence estimate compared against the exact value.
    Evidence,
    /// Many generated datasets: estimated vs exact evidence scatter.
    ReplicateStudy,
    /// Cross-model Bayes factors: frequency-based vs identity-based vs exact.
    McPathology,
    /// Evidence error under progressively lossier summary statistics.
    Sufficiency,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Posterior => "posterior",
            ExperimentKind::Evidence => "evidence",
            ExperimentKind::ReplicateStudy => "replicate-study",
            ExperimentKind::McPathology => "mc-pathology",
            ExperimentKind::Sufficiency => "sufficiency",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "posterior" => Ok(ExperimentKind::Posterior),
            "evidence" => Ok(ExperimentKind::Evidence),
            "replicate-study" => Ok(ExperimentKind::ReplicateStudy),
            "mc-pathology" => Ok(ExperimentKind::McPathology),
            "sufficiency" => Ok(ExperimentKind::Sufficiency),
            other => Err(ToolError::InvalidConfig(format!(
                "experiment: unknown experiment '{other}' (expected posterior, evidence, \
                 replicate-study, mc-pathology, or sufficiency)"
            ))),
        }
    }

    /// Whether the experiment generates its own replicate datasets instead
    /// of analyzing one fixed dataset.
    pub fn generates_datasets(self) -> bool {
        matches!(
            self,
            ExperimentKind::ReplicateStudy | ExperimentKind::McPathology | ExperimentKind::Sufficiency
        )
    }

    fn default_replicates(self) -> usize {
        match self {
            ExperimentKind::ReplicateStudy => 50,
            _ => 20,
        }
    }
}

/// How the observed dataset was obtained; echoed into the resolved config.
#[derive(Debug, Clone)]
pub enum DatasetProvenance {
    Inline,
    File(PathBuf),
    Generated { model: ModelSpec, theta: f64, n: usize },
}

/// Everything an experiment run needs, fully validated.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelSpec,
    pub seed: u64,
    pub abc: AbcConfig,
    pub m_sims: u64,
    pub smoothing: f64,
    pub replicates: usize,
    pub workers: usize,
    pub out: PathBuf,
    pub statistic: SummaryStatistic,
    pub statistics: Vec<SummaryStatistic>,
    pub n_grid: Vec<usize>,
    pub point_estimate: PointEstimate,
    pub theta_true: f64,
    pub data_n: usize,
    /// Fixed observed dataset; `None` for experiments that generate their own.
    pub dataset: Option<Dataset>,
    pub provenance: Option<DatasetProvenance>,
}

impl ExperimentConfig {
    pub fn estimator_settings(&self) -> EstimatorSettings {
        EstimatorSettings {
            m_sims: self.m_sims,
            smoothing: self.smoothing,
            point_estimate: self.point_estimate,
            statistic: self.statistic,
        }
    }

    /// The resolved configuration as a `key=value` document. Feeding this
    /// back through `--config` reproduces the run.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("# resolved run configuration\n");
        out.push_str("# re-run with: abc-evidence ");
        out.push_str(self.experiment.name());
        out.push_str(" --config run_config.txt --out <dir>\n");
        if let Some(DatasetProvenance::Generated { model, theta, n }) = &self.provenance {
            out.push_str(&format!(
                "# counts below were generated from model={} theta={theta} n={n}\n",
                model.name()
            ));
        }
        if let Some(DatasetProvenance::File(path)) = &self.provenance {
            out.push_str(&format!("# counts below were read from {}\n", path.display()));
        }
        out.push_str(&format!("experiment={}\n", self.experiment.name()));
        out.push_str(&format!("model={}\n", self.model.name()));
        out.push_str(&format!("seed={}\n", self.seed));
        out.push_str(&format!("epsilon={}\n", self.abc.epsilon));
        out.push_str(&format!("n-accept={}\n", self.abc.n_accept));
        out.push_str(&format!("max-attempts={}\n", self.abc.max_attempts_per_accept));
        out.push_str(&format!("m-sims={}\n", self.m_sims));
        out.push_str(&format!("smoothing={}\n", self.smoothing));
        out.push_str(&format!("replicates={}\n", self.replicates));
        out.push_str(&format!("workers={}\n", self.workers));
        out.push_str(&format!("statistic={}\n", self.statistic.name()));
        let stats: Vec<&str> = self.statistics.iter().map(|s| s.name()).collect();
        out.push_str(&format!("statistics={}\n", stats.join(",")));
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!("n-grid={}\n", grid.join(",")));
        out.push_str(&format!("point-estimate={}\n", self.point_estimate.name()));
        out.push_str(&format!("theta-true={}\n", self.theta_true));
        out.push_str(&format!("n={}\n", self.data_n));
        if let Some(dataset) = &self.dataset {
            let counts: Vec<String> =
                dataset.counts().iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("counts={}\n", counts.join(",")));
        }
        out.push_str(&format!("out={}\n", self.out.display()));
        out
    }
}

/// Raw inputs prior to resolution: an optional experiment name, an optional
/// config file, and flag overrides as key/value strings.
#[derive(Debug, Default, Clone)]
pub struct RawInputs {
    pub experiment: Option<String>,
    pub config_file: Option<PathBuf>,
    pub overrides: Vec<(String, String)>,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "model",
    "seed",
    "epsilon",
    "n-accept",
    "max-attempts",
    "m-sims",
    "smoothing",
    "replicates",
    "workers",
    "out",
    "counts",
    "data",
    "generate",
    "theta-true",
    "n",
    "statistic",
    "statistics",
    "n-grid",
    "point-estimate",
];

/// Merge file and flag inputs (flags win) and validate the whole bundle.
pub fn resolve(inputs: &RawInputs) -> Result<ExperimentConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    if let Some(path) = &inputs.config_file {
        parse_file(path, &mut map)?;
    }
    for (key, value) in &inputs.overrides {
        map.insert(key.clone(), value.clone());
    }

    let experiment = match &inputs.experiment {
        Some(name) => ExperimentKind::parse(name)?,
        None => match map.get("experiment") {
            Some(name) => ExperimentKind::parse(name)?,
            None => {
                return Err(ToolError::InvalidConfig(
                    "experiment: none given (pass one as the first argument or set \
                     experiment= in the config file)"
                        .into(),
                ));
            }
        },
    };

    let model = match map.get("model") {
        Some(name) => ModelSpec::parse(name)?,
        None => ModelSpec::PoissonExp,
    };
    let seed: u64 = get_parsed(&map, "seed")?.unwrap_or(42);
    let epsilon: f64 = get_parsed(&map, "epsilon")?.unwrap_or(AbcConfig::DEFAULT_EPSILON);
    let n_accept: usize = get_parsed(&map, "n-accept")?.unwrap_or(AbcConfig::DEFAULT_N_ACCEPT);
    let max_attempts: u64 =
        get_parsed(&map, "max-attempts")?.unwrap_or(AbcConfig::DEFAULT_MAX_ATTEMPTS);
    let m_sims: u64 = get_parsed(&map, "m-sims")?.unwrap_or(EstimatorSettings::DEFAULT_M_SIMS);
    let smoothing: f64 = get_parsed(&map, "smoothing")?.unwrap_or(0.0);
    let replicates: usize =
        get_parsed(&map, "replicates")?.unwrap_or(experiment.default_replicates());
    let workers: usize = get_parsed(&map, "workers")?.unwrap_or(1);
    let out: PathBuf = map
        .get("out")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));
    let statistic = match map.get("statistic") {
        Some(name) => SummaryStatistic::parse(name)
            .map_err(|e| ToolError::InvalidConfig(format!("statistic: {e}")))?,
        None => SummaryStatistic::TotalCount,
    };
    let statistics = match map.get("statistics") {
        Some(names) => split_list(names)
            .iter()
            .map(|name| SummaryStatistic::parse(name))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| ToolError::InvalidConfig(format!("statistics: {e}")))?,
        None => SummaryStatistic::ALL.to_vec(),
    };
    let n_grid: Vec<usize> = match map.get("n-grid") {
        Some(value) => split_list(value)
            .iter()
            .map(|v| {
                v.parse::<usize>().map_err(|e| {
                    ToolError::InvalidConfig(format!("n-grid: bad entry '{v}': {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?,
        None => vec![10, 50, 100],
    };
    let point_estimate = match map.get("point-estimate") {
        Some(name) => PointEstimate::parse(name)
            .map_err(|e| ToolError::InvalidConfig(format!("point-estimate: {e}")))?,
        None => PointEstimate::Mean,
    };
    let theta_true: f64 = get_parsed(&map, "theta-true")?.unwrap_or(2.0);
    let data_n: usize = get_parsed(&map, "n")?.unwrap_or(10);

    let abc = AbcConfig::new(epsilon, n_accept, max_attempts, seed);
    abc.validate()
        .map_err(|e| ToolError::InvalidConfig(format!("epsilon/n-accept/max-attempts: {e}")))?;
    if m_sims < 10_000 {
        return Err(ToolError::InvalidConfig(format!(
            "m-sims: must be at least 10000, got {m_sims}"
        )));
    }
    if !smoothing.is_finite() || smoothing < 0.0 {
        return Err(ToolError::InvalidConfig(format!(
            "smoothing: must be finite and nonnegative, got {smoothing}"
        )));
    }
    if workers == 0 {
        return Err(ToolError::InvalidConfig("workers: must be at least 1".into()));
    }
    if experiment.generates_datasets() {
        if replicates < 2 {
            return Err(ToolError::InvalidConfig(format!(
                "replicates: {} needs at least 2, got {replicates}",
                experiment.name()
            )));
        }
        if data_n == 0 {
            return Err(ToolError::InvalidConfig("n: must be at least 1".into()));
        }
        if !model.supports(theta_true) {
            return Err(ToolError::InvalidConfig(format!(
                "theta-true: {theta_true} outside the parameter support of {}",
                model.name()
            )));
        }
    }
    if n_grid.is_empty() || n_grid.iter().any(|&n| n == 0) {
        return Err(ToolError::InvalidConfig(
            "n-grid: needs at least one positive dataset size".into(),
        ));
    }
    if statistics.is_empty() {
        return Err(ToolError::InvalidConfig(
            "statistics: needs at least one statistic".into(),
        ));
    }

    let (dataset, provenance) = resolve_dataset(experiment, model, seed, &map)?;

    Ok(ExperimentConfig {
        experiment,
        model,
        seed,
        abc,
        m_sims,
        smoothing,
        replicates,
        workers,
        out,
        statistic,
        statistics,
        n_grid,
        point_estimate,
        theta_true,
        data_n,
        dataset,
        provenance,
    })
}

fn resolve_dataset(
    experiment: ExperimentKind,
    _model: ModelSpec,
    seed: u64,
    map: &BTreeMap<String, String>,
) -> Result<(Option<Dataset>, Option<DatasetProvenance>)> {
    let sources: Vec<&str> = ["counts", "data", "generate"]
        .iter()
        .copied()
        .filter(|k| map.contains_key(*k))
        .collect();

    if experiment.generates_datasets() {
        if !sources.is_empty() {
            return Err(ToolError::InvalidConfig(format!(
                "{}: {} generates its own datasets from theta-true and n; remove it",
                sources[0],
                experiment.name()
            )));
        }
        return Ok((None, None));
    }

    if sources.len() > 1 {
        return Err(ToolError::InvalidConfig(format!(
            "dataset source: exactly one of counts/data/generate may be given, got {}",
            sources.join(" and ")
        )));
    }

    match sources.first() {
        None => Ok((Some(toy_dataset()), Some(DatasetProvenance::Inline))),
        Some(&"counts") => {
            let counts = parse_counts(map.get("counts").unwrap())?;
            Ok((
                Some(Dataset::new(counts)?),
                Some(DatasetProvenance::Inline),
            ))
        }
        Some(&"data") => {
            let path = PathBuf::from(map.get("data").unwrap());
            let text = std::fs::read_to_string(&path).map_err(|e| {
                ToolError::InvalidConfig(format!("data: cannot read {}: {e}", path.display()))
            })?;
            let mut counts = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                counts.push(line.parse::<u64>().map_err(|e| {
                    ToolError::InvalidConfig(format!(
                        "data: {} line {}: '{line}': {e}",
                        path.display(),
                        idx + 1
                    ))
                })?);
            }
            Ok((
                Some(Dataset::new(counts)?),
                Some(DatasetProvenance::File(path)),
            ))
        }
        Some(&"generate") => {
            let value = map.get("generate").unwrap();
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(ToolError::InvalidConfig(format!(
                    "generate: expected model,theta,n — got '{value}'"
                )));
            }
            let gen_model = ModelSpec::parse(parts[0])
                .map_err(|e| ToolError::InvalidConfig(format!("generate: {e}")))?;
            let theta: f64 = parts[1].parse().map_err(|e| {
                ToolError::InvalidConfig(format!("generate: bad theta '{}': {e}", parts[1]))
            })?;
            let n: usize = parts[2].parse().map_err(|e| {
                ToolError::InvalidConfig(format!("generate: bad n '{}': {e}", parts[2]))
            })?;
            if n == 0 {
                return Err(ToolError::InvalidConfig(
                    "generate: n must be at least 1".into(),
                ));
            }
            let mut rng = make_stream(seed, "data-gen");
            let dataset = gen_model
                .simulate(theta, n, &mut rng)
                .map_err(|e| ToolError::InvalidConfig(format!("generate: {e}")))?;
            Ok((
                Some(dataset),
                Some(DatasetProvenance::Generated {
                    model: gen_model,
                    theta,
                    n,
                }),
            ))
        }
        Some(other) => unreachable!("unexpected source {other}"),
    }
}

fn parse_counts(value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<u64>().map_err(|e| {
                ToolError::InvalidConfig(format!(
                    "counts: '{v}' is not a nonnegative integer: {e}"
                ))
            })
        })
        .collect()
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect()
}

fn get_parsed<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(value) => value.parse::<T>().map(Some).map_err(|e| {
            ToolError::InvalidConfig(format!("{key}: bad value '{value}': {e}"))
        }),
    }
}

/// Parse a flat `key=value` file: one pair per line, `#` starts a comment
/// line, blank lines ignored, later keys override earlier ones.
fn parse_file(path: &Path, map: &mut BTreeMap<String, String>) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ToolError::InvalidConfig(format!("config: cannot read {}: {e}", path.display()))
    })?;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ToolError::InvalidConfig(format!(
                "config: {} line {}: expected key=value, got '{line}'",
                path.display(),
                idx + 1
            )));
        };
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(ToolError::InvalidConfig(format!(
                "config: {} line {}: unknown key '{key}'",
                path.display(),
                idx + 1
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(())
}
