use std::collections::HashSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fairot::dataio::{
    is_repaired_header, load_dataset_with_stats, read_repaired, write_coupling, write_repaired_to, LoadStats,
    SchemaConfig, Standardization,
};
use fairot::fairness::audit;
use fairot::measures::support_key;
use fairot::repair::total_repair_c;
use fairot::rng::derive_seed;
use fairot::{
    build_repair_plan, fit_logistic, misclassification_error, tv_distance_discrete, Design, FairnessReport,
    FitConfig, Group, LabeledDataset, RepairMethod, RepairPlan, RepairedDataset,
};
use serde::Serialize;

use crate::model::ModelFile;

/// Error and fairness of one set of predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub error: Option<f64>,
    #[serde(flatten)]
    pub fairness: FairnessReport,
}

/// Audits predictions on rows with optional labels and masses.
pub fn evaluate(
    pred: &[bool],
    groups: &[Group],
    labels: Option<&[bool]>,
    weights: Option<&[f64]>,
    confidence: f64,
) -> Result<Evaluation> {
    let fairness = audit(pred, groups, labels, weights, confidence)?;
    let error = match labels {
        Some(y) => Some(misclassification_error(pred, y, weights)?),
        None => None,
    };
    Ok(Evaluation { error, fairness })
}

/// Audits `pred` on a repaired dataset. Group rates use the per-group row
/// masses, so identical repaired groups give a DI of exactly one; the error
/// uses the pooled masses.
pub fn evaluate_repaired(pred: &[bool], repaired: &RepairedDataset, confidence: f64) -> Result<Evaluation> {
    let labels = repaired.labels();
    let fairness = audit(pred, &repaired.groups(), labels.as_deref(), Some(&repaired.weights()), confidence)?;
    let error = match &labels {
        Some(y) => Some(misclassification_error(pred, y, Some(&repaired.pooled_weights()))?),
        None => None,
    };
    Ok(Evaluation { error, fairness })
}

/// A dataset read from disk: raw rows mapped by a schema, or the output of
/// `repair`.
#[derive(Debug, Clone)]
pub enum Input {
    Raw(LabeledDataset, LoadStats),
    Repaired(RepairedDataset),
}

fn read_header(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    Ok(reader.headers()?.iter().map(|h| h.trim().to_string()).collect())
}

pub fn load_input(path: &Path, schema: Option<&SchemaConfig>) -> Result<Input> {
    if read_header(path).map(|h| is_repaired_header(&h)).unwrap_or(false) {
        let file = File::open(path)?;
        let repaired = read_repaired(file).with_context(|| format!("reading repaired file {}", path.display()))?;
        return Ok(Input::Repaired(repaired));
    }
    let Some(schema) = schema else {
        bail!("{} is not a repaired file; --schema is required", path.display());
    };
    let (data, stats) =
        load_dataset_with_stats(path, schema).with_context(|| format!("loading {}", path.display()))?;
    Ok(Input::Raw(data, stats))
}

pub fn load_raw(path: &Path, schema: &SchemaConfig) -> Result<(LabeledDataset, LoadStats)> {
    load_dataset_with_stats(path, schema).with_context(|| format!("loading {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditOutput {
    pub rows: usize,
    pub weighted: bool,
    #[serde(flatten)]
    pub evaluation: Evaluation,
}

/// Audits a trained model on a raw or repaired dataset.
pub fn cmd_audit(
    data: &Path,
    schema: Option<&SchemaConfig>,
    model: &ModelFile,
    confidence: f64,
) -> Result<AuditOutput> {
    match load_input(data, schema)? {
        Input::Raw(d, _) => {
            model.check_dim(d.dim())?;
            let pred = model.predict_raw(d.features())?;
            let evaluation = evaluate(&pred, d.groups(), d.labels(), None, confidence)?;
            Ok(AuditOutput { rows: d.len(), weighted: false, evaluation })
        }
        Input::Repaired(r) => {
            model.check_dim(r.dim)?;
            let pred = model.predict_raw(&r.features())?;
            let evaluation = evaluate_repaired(&pred, &r, confidence)?;
            Ok(AuditOutput { rows: r.len(), weighted: true, evaluation })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub rows: usize,
    pub rows_dropped: usize,
    pub training_error: f64,
    pub standardized: bool,
}

/// Fits the logistic model on every row of `data`.
pub fn train_model(data: &LabeledDataset, standardize: bool, config: &FitConfig) -> Result<(ModelFile, f64)> {
    let labels = data.labels().context("training needs a target column")?;
    let standardization = standardize.then(|| Standardization::fit(data));
    let space = match &standardization {
        Some(st) => st.apply(data)?,
        None => data.clone(),
    };
    let design = Design::new(space.dim(), space.features(), labels, None)?;
    let model = fit_logistic(&design, config)?;
    let file = ModelFile {
        features: data.feature_names().to_vec(),
        model,
        standardization,
    };
    let pred = file.predict_model_space(space.features())?;
    let error = misclassification_error(&pred, labels, None)?;
    Ok((file, error))
}

pub fn cmd_train(data: &Path, schema: &SchemaConfig, standardize: bool) -> Result<(ModelFile, TrainSummary)> {
    let (d, stats) = load_raw(data, schema)?;
    let (model, training_error) = train_model(&d, standardize, &FitConfig::default())?;
    let summary = TrainSummary {
        rows: d.len(),
        rows_dropped: stats.rows_dropped,
        training_error,
        standardized: standardize,
    };
    Ok((model, summary))
}

#[derive(Debug, Clone)]
pub struct RepairArgs {
    pub method: RepairMethod,
    pub lambda: Option<f64>,
    pub seed: u64,
    pub standardize: bool,
    pub out: PathBuf,
    pub dump_coupling: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairSummary {
    pub method: RepairMethod,
    pub lambda: Option<f64>,
    /// Stream seed of the Bernoulli draws (random repair only).
    pub stream_seed: Option<u64>,
    pub rows_in: usize,
    pub rows_out: usize,
    /// Distinct repaired points in each group.
    pub support: [usize; 2],
    /// `W2` between the two groups, from the optimal plan.
    pub w2: f64,
    /// Total variation between the repaired group measures.
    pub tv_after: f64,
    pub standardized: bool,
}

fn distinct_points(repaired: &RepairedDataset, s: Group) -> usize {
    repaired
        .rows
        .iter()
        .filter(|r| r.group == s)
        .map(|r| support_key(&r.x))
        .collect::<HashSet<_>>()
        .len()
}

/// Repaired rows, still in the repair space, with the plan behind them.
#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub repaired: RepairedDataset,
    pub plan: RepairPlan,
    pub stream_seed: Option<u64>,
}

/// Repairs `space` with `method`. Random draws use the stream derived from
/// `seed` with the tag `random-repair`.
pub fn repair_dataset(
    space: &LabeledDataset,
    method: RepairMethod,
    lambda: Option<f64>,
    seed: u64,
) -> Result<RepairOutcome> {
    if method.is_partial() && lambda.is_none() {
        bail!("method {method} needs --lambda");
    }
    let plan = build_repair_plan(space)?;
    let mut stream_seed = None;
    let repaired = match method {
        RepairMethod::TotalA => plan.total_a(),
        RepairMethod::TotalB => plan.total_b(),
        RepairMethod::TotalC => total_repair_c(space)?,
        RepairMethod::Geometric => plan.geometric(lambda.unwrap_or(1.0))?,
        RepairMethod::Random => {
            let s = derive_seed(seed, "random-repair", 0);
            stream_seed = Some(s);
            plan.random(lambda.unwrap_or(1.0), s)?
        }
    };
    Ok(RepairOutcome {
        repaired,
        plan,
        stream_seed,
    })
}

/// Maps repaired rows back to raw units. Rows left at their source point
/// are copied from the raw data.
pub fn to_raw_units(
    repaired: &RepairedDataset,
    raw: &LabeledDataset,
    space: &LabeledDataset,
    standardization: Option<&Standardization>,
) -> RepairedDataset {
    let mut out = repaired.clone();
    out.feature_names = raw.feature_names().to_vec();
    if let Some(st) = standardization {
        for r in &mut out.rows {
            r.x = if r.x.as_slice() == space.x(r.origin) {
                raw.x(r.origin).to_vec()
            } else {
                st.invert_row(&r.x)
            };
        }
    }
    out
}

pub fn cmd_repair(data: &Path, schema: &SchemaConfig, args: &RepairArgs) -> Result<RepairSummary> {
    let (raw, _) = load_raw(data, schema)?;
    let standardization = args.standardize.then(|| Standardization::fit(&raw));
    let space = match &standardization {
        Some(st) => st.apply(&raw)?,
        None => raw.clone(),
    };
    let lambda = if args.method.is_partial() { args.lambda } else { None };
    let RepairOutcome {
        repaired,
        plan,
        stream_seed,
    } = repair_dataset(&space, args.method, lambda, args.seed)?;
    let (m0, m1) = repaired.group_measures()?;
    let tv_after = tv_distance_discrete(&m0, &m1)?;
    let support = [
        distinct_points(&repaired, Group::Minority),
        distinct_points(&repaired, Group::Default),
    ];
    if let Some(path) = &args.dump_coupling {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_coupling(std::io::BufWriter::new(file), plan.coupling())?;
    }
    let output = to_raw_units(&repaired, &raw, &space, standardization.as_ref());
    write_repaired_to(&args.out, &output).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(RepairSummary {
        method: args.method,
        lambda,
        stream_seed,
        rows_in: raw.len(),
        rows_out: output.len(),
        support,
        w2: plan.total_cost().max(0.0).sqrt(),
        tv_after,
        standardized: args.standardize,
    })
}

/// Parses a λ list: a single value, a comma list, or `start:step:end`.
pub fn parse_lambdas(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad lambda grid {text:?}"))?;
        let [start, step, end] = parts[..] else {
            bail!("lambda grid must be start:step:end, got {text:?}");
        };
        if !(step > 0.0) || end < start {
            bail!("lambda grid {text:?} is empty");
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        // Rounded to 12 decimals: 0:0.05:1 gives 0.15, not 0.15000000000000002.
        (0..=count)
            .map(|k| {
                let v = start + k as f64 * step;
                (v * 1e12).round() / 1e12
            })
            .collect()
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad lambda list {text:?}"))?
    };
    if values.is_empty() {
        bail!("no lambda values given");
    }
    for v in &values {
        if !(0.0..=1.0).contains(v) {
            bail!("lambda {v} is outside [0, 1]");
        }
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        bail!("lambda values must be strictly increasing");
    }
    Ok(values)
}
