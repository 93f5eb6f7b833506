//! End-to-end experiment: split, fit, audit, repair the test split with the
//! three total procedures, re-audit and sweep the partial repairs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use fairot::dataio::split;
use fairot::repair::total_repair_c;
use fairot::rng::derive_seed;
use fairot::{build_repair_plan, FitConfig, LabeledDataset, RepairMethod, RepairedDataset};
use serde::Serialize;

use crate::commands::{evaluate, evaluate_repaired, train_model};
use crate::model::ModelFile;
use crate::sweep::{run_sweep, write_sweep_csv, SweepConfig, SweepRow};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub test_size: usize,
    pub root_seed: u64,
    pub standardize: bool,
    pub fit: FitConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            test_size: 2500,
            root_seed: 0,
            standardize: true,
            fit: FitConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// Classifier on the unrepaired test split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub model: String,
    pub error: f64,
    pub di: f64,
    pub di_lo: f64,
    pub di_hi: f64,
    pub ber: f64,
    pub oae_gap: f64,
}

/// Classifier on a totally repaired test split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairRow {
    pub model: String,
    pub repair: String,
    pub error: f64,
    /// `error - baseline error`.
    pub difference: f64,
    pub di: f64,
    pub di_lo: f64,
    pub di_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub root_seed: u64,
    pub split_seed: u64,
    pub w2: f64,
    pub baseline: BaselineRow,
    pub repairs: Vec<RepairRow>,
    pub sweep: Vec<SweepRow>,
    #[serde(skip)]
    pub model: ModelFile,
}

impl ExperimentReport {
    pub fn repair(&self, name: &str) -> Option<&RepairRow> {
        self.repairs.iter().find(|r| r.repair == name)
    }
}

const MODEL_NAME: &str = "logit";

pub fn run_experiment(data: &LabeledDataset, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let split_seed = derive_seed(config.root_seed, "split", 0);
    let (train, test) = split(data, config.test_size, split_seed)?;
    let (model, _) = train_model(&train, config.standardize, &config.fit)?;

    // Repairs run in the model's input space.
    let space = match &model.standardization {
        Some(st) => st.apply(&test)?,
        None => test.clone(),
    };
    let labels = space.labels().context("the experiment needs a target column")?;
    let pred = model.predict_model_space(space.features())?;
    let base = evaluate(&pred, space.groups(), Some(labels), None, config.sweep.confidence)?;
    let base_error = base.error.unwrap_or(f64::NAN);
    let baseline = BaselineRow {
        model: MODEL_NAME.into(),
        error: base_error,
        di: base.fairness.di,
        di_lo: base.fairness.di_lo,
        di_hi: base.fairness.di_hi,
        ber: base.fairness.ber,
        oae_gap: base.fairness.oae_gap.unwrap_or(f64::NAN),
    };

    let plan = build_repair_plan(&space)?;
    let predict = |r: &RepairedDataset| model.predict_model_space(&r.features());
    let total = [
        (RepairMethod::TotalA, plan.total_a()),
        (RepairMethod::TotalB, plan.total_b()),
        (RepairMethod::TotalC, total_repair_c(&space)?),
    ];
    let mut repairs = Vec::with_capacity(total.len());
    for (method, repaired) in &total {
        let e = evaluate_repaired(&predict(repaired)?, repaired, config.sweep.confidence)?;
        let error = e.error.unwrap_or(f64::NAN);
        repairs.push(RepairRow {
            model: MODEL_NAME.into(),
            repair: method.name().into(),
            error,
            difference: error - base_error,
            di: e.fairness.di,
            di_lo: e.fairness.di_lo,
            di_hi: e.fairness.di_hi,
        });
    }

    let sweep = run_sweep(&plan, predict, &config.sweep)?;
    Ok(ExperimentReport {
        rows: data.len(),
        train_rows: train.len(),
        test_rows: test.len(),
        root_seed: config.root_seed,
        split_seed,
        w2: plan.total_cost().max(0.0).sqrt(),
        baseline,
        repairs,
        sweep,
        model,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Writes `table1.csv`, `table2.csv`, `sweep.csv`, `model.json` and
/// `report.json` into `dir`.
pub fn write_report_dir(dir: &Path, report: &ExperimentReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut t1 = csv::Writer::from_writer(create(dir, "table1.csv")?);
    t1.serialize(&report.baseline)?;
    t1.flush()?;
    let mut t2 = csv::Writer::from_writer(create(dir, "table2.csv")?);
    for r in &report.repairs {
        t2.serialize(r)?;
    }
    t2.flush()?;
    write_sweep_csv(create(dir, "sweep.csv")?, &report.sweep)?;
    report.model.save(dir.join("model.json"))?;
    let mut out = create(dir, "report.json")?;
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
