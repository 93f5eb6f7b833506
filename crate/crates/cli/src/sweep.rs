use std::io::Write;

use anyhow::{bail, Result};
use fairot::rng::derive_seed;
use fairot::{RepairMethod, RepairPlan, RepairedDataset};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{evaluate_repaired, Evaluation};

/// One line of the sweep table. Random rows average `n_seeds` repairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub method: RepairMethod,
    pub di: f64,
    pub di_lo: f64,
    pub di_hi: f64,
    pub error: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub seeds: usize,
    pub root_seed: u64,
    pub confidence: f64,
}

/// `0, 0.05, ..., 1`.
pub fn default_lambdas() -> Vec<f64> {
    (0..=20).map(|k| f64::from(k) / 20.0).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambdas: default_lambdas(),
            seeds: 100,
            root_seed: 0,
            confidence: 0.95,
        }
    }
}

/// Stream seed of the `k`-th random repair. The same streams are reused at
/// every `lambda`.
pub fn random_repair_seed(root: u64, k: usize) -> u64 {
    derive_seed(root, "random-repair", k as u64)
}

/// Repairs the plan's dataset at each `lambda` with the geometric and random
/// procedures and evaluates `predict` (a classifier on the repair space) on
/// every repair.
pub fn run_sweep<P>(plan: &RepairPlan, predict: P, config: &SweepConfig) -> Result<Vec<SweepRow>>
where
    P: Fn(&RepairedDataset) -> Result<Vec<bool>> + Sync,
{
    if config.lambdas.windows(2).any(|w| w[1] <= w[0]) {
        bail!("sweep lambdas must be strictly increasing");
    }
    if config.seeds == 0 {
        bail!("random sweeps need at least one seed");
    }
    if plan.data().labels().is_none() {
        bail!("sweeps report the error and need a target column");
    }
    let eval = |repaired: RepairedDataset| -> Result<Evaluation> {
        let pred = predict(&repaired)?;
        evaluate_repaired(&pred, &repaired, config.confidence)
    };
    // (lambda index, None for geometric or Some(seed index) for random).
    let cells: Vec<(usize, Option<usize>)> = (0..config.lambdas.len())
        .flat_map(|l| std::iter::once((l, None)).chain((0..config.seeds).map(move |k| (l, Some(k)))))
        .collect();
    let results: Vec<Evaluation> = cells
        .par_iter()
        .map(|&(l, seed)| {
            let lambda = config.lambdas[l];
            let repaired = match seed {
                None => plan.geometric(lambda)?,
                Some(k) => plan.random(lambda, random_repair_seed(config.root_seed, k))?,
            };
            eval(repaired)
        })
        .collect::<Result<_>>()?;

    let per_lambda = 1 + config.seeds;
    let mut rows = Vec::with_capacity(2 * config.lambdas.len());
    for (l, &lambda) in config.lambdas.iter().enumerate() {
        let block = &results[l * per_lambda..(l + 1) * per_lambda];
        rows.push(row(lambda, RepairMethod::Geometric, &block[..1]));
        rows.push(row(lambda, RepairMethod::Random, &block[1..]));
    }
    rows.sort_by_key(|r| r.method != RepairMethod::Geometric);
    Ok(rows)
}

fn row(lambda: f64, method: RepairMethod, evals: &[Evaluation]) -> SweepRow {
    let n = evals.len() as f64;
    let mean = |f: &dyn Fn(&Evaluation) -> f64| evals.iter().map(f).sum::<f64>() / n;
    SweepRow {
        lambda,
        method,
        di: mean(&|e| e.fairness.di),
        di_lo: mean(&|e| e.fairness.di_lo),
        di_hi: mean(&|e| e.fairness.di_hi),
        error: mean(&|e| e.error.unwrap_or(f64::NAN)),
        n_seeds: evals.len(),
    }
}

pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}
