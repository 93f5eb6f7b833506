use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fairot::dataio::SchemaConfig;
use fairot::RepairMethod;
use fairot_cli::commands::{load_raw, RepairArgs};
use fairot_cli::sweep::write_sweep_csv;
use fairot_cli::{
    cmd_audit, cmd_repair, cmd_train, parse_lambdas, run_experiment, run_sweep, run_verify, write_report_dir,
    ExperimentConfig, ModelFile, SweepConfig, VerifyConfig,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fairot", version, about = "Disparate-impact audit and optimal-transport repair of tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit a trained model: error, DI with its interval, BER, OAE gap.
    Audit {
        #[arg(long)]
        data: PathBuf,
        /// Not needed when --data is a repaired file.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repair a dataset and write the weighted repaired rows.
    Repair {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// A, B, C, geometric or random.
        #[arg(long)]
        method: RepairMethod,
        /// Amount of repair for geometric and random; ignored otherwise.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_standardize: bool,
        /// Write the optimal plan as `i,j,mass` triplets.
        #[arg(long)]
        dump_coupling: Option<PathBuf>,
    },
    /// Fit the logistic classifier and write model.json.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_standardize: bool,
    },
    /// DI and error of a model under geometric and random repair over a λ grid.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// `start:step:end` or a comma list.
        #[arg(long, default_value = "0:0.05:1")]
        lambda: String,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split, fit, audit, repair with A, B and C, re-audit and sweep.
    Experiment {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long, default_value = "0:0.05:1")]
        lambda: String,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long, default_value_t = 2500)]
        test_size: usize,
        #[arg(long)]
        no_standardize: bool,
    },
    /// Run the fairness and risk self-checks; exits nonzero on any failure.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the checks as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn schema(path: &Path) -> Result<SchemaConfig> {
    SchemaConfig::from_path(path).with_context(|| format!("reading schema {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Audit { data, schema: schema_path, model, confidence, out } => {
            let schema = schema_path.as_deref().map(schema).transpose()?;
            let model = ModelFile::load(&model)?;
            let report = cmd_audit(&data, schema.as_ref(), &model, confidence)?;
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            print_json(&report)?;
        }
        Command::Repair { data, schema: schema_path, method, lambda, seed, out, no_standardize, dump_coupling } => {
            let args = RepairArgs {
                method,
                lambda,
                seed,
                standardize: !no_standardize,
                out,
                dump_coupling,
            };
            print_json(&cmd_repair(&data, &schema(&schema_path)?, &args)?)?;
        }
        Command::Train { data, schema: schema_path, out, no_standardize } => {
            let (model, summary) = cmd_train(&data, &schema(&schema_path)?, !no_standardize)?;
            model.save(&out)?;
            print_json(&summary)?;
        }
        Command::Sweep { data, schema: schema_path, model, lambda, seeds, seed, confidence, out } => {
            let model = ModelFile::load(&model)?;
            let (raw, _) = load_raw(&data, &schema(&schema_path)?)?;
            model.check_dim(raw.dim())?;
            let space = match &model.standardization {
                Some(st) => st.apply(&raw)?,
                None => raw,
            };
            let plan = fairot::build_repair_plan(&space)?;
            let config = SweepConfig {
                lambdas: parse_lambdas(&lambda)?,
                seeds,
                root_seed: seed,
                confidence,
            };
            let rows = run_sweep(&plan, |r| model.predict_model_space(&r.features()), &config)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_sweep_csv(BufWriter::new(file), &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Experiment {
            data,
            schema: schema_path,
            out,
            seed,
            seeds,
            lambda,
            confidence,
            test_size,
            no_standardize,
        } => {
            let (dataset, stats) = load_raw(&data, &schema(&schema_path)?)?;
            eprintln!("loaded {} rows ({} dropped)", stats.rows_kept, stats.rows_dropped);
            let config = ExperimentConfig {
                test_size,
                root_seed: seed,
                standardize: !no_standardize,
                sweep: SweepConfig {
                    lambdas: parse_lambdas(&lambda)?,
                    seeds,
                    root_seed: seed,
                    confidence,
                },
                ..ExperimentConfig::default()
            };
            let report = run_experiment(&dataset, &config)?;
            write_report_dir(&out, &report)?;
            print_json(&report)?;
        }
        Command::Verify { seed, out } => {
            let report = run_verify(&VerifyConfig { seed, ..VerifyConfig::default() })?;
            print!("{report}");
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            return Ok(report.all_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
