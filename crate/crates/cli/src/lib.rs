//! Library behind the `fairot` command: auditing, repair, λ-sweeps, the
//! end-to-end experiment and the `verify` self-checks.
//!
//! Every random choice flows from one root seed. The stream for a purpose is
//! `fairot::rng::derive_seed(root, tag, index)` with the tags `split` (train
//! and test split), `random-repair` (Bernoulli draws of the k-th random
//! repair, reused at every λ) and the `verify-*` tags of the self-checks.

pub mod commands;
pub mod experiment;
pub mod model;
pub mod sweep;
pub mod verify;

pub use commands::{
    cmd_audit, cmd_repair, cmd_train, evaluate, evaluate_repaired, parse_lambdas, repair_dataset, train_model,
    AuditOutput, Evaluation, RepairArgs, RepairSummary, TrainSummary,
};
pub use experiment::{run_experiment, write_report_dir, ExperimentConfig, ExperimentReport};
pub use model::ModelFile;
pub use sweep::{default_lambdas, run_sweep, SweepConfig, SweepRow};
pub use verify::{run_verify, VerifyConfig, VerifyReport};
