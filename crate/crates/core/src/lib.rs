//! Disparate-impact auditing and optimal-transport data repair.
//!
//! The crate repairs the covariates of a dataset with a binary protected
//! attribute `s` by moving both group-conditional empirical distributions
//! toward their Wasserstein-2 barycenter, computed exactly from the optimal
//! coupling of the quadratic-cost transportation problem. Fairness is then
//! audited through disparate impact (with a confidence interval), balanced
//! error rate and total variation distance.
//!
//! ```
//! use fairot::{group_measure, repair, tv_distance_discrete, Group, LabeledDataset, Row};
//!
//! let rows = [(0.0, 0), (1.0, 0), (4.0, 1), (5.0, 1), (6.0, 1)]
//!     .iter()
//!     .map(|&(x, s)| Row { x: vec![x], group: Group::from_index(s).unwrap(), label: None })
//!     .collect();
//! let data = LabeledDataset::from_rows(rows)?;
//! let repaired = repair::total_repair_b(&data)?;
//! let (mu0, mu1) = repaired.group_measures()?;
//! assert_eq!(tv_distance_discrete(&mu0, &mu1)?, 0.0);
//! # let _ = group_measure(&data, Group::Minority)?;
//! # Ok::<(), fairot::Error>(())
//! ```

pub mod classify;
pub mod dataio;
pub mod error;
pub mod fairness;
pub mod measures;
pub mod numeric;
pub mod repair;
pub mod rng;
pub mod riskbound;
pub mod transport;


pub use classify::{fit_logistic, misclassification_error, predict, Design, FitConfig, LogisticModel};
pub use error::{Error, Result};
pub use fairness::{
    audit, balanced_error_rate, disparate_impact, oae_gap, FairnessReport, PredictabilityReport,
};
pub use measures::{
    group_measure, tv_distance_discrete, EmpiricalMeasure, Group, LabeledDataset, Row, WeightedRow,
};
pub use repair::{build_repair_plan, RepairMethod, RepairPlan, RepairedDataset};
pub use transport::{solve_transport, wasserstein2_1d, CostMatrix, Coupling, TransportResult};
