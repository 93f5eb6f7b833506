//! Self-checks of the fairness and risk results on seeded synthetic data.

use std::fmt;

use anyhow::Result;
use fairot::fairness::{di_at_most, di_ber_equivalence_check, min_ber_closed_form, min_ber_exhaustive};
use fairot::measures::{tv_distance_binned, Row};
use fairot::numeric::mean_and_std_error;
use fairot::riskbound::{evaluate_repair, plan_for, random_repair_risk_mixture, RiskEvaluation, SyntheticProblem};
use fairot::rng::{derive_seed, derived_stream};
use fairot::{tv_distance_discrete, EmpiricalMeasure, Group, LabeledDataset, RepairPlan};
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Sample size of each synthetic risk problem.
    pub samples: usize,
    pub problems: u64,
    /// Multiplies the risk bound. Values below one make the bound check a
    /// negative control.
    pub bound_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 100_000,
            problems: 20,
            bound_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{:<width$}  {status}  {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    let evs = risk_evaluations(config)?;
    let checks = vec![
        di_ber_threshold(),
        min_ber_oracle(config.seed)?,
        epsilon_predictability(config.seed)?,
        coupling_bound(&evs),
        risk_bound(&evs, config.bound_scale),
        risk_mixture(config.seed)?,
        geometric_plateau(config.seed)?,
    ];
    Ok(VerifyReport { checks })
}

fn di_ber_threshold() -> CheckResult {
    let mut mismatches = 0usize;
    let mut total = 0usize;
    for i in 1..=100 {
        for k in 1..=100 {
            let (a, b) = (f64::from(i) / 128.0, f64::from(k + 27) / 128.0);
            let ber = ((1.0 - b) + a) / 2.0;
            for t in 1..=10 {
                let tau = f64::from(t + 6) / 16.0;
                total += 1;
                if di_at_most(a, b, tau) != di_ber_equivalence_check(a, tau, ber).unwrap_or(false) {
                    mismatches += 1;
                }
            }
        }
    }
    CheckResult {
        name: "di-ber-threshold",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches over {total} (a, b, tau) cells"),
    }
}

/// Random measure on `{0, .., 5}` with masses in units of 1/64.
pub fn dyadic_measure<R: Rng>(rng: &mut R) -> EmpiricalMeasure {
    let n = rng.random_range(1..=6);
    let mut units = vec![1u32; n];
    for _ in n..64 {
        units[rng.random_range(0..n)] += 1;
    }
    let points = (0..n).map(|_| vec![f64::from(rng.random_range(0..6u8))]).collect();
    let weights = units.iter().map(|&u| f64::from(u) / 64.0).collect();
    EmpiricalMeasure::new(points, weights).expect("positive masses")
}

fn min_ber_oracle(seed: u64) -> Result<CheckResult> {
    let mut rng = derived_stream(seed, "verify-min-ber", 0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (p, q) = (dyadic_measure(&mut rng), dyadic_measure(&mut rng));
        let exact = min_ber_exhaustive(&p, &q)?.min_ber;
        let closed = min_ber_closed_form(&p, &q)?.min_ber;
        worst = worst.max((exact - closed).abs());
    }
    Ok(CheckResult {
        name: "min-ber-oracle",
        passed: worst == 0.0,
        detail: format!("max |enumerated - (1 - tv)/2| = {worst:e} over 200 pairs"),
    })
}

fn epsilon_predictability(seed: u64) -> Result<CheckResult> {
    let mut rng = derived_stream(seed, "verify-epsilon", 0);
    let mut mismatches = 0;
    for _ in 0..200 {
        let (p, q) = (dyadic_measure(&mut rng), dyadic_measure(&mut rng));
        let min_ber = min_ber_exhaustive(&p, &q)?.min_ber;
        let tv = tv_distance_discrete(&p, &q)?;
        for k in 0..=32 {
            let eps = f64::from(k) / 64.0;
            let predictable = min_ber <= eps;
            if predictable == (tv < 1.0 - 2.0 * eps) {
                mismatches += 1;
            }
        }
    }
    Ok(CheckResult {
        name: "epsilon-predictability",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches over 200 pairs x 33 levels"),
    })
}

fn risk_evaluations(config: &VerifyConfig) -> Result<Vec<(SyntheticProblem, RiskEvaluation)>> {
    (0..config.problems)
        .map(|i| {
            let problem = SyntheticProblem::random_1d(config.seed, i);
            let data = problem.sample(config.samples, derive_seed(config.seed, "verify-risk", i))?;
            let plan = plan_for(&data)?;
            let ev = evaluate_repair(&problem, &data, &plan.total_b())?;
            Ok((problem, ev))
        })
        .collect()
}

fn coupling_bound(evs: &[(SyntheticProblem, RiskEvaluation)]) -> CheckResult {
    let failed = evs.iter().filter(|(_, ev)| !ev.coupling_bound_holds()).count();
    let slack = evs
        .iter()
        .map(|(_, ev)| ev.coupling_bound - ev.excess)
        .fold(f64::INFINITY, f64::min);
    CheckResult {
        name: "coupling-bound",
        passed: failed == 0,
        detail: format!("{failed} of {} problems violate it; min slack {slack:.3e}", evs.len()),
    }
}

fn risk_bound(evs: &[(SyntheticProblem, RiskEvaluation)], scale: f64) -> CheckResult {
    let failed = evs
        .iter()
        .filter(|(p, ev)| ev.excess > scale * ev.bound(p.lipschitz_max()) + 3.0 * ev.excess_se)
        .count();
    let ratio = evs
        .iter()
        .map(|(p, ev)| ev.excess / (scale * ev.bound(p.lipschitz_max())))
        .fold(0.0, f64::max);
    CheckResult {
        name: "risk-bound",
        passed: failed == 0,
        detail: format!(
            "{failed} of {} problems violate it; max excess/bound {ratio:.3} (scale {scale})",
            evs.len()
        ),
    }
}

fn risk_mixture(seed: u64) -> Result<CheckResult> {
    let problem = SyntheticProblem::random_1d(seed, 1);
    let data = problem.sample(2000, derive_seed(seed, "verify-mixture", 0))?;
    let plan = plan_for(&data)?;
    let mut worst = 0.0f64;
    let mut passed = true;
    for lambda in [0.25, 0.5, 0.75] {
        let mut risks = Vec::with_capacity(100);
        let (mut original, mut full) = (0.0, 0.0);
        for k in 0..100 {
            let stream = derive_seed(seed, "verify-mixture-draws", k);
            let (r, o, f) = random_repair_risk_mixture(&problem, &plan, lambda, stream)?;
            risks.push(r);
            (original, full) = (o, f);
        }
        let (mean, se) = mean_and_std_error(&risks);
        let gap = (mean - ((1.0 - lambda) * original + lambda * full)).abs();
        passed &= gap <= 3.0 * se;
        worst = worst.max(gap / se.max(f64::MIN_POSITIVE));
    }
    Ok(CheckResult {
        name: "risk-mixture",
        passed,
        detail: format!("max |mean - mixture| = {worst:.2} standard errors"),
    })
}

/// Two uniform samples of size `n`: `U(k, k + 1)` in group 0 and
/// `U(-k - 1, -k)` in group 1.
pub fn separated_uniforms(k: f64, n: usize, seed: u64) -> Result<LabeledDataset> {
    let mut rng = derived_stream(seed, "separated-uniforms", 0);
    let rows = (0..2 * n)
        .map(|i| {
            let group = if i < n { Group::Minority } else { Group::Default };
            let u: f64 = rng.random();
            let x = if group == Group::Minority { k + u } else { -k - 1.0 + u };
            Row { x: vec![x], group, label: None }
        })
        .collect();
    Ok(LabeledDataset::from_rows(rows)?)
}

/// `min(1, (1 - lambda)(2k + 1))`.
pub fn geometric_tv_formula(k: f64, lambda: f64) -> f64 {
    ((1.0 - lambda) * (2.0 * k + 1.0)).min(1.0)
}

fn geometric_plateau(seed: u64) -> Result<CheckResult> {
    let k = 2.0;
    let data = separated_uniforms(k, 2000, seed)?;
    let plan = RepairPlan::monotone_1d(&data)?;
    let mut worst = 0.0f64;
    for step in 1..=9 {
        let lambda = f64::from(step) / 10.0;
        let (m0, m1) = plan.geometric(lambda)?.group_measures()?;
        let tv = tv_distance_binned(&m0, &m1, 0.1)?;
        worst = worst.max((tv - geometric_tv_formula(k, lambda)).abs());
    }
    Ok(CheckResult {
        name: "geometric-plateau",
        passed: worst <= 0.05,
        detail: format!("max |binned tv - min(1, (1 - lambda)(2K + 1))| = {worst:.4} for K = 2"),
    })
}
