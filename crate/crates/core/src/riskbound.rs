//! Risk of the Bayes rule after repair, on synthetic problems with a known
//! regression function.
//!
//! For a problem with `eta_s(x) = P(Y = 1 | X = x, S = s)`, the risk of a
//! rule `g` is evaluated with the conditional error of each prediction
//! (`1 - eta` for a positive, `eta` for a negative) instead of a sampled
//! label, which removes the label noise from every estimate.
//!
//! When a row `x` is repaired into fragments `z_k` with masses `p_k`, the
//! excess risk of the Bayes rule `g_B` composed with the repair is the mean
//! over rows of
//!
//! ```text
//! sum_k p_k [1{g_B(z_k, s) = 0} - 1{g_B(x, s) = 0}] (2 eta_s(x) - 1)
//! ```
//!
//! and it is bounded by `2 sum_k p_k |eta_s(x) - eta_s(z_k)|`, itself bounded
//! by `2 sqrt(2) K sqrt(pi0 W0^2 + pi1 W1^2)` when `eta_s` is
//! `K`-Lipschitz and `W_s^2` is the transport cost from group `s` to its
//! repaired version.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{Group, LabeledDataset, Row};
use crate::numeric::{canonical_sum, mean_and_std_error, sigmoid};
use crate::repair::{build_repair_plan, RepairPlan, RepairedDataset};
use crate::rng;

/// Regression function of one group.
#[derive(Debug, Clone, PartialEq)]
pub enum Regression {
    /// `sigmoid(w.x + c)`, Lipschitz with constant `|w| / 4`.
    Logistic { w: Vec<f64>, c: f64 },
    /// `clamp(1/2 + w.x + c, 0, 1)`, Lipschitz with constant `|w|`.
    Ramp { w: Vec<f64>, c: f64 },
    Constant(f64),
}

impl Regression {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let affine = |w: &[f64], c: f64| c + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        match self {
            Regression::Logistic { w, c } => sigmoid(affine(w, *c)),
            Regression::Ramp { w, c } => (0.5 + affine(w, *c)).clamp(0.0, 1.0),
            Regression::Constant(p) => *p,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        let norm = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
        match self {
            Regression::Logistic { w, .. } => norm(w) / 4.0,
            Regression::Ramp { w, .. } => norm(w),
            Regression::Constant(_) => 0.0,
        }
    }
}

/// Isotropic Gaussian covariates of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCovariates {
    pub mean: Vec<f64>,
    pub sd: f64,
}

/// Two groups with Gaussian covariates and known regression functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticProblem {
    /// Probability of `s = 0`.
    pub p0: f64,
    pub covariates: [GaussianCovariates; 2],
    pub eta: [Regression; 2],
}

impl SyntheticProblem {
    pub fn dim(&self) -> usize {
        self.covariates[0].mean.len()
    }

    pub fn eta(&self, s: Group, x: &[f64]) -> f64 {
        self.eta[s.index()].eval(x)
    }

    pub fn lipschitz(&self, s: Group) -> f64 {
        self.eta[s.index()].lipschitz()
    }

    /// `K = max(K_0, K_1)`.
    pub fn lipschitz_max(&self) -> f64 {
        self.lipschitz(Group::Minority).max(self.lipschitz(Group::Default))
    }

    /// A random one-dimensional problem: shifted Gaussian groups, logistic
    /// regression functions for even `index` and ramps for odd ones.
    pub fn random_1d(seed: u64, index: u64) -> SyntheticProblem {
        let mut r = rng::derived_stream(seed, "synthetic-problem", index);
        let mut u = |lo: f64, hi: f64| lo + (hi - lo) * r.random::<f64>();
        let covariates = [
            GaussianCovariates { mean: vec![u(-2.0, 0.0)], sd: u(0.5, 1.5) },
            GaussianCovariates { mean: vec![u(0.0, 2.0)], sd: u(0.5, 1.5) },
        ];
        let mut eta = |_: usize| {
            let w = vec![u(0.3, 3.0)];
            let c = u(-1.0, 1.0);
            if index % 2 == 0 {
                Regression::Logistic { w, c }
            } else {
                Regression::Ramp { w: vec![w[0] / 4.0], c: c / 4.0 }
            }
        };
        let eta = [eta(0), eta(1)];
        SyntheticProblem { p0: u(0.2, 0.5), covariates, eta }
    }

    /// `n` labelled draws of `(x, s, y)` from the stream `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledDataset> {
        let mut r = rng::stream(seed);
        let d = self.dim();
        let normal = Normal::new(0.0, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let rows = (0..n)
            .map(|_| {
                let s = if r.random::<f64>() < self.p0 { Group::Minority } else { Group::Default };
                let cov = &self.covariates[s.index()];
                let x: Vec<f64> = (0..d).map(|k| cov.mean[k] + cov.sd * normal.sample(&mut r)).collect();
                let y = r.random::<f64>() < self.eta(s, &x);
                Row { x, group: s, label: Some(y) }
            })
            .collect();
        LabeledDataset::from_rows(rows)
    }

    /// The Bayes rule `1{eta_s(x) > 1/2}`.
    pub fn bayes(&self, s: Group, x: &[f64]) -> bool {
        self.eta(s, x) > 0.5
    }

    /// Probability that a prediction at `(x, s)` is wrong.
    pub fn conditional_error(&self, s: Group, x: &[f64], prediction: bool) -> f64 {
        let eta = self.eta(s, x);
        if prediction {
            1.0 - eta
        } else {
            eta
        }
    }
}

/// Risk `P(g != Y)` of a rule on a sample, with its standard error.
pub fn risk(problem: &SyntheticProblem, data: &LabeledDataset, rule: impl Fn(Group, &[f64]) -> bool) -> (f64, f64) {
    let errs: Vec<f64> = (0..data.len())
        .map(|i| {
            let (s, x) = (data.group(i), data.x(i));
            problem.conditional_error(s, x, rule(s, x))
        })
        .collect();
    mean_and_std_error(&errs)
}

/// Excess risk of the Bayes rule through a repair, the right-hand side of
/// its pointwise bound, and the transport terms of the global bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEvaluation {
    pub excess: f64,
    pub excess_se: f64,
    /// `2 E|eta_S(X) - eta_S(Z)|`.
    pub coupling_bound: f64,
    pub coupling_bound_se: f64,
    /// Standard error of the per-row difference `rhs - excess`.
    pub gap_se: f64,
    /// Transport cost from each group to its repaired version.
    pub w2_squared: [f64; 2],
    pub p0: f64,
    pub p1: f64,
}

impl RiskEvaluation {
    /// `2 sqrt(2) K sqrt(p0 W0^2 + p1 W1^2)`.
    pub fn bound(&self, lipschitz: f64) -> f64 {
        2.0 * 2f64.sqrt() * lipschitz * (self.p0 * self.w2_squared[0] + self.p1 * self.w2_squared[1]).max(0.0).sqrt()
    }

    /// `excess <= coupling_bound` within three standard errors of the difference.
    pub fn coupling_bound_holds(&self) -> bool {
        self.excess <= self.coupling_bound + 3.0 * self.gap_se
    }

    /// `excess <= bound` within three standard errors of the excess.
    pub fn risk_bound_holds(&self, lipschitz: f64) -> bool {
        self.excess <= self.bound(lipschitz) + 3.0 * self.excess_se
    }
}

/// Evaluates the Bayes rule of `problem` on `repaired`, a repair of `data`.
pub fn evaluate_repair(
    problem: &SyntheticProblem,
    data: &LabeledDataset,
    repaired: &RepairedDataset,
) -> Result<RiskEvaluation> {
    let n = data.len();
    let mut excess = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut row_mass = vec![0.0; n];
    let mut cost: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for f in &repaired.rows {
        let r = f.origin;
        if r >= n || data.group(r) != f.group {
            return Err(Error::InvalidParameter(format!(
                "repaired row points at source row {r}, which is not in the data"
            )));
        }
        let (s, x) = (f.group, data.x(r));
        let eta_x = problem.eta(s, x);
        let eta_z = problem.eta(s, &f.x);
        let flip = i32::from(!problem.bayes(s, &f.x)) - i32::from(!problem.bayes(s, x));
        excess[r] += f.weight * f64::from(flip) * (2.0 * eta_x - 1.0);
        rhs[r] += f.weight * 2.0 * (eta_x - eta_z).abs();
        row_mass[r] += f.weight;
        let d2: f64 = x.iter().zip(&f.x).map(|(a, b)| (a - b) * (a - b)).sum();
        cost[s.index()].push(f.weight * d2);
    }
    for r in 0..n {
        if row_mass[r] <= 0.0 {
            return Err(Error::InvalidParameter(format!("source row {r} has no repaired mass")));
        }
        excess[r] /= row_mass[r];
        rhs[r] /= row_mass[r];
    }
    let gap: Vec<f64> = rhs.iter().zip(&excess).map(|(a, b)| a - b).collect();
    let (excess_mean, excess_se) = mean_and_std_error(&excess);
    let (rhs_mean, rhs_se) = mean_and_std_error(&rhs);
    let (_, gap_se) = mean_and_std_error(&gap);
    let (p0, p1) = data.proportions();
    let [mut c0, mut c1] = cost;
    Ok(RiskEvaluation {
        excess: excess_mean,
        excess_se,
        coupling_bound: rhs_mean,
        coupling_bound_se: rhs_se,
        gap_se,
        w2_squared: [canonical_sum(&mut c0), canonical_sum(&mut c1)],
        p0,
        p1,
    })
}

/// Optimal plan for a sample: the monotone coupling on the line, the
/// network simplex otherwise.
pub fn plan_for(data: &LabeledDataset) -> Result<RepairPlan> {
    if data.dim() == 1 {
        RepairPlan::monotone_1d(data)
    } else {
        build_repair_plan(data)
    }
}

/// Excess risk (mean, standard error) of the Bayes rule after total repair
/// with procedure B on `n` fresh draws.
pub fn excess_risk(problem: &SyntheticProblem, n: usize, seed: u64) -> Result<(f64, f64)> {
    let data = problem.sample(n, seed)?;
    let plan = plan_for(&data)?;
    let ev = evaluate_repair(problem, &data, &plan.total_b())?;
    Ok((ev.excess, ev.excess_se))
}

/// Global bound for a plan's total repair.
pub fn excess_risk_bound(problem: &SyntheticProblem, plan: &RepairPlan) -> f64 {
    let (p0, p1) = plan.proportions();
    let w0 = plan.displacement_cost(Group::Minority);
    let w1 = plan.displacement_cost(Group::Default);
    2.0 * 2f64.sqrt() * problem.lipschitz_max() * (p0 * w0 + p1 * w1).max(0.0).sqrt()
}

/// Whether the pointwise bound holds for the total repair of `plan`.
pub fn coupling_bound_check(problem: &SyntheticProblem, plan: &RepairPlan) -> Result<bool> {
    Ok(evaluate_repair(problem, plan.data(), &plan.total_b())?.coupling_bound_holds())
}

/// Risks of a fixed rule that ignores `s` on the randomly repaired, the
/// original and the fully repaired data: `(random, original, full)`.
///
/// The rule is the Bayes rule of group 1 applied to everyone. Each repaired
/// fragment inherits the conditional error of its source row's label.
pub fn random_repair_risk_mixture(
    problem: &SyntheticProblem,
    plan: &RepairPlan,
    lambda: f64,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let data = plan.data();
    let rule = |x: &[f64]| problem.bayes(Group::Default, x);
    let weighted_risk = |repaired: &RepairedDataset| -> f64 {
        let pooled = repaired.pooled_weights();
        let mut terms: Vec<f64> = repaired
            .rows
            .iter()
            .zip(pooled)
            .map(|(f, w)| {
                let x = data.x(f.origin);
                let eta = problem.eta(f.group, x);
                w * if rule(&f.x) { 1.0 - eta } else { eta }
            })
            .collect();
        canonical_sum(&mut terms)
    };
    let random = weighted_risk(&plan.random(lambda, seed)?);
    let original = weighted_risk(&plan.random_with_draws(&vec![false; data.len()], 0.0)?);
    let full = weighted_risk(&plan.total_b());
    Ok((random, original, full))
}
