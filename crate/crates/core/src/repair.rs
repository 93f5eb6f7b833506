//! Total and partial repair of the covariates toward the barycenter.
//!
//! A [`RepairPlan`] couples group 0 (rows of the optimal plan) with group 1
//! (columns) and assigns each positive cell `(i, j)` the barycentric point
//! `z_ij = pi0 * x0_i + pi1 * x1_j` with `pi_s = n_s / N`. The procedures:
//!
//! * **A** replaces every row by the plan-weighted average of its targets.
//! * **B** splits every row into its targets, each fragment carrying mass
//!   `g_ij`. Both repaired groups are then the same weighted point set.
//! * **C** repairs each coordinate separately with 1-d quantile maps.
//! * **Geometric** moves each fragment a fraction `lambda` toward its target.
//! * **Random** replaces each row by its B fragments with probability
//!   `lambda`, independently per row.
//!
//! Outputs list source rows in dataset order with the fragments of a row kept
//! together.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{group_measure, EmpiricalMeasure, Group, LabeledDataset, WeightedRow};
use crate::numeric::{canonical_sum, convex_combination, squared_distance};
use crate::rng;
use crate::transport::{monotone_coupling, solve_transport, Coupling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepairMethod {
    TotalA,
    TotalB,
    TotalC,
    Geometric,
    Random,
}

impl RepairMethod {
    pub fn name(self) -> &'static str {
        match self {
            RepairMethod::TotalA => "A",
            RepairMethod::TotalB => "B",
            RepairMethod::TotalC => "C",
            RepairMethod::Geometric => "geometric",
            RepairMethod::Random => "random",
        }
    }

    /// Whether `lambda` is a free parameter of the method.
    pub fn is_partial(self) -> bool {
        matches!(self, RepairMethod::Geometric | RepairMethod::Random)
    }
}

impl fmt::Display for RepairMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RepairMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "total-a" => Ok(RepairMethod::TotalA),
            "b" | "total-b" => Ok(RepairMethod::TotalB),
            "c" | "total-c" => Ok(RepairMethod::TotalC),
            "geometric" | "geo" => Ok(RepairMethod::Geometric),
            "random" => Ok(RepairMethod::Random),
            _ => Err(Error::InvalidParameter(format!(
                "unknown repair method `{s}` (expected A, B, C, geometric or random)"
            ))),
        }
    }
}

/// A barycentric target of one source row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target<'a> {
    pub point: &'a [f64],
    /// Plan mass `g_ij` of the cell.
    pub mass: f64,
    /// Dataset row of the coupled point in the other group.
    pub partner: usize,
}

/// Optimal plan between the two groups of a dataset, with its barycentric
/// support.
#[derive(Debug, Clone)]
pub struct RepairPlan {
    data: LabeledDataset,
    pi: [f64; 2],
    total_cost: f64,
    coupling: Coupling,
    /// Dataset row -> position within its group.
    position: Vec<usize>,
    /// Group position -> dataset row.
    group_rows: [Vec<usize>; 2],
    /// Barycentric points, aligned with `coupling.entries()`.
    bary: Vec<f64>,
    /// Entry indices of each group-1 position, by increasing group-0 index.
    col_entries: Vec<Vec<usize>>,
}

/// Plan from the exact transport solution between the two groups.
pub fn build_repair_plan(data: &LabeledDataset) -> Result<RepairPlan> {
    let mu0 = group_measure(data, Group::Minority)?;
    let mu1 = group_measure(data, Group::Default)?;
    let result = solve_transport(&mu0, &mu1)?;
    RepairPlan::from_coupling(data, result.coupling)
}

impl RepairPlan {
    /// Plan from the monotone coupling; one-dimensional data only. This is
    /// the optimal plan on the line and costs `O(N log N)`.
    pub fn monotone_1d(data: &LabeledDataset) -> Result<RepairPlan> {
        let mu0 = group_measure(data, Group::Minority)?;
        let mu1 = group_measure(data, Group::Default)?;
        RepairPlan::from_coupling(data, monotone_coupling(&mu0, &mu1)?)
    }

    /// Plan from any coupling between the uniform group measures.
    pub fn from_coupling(data: &LabeledDataset, coupling: Coupling) -> Result<RepairPlan> {
        let group_rows = [
            data.group_indices(Group::Minority),
            data.group_indices(Group::Default),
        ];
        for s in Group::BOTH {
            if group_rows[s.index()].is_empty() {
                return Err(Error::EmptyGroup(s));
            }
        }
        let (n0, n1) = (group_rows[0].len(), group_rows[1].len());
        if coupling.rows() != n0 || coupling.cols() != n1 {
            return Err(Error::MarginalMismatch(format!(
                "{}x{} plan for groups of sizes {n0} and {n1}",
                coupling.rows(),
                coupling.cols()
            )));
        }
        let mut position = vec![0; data.len()];
        for rows in &group_rows {
            for (k, &r) in rows.iter().enumerate() {
                position[r] = k;
            }
        }
        let (pi0, pi1) = data.proportions();
        let dim = data.dim();
        let mut bary = Vec::with_capacity(coupling.support_size() * dim);
        let mut col_entries = vec![Vec::new(); n1];
        let mut cost = Vec::with_capacity(coupling.support_size());
        for (k, e) in coupling.entries().iter().enumerate() {
            let x0 = data.x(group_rows[0][e.row]);
            let x1 = data.x(group_rows[1][e.col]);
            bary.extend(convex_combination(x0, pi0, x1, pi1));
            col_entries[e.col].push(k);
            cost.push(e.mass * squared_distance(x0, x1));
        }
        Ok(RepairPlan {
            data: data.clone(),
            pi: [pi0, pi1],
            total_cost: canonical_sum(&mut cost),
            coupling,
            position,
            group_rows,
            bary,
            col_entries,
        })
    }

    pub fn data(&self) -> &LabeledDataset {
        &self.data
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    /// Group weights `(pi0, pi1)`.
    pub fn proportions(&self) -> (f64, f64) {
        (self.pi[0], self.pi[1])
    }

    /// Transport cost `sum g_ij |x0_i - x1_j|^2` of the plan.
    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    /// Dataset rows of group `s`, in group order.
    pub fn group_rows(&self, s: Group) -> &[usize] {
        &self.group_rows[s.index()]
    }

    fn entry_point(&self, k: usize) -> &[f64] {
        let d = self.data.dim();
        &self.bary[k * d..(k + 1) * d]
    }

    /// Targets of dataset row `row`, ordered by partner position.
    pub fn targets(&self, row: usize) -> Vec<Target<'_>> {
        let pos = self.position[row];
        let entries = self.coupling.entries();
        let to_target = |k: usize, partner_group: Group| {
            let e = entries[k];
            let partner_pos = if partner_group == Group::Default { e.col } else { e.row };
            Target {
                point: self.entry_point(k),
                mass: e.mass,
                partner: self.group_rows[partner_group.index()][partner_pos],
            }
        };
        match self.data.group(row) {
            Group::Minority => {
                let start = entries.partition_point(|e| e.row < pos);
                let end = entries.partition_point(|e| e.row <= pos);
                (start..end).map(|k| to_target(k, Group::Default)).collect()
            }
            Group::Default => self.col_entries[pos]
                .iter()
                .map(|&k| to_target(k, Group::Minority))
                .collect(),
        }
    }

    /// Marginal mass `1/n_s` of dataset row `row` under the plan.
    pub fn row_mass(&self, row: usize) -> f64 {
        let pos = self.position[row];
        match self.data.group(row) {
            Group::Minority => self.coupling.row_marginal()[pos],
            Group::Default => self.coupling.col_marginal()[pos],
        }
    }

    /// The barycenter `sum g_ij delta_{z_ij}`.
    pub fn barycenter(&self) -> Result<EmpiricalMeasure> {
        let weights = self.coupling.entries().iter().map(|e| e.mass).collect();
        EmpiricalMeasure::from_flat(self.data.dim(), self.bary.clone(), weights)
    }

    /// `sum g_ij |x_s - z_ij|^2`: squared `W2` from group `s` to the
    /// barycenter along the plan.
    pub fn displacement_cost(&self, s: Group) -> f64 {
        let mut terms: Vec<f64> = self
            .coupling
            .entries()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let pos = if s == Group::Minority { e.row } else { e.col };
                let x = self.data.x(self.group_rows[s.index()][pos]);
                e.mass * squared_distance(x, self.entry_point(k))
            })
            .collect();
        canonical_sum(&mut terms)
    }

    fn fragments(&self, row: usize, lambda: f64, out: &mut Vec<WeightedRow>) {
        let x = self.data.x(row);
        for t in self.targets(row) {
            let point = if lambda == 1.0 {
                t.point.to_vec()
            } else if lambda == 0.0 {
                x.to_vec()
            } else {
                convex_combination(x, 1.0 - lambda, t.point, lambda)
            };
            out.push(WeightedRow {
                x: point,
                weight: t.mass,
                group: self.data.group(row),
                label: self.data.label(row),
                origin: row,
            });
        }
    }

    fn original(&self, row: usize) -> WeightedRow {
        WeightedRow {
            x: self.data.x(row).to_vec(),
            weight: self.row_mass(row),
            group: self.data.group(row),
            label: self.data.label(row),
            origin: row,
        }
    }

    fn finish(&self, rows: Vec<WeightedRow>, method: RepairMethod, lambda: f64, seed: Option<u64>) -> RepairedDataset {
        RepairedDataset {
            dim: self.data.dim(),
            rows,
            lambda,
            method,
            seed,
            feature_names: self.data.feature_names().to_vec(),
        }
    }

    /// Procedure A: one row per source row, at the plan-weighted average of
    /// its targets.
    pub fn total_a(&self) -> RepairedDataset {
        let rows = (0..self.data.len())
            .map(|row| {
                let targets = self.targets(row);
                let x = if targets.len() == 1 {
                    targets[0].point.to_vec()
                } else {
                    let mass = self.row_mass(row);
                    let mut avg = vec![0.0; self.data.dim()];
                    for t in &targets {
                        let partner = self.data.x(t.partner);
                        for (a, p) in avg.iter_mut().zip(partner) {
                            *a += t.mass / mass * p;
                        }
                    }
                    match self.data.group(row) {
                        Group::Minority => convex_combination(self.data.x(row), self.pi[0], &avg, self.pi[1]),
                        Group::Default => convex_combination(&avg, self.pi[0], self.data.x(row), self.pi[1]),
                    }
                };
                WeightedRow {
                    x,
                    ..self.original(row)
                }
            })
            .collect();
        self.finish(rows, RepairMethod::TotalA, 1.0, None)
    }

    /// Procedure B: every row split into all of its targets.
    pub fn total_b(&self) -> RepairedDataset {
        let mut rows = Vec::with_capacity(2 * self.coupling.support_size());
        for row in 0..self.data.len() {
            self.fragments(row, 1.0, &mut rows);
        }
        self.finish(rows, RepairMethod::TotalB, 1.0, None)
    }

    /// Fragments moved a fraction `lambda` of the way to their targets.
    pub fn geometric(&self, lambda: f64) -> Result<RepairedDataset> {
        check_lambda(lambda)?;
        let mut rows = Vec::with_capacity(2 * self.coupling.support_size());
        for row in 0..self.data.len() {
            self.fragments(row, lambda, &mut rows);
        }
        Ok(self.finish(rows, RepairMethod::Geometric, lambda, None))
    }

    /// Random repair with Bernoulli(`lambda`) draws from the stream seeded by
    /// `seed`. Draws are consumed in group order: all of group 0, then all
    /// of group 1.
    pub fn random(&self, lambda: f64, seed: u64) -> Result<RepairedDataset> {
        check_lambda(lambda)?;
        let mut stream = rng::stream(seed);
        let n = self.data.len();
        let draws: Vec<bool> = (0..n).map(|_| stream.random::<f64>() < lambda).collect();
        let mut out = self.random_with_draws(&draws, lambda)?;
        out.seed = Some(seed);
        Ok(out)
    }

    /// Random repair with explicit draws, indexed in group order (group 0
    /// positions first, then group 1). `lambda` is recorded, not used.
    pub fn random_with_draws(&self, draws: &[bool], lambda: f64) -> Result<RepairedDataset> {
        check_lambda(lambda)?;
        if draws.len() != self.data.len() {
            return Err(Error::LengthMismatch {
                left: draws.len(),
                right: self.data.len(),
            });
        }
        let n0 = self.group_rows[0].len();
        let mut rows = Vec::with_capacity(self.data.len());
        for row in 0..self.data.len() {
            let slot = match self.data.group(row) {
                Group::Minority => self.position[row],
                Group::Default => n0 + self.position[row],
            };
            if draws[slot] {
                self.fragments(row, 1.0, &mut rows);
            } else {
                rows.push(self.original(row));
            }
        }
        Ok(self.finish(rows, RepairMethod::Random, lambda, None))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

/// Repaired rows with per-group masses summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairedDataset {
    pub dim: usize,
    pub rows: Vec<WeightedRow>,
    pub lambda: f64,
    pub method: RepairMethod,
    pub seed: Option<u64>,
    pub feature_names: Vec<String>,
}

impl RepairedDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row-major features of all rows.
    pub fn features(&self) -> Vec<f64> {
        self.rows.iter().flat_map(|r| r.x.iter().copied()).collect()
    }

    pub fn groups(&self) -> Vec<Group> {
        self.rows.iter().map(|r| r.group).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.weight).collect()
    }

    pub fn labels(&self) -> Option<Vec<bool>> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Total mass of group `s`.
    pub fn group_mass(&self, s: Group) -> f64 {
        let mut w: Vec<f64> = self.rows.iter().filter(|r| r.group == s).map(|r| r.weight).collect();
        canonical_sum(&mut w)
    }

    /// Row masses on the pooled population: `pi_s * weight`, where
    /// `pi_s` is the share of group-`s` source rows.
    pub fn pooled_weights(&self) -> Vec<f64> {
        let mut seen = [std::collections::BTreeSet::new(), std::collections::BTreeSet::new()];
        for r in &self.rows {
            seen[r.group.index()].insert(r.origin);
        }
        let n = (seen[0].len() + seen[1].len()) as f64;
        let pi = [seen[0].len() as f64 / n, seen[1].len() as f64 / n];
        self.rows.iter().map(|r| pi[r.group.index()] * r.weight).collect()
    }

    /// The repaired measure of each group.
    pub fn group_measures(&self) -> Result<(EmpiricalMeasure, EmpiricalMeasure)> {
        let build = |s: Group| {
            let mut coords = Vec::new();
            let mut weights = Vec::new();
            for r in self.rows.iter().filter(|r| r.group == s) {
                coords.extend_from_slice(&r.x);
                weights.push(r.weight);
            }
            if weights.is_empty() {
                return Err(Error::EmptyGroup(s));
            }
            EmpiricalMeasure::from_flat(self.dim, coords, weights)
        };
        Ok((build(Group::Minority)?, build(Group::Default)?))
    }
}

/// Procedure A on the exact plan.
pub fn total_repair_a(data: &LabeledDataset) -> Result<RepairedDataset> {
    Ok(build_repair_plan(data)?.total_a())
}

/// Procedure B on the exact plan.
pub fn total_repair_b(data: &LabeledDataset) -> Result<RepairedDataset> {
    Ok(build_repair_plan(data)?.total_b())
}

pub fn geometric_repair(data: &LabeledDataset, lambda: f64) -> Result<RepairedDataset> {
    check_lambda(lambda)?;
    build_repair_plan(data)?.geometric(lambda)
}

pub fn random_repair(data: &LabeledDataset, lambda: f64, seed: u64) -> Result<RepairedDataset> {
    check_lambda(lambda)?;
    build_repair_plan(data)?.random(lambda, seed)
}

/// Procedure C: coordinate-wise quantile repair.
///
/// In each coordinate, a group-`s` value of rank `r` (1-based, ties broken by
/// row order) sits at level `u = r / n_s`; the other group's type-1 quantile
/// at `u` is its order statistic of rank `ceil(r * n_o / n_s)`. The repaired
/// value is `pi0 * q0(u) + pi1 * q1(u)`.
pub fn total_repair_c(data: &LabeledDataset) -> Result<RepairedDataset> {
    let rows = [
        data.group_indices(Group::Minority),
        data.group_indices(Group::Default),
    ];
    for s in Group::BOTH {
        if rows[s.index()].is_empty() {
            return Err(Error::EmptyGroup(s));
        }
    }
    let (pi0, pi1) = data.proportions();
    let dim = data.dim();
    let mut repaired = vec![vec![0.0; dim]; data.len()];
    for k in 0..dim {
        let sorted: Vec<Vec<(f64, usize)>> = rows
            .iter()
            .map(|idx| {
                let mut v: Vec<(f64, usize)> = idx.iter().map(|&r| (data.x(r)[k], r)).collect();
                v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                v
            })
            .collect();
        for s in Group::BOTH {
            let own = &sorted[s.index()];
            let other = &sorted[s.other().index()];
            let (ns, no) = (own.len(), other.len());
            for (rank0, &(value, row)) in own.iter().enumerate() {
                let r = rank0 + 1;
                let q = (r * no).div_ceil(ns);
                let partner = other[q - 1].0;
                let (v0, v1) = match s {
                    Group::Minority => (value, partner),
                    Group::Default => (partner, value),
                };
                repaired[row][k] = convex_combination(&[v0], pi0, &[v1], pi1)[0];
            }
        }
    }
    let (n0, n1) = (rows[0].len() as f64, rows[1].len() as f64);
    let out = repaired
        .into_iter()
        .enumerate()
        .map(|(row, x)| WeightedRow {
            x,
            weight: if data.group(row) == Group::Minority { 1.0 / n0 } else { 1.0 / n1 },
            group: data.group(row),
            label: data.label(row),
            origin: row,
        })
        .collect();
    Ok(RepairedDataset {
        dim,
        rows: out,
        lambda: 1.0,
        method: RepairMethod::TotalC,
        seed: None,
        feature_names: data.feature_names().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{tv_distance_discrete, Row};

    pub(crate) fn dataset_1d(x0: &[f64], x1: &[f64]) -> LabeledDataset {
        let rows = x0
            .iter()
            .map(|&x| (x, Group::Minority))
            .chain(x1.iter().map(|&x| (x, Group::Default)))
            .map(|(x, group)| Row {
                x: vec![x],
                group,
                label: None,
            })
            .collect();
        LabeledDataset::from_rows(rows).unwrap()
    }

    fn sorted_points(m: &EmpiricalMeasure) -> Vec<(u64, u64)> {
        let mut v: Vec<(u64, u64)> = m
            .points()
            .zip(m.weights())
            .map(|(p, w)| (p[0].to_bits(), w.to_bits()))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            RepairMethod::TotalA,
            RepairMethod::TotalB,
            RepairMethod::TotalC,
            RepairMethod::Geometric,
            RepairMethod::Random,
        ] {
            assert_eq!(m.name().parse::<RepairMethod>().unwrap(), m);
        }
        assert!("D".parse::<RepairMethod>().is_err());
    }

    #[test]
    fn single_point_per_group() {
        let data = dataset_1d(&[0.0], &[4.0]);
        let plan = build_repair_plan(&data).unwrap();
        for row in 0..2 {
            let t = plan.targets(row);
            assert_eq!(t.len(), 1);
            assert_eq!(t[0].point, &[2.0]);
        }
    }

    #[test]
    fn total_b_groups_coincide() {
        let data = dataset_1d(&[0.1, 0.7, 1.3, 2.0], &[0.0, 0.5, 0.9, 1.1, 1.8, 2.5, 3.0]);
        let b = total_repair_b(&data).unwrap();
        let (m0, m1) = b.group_measures().unwrap();
        assert_eq!(tv_distance_discrete(&m0, &m1).unwrap(), 0.0);
        assert_eq!(sorted_points(&m0), sorted_points(&m1));
        assert_eq!(m0.len(), 10);
    }

    #[test]
    fn total_a_differs_between_groups_for_unequal_sizes() {
        let data = dataset_1d(&[0.1, 0.7, 1.3, 2.0], &[0.0, 0.5, 0.9, 1.1, 1.8, 2.5, 3.0]);
        let a = total_repair_a(&data).unwrap();
        assert_eq!(a.len(), 11);
        let (m0, m1) = a.group_measures().unwrap();
        assert_eq!((m0.len(), m1.len()), (4, 7));
        assert!(tv_distance_discrete(&m0, &m1).unwrap() > 0.0);
    }

    #[test]
    fn equal_sizes_make_a_and_b_agree() {
        let data = dataset_1d(&[0.0, 1.0, 3.0], &[2.0, 5.0, 4.0]);
        let a = total_repair_a(&data).unwrap();
        let b = total_repair_b(&data).unwrap();
        assert_eq!(a.rows, b.rows);
        // Midpoints of the sorted matching.
        let xs: Vec<f64> = a.rows.iter().map(|r| r.x[0]).collect();
        assert_eq!(xs, vec![1.0, 2.5, 4.0, 1.0, 4.0, 2.5]);
    }

    #[test]
    fn lambda_endpoints() {
        let data = dataset_1d(&[0.1, 0.7, 1.3], &[0.0, 0.5, 0.9, 1.1, 1.8]);
        let plan = build_repair_plan(&data).unwrap();
        assert_eq!(plan.geometric(1.0).unwrap().rows, plan.total_b().rows);
        assert_eq!(plan.random(1.0, 3).unwrap().rows, plan.total_b().rows);
        let r0 = plan.random(0.0, 3).unwrap();
        assert_eq!(r0.len(), data.len());
        assert!(r0.rows.iter().all(|r| r.x == data.x(r.origin)));
        let g0 = plan.geometric(0.0).unwrap();
        assert!(g0.rows.iter().all(|r| r.x == data.x(r.origin)));
        assert!(plan.geometric(1.5).is_err());
        assert!(plan.random(-0.1, 0).is_err());
    }

    #[test]
    fn masses_are_conserved() {
        let data = dataset_1d(&[0.1, 0.7, 1.3, 2.0], &[0.0, 0.5, 0.9, 1.1, 1.8, 2.5, 3.0]);
        let plan = build_repair_plan(&data).unwrap();
        for out in [
            plan.total_a(),
            plan.total_b(),
            plan.geometric(0.3).unwrap(),
            plan.random(0.6, 11).unwrap(),
            total_repair_c(&data).unwrap(),
        ] {
            for s in Group::BOTH {
                assert!((out.group_mass(s) - 1.0).abs() < 1e-10, "{}", out.method);
            }
        }
    }

    #[test]
    fn total_c_leaves_identical_groups_unchanged() {
        let data = dataset_1d(&[0.0, 1.0, 2.0], &[2.0, 0.0, 1.0]);
        let c = total_repair_c(&data).unwrap();
        for r in &c.rows {
            assert_eq!(r.x, data.x(r.origin));
        }
    }

    #[test]
    fn total_c_equal_sizes_matches_a() {
        let data = dataset_1d(&[0.0, 1.0, 3.0, 7.0], &[2.0, 5.0, 4.0, -1.0]);
        let a = total_repair_a(&data).unwrap();
        let c = total_repair_c(&data).unwrap();
        for (ra, rc) in a.rows.iter().zip(&c.rows) {
            assert!((ra.x[0] - rc.x[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn pooled_weights_sum_to_one() {
        let data = dataset_1d(&[0.1, 0.7, 1.3], &[0.0, 0.5, 0.9, 1.1, 1.8]);
        let b = total_repair_b(&data).unwrap();
        let total: f64 = b.pooled_weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
