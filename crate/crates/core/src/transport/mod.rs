//! Exact quadratic-cost optimal transport between empirical measures.
//!
//! [`solve_transport`] solves the transportation linear program
//!
//! ```text
//! min  sum_ij c_ij g_ij   s.t.  sum_j g_ij = p_i,  sum_i g_ij = q_j,  g >= 0
//! ```
//!
//! with `c_ij = |x_i - y_j|^2`, using a network simplex. When both measures
//! carry uniform weights the flows are integers on a common denominator, so
//! the returned coupling is exact up to a single final division.

mod monotone;
mod simplex;

pub use monotone::{monotone_coupling, wasserstein2_1d};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::EmpiricalMeasure;
use crate::numeric::{canonical_sum, convex_combination, squared_distance};

/// Absolute tolerance on coupling marginals.
pub const MARGINAL_TOL: f64 = 1e-10;

/// Largest `n0 * n1` accepted by [`solve_transport`].
pub const MAX_COST_ENTRIES: usize = 25_000_000;

/// Flows below this are treated as zero on the floating-point path.
const SUPPORT_TOL: f64 = 1e-14;

/// Dense matrix of squared Euclidean distances, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn squared_euclidean(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<Self> {
        check_pair(mu0, mu1)?;
        let (rows, cols) = (mu0.len(), mu1.len());
        if rows.saturating_mul(cols) > MAX_COST_ENTRIES {
            return Err(Error::ProblemTooLarge { rows, cols });
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for x in mu0.points() {
            entries.extend(mu1.points().map(|y| squared_distance(x, y)));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

/// One positive cell of a coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingEntry {
    pub row: usize,
    pub col: usize,
    pub mass: f64,
}

/// A sparse transport plan with its two marginals.
///
/// Only strictly positive cells are stored, sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    rows: usize,
    cols: usize,
    entries: Vec<CouplingEntry>,
    row_start: Vec<usize>,
    row_marginal: Vec<f64>,
    col_marginal: Vec<f64>,
}

impl Coupling {
    /// Validates and stores a plan. Zero cells are dropped; duplicated cells,
    /// negative masses and marginal errors above [`MARGINAL_TOL`] are rejected.
    pub fn new(
        rows: usize,
        cols: usize,
        mut entries: Vec<CouplingEntry>,
        row_marginal: Vec<f64>,
        col_marginal: Vec<f64>,
    ) -> Result<Self> {
        if row_marginal.len() != rows || col_marginal.len() != cols {
            return Err(Error::MarginalMismatch(format!(
                "marginal lengths {}x{} do not match a {rows}x{cols} plan",
                row_marginal.len(),
                col_marginal.len()
            )));
        }
        entries.retain(|e| e.mass != 0.0);
        entries.sort_by_key(|e| (e.row, e.col));
        let mut row_sums = vec![Vec::new(); rows];
        let mut col_sums = vec![Vec::new(); cols];
        for (k, e) in entries.iter().enumerate() {
            if e.row >= rows || e.col >= cols {
                return Err(Error::MarginalMismatch(format!(
                    "cell ({}, {}) outside a {rows}x{cols} plan",
                    e.row, e.col
                )));
            }
            if !(e.mass.is_finite() && e.mass > 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "cell ({}, {}) has mass {}",
                    e.row, e.col, e.mass
                )));
            }
            if k > 0 && (entries[k - 1].row, entries[k - 1].col) == (e.row, e.col) {
                return Err(Error::MarginalMismatch(format!(
                    "cell ({}, {}) listed twice",
                    e.row, e.col
                )));
            }
            row_sums[e.row].push(e.mass);
            col_sums[e.col].push(e.mass);
        }
        for (i, (mut s, &target)) in row_sums.into_iter().zip(&row_marginal).enumerate() {
            let got = canonical_sum(&mut s);
            if (got - target).abs() > MARGINAL_TOL {
                return Err(Error::MarginalMismatch(format!(
                    "row {i} sums to {got}, expected {target}"
                )));
            }
        }
        for (j, (mut s, &target)) in col_sums.into_iter().zip(&col_marginal).enumerate() {
            let got = canonical_sum(&mut s);
            if (got - target).abs() > MARGINAL_TOL {
                return Err(Error::MarginalMismatch(format!(
                    "column {j} sums to {got}, expected {target}"
                )));
            }
        }
        let mut row_start = vec![0usize; rows + 1];
        for e in &entries {
            row_start[e.row + 1] += 1;
        }
        for i in 0..rows {
            row_start[i + 1] += row_start[i];
        }
        Ok(Self {
            rows,
            cols,
            entries,
            row_start,
            row_marginal,
            col_marginal,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Positive cells in `(row, col)` order.
    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    /// Number of strictly positive cells.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// Positive cells of row `i`, by increasing column.
    pub fn row(&self, i: usize) -> &[CouplingEntry] {
        &self.entries[self.row_start[i]..self.row_start[i + 1]]
    }

    /// Positive cells grouped by column, each list by increasing row.
    pub fn columns(&self) -> Vec<Vec<CouplingEntry>> {
        let mut out = vec![Vec::new(); self.cols];
        for e in &self.entries {
            out[e.col].push(*e);
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = self.row(i);
        row.binary_search_by_key(&j, |e| e.col)
            .map_or(0.0, |k| row[k].mass)
    }

    pub fn row_marginal(&self) -> &[f64] {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &[f64] {
        &self.col_marginal
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for e in &self.entries {
            dense[e.row][e.col] = e.mass;
        }
        dense
    }

    /// `sum_ij c_ij g_ij` for the squared distances between the two supports.
    pub fn cost(&self, mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mass * squared_distance(mu0.point(e.row), mu1.point(e.col)))
            .sum()
    }
}

/// Optimal plan, its cost `T2` and `W2 = sqrt(T2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub coupling: Coupling,
    pub cost: f64,
    pub w2: f64,
}

fn check_pair(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<()> {
    if mu0.dim() != mu1.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu0.dim(),
            found: mu1.dim(),
        });
    }
    Ok(())
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// For two uniform measures, the integer masses `(L/n0, L/n1, L)` on the
/// common denominator `L = lcm(n0, n1)`.
pub(crate) fn integer_units(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Option<(u64, u64, u64)> {
    if !(mu0.is_uniform() && mu1.is_uniform()) {
        return None;
    }
    let (n0, n1) = (mu0.len() as u64, mu1.len() as u64);
    let l = n0 / gcd(n0, n1) * n1;
    Some((l / n0, l / n1, l))
}

/// Exact optimal coupling for the quadratic cost.
///
/// Deterministic for a fixed input order. Inputs with unequal total mass or
/// non-finite coordinates are rejected by the measure constructors, so every
/// solve is feasible.
pub fn solve_transport(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<TransportResult> {
    let cost = CostMatrix::squared_euclidean(mu0, mu1)?;
    let entries: Vec<CouplingEntry> = match integer_units(mu0, mu1) {
        Some((u0, u1, total)) => {
            let supply = vec![u0 as i64; mu0.len()];
            let demand = vec![u1 as i64; mu1.len()];
            simplex::solve(cost.as_slice(), &supply, &demand)?
                .arcs
                .into_iter()
                .filter(|&(_, _, f)| f > 0)
                .map(|(row, col, f)| CouplingEntry {
                    row,
                    col,
                    mass: f as f64 / total as f64,
                })
                .collect()
        }
        None => simplex::solve(cost.as_slice(), mu0.weights(), mu1.weights())?
            .arcs
            .into_iter()
            .filter(|&(_, _, f)| f > SUPPORT_TOL)
            .map(|(row, col, mass)| CouplingEntry { row, col, mass })
            .collect(),
    };
    let coupling = Coupling::new(
        mu0.len(),
        mu1.len(),
        entries,
        mu0.weights().to_vec(),
        mu1.weights().to_vec(),
    )?;
    let total = coupling.cost(mu0, mu1).max(0.0);
    Ok(TransportResult {
        coupling,
        cost: total,
        w2: total.sqrt(),
    })
}

/// Squared `W2`, through the sorted-sample path in one dimension.
pub fn wasserstein2_squared(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<f64> {
    check_pair(mu0, mu1)?;
    if mu0.dim() == 1 {
        let w = wasserstein2_1d(mu0, mu1)?;
        Ok(w * w)
    } else {
        Ok(solve_transport(mu0, mu1)?.cost)
    }
}

fn check_coupling(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure, coupling: &Coupling) -> Result<()> {
    check_pair(mu0, mu1)?;
    if coupling.rows() != mu0.len() || coupling.cols() != mu1.len() {
        return Err(Error::MarginalMismatch(format!(
            "{}x{} plan for measures of sizes {} and {}",
            coupling.rows(),
            coupling.cols(),
            mu0.len(),
            mu1.len()
        )));
    }
    let off = |a: &[f64], b: &[f64]| a.iter().zip(b).any(|(x, y)| (x - y).abs() > MARGINAL_TOL);
    if off(coupling.row_marginal(), mu0.weights()) || off(coupling.col_marginal(), mu1.weights()) {
        return Err(Error::MarginalMismatch(
            "plan marginals differ from the measure weights".into(),
        ));
    }
    Ok(())
}

/// Barycenter of two measures from their optimal plan: mass `g_ij` at
/// `pi0 * x_i + pi1 * y_j` for every positive cell.
pub fn barycenter_from_coupling(
    mu0: &EmpiricalMeasure,
    mu1: &EmpiricalMeasure,
    coupling: &Coupling,
    pi0: f64,
    pi1: f64,
) -> Result<EmpiricalMeasure> {
    if !(pi0 >= 0.0 && pi1 >= 0.0 && (pi0 + pi1 - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidWeights(format!(
            "barycentric weights ({pi0}, {pi1}) must be nonnegative and sum to one"
        )));
    }
    check_coupling(mu0, mu1, coupling)?;
    let dim = mu0.dim();
    let mut coords = Vec::with_capacity(coupling.support_size() * dim);
    let mut weights = Vec::with_capacity(coupling.support_size());
    for e in coupling.entries() {
        coords.extend(convex_combination(mu0.point(e.row), pi0, mu1.point(e.col), pi1));
        weights.push(e.mass);
    }
    EmpiricalMeasure::from_flat(dim, coords, weights)
}

/// Point of the `W2` geodesic at time `t`: mass `g_ij` at `(1 - t) x_i + t y_j`.
pub fn displacement_interpolation(
    mu0: &EmpiricalMeasure,
    mu1: &EmpiricalMeasure,
    coupling: &Coupling,
    t: f64,
) -> Result<EmpiricalMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::LambdaOutOfRange(t));
    }
    barycenter_from_coupling(mu0, mu1, coupling, 1.0 - t, t)
}

/// `sum_j w_j W2^2(nu, mu_j)`.
pub fn variance_functional(
    nu: &EmpiricalMeasure,
    mus: &[EmpiricalMeasure],
    weights: &[f64],
) -> Result<f64> {
    if mus.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: mus.len(),
            right: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
    {
        return Err(Error::InvalidWeights(
            "functional weights must be nonnegative and sum to one".into(),
        ));
    }
    let mut total = 0.0;
    for (mu, &w) in mus.iter().zip(weights) {
        if w > 0.0 {
            total += w * wasserstein2_squared(nu, mu)?;
        }
    }
    Ok(total)
}
