//! One-dimensional transport through sorted samples.
//!
//! On the line the quadratic-cost optimal coupling is the monotone
//! (north-west corner on sorted samples) coupling, and `W2` is the `L2`
//! distance between the two quantile functions.

use crate::error::{Error, Result};
use crate::measures::EmpiricalMeasure;

use super::{integer_units, Coupling, CouplingEntry};

fn sorted_order(mu: &EmpiricalMeasure) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..mu.len()).collect();
    idx.sort_by(|&a, &b| mu.point(a)[0].total_cmp(&mu.point(b)[0]).then(a.cmp(&b)));
    idx
}

fn check_1d(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<()> {
    for mu in [mu0, mu1] {
        if mu.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: mu.dim(),
            });
        }
    }
    Ok(())
}

/// Walks the two sorted samples, calling `emit(i, j, mass)` for every cell
/// of the monotone coupling with positive mass (indices in original order).
fn merge(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure, mut emit: impl FnMut(usize, usize, f64)) {
    let o0 = sorted_order(mu0);
    let o1 = sorted_order(mu1);
    if let Some((u0, u1, total)) = integer_units(mu0, mu1) {
        let (mut a, mut b) = (0usize, 0usize);
        let (mut ra, mut rb) = (u0, u1);
        while a < o0.len() && b < o1.len() {
            let k = ra.min(rb);
            emit(o0[a], o1[b], k as f64 / total as f64);
            ra -= k;
            rb -= k;
            if ra == 0 {
                a += 1;
                ra = u0;
            }
            if rb == 0 {
                b += 1;
                rb = u1;
            }
        }
        return;
    }
    // Residues at or below this level are rounding noise, not mass.
    const RESIDUE: f64 = 1e-15;
    let (mut a, mut b) = (0usize, 0usize);
    let mut ra = mu0.weight(o0[0]);
    let mut rb = mu1.weight(o1[0]);
    loop {
        let k = ra.min(rb);
        if k > RESIDUE {
            emit(o0[a], o1[b], k);
        }
        ra -= k;
        rb -= k;
        if ra <= RESIDUE {
            a += 1;
            if a == o0.len() {
                break;
            }
            ra = mu0.weight(o0[a]);
        }
        if rb <= RESIDUE {
            b += 1;
            if b == o1.len() {
                break;
            }
            rb = mu1.weight(o1[b]);
        }
    }
}

/// The monotone coupling of two 1-d measures.
pub fn monotone_coupling(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<Coupling> {
    check_1d(mu0, mu1)?;
    let mut entries = Vec::with_capacity(mu0.len() + mu1.len());
    merge(mu0, mu1, |row, col, mass| entries.push(CouplingEntry { row, col, mass }));
    Coupling::new(
        mu0.len(),
        mu1.len(),
        entries,
        mu0.weights().to_vec(),
        mu1.weights().to_vec(),
    )
}

/// `W2` between two 1-d measures without materialising a coupling.
pub fn wasserstein2_1d(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<f64> {
    check_1d(mu0, mu1)?;
    let mut cost = 0.0;
    merge(mu0, mu1, |i, j, mass| {
        let d = mu0.point(i)[0] - mu1.point(j)[0];
        cost += mass * d * d;
    });
    Ok(cost.max(0.0).sqrt())
}
