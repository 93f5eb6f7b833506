//! Disparate impact, balanced error rate and predictability of `s`.
//!
//! A prediction of `true` is a success. With `a = P(g = 1 | s = 0)` and
//! `b = P(g = 1 | s = 1)`, disparate impact is `a / b` and the balanced
//! error rate of `g` as a predictor of `s` is `((1 - b) + a) / 2`.
//!
//! Every function accepts optional per-row masses so that mass-split repaired
//! data is audited with its weights. Probabilities are then weighted means,
//! and the confidence interval uses Kish effective sample sizes.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::measures::{aggregate_union, tv_distance_discrete, EmpiricalMeasure, Group};
use crate::numeric::canonical_sum;

/// Largest union support accepted by [`min_ber_exhaustive`].
pub const MAX_EXHAUSTIVE_SUPPORT: usize = 24;

/// Audit of one classifier on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    /// Success rate of group 0.
    pub a: f64,
    /// Success rate of group 1.
    pub b: f64,
    pub di: f64,
    pub di_lo: f64,
    pub di_hi: f64,
    pub ber: f64,
    pub oae_gap: Option<f64>,
    /// Effective size of group 0 (the row count for unweighted data).
    pub n0: f64,
    pub n1: f64,
    pub confidence: f64,
}

/// Minimum balanced error rate of predicting `s` from `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictabilityReport {
    pub min_ber: f64,
    pub tv: f64,
    /// Smallest `eps` for which `s` is `eps`-predictable.
    pub epsilon_star: f64,
}

fn check_lengths(n: usize, other: usize) -> Result<()> {
    if n != other {
        return Err(Error::LengthMismatch { left: n, right: other });
    }
    Ok(())
}

fn check_weights(weights: Option<&[f64]>, n: usize) -> Result<()> {
    if let Some(w) = weights {
        check_lengths(n, w.len())?;
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidWeights("row masses must be finite and nonnegative".into()));
        }
    }
    Ok(())
}

/// Per-group weighted totals: (mass where `hit`, group mass, sum of squared masses).
fn group_totals(
    hits: &[bool],
    groups: &[Group],
    weights: Option<&[f64]>,
    s: Group,
) -> (f64, f64, f64) {
    let mut hit = Vec::new();
    let mut all = Vec::new();
    let mut sq = Vec::new();
    for (k, (&h, &g)) in hits.iter().zip(groups).enumerate() {
        if g != s {
            continue;
        }
        let w = weights.map_or(1.0, |w| w[k]);
        if h {
            hit.push(w);
        }
        all.push(w);
        sq.push(w * w);
    }
    (canonical_sum(&mut hit), canonical_sum(&mut all), canonical_sum(&mut sq))
}

/// Success rate and effective size of group `s`.
fn rate(pred: &[bool], groups: &[Group], weights: Option<&[f64]>, s: Group) -> Result<(f64, f64)> {
    let (hit, total, sq) = group_totals(pred, groups, weights, s);
    if total <= 0.0 {
        return Err(Error::EmptyGroup(s));
    }
    Ok((hit / total, total * total / sq))
}

/// Two-sided standard normal quantile for `confidence`.
fn z_value(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + confidence / 2.0))
}

/// Disparate impact of unweighted predictions.
pub fn disparate_impact(pred: &[bool], groups: &[Group], confidence: f64) -> Result<FairnessReport> {
    audit(pred, groups, None, None, confidence)
}

/// Disparate impact of predictions on rows with masses `weights`.
pub fn disparate_impact_weighted(
    pred: &[bool],
    groups: &[Group],
    weights: &[f64],
    confidence: f64,
) -> Result<FairnessReport> {
    audit(pred, groups, None, Some(weights), confidence)
}

/// Full audit: DI with its log-ratio (Katz) interval, BER and, when labels
/// are given, the overall-accuracy gap.
///
/// The interval is `exp(log(a / b) +- z * sqrt((1 - a) / (n0 a) + (1 - b) / (n1 b)))`.
pub fn audit(
    pred: &[bool],
    groups: &[Group],
    labels: Option<&[bool]>,
    weights: Option<&[f64]>,
    confidence: f64,
) -> Result<FairnessReport> {
    check_lengths(pred.len(), groups.len())?;
    check_weights(weights, pred.len())?;
    let z = z_value(confidence)?;
    let (a, n0) = rate(pred, groups, weights, Group::Minority)?;
    let (b, n1) = rate(pred, groups, weights, Group::Default)?;
    if a == 0.0 {
        return Err(Error::DegenerateClassifier(Group::Minority));
    }
    if b == 0.0 {
        return Err(Error::DegenerateClassifier(Group::Default));
    }
    let di = a / b;
    let se = ((1.0 - a) / (n0 * a) + (1.0 - b) / (n1 * b)).max(0.0).sqrt();
    let oae = match labels {
        Some(y) => Some(oae_gap_weighted(pred, y, groups, weights)?),
        None => None,
    };
    Ok(FairnessReport {
        a,
        b,
        di,
        di_lo: (di.ln() - z * se).exp().min(di),
        di_hi: (di.ln() + z * se).exp().max(di),
        ber: ((1.0 - b) + a) / 2.0,
        oae_gap: oae,
        n0,
        n1,
        confidence,
    })
}

/// `(P(g = 0 | s = 1) + P(g = 1 | s = 0)) / 2`.
pub fn balanced_error_rate(pred: &[bool], groups: &[Group]) -> Result<f64> {
    balanced_error_rate_weighted(pred, groups, None)
}

pub fn balanced_error_rate_weighted(
    pred: &[bool],
    groups: &[Group],
    weights: Option<&[f64]>,
) -> Result<f64> {
    check_lengths(pred.len(), groups.len())?;
    check_weights(weights, pred.len())?;
    let (a, _) = rate(pred, groups, weights, Group::Minority)?;
    let (b, _) = rate(pred, groups, weights, Group::Default)?;
    Ok(((1.0 - b) + a) / 2.0)
}

/// `|P(g = y | s = 0) - P(g = y | s = 1)|`.
pub fn oae_gap(pred: &[bool], labels: &[bool], groups: &[Group]) -> Result<f64> {
    oae_gap_weighted(pred, labels, groups, None)
}

pub fn oae_gap_weighted(
    pred: &[bool],
    labels: &[bool],
    groups: &[Group],
    weights: Option<&[f64]>,
) -> Result<f64> {
    check_lengths(pred.len(), groups.len())?;
    check_lengths(pred.len(), labels.len())?;
    check_weights(weights, pred.len())?;
    let correct: Vec<bool> = pred.iter().zip(labels).map(|(p, y)| p == y).collect();
    let (c0, _) = rate(&correct, groups, weights, Group::Minority)?;
    let (c1, _) = rate(&correct, groups, weights, Group::Default)?;
    Ok((c0 - c1).abs())
}

/// Minimum BER through `(1 - TV) / 2`.
pub fn min_ber_closed_form(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<PredictabilityReport> {
    let tv = tv_distance_discrete(mu0, mu1)?;
    let min_ber = (1.0 - tv) / 2.0;
    Ok(PredictabilityReport {
        min_ber,
        tv,
        epsilon_star: min_ber,
    })
}

/// Minimum BER by enumerating every deterministic classifier on the union
/// support. A classifier predicting `1` on the set `A` has
/// `BER = (mu1(not A) + mu0(A)) / 2`.
pub fn min_ber_exhaustive(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure) -> Result<PredictabilityReport> {
    let union = aggregate_union(mu0, mu1)?;
    let k = union.len();
    if k > MAX_EXHAUSTIVE_SUPPORT {
        return Err(Error::SupportTooLarge {
            size: k,
            max: MAX_EXHAUSTIVE_SUPPORT,
        });
    }
    let p: Vec<f64> = union.iter().map(|u| u.1).collect();
    let q: Vec<f64> = union.iter().map(|u| u.2).collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << k) {
        let mut err = 0.0;
        for z in 0..k {
            err += if mask >> z & 1 == 1 { p[z] } else { q[z] };
        }
        best = best.min(err / 2.0);
    }
    let tv = tv_distance_discrete(mu0, mu1)?;
    Ok(PredictabilityReport {
        min_ber: best,
        tv,
        epsilon_star: best,
    })
}

/// Whether some classifier predicts `s` with BER at most `epsilon`.
pub fn is_epsilon_predictable(mu0: &EmpiricalMeasure, mu1: &EmpiricalMeasure, epsilon: f64) -> Result<bool> {
    Ok(min_ber_closed_form(mu0, mu1)?.min_ber <= epsilon)
}

/// Whether `ber <= 1/2 - (a/2)(1/tau - 1)`, the BER threshold equivalent to
/// `DI <= tau`.
///
/// Evaluated as `2 tau ber + a (1 - tau) <= tau` (both sides multiplied by
/// `2 tau > 0`), so grids of dyadic rationals are decided exactly.
pub fn di_ber_equivalence_check(a: f64, tau: f64, ber: f64) -> Result<bool> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("tau must lie in (0, 1], got {tau}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("a must lie in (0, 1], got {a}")));
    }
    Ok(2.0 * tau * ber + a * (1.0 - tau) <= tau)
}

/// Whether `a / b <= tau`, evaluated as `a <= tau b`.
pub fn di_at_most(a: f64, b: f64, tau: f64) -> bool {
    a <= tau * b
}

/// Lower bound `1 / (1 + tv / a)` on the DI of any classifier with success
/// rate `a` in group 0.
pub fn tv_lower_bound_di(tv: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
    }
    if !(0.0..=1.0).contains(&tv) {
        return Err(Error::InvalidParameter(format!("tv must lie in [0, 1], got {tv}")));
    }
    Ok(1.0 / (1.0 + tv / a))
}
