//! Weighted empirical measures, grouped datasets, and discrete total variation.
//!
//! An [`EmpiricalMeasure`] is a finite point cloud in `R^d` with nonnegative
//! weights summing to one. A [`LabeledDataset`] holds rows `(x, s, y)` where
//! `s` is the binary protected attribute; [`group_measure`] turns one group of
//! rows into the uniform empirical measure used by the transport solver.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::canonical_sum;

/// Tolerance on `sum(weights) == 1` for a valid measure.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Binary protected attribute. `Minority` is `s = 0`, `Default` is `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    Minority,
    Default,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::Minority, Group::Default];

    pub fn index(self) -> usize {
        match self {
            Group::Minority => 0,
            Group::Default => 1,
        }
    }

    pub fn from_index(s: usize) -> Option<Group> {
        match s {
            0 => Some(Group::Minority),
            1 => Some(Group::Default),
            _ => None,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::Minority => Group::Default,
            Group::Default => Group::Minority,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A weighted point cloud. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Builds a measure from explicit points and weights.
    ///
    /// Weights must be finite and nonnegative with a positive total. If the
    /// total is not already 1 within [`WEIGHT_SUM_TOL`] the weights are
    /// divided by it once, here.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptyMeasure)?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, weights)
    }

    /// Builds a measure from row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if coords.len() != weights.len() * dim {
            return Err(Error::LengthMismatch {
                left: coords.len(),
                right: weights.len() * dim,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("measure coordinates"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total = canonical_sum(&mut weights.clone());
        if total <= 0.0 {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        let weights = if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            weights.into_iter().map(|w| w / total).collect()
        } else {
            weights
        };
        Ok(Self {
            dim,
            coords,
            weights,
        })
    }

    /// Uniform weights `1/n` on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn uniform_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let n = if dim == 0 { 0 } else { coords.len() / dim };
        Self::from_flat(dim, coords, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// True when every weight is bitwise identical.
    pub fn is_uniform(&self) -> bool {
        let first = self.weights[0];
        self.weights.iter().all(|w| w.to_bits() == first.to_bits())
    }
}

/// One observation of `(x, s, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: Vec<f64>,
    pub group: Group,
    pub label: Option<bool>,
}

/// Rows of covariates with a protected group and an optional binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    dim: usize,
    features: Vec<f64>,
    groups: Vec<Group>,
    labels: Option<Vec<bool>>,
    feature_names: Vec<String>,
}

impl LabeledDataset {
    /// Builds a dataset from rows. Labels must be present on all rows or on none.
    pub fn from_rows(rows: Vec<Row>) -> Result<Self> {
        let dim = rows.first().map(|r| r.x.len()).unwrap_or(0);
        let with_labels = rows.first().is_some_and(|r| r.label.is_some());
        let mut features = Vec::with_capacity(rows.len() * dim);
        let mut groups = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(if with_labels { rows.len() } else { 0 });
        for row in rows {
            if row.x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.x.len(),
                });
            }
            match (with_labels, row.label) {
                (true, Some(y)) => labels.push(y),
                (false, None) => {}
                _ => {
                    return Err(Error::Schema(
                        "labels must be present on every row or on none".into(),
                    ))
                }
            }
            features.extend_from_slice(&row.x);
            groups.push(row.group);
        }
        Self::from_parts(dim, features, groups, with_labels.then_some(labels))
    }

    pub fn from_parts(
        dim: usize,
        features: Vec<f64>,
        groups: Vec<Group>,
        labels: Option<Vec<bool>>,
    ) -> Result<Self> {
        if features.len() != groups.len() * dim {
            return Err(Error::LengthMismatch {
                left: features.len(),
                right: groups.len() * dim,
            });
        }
        if let Some(y) = &labels {
            if y.len() != groups.len() {
                return Err(Error::LengthMismatch {
                    left: y.len(),
                    right: groups.len(),
                });
            }
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset features"));
        }
        let feature_names = (1..=dim).map(|k| format!("x_{k}")).collect();
        Ok(Self {
            dim,
            features,
            groups,
            labels,
            feature_names,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn x(&self, row: usize) -> &[f64] {
        &self.features[row * self.dim..(row + 1) * self.dim]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn group(&self, row: usize) -> Group {
        self.groups[row]
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn label(&self, row: usize) -> Option<bool> {
        self.labels.as_ref().map(|y| y[row])
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> Row {
        Row {
            x: self.x(i).to_vec(),
            group: self.group(i),
            label: self.label(i),
        }
    }

    /// Row indices of group `s`, in dataset order.
    pub fn group_indices(&self, s: Group) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.groups[i] == s).collect()
    }

    pub fn group_count(&self, s: Group) -> usize {
        self.groups.iter().filter(|&&g| g == s).count()
    }

    /// Group proportions `(pi0, pi1) = (n0/N, n1/N)`.
    pub fn proportions(&self) -> (f64, f64) {
        let n0 = self.group_count(Group::Minority);
        let n = self.len();
        let n1 = n - n0;
        (n0 as f64 / n as f64, n1 as f64 / n as f64)
    }

    /// Dataset restricted to the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        for &i in rows {
            features.extend_from_slice(self.x(i));
        }
        LabeledDataset {
            dim: self.dim,
            features,
            groups: rows.iter().map(|&i| self.groups[i]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|y| rows.iter().map(|&i| y[i]).collect()),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Same rows with every feature vector replaced by `f(x)`.
    pub fn map_features(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<LabeledDataset> {
        let mut features = Vec::with_capacity(self.features.len());
        for i in 0..self.len() {
            let mapped = f(self.x(i));
            if mapped.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: mapped.len(),
                });
            }
            features.extend(mapped);
        }
        let mut out = LabeledDataset::from_parts(
            self.dim,
            features,
            self.groups.clone(),
            self.labels.clone(),
        )?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }
}

/// A repaired (possibly mass-split) row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRow {
    pub x: Vec<f64>,
    /// Mass within the row's group; each group's masses sum to one.
    pub weight: f64,
    pub group: Group,
    pub label: Option<bool>,
    /// Index of the source row in the original dataset.
    pub origin: usize,
}

/// Uniform empirical measure of group `s`, preserving row order.
pub fn group_measure(data: &LabeledDataset, s: Group) -> Result<EmpiricalMeasure> {
    let rows = data.group_indices(s);
    if rows.is_empty() {
        return Err(Error::EmptyGroup(s));
    }
    let mut coords = Vec::with_capacity(rows.len() * data.dim());
    for &i in &rows {
        coords.extend_from_slice(data.x(i));
    }
    EmpiricalMeasure::uniform_flat(data.dim(), coords)
}

/// Coordinate rounded to 12 significant decimal digits, as raw bits.
/// Signed zeros collapse to `+0`.
fn canonical_coord(v: f64) -> u64 {
    if v == 0.0 {
        return 0;
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    rounded.to_bits()
}

/// Canonical support key for a point.
pub fn support_key(point: &[f64]) -> Vec<u64> {
    point.iter().map(|&v| canonical_coord(v)).collect()
}

/// Masses of two measures aggregated on their union support, keyed by
/// [`support_key`] and ordered by key. Each entry is `(p_mass, q_mass)`.
pub fn aggregate_union(
    p: &EmpiricalMeasure,
    q: &EmpiricalMeasure,
) -> Result<Vec<(Vec<u64>, f64, f64)>> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let mut table: BTreeMap<Vec<u64>, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (x, &w) in p.points().zip(p.weights()) {
        table.entry(support_key(x)).or_default().0.push(w);
    }
    for (x, &w) in q.points().zip(q.weights()) {
        table.entry(support_key(x)).or_default().1.push(w);
    }
    Ok(table
        .into_iter()
        .map(|(k, (mut a, mut b))| (k, canonical_sum(&mut a), canonical_sum(&mut b)))
        .collect())
}

/// Total variation distance `1/2 * sum_z |p(z) - q(z)|` over the union support.
///
/// Points coincide when their coordinates agree after rounding to 12
/// significant digits.
pub fn tv_distance_discrete(p: &EmpiricalMeasure, q: &EmpiricalMeasure) -> Result<f64> {
    let union = aggregate_union(p, q)?;
    let mut diffs: Vec<f64> = union.iter().map(|(_, a, b)| (a - b).abs()).collect();
    Ok((0.5 * canonical_sum(&mut diffs)).clamp(0.0, 1.0))
}

/// Histogram estimate of the total variation between the laws that generated
/// two samples: both measures are binned on the grid `floor(x / bin_width)`
/// (per coordinate) and the discrete distance of the binned masses is returned.
pub fn tv_distance_binned(p: &EmpiricalMeasure, q: &EmpiricalMeasure, bin_width: f64) -> Result<f64> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let bin = |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / bin_width).floor() as i64).collect() };
    let mut table: BTreeMap<Vec<i64>, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (x, &w) in p.points().zip(p.weights()) {
        table.entry(bin(x)).or_default().0.push(w);
    }
    for (x, &w) in q.points().zip(q.weights()) {
        table.entry(bin(x)).or_default().1.push(w);
    }
    let mut diffs: Vec<f64> = table
        .into_values()
        .map(|(mut a, mut b)| (canonical_sum(&mut a) - canonical_sum(&mut b)).abs())
        .collect();
    Ok((0.5 * canonical_sum(&mut diffs)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dataset(groups: &[usize]) -> LabeledDataset {
        let rows = groups
            .iter()
            .enumerate()
            .map(|(i, &s)| Row {
                x: vec![i as f64],
                group: Group::from_index(s).unwrap(),
                label: None,
            })
            .collect();
        LabeledDataset::from_rows(rows).unwrap()
    }

    #[test]
    fn group_measure_is_uniform_and_ordered() {
        let data = dataset(&[0, 1, 0, 0, 1, 0]);
        let mu0 = group_measure(&data, Group::Minority).unwrap();
        assert_eq!(mu0.len(), 4);
        assert!(mu0.weights().iter().all(|&w| w == 0.25));
        let xs: Vec<f64> = mu0.points().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 2.0, 3.0, 5.0]);
    }

    #[test]
    fn group_measure_rejects_empty_group() {
        let data = dataset(&[0, 0, 0]);
        let err = group_measure(&data, Group::Default).unwrap_err();
        assert!(err.to_string().contains("empty protected class"));
    }

    #[test]
    fn group_measure_sizes_four_and_seven() {
        let data = dataset(&[0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1]);
        let mu0 = group_measure(&data, Group::Minority).unwrap();
        let mu1 = group_measure(&data, Group::Default).unwrap();
        assert!(mu0.weights().iter().all(|&w| w == 1.0 / 4.0));
        assert!(mu1.weights().iter().all(|&w| (w - 1.0 / 7.0).abs() < 1e-16));
        assert!(mu0.is_uniform() && mu1.is_uniform());
    }

    #[test]
    fn groups_partition_rows() {
        let data = dataset(&[0, 1, 1, 0, 1, 1, 1]);
        let n0 = group_measure(&data, Group::Minority).unwrap().len();
        let n1 = group_measure(&data, Group::Default).unwrap().len();
        assert_eq!(n0 + n1, data.len());
        let (p0, p1) = data.proportions();
        assert!((p0 + p1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measure_validation() {
        assert!(matches!(
            EmpiricalMeasure::new(vec![], vec![]),
            Err(Error::EmptyMeasure)
        ));
        assert!(EmpiricalMeasure::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]).is_err());
        assert!(EmpiricalMeasure::new(vec![vec![f64::NAN]], vec![1.0]).is_err());
        assert!(EmpiricalMeasure::new(vec![vec![0.0]], vec![-1.0]).is_err());
        let m = EmpiricalMeasure::new(vec![vec![0.0], vec![1.0]], vec![2.0, 6.0]).unwrap();
        assert_eq!(m.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn tv_identical_is_zero() {
        let p = EmpiricalMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.3, 0.7]).unwrap();
        assert_eq!(tv_distance_discrete(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn tv_disjoint_is_one() {
        let p = EmpiricalMeasure::uniform(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let q = EmpiricalMeasure::uniform(vec![vec![5.0], vec![6.0]]).unwrap();
        assert!((tv_distance_discrete(&p, &q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tv_two_point_example() {
        // 1/2 * (|0.5 - 0.25| + |0.5 - 0.75|)
        let p = EmpiricalMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
        let q = EmpiricalMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.25, 0.75]).unwrap();
        assert_eq!(tv_distance_discrete(&p, &q).unwrap(), 0.25);
    }

    #[test]
    fn tv_aggregates_coincident_points() {
        let p = EmpiricalMeasure::new(vec![vec![1.0], vec![1.0], vec![2.0]], vec![0.25, 0.25, 0.5])
            .unwrap();
        let q = EmpiricalMeasure::new(vec![vec![1.0], vec![2.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(tv_distance_discrete(&p, &q).unwrap(), 0.0);
        // Rounding at 12 significant digits merges last-ulp noise.
        let r = EmpiricalMeasure::new(vec![vec![0.1 + 0.2], vec![2.0]], vec![0.5, 0.5]).unwrap();
        let s = EmpiricalMeasure::new(vec![vec![0.3], vec![2.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(tv_distance_discrete(&r, &s).unwrap(), 0.0);
    }

    #[test]
    fn tv_dimension_mismatch() {
        let p = EmpiricalMeasure::uniform(vec![vec![0.0]]).unwrap();
        let q = EmpiricalMeasure::uniform(vec![vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            tv_distance_discrete(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn binned_tv_of_shifted_uniform_grids() {
        let p = EmpiricalMeasure::uniform((0..100).map(|i| vec![i as f64 / 100.0]).collect()).unwrap();
        let q = EmpiricalMeasure::uniform((50..150).map(|i| vec![i as f64 / 100.0]).collect())
            .unwrap();
        let tv = tv_distance_binned(&p, &q, 0.1).unwrap();
        assert!((tv - 0.5).abs() < 1e-12, "{tv}");
    }

    fn small_measure() -> impl Strategy<Value = EmpiricalMeasure> {
        prop::collection::vec((0u8..5, 1u32..20), 1..6).prop_map(|cells| {
            let points = cells.iter().map(|(z, _)| vec![*z as f64]).collect();
            let weights = cells.iter().map(|(_, w)| *w as f64).collect();
            EmpiricalMeasure::new(points, weights).unwrap()
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(p in small_measure(), q in small_measure(), r in small_measure()) {
            let pq = tv_distance_discrete(&p, &q).unwrap();
            let qp = tv_distance_discrete(&q, &p).unwrap();
            let pr = tv_distance_discrete(&p, &r).unwrap();
            let rq = tv_distance_discrete(&r, &q).unwrap();
            prop_assert_eq!(pq, qp);
            prop_assert!((0.0..=1.0).contains(&pq));
            prop_assert!(pq <= pr + rq + 1e-15);
        }
    }
}
