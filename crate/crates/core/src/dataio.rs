//! CSV ingestion, schema mapping, splitting and standardization.
//!
//! A schema is a small TOML document:
//!
//! ```toml
//! features = ["age", "education-num", "capital-gain", "capital-loss", "hours-per-week"]
//! na_policy = "drop"          # or "error"
//! na_values = ["?", ""]
//!
//! [protected]
//! column = "sex"
//! minority = "Female"         # mapped to s = 0
//! default = "Male"            # mapped to s = 1
//!
//! [target]                    # optional
//! column = "income"
//! success = [">50K", ">50K."] # mapped to y = 1
//! failure = ["<=50K", "<=50K."]
//! ```
//!
//! Category values may be a string or a list of strings. Cells are trimmed
//! before matching. Numbers are written with Rust's shortest round-trip
//! formatting, so a write/read cycle reproduces every value bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Group, LabeledDataset, WeightedRow};
use crate::repair::{RepairMethod, RepairedDataset};
use crate::rng;
use crate::transport::Coupling;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(String),
    Many(Vec<String>),
}

impl Values {
    pub fn contains(&self, value: &str) -> bool {
        match self {
            Values::One(v) => v == value,
            Values::Many(vs) => vs.iter().any(|v| v == value),
        }
    }

    /// The value used when writing.
    pub fn first(&self) -> &str {
        match self {
            Values::One(v) => v,
            Values::Many(vs) => vs.first().map_or("", String::as_str),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Values::One(_) => false,
            Values::Many(vs) => vs.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtectedColumn {
    pub column: String,
    pub minority: Values,
    pub default: Values,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetColumn {
    pub column: String,
    pub success: Values,
    pub failure: Values,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NaPolicy {
    #[default]
    Drop,
    Error,
}

/// Which cells are checked against `na_values`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NaScope {
    /// Only the feature, protected and target columns.
    #[default]
    Used,
    /// Every column of the file.
    All,
}

fn default_na_values() -> Vec<String> {
    vec!["?".into(), String::new(), "NA".into()]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaConfig {
    pub features: Vec<String>,
    pub protected: ProtectedColumn,
    #[serde(default)]
    pub target: Option<TargetColumn>,
    #[serde(default)]
    pub na_policy: NaPolicy,
    #[serde(default)]
    pub na_scope: NaScope,
    #[serde(default = "default_na_values")]
    pub na_values: Vec<String>,
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Column names for files without a header row.
    #[serde(default)]
    pub column_names: Option<Vec<String>>,
}

impl SchemaConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let schema: SchemaConfig = toml::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Schema("at least one feature column is required".into()));
        }
        let p = &self.protected;
        if p.minority.is_empty() || p.default.is_empty() {
            return Err(Error::Schema("protected values must not be empty".into()));
        }
        if let Some(t) = &self.target {
            if t.success.is_empty() || t.failure.is_empty() {
                return Err(Error::Schema("target values must not be empty".into()));
            }
        }
        if !self.has_header && self.column_names.is_none() {
            return Err(Error::Schema(
                "column_names is required when has_header = false".into(),
            ));
        }
        Ok(())
    }
}

/// Row accounting of a load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub rows_kept: usize,
}

fn column_index(headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Reads a dataset, applying the schema's mappings and NA policy.
pub fn load_dataset(path: impl AsRef<Path>, schema: &SchemaConfig) -> Result<LabeledDataset> {
    load_dataset_with_stats(path, schema).map(|(d, _)| d)
}

pub fn load_dataset_with_stats(
    path: impl AsRef<Path>,
    schema: &SchemaConfig,
) -> Result<(LabeledDataset, LoadStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, schema)
}

pub fn read_dataset<R: Read>(reader: R, schema: &SchemaConfig) -> Result<(LabeledDataset, LoadStats)> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = match &schema.column_names {
        Some(names) => names.clone(),
        None => csv.headers()?.iter().map(str::to_string).collect(),
    };
    let feature_idx: Vec<usize> = schema
        .features
        .iter()
        .map(|f| column_index(&headers, f))
        .collect::<Result<_>>()?;
    let protected_idx = column_index(&headers, &schema.protected.column)?;
    let target_idx = match &schema.target {
        Some(t) => Some(column_index(&headers, &t.column)?),
        None => None,
    };
    let mut used: Vec<usize> = feature_idx.clone();
    used.push(protected_idx);
    used.extend(target_idx);

    let dim = feature_idx.len();
    let mut features = Vec::new();
    let mut groups = Vec::new();
    let mut labels = Vec::new();
    let mut stats = LoadStats {
        rows_read: 0,
        rows_dropped: 0,
        rows_kept: 0,
    };
    let is_na = |v: &str| schema.na_values.iter().any(|na| na == v);

    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        stats.rows_read += 1;
        let cell = |k: usize, name: &str| -> Result<&str> {
            record.get(k).ok_or_else(|| Error::MissingValue {
                column: name.to_string(),
                line,
            })
        };
        let na_column = match schema.na_scope {
            NaScope::Used => used.iter().copied().find(|&k| record.get(k).is_none_or(is_na)),
            NaScope::All => (0..headers.len()).find(|&k| record.get(k).is_none_or(is_na)),
        };
        if let Some(k) = na_column {
            match schema.na_policy {
                NaPolicy::Drop => {
                    stats.rows_dropped += 1;
                    continue;
                }
                NaPolicy::Error => {
                    return Err(Error::MissingValue {
                        column: headers.get(k).cloned().unwrap_or_default(),
                        line,
                    })
                }
            }
        }
        for (&k, name) in feature_idx.iter().zip(&schema.features) {
            let raw = cell(k, name)?;
            let v: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::NonNumeric {
                    column: name.clone(),
                    value: raw.to_string(),
                    line,
                })?;
            features.push(v);
        }
        let p = &schema.protected;
        let raw = cell(protected_idx, &p.column)?;
        let group = if p.minority.contains(raw) {
            Group::Minority
        } else if p.default.contains(raw) {
            Group::Default
        } else {
            return Err(Error::UnmappedValue {
                column: p.column.clone(),
                value: raw.to_string(),
                line,
            });
        };
        groups.push(group);
        if let (Some(t), Some(k)) = (&schema.target, target_idx) {
            let raw = cell(k, &t.column)?;
            let y = if t.success.contains(raw) {
                true
            } else if t.failure.contains(raw) {
                false
            } else {
                return Err(Error::UnmappedValue {
                    column: t.column.clone(),
                    value: raw.to_string(),
                    line,
                });
            };
            labels.push(y);
        }
    }
    stats.rows_kept = groups.len();
    let data = LabeledDataset::from_parts(dim, features, groups, schema.target.as_ref().map(|_| labels))?
        .with_feature_names(schema.features.clone())?;
    Ok((data, stats))
}

/// Writes a dataset in the schema's layout (features, protected column,
/// then the target column if any), with a header row.
pub fn write_dataset<W: Write>(writer: W, data: &LabeledDataset, schema: &SchemaConfig) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = data.feature_names().to_vec();
    header.push(schema.protected.column.clone());
    if let Some(t) = &schema.target {
        header.push(t.column.clone());
    }
    csv.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec: Vec<String> = data.x(i).iter().map(|v| v.to_string()).collect();
        rec.push(
            match data.group(i) {
                Group::Minority => schema.protected.minority.first(),
                Group::Default => schema.protected.default.first(),
            }
            .to_string(),
        );
        if let (Some(t), Some(y)) = (&schema.target, data.label(i)) {
            rec.push(if y { t.success.first() } else { t.failure.first() }.to_string());
        }
        csv.write_record(&rec)?;
    }
    csv.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Seeded uniform split into `(train, test)` with `test_size` test rows.
/// Both parts keep the original row order.
pub fn split(data: &LabeledDataset, test_size: usize, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(data.len(), test_size, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}

/// Row indices of [`split`].
pub fn split_indices(n: usize, test_size: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if test_size >= n {
        return Err(Error::InvalidParameter(format!(
            "test size {test_size} must be smaller than the {n} available rows"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed));
    let mut test = idx[..test_size].to_vec();
    let mut train = idx[test_size..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Per-column centring and scaling fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// Zero-variance columns, passed through unchanged.
    pub constant: Vec<bool>,
}

impl Standardization {
    pub fn fit(data: &LabeledDataset) -> Self {
        let d = data.dim();
        let n = data.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for i in 0..data.len() {
            for (m, v) in mean.iter_mut().zip(data.x(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for i in 0..data.len() {
            for k in 0..d {
                let c = data.x(i)[k] - mean[k];
                var[k] += c * c;
            }
        }
        let sd: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
        let constant = sd.iter().map(|&s| !(s > 1e-12)).collect();
        Self { mean, sd, constant }
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(k, &v)| if self.constant[k] { v } else { (v - self.mean[k]) / self.sd[k] })
            .collect()
    }

    pub fn invert_row(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(k, &v)| if self.constant[k] { v } else { v * self.sd[k] + self.mean[k] })
            .collect()
    }

    pub fn apply(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        self.check(data.dim())?;
        data.map_features(|x| self.apply_row(x))
    }

    pub fn invert(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        self.check(data.dim())?;
        data.map_features(|x| self.invert_row(x))
    }

    fn check(&self, dim: usize) -> Result<()> {
        if dim != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: dim,
            });
        }
        Ok(())
    }
}

/// Standardizes both sets with the training statistics.
pub fn standardize(
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<(LabeledDataset, LabeledDataset, Standardization)> {
    let params = Standardization::fit(train);
    Ok((params.apply(train)?, params.apply(test)?, params))
}

fn fmt_label(y: Option<bool>) -> String {
    match y {
        Some(true) => "1".into(),
        Some(false) => "0".into(),
        None => String::new(),
    }
}

/// Writes repaired rows with columns
/// `x_1..x_d, weight, s, y, origin, method, lambda, seed`.
pub fn write_repaired<W: Write>(writer: W, repaired: &RepairedDataset) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=repaired.dim).map(|k| format!("x_{k}")).collect();
    header.extend(["weight", "s", "y", "origin", "method", "lambda", "seed"].map(String::from));
    csv.write_record(&header)?;
    let seed = repaired.seed.map_or(String::new(), |s| s.to_string());
    for r in &repaired.rows {
        let mut rec: Vec<String> = r.x.iter().map(|v| v.to_string()).collect();
        rec.push(r.weight.to_string());
        rec.push(r.group.index().to_string());
        rec.push(fmt_label(r.label));
        rec.push(r.origin.to_string());
        rec.push(repaired.method.name().into());
        rec.push(repaired.lambda.to_string());
        rec.push(seed.clone());
        csv.write_record(&rec)?;
    }
    csv.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_repaired_to(path: impl AsRef<Path>, repaired: &RepairedDataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_repaired(std::io::BufWriter::new(file), repaired)
}

/// Whether a header row looks like the output of [`write_repaired`].
pub fn is_repaired_header(headers: &[String]) -> bool {
    ["weight", "s", "origin", "method", "lambda"]
        .iter()
        .all(|c| headers.iter().any(|h| h == c))
}

/// Reads a file written by [`write_repaired`].
pub fn read_repaired<R: Read>(reader: R) -> Result<RepairedDataset> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    let dim = headers.iter().take_while(|h| h.starts_with("x_")).count();
    if dim == 0 || !is_repaired_header(&headers) {
        return Err(Error::Schema("not a repaired dataset: expected x_1.., weight, s, y, origin, method, lambda, seed".into()));
    }
    let col = |name: &str| column_index(&headers, name);
    let (iw, is, iy, io, im, il, iseed) = (
        col("weight")?,
        col("s")?,
        col("y")?,
        col("origin")?,
        col("method")?,
        col("lambda")?,
        col("seed")?,
    );
    let num = |raw: &str, column: &str, line: u64| -> Result<f64> {
        raw.parse().map_err(|_| Error::NonNumeric {
            column: column.into(),
            value: raw.into(),
            line,
        })
    };
    let mut rows = Vec::new();
    let mut meta: Option<(RepairMethod, f64, Option<u64>)> = None;
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let get = |k: usize| record.get(k).unwrap_or("");
        let x = (0..dim)
            .map(|k| num(get(k), &headers[k], line))
            .collect::<Result<Vec<f64>>>()?;
        let group = match get(is) {
            "0" => Group::Minority,
            "1" => Group::Default,
            v => {
                return Err(Error::UnmappedValue {
                    column: "s".into(),
                    value: v.into(),
                    line,
                })
            }
        };
        let label = match get(iy) {
            "1" => Some(true),
            "0" => Some(false),
            "" => None,
            v => {
                return Err(Error::UnmappedValue {
                    column: "y".into(),
                    value: v.into(),
                    line,
                })
            }
        };
        let origin = get(io).parse().map_err(|_| Error::NonNumeric {
            column: "origin".into(),
            value: get(io).into(),
            line,
        })?;
        if meta.is_none() {
            let seed = match get(iseed) {
                "" => None,
                v => Some(v.parse().map_err(|_| Error::NonNumeric {
                    column: "seed".into(),
                    value: v.into(),
                    line,
                })?),
            };
            meta = Some((get(im).parse()?, num(get(il), "lambda", line)?, seed));
        }
        rows.push(WeightedRow {
            x,
            weight: num(get(iw), "weight", line)?,
            group,
            label,
            origin,
        });
    }
    let (method, lambda, seed) = meta.ok_or(Error::EmptyMeasure)?;
    Ok(RepairedDataset {
        dim,
        rows,
        lambda,
        method,
        seed,
        feature_names: headers[..dim].to_vec(),
    })
}

/// Sparse `i,j,mass` dump of a coupling.
pub fn write_coupling<W: Write>(writer: W, coupling: &Coupling) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["i", "j", "mass"])?;
    for e in coupling.entries() {
        csv.write_record([e.row.to_string(), e.col.to_string(), e.mass.to_string()])?;
    }
    csv.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
