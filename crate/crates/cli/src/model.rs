use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use fairot::dataio::Standardization;
use fairot::{predict, LogisticModel};
use serde::{Deserialize, Serialize};

/// Trained classifier as stored in `model.json`.
///
/// When `standardization` is present the model expects standardized
/// features, and repairs driven by the model run in that space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub features: Vec<String>,
    #[serde(flatten)]
    pub model: LogisticModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardization: Option<Standardization>,
}

impl ModelFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).with_context(|| format!("opening model {}", path.display()))?;
        let model: ModelFile =
            serde_json::from_reader(file).with_context(|| format!("parsing model {}", path.display()))?;
        if model.model.coefficients.len() != model.features.len() {
            bail!(
                "model has {} coefficients for {} features",
                model.model.coefficients.len(),
                model.features.len()
            );
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// Maps row-major raw features into the model's input space.
    pub fn to_model_space(&self, features: &[f64]) -> Vec<f64> {
        match &self.standardization {
            Some(st) => features.chunks(self.dim()).flat_map(|x| st.apply_row(x)).collect(),
            None => features.to_vec(),
        }
    }

    /// Predictions for row-major raw features.
    pub fn predict_raw(&self, features: &[f64]) -> Result<Vec<bool>> {
        self.predict_model_space(&self.to_model_space(features))
    }

    /// Predictions for features already in the model's input space.
    pub fn predict_model_space(&self, features: &[f64]) -> Result<Vec<bool>> {
        Ok(predict(&self.model, self.dim(), features)?)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            bail!("model expects {} features, data has {dim}", self.dim());
        }
        Ok(())
    }
}
