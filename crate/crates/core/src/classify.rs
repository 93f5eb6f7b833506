//! Weighted logistic regression.
//!
//! The fit minimises the mean weighted log-loss plus a ridge penalty on the
//! coefficients (the intercept is not penalised):
//!
//! ```text
//! L(w, c) = sum_i m_i [softplus(z_i) - y_i z_i] / sum_i m_i + l2/2 |w|^2,   z_i = w.x_i + c
//! ```
//!
//! by Newton's method with Armijo backtracking, starting from zero.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{sigmoid, softplus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Convergence threshold on the Euclidean norm of the gradient.
    pub tol: f64,
    pub l2: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-8,
            l2: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Predict 1 iff the probability is strictly above this value.
    pub threshold: f64,
}

impl LogisticModel {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn predict_one(&self, x: &[f64]) -> bool {
        self.probability(x) > self.threshold
    }
}

/// Training data view: row-major features, labels and optional masses.
#[derive(Debug, Clone, Copy)]
pub struct Design<'a> {
    pub dim: usize,
    pub features: &'a [f64],
    pub labels: &'a [bool],
    pub weights: Option<&'a [f64]>,
}

impl<'a> Design<'a> {
    pub fn new(dim: usize, features: &'a [f64], labels: &'a [bool], weights: Option<&'a [f64]>) -> Result<Self> {
        let n = labels.len();
        if features.len() != n * dim {
            return Err(Error::LengthMismatch {
                left: features.len(),
                right: n * dim,
            });
        }
        if let Some(w) = weights {
            if w.len() != n {
                return Err(Error::LengthMismatch { left: w.len(), right: n });
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidWeights("row masses must be finite and nonnegative".into()));
            }
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("training features"));
        }
        Ok(Self {
            dim,
            features,
            labels,
            weights,
        })
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[i])
    }

    fn total_weight(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i)).sum()
    }

    fn logit(&self, i: usize, theta: &[f64]) -> f64 {
        let (w, c) = theta.split_at(self.dim);
        c[0] + w.iter().zip(self.row(i)).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Penalised mean log-loss at `theta = [coefficients..., intercept]`.
pub fn logistic_loss(design: &Design<'_>, theta: &[f64], l2: f64) -> f64 {
    let total = design.total_weight();
    let mut loss = 0.0;
    for i in 0..design.len() {
        let z = design.logit(i, theta);
        let y = if design.labels[i] { 1.0 } else { 0.0 };
        loss += design.weight(i) * (softplus(z) - y * z);
    }
    let penalty: f64 = theta[..design.dim].iter().map(|w| w * w).sum();
    loss / total + 0.5 * l2 * penalty
}

/// Gradient of [`logistic_loss`].
pub fn logistic_gradient(design: &Design<'_>, theta: &[f64], l2: f64) -> Vec<f64> {
    let d = design.dim;
    let total = design.total_weight();
    let mut grad = vec![0.0; d + 1];
    for i in 0..design.len() {
        let z = design.logit(i, theta);
        let y = if design.labels[i] { 1.0 } else { 0.0 };
        let r = design.weight(i) * (sigmoid(z) - y) / total;
        for (g, x) in grad.iter_mut().zip(design.row(i)) {
            *g += r * x;
        }
        grad[d] += r;
    }
    for k in 0..d {
        grad[k] += l2 * theta[k];
    }
    grad
}

fn hessian(design: &Design<'_>, theta: &[f64], l2: f64) -> DMatrix<f64> {
    let d = design.dim;
    let total = design.total_weight();
    let mut h = DMatrix::<f64>::zeros(d + 1, d + 1);
    let mut xt = vec![1.0; d + 1];
    for i in 0..design.len() {
        let p = sigmoid(design.logit(i, theta));
        let s = design.weight(i) * p * (1.0 - p) / total;
        if s == 0.0 {
            continue;
        }
        xt[..d].copy_from_slice(design.row(i));
        for a in 0..=d {
            let sa = s * xt[a];
            for b in a..=d {
                h[(a, b)] += sa * xt[b];
            }
        }
    }
    for a in 0..=d {
        for b in 0..a {
            h[(a, b)] = h[(b, a)];
        }
    }
    for k in 0..d {
        h[(k, k)] += l2;
    }
    h
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fits the model and returns it with the loss recorded at every iterate.
pub fn fit_logistic_traced(design: &Design<'_>, config: &FitConfig) -> Result<(LogisticModel, Vec<f64>)> {
    let mut class_mass = [0.0f64; 2];
    for i in 0..design.len() {
        class_mass[usize::from(design.labels[i])] += design.weight(i);
    }
    if class_mass[0] <= 0.0 || class_mass[1] <= 0.0 {
        return Err(Error::SingleClass);
    }
    let d = design.dim;
    let mut theta = vec![0.0; d + 1];
    let mut loss = logistic_loss(design, &theta, config.l2);
    let mut trace = vec![loss];
    let mut grad = logistic_gradient(design, &theta, config.l2);
    let mut iterations = 0;
    while norm(&grad) >= config.tol {
        if iterations == config.max_iter {
            return Err(Error::NotConverged {
                iterations,
                gradient_norm: norm(&grad),
            });
        }
        iterations += 1;
        let g = DVector::from_column_slice(&grad);
        let h = hessian(design, &theta, config.l2);
        let step = match h.cholesky() {
            Some(chol) => -chol.solve(&g),
            None => -g.clone(),
        };
        let slope = g.dot(&step);
        let step = if slope < 0.0 { step } else { -g.clone() };
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let trial_loss = logistic_loss(design, &trial, config.l2);
            if trial_loss <= loss + 1e-4 * t * slope {
                accepted = Some((trial, trial_loss));
                break;
            }
            t *= 0.5;
        }
        let Some((next, next_loss)) = accepted else {
            // No decrease is representable any more: the iterate is optimal
            // to machine precision.
            return Err(Error::NotConverged {
                iterations,
                gradient_norm: norm(&grad),
            });
        };
        theta = next;
        loss = next_loss;
        trace.push(loss);
        grad = logistic_gradient(design, &theta, config.l2);
    }
    let intercept = theta[d];
    theta.truncate(d);
    Ok((
        LogisticModel {
            coefficients: theta,
            intercept,
            threshold: 0.5,
        },
        trace,
    ))
}

pub fn fit_logistic(design: &Design<'_>, config: &FitConfig) -> Result<LogisticModel> {
    fit_logistic_traced(design, config).map(|(m, _)| m)
}

/// `true` iff the predicted probability exceeds the model threshold.
pub fn predict(model: &LogisticModel, dim: usize, features: &[f64]) -> Result<Vec<bool>> {
    if dim != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: dim,
        });
    }
    if dim == 0 || features.len() % dim != 0 {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: dim,
        });
    }
    Ok(features.chunks_exact(dim).map(|x| model.predict_one(x)).collect())
}

/// Weighted share of rows with `pred != label`.
pub fn misclassification_error(pred: &[bool], labels: &[bool], weights: Option<&[f64]>) -> Result<f64> {
    if pred.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: labels.len(),
        });
    }
    let mut wrong = 0.0;
    let mut total = 0.0;
    for i in 0..pred.len() {
        let w = match weights {
            Some(w) => *w.get(i).ok_or(Error::LengthMismatch {
                left: w.len(),
                right: pred.len(),
            })?,
            None => 1.0,
        };
        total += w;
        if pred[i] != labels[i] {
            wrong += w;
        }
    }
    if total <= 0.0 {
        return Err(Error::InvalidWeights("no mass to evaluate".into()));
    }
    Ok(wrong / total)
}
