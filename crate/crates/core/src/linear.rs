//! Linear classifiers trained by full-batch gradient descent.
//!
//! Each loss lives behind [`LinearObjective`] and is looked up by name through
//! [`objective`]; the trainer and predictor only ever talk to the trait.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{EncodedDataset, FeatureSchema};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label {0} is not 0 or 1")]
    NonBinaryLabel(u8),
    #[error("training data is empty")]
    EmptyData,
    #[error("loss became non-finite at epoch {epoch}")]
    DivergenceDetected { epoch: usize },
    #[error("invalid training configuration: {0}")]
    BadConfig(String),
    #[error("unknown model {0:?} (available: {1})")]
    UnknownModel(String, String),
}

pub type Result<T> = std::result::Result<T, LinearError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Logistic,
    Svm,
}

impl ModelKind {
    pub fn objective(self) -> &'static dyn LinearObjective {
        match self {
            ModelKind::Logistic => &Logistic,
            ModelKind::Svm => &LinearSvm,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Logistic => "Logistic Regression",
            ModelKind::Svm => "SVM",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.objective().name())
    }
}

impl FromStr for ModelKind {
    type Err = LinearError;

    fn from_str(s: &str) -> Result<Self> {
        objective(s).map(|o| o.kind())
    }
}

/// Loss value with its gradient in `(weights, bias)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub grad_w: Vec<f64>,
    pub grad_b: f64,
}

/// A convex training objective for a linear decision function `z = w·x + b`.
pub trait LinearObjective: Send + Sync {
    fn kind(&self) -> ModelKind;

    /// Registry name.
    fn name(&self) -> &'static str;

    /// Mean loss over the rows plus the regularizer, and its exact
    /// (sub)gradient.
    fn loss_grad(
        &self,
        weights: &[f64],
        bias: f64,
        features: &[Vec<f64>],
        labels: &[u8],
        reg: f64,
    ) -> Result<LossGrad>;

    /// Regularization strength this objective takes from a config.
    fn regularization(&self, config: &TrainConfig) -> f64;

    fn validate(&self, config: &TrainConfig) -> Result<()> {
        config.validate_common()
    }

    /// Maps a raw margin `z` to the reported score.
    fn score(&self, z: f64) -> f64;

    /// Turns a score into a hard label.
    fn decide(&self, score: f64, threshold: f64) -> u8;
}

static REGISTRY: [&dyn LinearObjective; 2] = [&Logistic, &LinearSvm];

pub fn objectives() -> &'static [&'static dyn LinearObjective] {
    &REGISTRY
}

pub fn objective_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|o| o.name()).collect()
}

pub fn objective(name: &str) -> Result<&'static dyn LinearObjective> {
    let key = name.trim().to_ascii_lowercase();
    REGISTRY
        .iter()
        .copied()
        .find(|o| o.name() == key)
        .ok_or_else(|| LinearError::UnknownModel(name.to_string(), objective_names().join(", ")))
}

fn check_inputs(weights: &[f64], features: &[Vec<f64>], labels: &[u8]) -> Result<()> {
    if features.len() != labels.len() {
        return Err(LinearError::DimensionMismatch {
            expected: features.len(),
            found: labels.len(),
        });
    }
    if features.is_empty() {
        return Err(LinearError::EmptyData);
    }
    for row in features {
        if row.len() != weights.len() {
            return Err(LinearError::DimensionMismatch {
                expected: weights.len(),
                found: row.len(),
            });
        }
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(LinearError::NonBinaryLabel(bad));
    }
    Ok(())
}

pub fn margin(weights: &[f64], bias: f64, row: &[f64]) -> f64 {
    weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + bias
}

/// Logistic function, branch-stable for large `|z|`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn half_sq_norm(w: &[f64]) -> f64 {
    0.5 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Regularized cross-entropy.
#[derive(Debug, Clone, Copy, Default)]
pub struct Logistic;

impl LinearObjective for Logistic {
    fn kind(&self) -> ModelKind {
        ModelKind::Logistic
    }

    fn name(&self) -> &'static str {
        "logistic"
    }

    fn loss_grad(
        &self,
        weights: &[f64],
        bias: f64,
        features: &[Vec<f64>],
        labels: &[u8],
        l2: f64,
    ) -> Result<LossGrad> {
        check_inputs(weights, features, labels)?;
        let n = features.len() as f64;
        let mut loss = 0.0;
        let mut grad_w = vec![0.0; weights.len()];
        let mut grad_b = 0.0;
        for (row, &y) in features.iter().zip(labels) {
            let z = margin(weights, bias, row);
            let y = y as f64;
            // -[y ln σ(z) + (1-y) ln(1-σ(z))] = y·softplus(-z) + (1-y)·softplus(z)
            loss += y * softplus(-z) + (1.0 - y) * softplus(z);
            let residual = sigmoid(z) - y;
            for (g, x) in grad_w.iter_mut().zip(row) {
                *g += residual * x;
            }
            grad_b += residual;
        }
        for (g, w) in grad_w.iter_mut().zip(weights) {
            *g = *g / n + l2 * w;
        }
        Ok(LossGrad {
            loss: loss / n + l2 * half_sq_norm(weights),
            grad_w,
            grad_b: grad_b / n,
        })
    }

    fn regularization(&self, config: &TrainConfig) -> f64 {
        config.l2_strength
    }

    fn score(&self, z: f64) -> f64 {
        sigmoid(z)
    }

    fn decide(&self, score: f64, threshold: f64) -> u8 {
        u8::from(score >= threshold)
    }
}

/// Primal soft-margin SVM: L2-regularized mean hinge loss.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearSvm;

impl LinearObjective for LinearSvm {
    fn kind(&self) -> ModelKind {
        ModelKind::Svm
    }

    fn name(&self) -> &'static str {
        "svm"
    }

    fn loss_grad(
        &self,
        weights: &[f64],
        bias: f64,
        features: &[Vec<f64>],
        labels: &[u8],
        lambda: f64,
    ) -> Result<LossGrad> {
        check_inputs(weights, features, labels)?;
        let n = features.len() as f64;
        let mut hinge = 0.0;
        let mut grad_w = vec![0.0; weights.len()];
        let mut grad_b = 0.0;
        for (row, &y) in features.iter().zip(labels) {
            let sign = if y == 1 { 1.0 } else { -1.0 };
            let m = sign * margin(weights, bias, row);
            // the kink m == 1 takes subgradient 0
            if m < 1.0 {
                hinge += 1.0 - m;
                for (g, x) in grad_w.iter_mut().zip(row) {
                    *g -= sign * x;
                }
                grad_b -= sign;
            }
        }
        for (g, w) in grad_w.iter_mut().zip(weights) {
            *g = *g / n + lambda * w;
        }
        Ok(LossGrad {
            loss: lambda * half_sq_norm(weights) + hinge / n,
            grad_w,
            grad_b: grad_b / n,
        })
    }

    fn regularization(&self, config: &TrainConfig) -> f64 {
        config.svm_lambda
    }

    fn validate(&self, config: &TrainConfig) -> Result<()> {
        config.validate_common()?;
        if !(config.svm_lambda > 0.0) {
            return Err(LinearError::BadConfig(format!(
                "svm lambda must be positive, got {}",
                config.svm_lambda
            )));
        }
        Ok(())
    }

    fn score(&self, z: f64) -> f64 {
        z
    }

    fn decide(&self, score: f64, _threshold: f64) -> u8 {
        u8::from(score >= 0.0)
    }
}

pub fn logistic_loss_grad(
    weights: &[f64],
    bias: f64,
    features: &[Vec<f64>],
    labels: &[u8],
    l2: f64,
) -> Result<LossGrad> {
    Logistic.loss_grad(weights, bias, features, labels, l2)
}

pub fn svm_loss_grad(
    weights: &[f64],
    bias: f64,
    features: &[Vec<f64>],
    labels: &[u8],
    lambda: f64,
) -> Result<LossGrad> {
    LinearSvm.loss_grad(weights, bias, features, labels, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty for the logistic objective.
    pub l2_strength: f64,
    /// Regularization for the SVM objective.
    pub svm_lambda: f64,
    /// Stop once successive losses differ by less than this.
    pub tolerance: f64,
    /// Unused by full-batch descent; kept so stochastic modes can share configs.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 2000,
            l2_strength: 1e-4,
            svm_lambda: 1e-2,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate_common(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(LinearError::BadConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(LinearError::BadConfig("epochs must be at least 1".into()));
        }
        if !(self.l2_strength >= 0.0) {
            return Err(LinearError::BadConfig(format!(
                "l2 strength must be non-negative, got {}",
                self.l2_strength
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(LinearError::BadConfig(format!(
                "tolerance must be non-negative, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config_echo: TrainConfig,
    pub history: Vec<f64>,
    /// Set when the training labels contained only one class.
    #[serde(default)]
    pub single_class: bool,
}

impl LinearModel {
    /// An untrained model with the given parameters.
    pub fn from_parameters(kind: ModelKind, weights: Vec<f64>, bias: f64) -> Self {
        LinearModel {
            kind,
            weights,
            bias,
            config_echo: TrainConfig::default(),
            history: Vec::new(),
            single_class: false,
        }
    }

    pub fn is_trained(&self) -> bool {
        self.history.last().is_some_and(|l| l.is_finite())
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.history.last().copied()
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        margin(&self.weights, self.bias, row)
    }
}

/// Full-batch gradient descent from the zero vector.
///
/// `history[0]` is the loss at initialization and the last entry is the loss
/// of the returned parameters. Stops after `epochs` updates or once the loss
/// changes by less than `tolerance`.
pub fn train_matrix(
    features: &[Vec<f64>],
    labels: &[u8],
    kind: ModelKind,
    config: &TrainConfig,
) -> Result<LinearModel> {
    let objective = kind.objective();
    objective.validate(config)?;
    if features.is_empty() {
        return Err(LinearError::EmptyData);
    }
    let width = features[0].len();
    let reg = objective.regularization(config);
    let mut weights = vec![0.0; width];
    let mut bias = 0.0;
    let mut history = Vec::with_capacity(config.epochs + 1);

    for epoch in 0..=config.epochs {
        let step = objective.loss_grad(&weights, bias, features, labels, reg)?;
        if !step.loss.is_finite() {
            return Err(LinearError::DivergenceDetected { epoch });
        }
        let converged = history
            .last()
            .is_some_and(|prev: &f64| (step.loss - prev).abs() < config.tolerance);
        history.push(step.loss);
        if converged || epoch == config.epochs {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&step.grad_w) {
            *w -= config.learning_rate * g;
        }
        bias -= config.learning_rate * step.grad_b;
    }

    let positives = labels.iter().filter(|&&y| y == 1).count();
    Ok(LinearModel {
        kind,
        weights,
        bias,
        config_echo: config.clone(),
        history,
        single_class: positives == 0 || positives == labels.len(),
    })
}

pub fn train(data: &EncodedDataset, kind: ModelKind, config: &TrainConfig) -> Result<LinearModel> {
    if data.is_empty() {
        return Err(LinearError::EmptyData);
    }
    train_matrix(&data.features, &data.labels, kind, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub labels: Vec<u8>,
    pub scores: Vec<f64>,
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Logistic scores are probabilities thresholded inclusively; SVM scores are
/// raw margins with label 1 iff the margin is non-negative.
pub fn predict(model: &LinearModel, features: &[Vec<f64>], threshold: f64) -> Result<Prediction> {
    let objective = model.kind.objective();
    let mut labels = Vec::with_capacity(features.len());
    let mut scores = Vec::with_capacity(features.len());
    for row in features {
        if row.len() != model.weights.len() {
            return Err(LinearError::DimensionMismatch {
                expected: model.weights.len(),
                found: row.len(),
            });
        }
        let s = objective.score(model.margin(row));
        scores.push(s);
        labels.push(objective.decide(s, threshold));
    }
    Ok(Prediction { labels, scores })
}

pub const MODEL_FILE_VERSION: &str = "darkwatch-model/1";

/// On-disk form of a trained tabular model, carrying the feature schema it
/// was trained against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: String,
    #[serde(flatten)]
    pub model: LinearModel,
    #[serde(flatten)]
    pub schema: FeatureSchema,
}

impl ModelFile {
    pub fn new(model: LinearModel, schema: FeatureSchema) -> Self {
        ModelFile {
            version: MODEL_FILE_VERSION.to_string(),
            model,
            schema,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if file.version != MODEL_FILE_VERSION {
            return Err(format!("unsupported model version {:?}", file.version));
        }
        if file.model.weights.len() != file.schema.width() {
            return Err(format!(
                "model has {} weights but schema has {} columns",
                file.model.weights.len(),
                file.schema.width()
            ));
        }
        Ok(file)
    }
}
