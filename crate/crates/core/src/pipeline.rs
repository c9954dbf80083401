//! Staged image classification: load → denoise → extract features → classify.
//!
//! Two interchangeable back ends are registered by name:
//!
//! * `raw-cnn` feeds the denoised pixels (scaled to `[0, 1]`) to the
//!   convolutional network;
//! * `hog-linear` extracts a HOG descriptor and scores it with a binary
//!   linear model, reporting `σ(margin)` as the class-1 probability.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::cnn::{self, CnnError, CnnNetwork, CnnTrainConfig, NetSpec, Shape, Tensor};
use crate::corpus::Corpus;
use crate::imaging::filters::denoiser_from_spec;
use crate::imaging::{hog, Denoiser, GrayImage, HogParams, ImageError};
use crate::linear::{self, sigmoid, LinearError, LinearModel, ModelKind, TrainConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Cnn(#[from] CnnError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error("model has not been trained")]
    UntrainedModel,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unknown feature mode {0:?} (available: {1})")]
    UnknownMode(String, String),
    #[error("invalid model file: {0}")]
    BadModelFile(String),
    #[error("the hog-linear head is binary; found label {0}")]
    NonBinaryLabel(usize),
    #[error("training corpus is empty")]
    EmptyCorpus,
}

impl PipelineError {
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            PipelineError::Cnn(CnnError::DivergenceDetected { .. })
                | PipelineError::Linear(LinearError::DivergenceDetected { .. })
        )
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: usize,
    pub confidence: f64,
}

/// Single-channel tensor with intensities scaled to `[0, 1]`.
pub fn image_to_tensor(img: &GrayImage) -> Tensor {
    Tensor {
        shape: Shape::new(img.height(), img.width(), 1),
        data: img.pixels().iter().map(|p| p / 255.0).collect(),
    }
}

/// A trained classifier over already-denoised images.
pub trait ImageClassifier: Send + Sync + fmt::Debug {
    fn mode(&self) -> &'static str;

    fn classify(&self, img: &GrayImage) -> Result<Classification>;

    /// Serialized form, tagged with the mode's file version.
    fn to_json_value(&self) -> Value;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnClassifier {
    pub network: CnnNetwork,
}

impl ImageClassifier for CnnClassifier {
    fn mode(&self) -> &'static str {
        RawCnnMode.name()
    }

    fn classify(&self, img: &GrayImage) -> Result<Classification> {
        if !self.network.trained {
            return Err(PipelineError::UntrainedModel);
        }
        let (label, confidence) = self.network.predict(&image_to_tensor(img))?;
        Ok(Classification { label, confidence })
    }

    fn to_json_value(&self) -> Value {
        self.network.to_json_value()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HogLinearClassifier {
    pub hog: HogParams,
    pub model: LinearModel,
}

impl HogLinearClassifier {
    pub fn features(&self, img: &GrayImage) -> Result<Vec<f64>> {
        Ok(hog(img, &self.hog)?.values)
    }
}

impl ImageClassifier for HogLinearClassifier {
    fn mode(&self) -> &'static str {
        HogLinearMode.name()
    }

    fn classify(&self, img: &GrayImage) -> Result<Classification> {
        if !self.model.is_trained() {
            return Err(PipelineError::UntrainedModel);
        }
        let features = self.features(img)?;
        if features.len() != self.model.weights.len() {
            return Err(PipelineError::ShapeMismatch(format!(
                "descriptor has {} values, model expects {}",
                features.len(),
                self.model.weights.len()
            )));
        }
        let z = self.model.margin(&features);
        let p1 = sigmoid(z);
        Ok(if z >= 0.0 {
            Classification {
                label: 1,
                confidence: p1,
            }
        } else {
            Classification {
                label: 0,
                confidence: 1.0 - p1,
            }
        })
    }

    fn to_json_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("classifier serializes");
        v["version"] = Value::from(HogLinearMode.file_version());
        v
    }
}

/// Hyperparameters for either back end; each mode reads the fields it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTrainOptions {
    pub cnn: CnnTrainConfig,
    pub kernel: usize,
    pub channels: usize,
    pub hog: HogParams,
    pub linear_kind: ModelKind,
    pub linear: TrainConfig,
}

impl Default for ImageTrainOptions {
    fn default() -> Self {
        ImageTrainOptions {
            cnn: CnnTrainConfig::default(),
            kernel: 3,
            channels: 4,
            hog: HogParams::default(),
            linear_kind: ModelKind::Logistic,
            linear: TrainConfig::default(),
        }
    }
}

pub struct Trained {
    pub classifier: Box<dyn ImageClassifier>,
    pub history: Vec<f64>,
}

/// A feature-extraction + classification back end.
pub trait FeatureMode: Send + Sync {
    fn name(&self) -> &'static str;

    fn file_version(&self) -> &'static str;

    /// Trains on images that have already been denoised.
    fn train(&self, images: &[GrayImage], labels: &[usize], opts: &ImageTrainOptions) -> Result<Trained>;

    fn load(&self, value: Value) -> Result<Box<dyn ImageClassifier>>;
}

pub struct RawCnnMode;

impl FeatureMode for RawCnnMode {
    fn name(&self) -> &'static str {
        "raw-cnn"
    }

    fn file_version(&self) -> &'static str {
        cnn::CNN_FILE_VERSION
    }

    fn train(&self, images: &[GrayImage], labels: &[usize], opts: &ImageTrainOptions) -> Result<Trained> {
        let first = images.first().ok_or(PipelineError::EmptyCorpus)?;
        let tensors: Vec<Tensor> = images.iter().map(image_to_tensor).collect();
        if let Some(t) = tensors.iter().find(|t| t.shape != tensors[0].shape) {
            return Err(PipelineError::ShapeMismatch(format!(
                "corpus mixes {} and {} images",
                tensors[0].shape, t.shape
            )));
        }
        let spec = NetSpec {
            input_shape: Shape::new(first.height(), first.width(), 1),
            kernel: opts.kernel,
            channels: opts.channels,
            classes: labels.iter().max().map_or(2, |m| (m + 1).max(2)),
        };
        let outcome = cnn::train_cnn(&tensors, labels, spec, &opts.cnn)?;
        Ok(Trained {
            classifier: Box::new(CnnClassifier {
                network: outcome.network,
            }),
            history: outcome.history,
        })
    }

    fn load(&self, value: Value) -> Result<Box<dyn ImageClassifier>> {
        let network = CnnNetwork::from_json_value(value).map_err(PipelineError::BadModelFile)?;
        Ok(Box::new(CnnClassifier { network }))
    }
}

pub struct HogLinearMode;

impl FeatureMode for HogLinearMode {
    fn name(&self) -> &'static str {
        "hog-linear"
    }

    fn file_version(&self) -> &'static str {
        "darkwatch-hog-linear/1"
    }

    fn train(&self, images: &[GrayImage], labels: &[usize], opts: &ImageTrainOptions) -> Result<Trained> {
        if images.is_empty() {
            return Err(PipelineError::EmptyCorpus);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(PipelineError::NonBinaryLabel(bad));
        }
        let features = images
            .iter()
            .map(|img| hog(img, &opts.hog).map(|d| d.values))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if let Some(f) = features.iter().find(|f| f.len() != features[0].len()) {
            return Err(PipelineError::ShapeMismatch(format!(
                "descriptor lengths {} and {} differ",
                features[0].len(),
                f.len()
            )));
        }
        let binary: Vec<u8> = labels.iter().map(|&l| l as u8).collect();
        let model = linear::train_matrix(&features, &binary, opts.linear_kind, &opts.linear)?;
        let history = model.history.clone();
        Ok(Trained {
            classifier: Box::new(HogLinearClassifier {
                hog: opts.hog,
                model,
            }),
            history,
        })
    }

    fn load(&self, value: Value) -> Result<Box<dyn ImageClassifier>> {
        let c: HogLinearClassifier =
            serde_json::from_value(value).map_err(|e| PipelineError::BadModelFile(e.to_string()))?;
        c.hog.validate()?;
        Ok(Box::new(c))
    }
}

static MODES: [&dyn FeatureMode; 2] = [&RawCnnMode, &HogLinearMode];

pub fn feature_mode_names() -> Vec<&'static str> {
    MODES.iter().map(|m| m.name()).collect()
}

/// Looks a mode up by name; `hog+dense` is accepted for `hog-linear`.
pub fn feature_mode(name: &str) -> Result<&'static dyn FeatureMode> {
    let key = match name.trim().to_ascii_lowercase().as_str() {
        "hog+dense" => "hog-linear".to_string(),
        other => other.to_string(),
    };
    MODES
        .iter()
        .copied()
        .find(|m| m.name() == key)
        .ok_or_else(|| PipelineError::UnknownMode(name.to_string(), feature_mode_names().join(", ")))
}

#[derive(Debug)]
pub struct Pipeline {
    pub denoiser: Box<dyn Denoiser>,
    pub classifier: Box<dyn ImageClassifier>,
}

impl Pipeline {
    pub fn new(denoiser: Box<dyn Denoiser>, classifier: Box<dyn ImageClassifier>) -> Self {
        Pipeline { denoiser, classifier }
    }

    /// Denoises every corpus image and trains the named back end on them.
    pub fn train(
        corpus: &Corpus,
        denoise: &str,
        mode: &str,
        opts: &ImageTrainOptions,
    ) -> Result<(Pipeline, Vec<f64>)> {
        let denoiser = denoiser_from_spec(denoise)?;
        let mode = feature_mode(mode)?;
        if corpus.is_empty() {
            return Err(PipelineError::EmptyCorpus);
        }
        let images: Vec<GrayImage> = corpus.samples.iter().map(|s| denoiser.apply(&s.image)).collect();
        let trained = mode.train(&images, &corpus.labels(), opts)?;
        Ok((Pipeline::new(denoiser, trained.classifier), trained.history))
    }

    pub fn classify(&self, img: &GrayImage) -> Result<Classification> {
        let clean = self.denoiser.apply(img);
        self.classifier.classify(&clean)
    }

    /// Fraction of corpus images whose predicted label matches.
    pub fn accuracy(&self, corpus: &Corpus) -> Result<f64> {
        if corpus.is_empty() {
            return Err(PipelineError::EmptyCorpus);
        }
        let mut hits = 0usize;
        for s in &corpus.samples {
            if self.classify(&s.image)?.label == s.label {
                hits += 1;
            }
        }
        Ok(hits as f64 / corpus.len() as f64)
    }

    pub fn to_json(&self) -> String {
        let mut v = self.classifier.to_json_value();
        v["mode"] = Value::from(self.classifier.mode());
        v["denoise"] = Value::from(self.denoiser.spec());
        serde_json::to_string_pretty(&v).expect("pipeline serializes")
    }

    pub fn from_json(text: &str) -> Result<Pipeline> {
        let mut v: Value =
            serde_json::from_str(text).map_err(|e| PipelineError::BadModelFile(e.to_string()))?;
        let obj = v
            .as_object_mut()
            .ok_or_else(|| PipelineError::BadModelFile("expected a JSON object".into()))?;
        let denoise = match obj.remove("denoise") {
            Some(Value::String(s)) => s,
            None => "none".to_string(),
            Some(other) => return Err(PipelineError::BadModelFile(format!("bad denoise entry {other}"))),
        };
        obj.remove("mode");
        let version = obj
            .get("version")
            .and_then(Value::as_str)
            .ok_or_else(|| PipelineError::BadModelFile("missing version".into()))?
            .to_string();
        let mode = MODES
            .iter()
            .find(|m| m.file_version() == version)
            .ok_or_else(|| PipelineError::BadModelFile(format!("unsupported version {version:?}")))?;
        if mode.name() == HogLinearMode.name() {
            obj.remove("version");
        }
        Ok(Pipeline::new(denoiser_from_spec(&denoise)?, mode.load(v)?))
    }
}

pub fn classify_image(pipeline: &Pipeline, image: &GrayImage) -> Result<Classification> {
    pipeline.classify(image)
}
