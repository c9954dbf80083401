//! A small convolutional classifier: valid convolution, ReLU, 2×2 max-pool,
//! dense layer and softmax, with hand-written backpropagation.

mod layers;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use layers::{Layer, LayerGrads};
pub use train::{train_cnn, CnnTrainConfig, TrainOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CnnError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("loss became non-finite at epoch {epoch}")]
    DivergenceDetected { epoch: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, CnnError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub h: usize,
    pub w: usize,
    pub c: usize,
}

impl Shape {
    pub fn new(h: usize, w: usize, c: usize) -> Self {
        Shape { h, w, c }
    }

    pub fn len(&self) -> usize {
        self.h * self.w * self.c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.h, self.w, self.c)
    }
}

/// Channel-major activations: `data[(c * h + y) * w + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Shape,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: Shape) -> Self {
        Tensor {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(CnnError::ShapeMismatch {
                expected: format!("{} values", shape.len()),
                found: format!("{} values", data.len()),
            });
        }
        Ok(Tensor { shape, data })
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.shape.h + y) * self.shape.w + x]
    }

    #[inline]
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.shape.h + y) * self.shape.w + x
    }
}

/// Architecture knobs for the conv→relu→pool→flatten→dense→softmax stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub input_shape: Shape,
    pub kernel: usize,
    pub channels: usize,
    pub classes: usize,
}

impl NetSpec {
    pub fn validate(&self) -> Result<()> {
        let s = self.input_shape;
        if s.is_empty() || self.kernel == 0 || self.channels == 0 || self.classes < 2 {
            return Err(CnnError::BadConfig(format!(
                "need positive input/kernel/channels and >= 2 classes: {self:?}"
            )));
        }
        if self.kernel > s.h || self.kernel > s.w {
            return Err(CnnError::BadConfig(format!(
                "kernel {} larger than input {}",
                self.kernel, s
            )));
        }
        let (ch, cw) = (s.h - self.kernel + 1, s.w - self.kernel + 1);
        if ch < 2 || cw < 2 {
            return Err(CnnError::BadConfig(format!(
                "convolution output {ch}x{cw} too small to pool"
            )));
        }
        Ok(())
    }

    fn build(&self, mut init: impl FnMut(usize) -> f64) -> Vec<Layer> {
        let s = self.input_shape;
        let conv_fan_in = self.kernel * self.kernel * s.c;
        let conv_w = (0..self.channels * conv_fan_in)
            .map(|_| init(conv_fan_in))
            .collect();
        let pooled = Shape::new(
            (s.h - self.kernel + 1) / 2,
            (s.w - self.kernel + 1) / 2,
            self.channels,
        );
        let dense_in = pooled.len();
        let dense_w = (0..self.classes * dense_in).map(|_| init(dense_in)).collect();
        vec![
            Layer::Conv {
                kernel: self.kernel,
                in_channels: s.c,
                out_channels: self.channels,
                weights: conv_w,
                bias: vec![0.0; self.channels],
            },
            Layer::Relu,
            Layer::MaxPool,
            Layer::Flatten,
            Layer::Dense {
                inputs: dense_in,
                outputs: self.classes,
                weights: dense_w,
                bias: vec![0.0; self.classes],
            },
            Layer::Softmax,
        ]
    }
}

pub const CNN_FILE_VERSION: &str = "darkwatch-cnn/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnNetwork {
    pub spec: NetSpec,
    pub input_shape: Shape,
    pub layers: Vec<Layer>,
    pub seed: u64,
    /// Set by the trainer; inference through a pipeline requires it.
    #[serde(default)]
    pub trained: bool,
}

/// Per-layer parameter gradients, parallel to `CnnNetwork::layers`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

impl Gradients {
    /// All gradient entries in the same order as [`CnnNetwork::parameters`].
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|g| g.weights.iter().chain(&g.bias).copied())
            .collect()
    }
}

/// Forward pass output for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub probabilities: Vec<f64>,
    /// `activations[i]` is the input to layer `i`; the last entry is the
    /// softmax output.
    pub activations: Vec<Tensor>,
}

impl ForwardPass {
    pub fn logits(&self) -> &[f64] {
        &self.activations[self.activations.len() - 2].data
    }
}

impl CnnNetwork {
    /// Weights drawn from `U(-1, 1) / sqrt(fan_in)`, biases zero.
    pub fn new(spec: NetSpec, seed: u64) -> Result<Self> {
        use rand::{Rng, SeedableRng};
        spec.validate()?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let layers = spec.build(|fan_in| rng.gen_range(-1.0..1.0) / (fan_in as f64).sqrt());
        Ok(CnnNetwork {
            spec,
            input_shape: spec.input_shape,
            layers,
            seed,
            trained: false,
        })
    }

    /// All parameters zero.
    pub fn zeros(spec: NetSpec) -> Result<Self> {
        spec.validate()?;
        Ok(CnnNetwork {
            spec,
            input_shape: spec.input_shape,
            layers: spec.build(|_| 0.0),
            seed: 0,
            trained: false,
        })
    }

    pub fn classes(&self) -> usize {
        self.spec.classes
    }

    /// Checks that consecutive layers agree on shapes and that the stack
    /// ends in softmax.
    pub fn validate(&self) -> Result<()> {
        let mut shape = self.input_shape;
        for layer in &self.layers {
            shape = layer.output_shape(shape)?;
        }
        if !matches!(self.layers.last(), Some(Layer::Softmax)) {
            return Err(CnnError::BadConfig("network must end in softmax".into()));
        }
        if shape.len() != self.spec.classes {
            return Err(CnnError::ShapeMismatch {
                expected: format!("{} outputs", self.spec.classes),
                found: format!("{} outputs", shape.len()),
            });
        }
        for layer in &self.layers {
            if layer.parameters().any(|p| !p.is_finite()) {
                return Err(CnnError::BadConfig("non-finite parameter".into()));
            }
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.parameters().count()).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.parameters()).collect()
    }

    /// Mutable access to the parameter at a flat index (see [`Self::parameters`]).
    pub fn parameter_mut(&mut self, mut index: usize) -> &mut f64 {
        for layer in &mut self.layers {
            let n = layer.parameters().count();
            if index < n {
                return layer.parameter_mut(index);
            }
            index -= n;
        }
        panic!("parameter index out of range");
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        if input.shape != self.input_shape {
            return Err(CnnError::ShapeMismatch {
                expected: self.input_shape.to_string(),
                found: input.shape.to_string(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &Tensor) -> Result<ForwardPass> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.clone());
        for layer in &self.layers {
            let next = layer.forward(activations.last().expect("non-empty"));
            activations.push(next);
        }
        let probabilities = activations.last().expect("non-empty").data.clone();
        Ok(ForwardPass {
            probabilities,
            activations,
        })
    }

    /// Class probabilities for each sample.
    pub fn forward_batch(&self, batch: &[Tensor]) -> Result<Vec<Vec<f64>>> {
        batch
            .iter()
            .map(|t| self.forward(t).map(|p| p.probabilities))
            .collect()
    }

    pub fn predict(&self, input: &Tensor) -> Result<(usize, f64)> {
        let p = self.forward(input)?.probabilities;
        Ok(argmax(&p))
    }

    /// Mean softmax cross-entropy over the batch and its gradient for every
    /// parameter.
    pub fn loss_gradients(&self, batch: &[Tensor], labels: &[usize]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(CnnError::EmptyDataset);
        }
        if batch.len() != labels.len() {
            return Err(CnnError::ShapeMismatch {
                expected: format!("{} labels", batch.len()),
                found: format!("{} labels", labels.len()),
            });
        }
        let classes = self.classes();
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(CnnError::BadLabel { label, classes });
        }

        let mut grads = Gradients {
            layers: self.layers.iter().map(LayerGrads::zeros_like).collect(),
        };
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for (input, &label) in batch.iter().zip(labels) {
            let pass = self.forward(input)?;
            let logits = pass.logits();
            loss += log_sum_exp(logits) - logits[label];

            // softmax + cross-entropy: d/dz = p - onehot
            let mut upstream: Vec<f64> = pass.probabilities.iter().map(|p| p * scale).collect();
            upstream[label] -= scale;
            let mut grad = Tensor::new(pass.activations[self.layers.len() - 1].shape, upstream)?;

            for i in (0..self.layers.len() - 1).rev() {
                grad = self.layers[i].backward(&pass.activations[i], &grad, &mut grads.layers[i]);
            }
        }
        Ok((loss * scale, grads))
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Index and value of the first maximum.
pub fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    version: String,
    #[serde(flatten)]
    network: CnnNetwork,
}

impl CnnNetwork {
    /// JSON document tagged with [`CNN_FILE_VERSION`].
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(NetworkFile {
            version: CNN_FILE_VERSION.to_string(),
            network: self.clone(),
        })
        .expect("network serializes")
    }

    pub fn from_json_value(value: serde_json::Value) -> std::result::Result<Self, String> {
        let file: NetworkFile = serde_json::from_value(value).map_err(|e| e.to_string())?;
        if file.version != CNN_FILE_VERSION {
            return Err(format!("unsupported network version {:?}", file.version));
        }
        file.network.validate().map_err(|e| e.to_string())?;
        Ok(file.network)
    }
}
