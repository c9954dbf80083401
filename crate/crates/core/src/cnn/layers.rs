use serde::{Deserialize, Serialize};

use super::{softmax, CnnError, Result, Shape, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layer {
    /// Valid convolution, stride 1. Weights are laid out `[out][in][ky][kx]`.
    Conv {
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
    Relu,
    /// 2×2 windows, stride 2; odd trailing rows/columns are dropped.
    MaxPool,
    Flatten,
    /// Weights are laid out `[out][in]`.
    Dense {
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    },
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerGrads {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerGrads {
    pub fn zeros_like(layer: &Layer) -> Self {
        match layer {
            Layer::Conv { weights, bias, .. } | Layer::Dense { weights, bias, .. } => LayerGrads {
                weights: vec![0.0; weights.len()],
                bias: vec![0.0; bias.len()],
            },
            _ => LayerGrads::default(),
        }
    }
}

fn mismatch(expected: impl ToString, found: impl ToString) -> CnnError {
    CnnError::ShapeMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// First maximum of the 2×2 window at `(c, 2y, 2x)` in row-major order.
fn pool_argmax(input: &Tensor, c: usize, y: usize, x: usize) -> usize {
    let mut best = input.index(c, 2 * y, 2 * x);
    for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
        let i = input.index(c, 2 * y + dy, 2 * x + dx);
        if input.data[i] > input.data[best] {
            best = i;
        }
    }
    best
}

impl Layer {
    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        match self {
            Layer::Conv {
                kernel,
                in_channels,
                out_channels,
                weights,
                bias,
            } => {
                if input.c != *in_channels {
                    return Err(mismatch(format!("{in_channels} channels"), format!("{} channels", input.c)));
                }
                if *kernel == 0 || *kernel > input.h || *kernel > input.w {
                    return Err(mismatch(format!("input at least {kernel}x{kernel}"), input));
                }
                if weights.len() != out_channels * in_channels * kernel * kernel || bias.len() != *out_channels {
                    return Err(mismatch("conv parameter sizes", format!("{} weights, {} biases", weights.len(), bias.len())));
                }
                Ok(Shape::new(input.h - kernel + 1, input.w - kernel + 1, *out_channels))
            }
            Layer::Relu | Layer::Softmax => Ok(input),
            Layer::MaxPool => {
                if input.h < 2 || input.w < 2 {
                    return Err(mismatch("input at least 2x2", input));
                }
                Ok(Shape::new(input.h / 2, input.w / 2, input.c))
            }
            Layer::Flatten => Ok(Shape::new(1, 1, input.len())),
            Layer::Dense {
                inputs,
                outputs,
                weights,
                bias,
            } => {
                if input.len() != *inputs {
                    return Err(mismatch(format!("{inputs} inputs"), format!("{} inputs", input.len())));
                }
                if weights.len() != inputs * outputs || bias.len() != *outputs {
                    return Err(mismatch("dense parameter sizes", format!("{} weights, {} biases", weights.len(), bias.len())));
                }
                Ok(Shape::new(1, 1, *outputs))
            }
        }
    }

    /// Weights then biases.
    pub fn parameters(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            Layer::Conv { weights, bias, .. } | Layer::Dense { weights, bias, .. } => {
                Box::new(weights.iter().chain(bias).copied())
            }
            _ => Box::new(std::iter::empty()),
        }
    }

    pub fn parameter_mut(&mut self, index: usize) -> &mut f64 {
        match self {
            Layer::Conv { weights, bias, .. } | Layer::Dense { weights, bias, .. } => {
                if index < weights.len() {
                    &mut weights[index]
                } else {
                    &mut bias[index - weights.len()]
                }
            }
            _ => panic!("layer has no parameters"),
        }
    }

    pub fn apply_update(&mut self, grads: &LayerGrads, learning_rate: f64) {
        if let Layer::Conv { weights, bias, .. } | Layer::Dense { weights, bias, .. } = self {
            for (w, g) in weights.iter_mut().zip(&grads.weights) {
                *w -= learning_rate * g;
            }
            for (b, g) in bias.iter_mut().zip(&grads.bias) {
                *b -= learning_rate * g;
            }
        }
    }

    /// Shapes must already have been checked by [`Layer::output_shape`].
    pub fn forward(&self, input: &Tensor) -> Tensor {
        let s = input.shape;
        match self {
            Layer::Conv {
                kernel: k,
                in_channels,
                out_channels,
                weights,
                bias,
            } => {
                let out_shape = Shape::new(s.h - k + 1, s.w - k + 1, *out_channels);
                let mut out = Tensor::zeros(out_shape);
                for o in 0..*out_channels {
                    for y in 0..out_shape.h {
                        for x in 0..out_shape.w {
                            let mut acc = bias[o];
                            for i in 0..*in_channels {
                                let wbase = (o * in_channels + i) * k * k;
                                for ky in 0..*k {
                                    for kx in 0..*k {
                                        acc += weights[wbase + ky * k + kx] * input.at(i, y + ky, x + kx);
                                    }
                                }
                            }
                            let idx = out.index(o, y, x);
                            out.data[idx] = acc;
                        }
                    }
                }
                out
            }
            Layer::Relu => Tensor {
                shape: s,
                data: input.data.iter().map(|&v| v.max(0.0)).collect(),
            },
            Layer::MaxPool => {
                let out_shape = Shape::new(s.h / 2, s.w / 2, s.c);
                let mut out = Tensor::zeros(out_shape);
                for c in 0..s.c {
                    for y in 0..out_shape.h {
                        for x in 0..out_shape.w {
                            let idx = out.index(c, y, x);
                            out.data[idx] = input.data[pool_argmax(input, c, y, x)];
                        }
                    }
                }
                out
            }
            Layer::Flatten => Tensor {
                shape: Shape::new(1, 1, s.len()),
                data: input.data.clone(),
            },
            Layer::Dense {
                inputs,
                outputs,
                weights,
                bias,
            } => {
                let data = (0..*outputs)
                    .map(|o| {
                        let row = &weights[o * inputs..(o + 1) * inputs];
                        bias[o] + row.iter().zip(&input.data).map(|(w, x)| w * x).sum::<f64>()
                    })
                    .collect();
                Tensor {
                    shape: Shape::new(1, 1, *outputs),
                    data,
                }
            }
            Layer::Softmax => Tensor {
                shape: s,
                data: softmax(&input.data),
            },
        }
    }

    /// Accumulates parameter gradients into `grads` and returns the gradient
    /// with respect to `input`. Softmax is handled by the loss.
    pub fn backward(&self, input: &Tensor, upstream: &Tensor, grads: &mut LayerGrads) -> Tensor {
        let s = input.shape;
        match self {
            Layer::Conv {
                kernel: k,
                in_channels,
                out_channels,
                weights,
                ..
            } => {
                let mut down = Tensor::zeros(s);
                let out_shape = upstream.shape;
                for o in 0..*out_channels {
                    for y in 0..out_shape.h {
                        for x in 0..out_shape.w {
                            let g = upstream.at(o, y, x);
                            if g == 0.0 {
                                continue;
                            }
                            grads.bias[o] += g;
                            for i in 0..*in_channels {
                                let wbase = (o * in_channels + i) * k * k;
                                for ky in 0..*k {
                                    for kx in 0..*k {
                                        let src = down.index(i, y + ky, x + kx);
                                        grads.weights[wbase + ky * k + kx] += g * input.data[src];
                                        down.data[src] += g * weights[wbase + ky * k + kx];
                                    }
                                }
                            }
                        }
                    }
                }
                down
            }
            Layer::Relu => Tensor {
                shape: s,
                data: input
                    .data
                    .iter()
                    .zip(&upstream.data)
                    .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
                    .collect(),
            },
            Layer::MaxPool => {
                let mut down = Tensor::zeros(s);
                for c in 0..s.c {
                    for y in 0..upstream.shape.h {
                        for x in 0..upstream.shape.w {
                            down.data[pool_argmax(input, c, y, x)] += upstream.at(c, y, x);
                        }
                    }
                }
                down
            }
            Layer::Flatten => Tensor {
                shape: s,
                data: upstream.data.clone(),
            },
            Layer::Dense {
                inputs,
                outputs,
                weights,
                ..
            } => {
                let mut down = vec![0.0; *inputs];
                for o in 0..*outputs {
                    let g = upstream.data[o];
                    grads.bias[o] += g;
                    let row = o * inputs;
                    for j in 0..*inputs {
                        grads.weights[row + j] += g * input.data[j];
                        down[j] += g * weights[row + j];
                    }
                }
                Tensor { shape: s, data: down }
            }
            Layer::Softmax => unreachable!("softmax gradient is fused into the loss"),
        }
    }
}
