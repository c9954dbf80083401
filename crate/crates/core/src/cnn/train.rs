use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CnnError, CnnNetwork, NetSpec, Result, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnTrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for CnnTrainConfig {
    fn default() -> Self {
        CnnTrainConfig {
            learning_rate: 0.05,
            epochs: 200,
            batch_size: 16,
            seed: 0,
        }
    }
}

impl CnnTrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CnnError::BadConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(CnnError::BadConfig(
                "epochs and batch size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub network: CnnNetwork,
    /// Sample-weighted mean of the mini-batch losses seen during each epoch.
    pub history: Vec<f64>,
}

/// Mini-batch gradient descent. `config.seed` drives both the initial weights
/// and the per-epoch shuffles, so the result depends only on the sample order,
/// the spec and the config.
pub fn train_cnn(
    samples: &[Tensor],
    labels: &[usize],
    spec: NetSpec,
    config: &CnnTrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if samples.is_empty() {
        return Err(CnnError::EmptyDataset);
    }
    if samples.len() != labels.len() {
        return Err(CnnError::ShapeMismatch {
            expected: format!("{} labels", samples.len()),
            found: format!("{} labels", labels.len()),
        });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= spec.classes) {
        return Err(CnnError::BadLabel {
            label,
            classes: spec.classes,
        });
    }

    let mut network = CnnNetwork::new(spec, config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // initialization draws from stream 0 of the same seed
    rng.set_stream(1);

    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut batch = Vec::with_capacity(config.batch_size);
    let mut batch_labels = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch_labels.clear();
            for &i in chunk {
                batch.push(samples[i].clone());
                batch_labels.push(labels[i]);
            }
            let (loss, grads) = network.loss_gradients(&batch, &batch_labels)?;
            if !loss.is_finite() {
                return Err(CnnError::DivergenceDetected { epoch });
            }
            epoch_loss += loss * chunk.len() as f64;
            for (layer, g) in network.layers.iter_mut().zip(&grads.layers) {
                layer.apply_update(g, config.learning_rate);
            }
        }
        let mean = epoch_loss / samples.len() as f64;
        history.push(mean);
        if network.parameters().iter().any(|p| !p.is_finite()) {
            return Err(CnnError::DivergenceDetected { epoch });
        }
    }
    network.trained = true;
    Ok(TrainOutcome { network, history })
}
