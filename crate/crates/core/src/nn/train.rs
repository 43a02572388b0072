use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::bce;
use super::model::Model;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// One labelled image, already normalised into a `[C, H, W]` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Tensor,
    pub fire: bool,
}

impl Sample {
    pub fn new(image: Tensor, fire: bool) -> Self {
        Sample { image, fire }
    }

    fn label(&self) -> f64 {
        if self.fire {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(seed: u64) -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 20,
            batch_size: 16,
            seed,
        }
    }

    fn validate(&self, dataset_len: usize) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Input(format!("learning rate must be finite and non-negative, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::Input("batch size must be positive".into()));
        }
        if self.batch_size > dataset_len {
            return Err(Error::Input(format!(
                "batch size {} exceeds dataset size {dataset_len}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// Mean per-sample binary cross-entropy and classification accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub loss: f64,
    pub accuracy: f64,
}

/// A probability of exactly 0.5 counts as fire.
fn predicts_fire(p: f64) -> bool {
    p >= 0.5
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    rng
}

/// One pass of mini-batch SGD over a seeded shuffle of `dataset`.
///
/// Each batch takes the step `w -= lr * mean_batch_gradient`. The returned
/// metrics are accumulated from the forward passes made during the epoch,
/// i.e. before each batch's update.
pub fn train_epoch(model: &mut Model, dataset: &[Sample], cfg: &TrainConfig, epoch: usize) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::Input("cannot train on an empty dataset".into()));
    }
    cfg.validate(dataset.len())?;

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut epoch_rng(cfg.seed, epoch));

    let mut total_loss = 0.0;
    let mut correct = 0usize;
    for (batch, chunk) in order.chunks(cfg.batch_size).enumerate() {
        let mut batch_grads: Option<_> = None;
        for &i in chunk {
            let sample = &dataset[i];
            let trace = model.forward(&sample.image)?;
            if !trace.probability.is_finite() {
                return Err(Error::Divergence { batch });
            }
            let (loss, dloss_dp) = bce(sample.label(), trace.probability)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { batch });
            }
            total_loss += loss;
            if predicts_fire(trace.probability) == sample.fire {
                correct += 1;
            }
            let g = model.backward(&trace, dloss_dp)?;
            match batch_grads.as_mut() {
                None => batch_grads = Some(g),
                Some(acc) => acc.accumulate(&g),
            }
        }
        if let Some(g) = batch_grads {
            model.apply_gradients(&g, cfg.learning_rate / chunk.len() as f64);
        }
        if !model.parameters().iter().all(|t| t.is_finite()) {
            return Err(Error::Divergence { batch });
        }
    }

    Ok(Metrics {
        loss: total_loss / dataset.len() as f64,
        accuracy: correct as f64 / dataset.len() as f64,
    })
}

/// Runs `cfg.epochs` epochs, reporting each epoch's metrics to `on_epoch`.
pub fn train<F>(model: &mut Model, dataset: &[Sample], cfg: &TrainConfig, mut on_epoch: F) -> Result<Vec<Metrics>>
where
    F: FnMut(usize, &Metrics),
{
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let m = train_epoch(model, dataset, cfg, epoch)?;
        on_epoch(epoch, &m);
        history.push(m);
    }
    Ok(history)
}

pub fn evaluate(model: &Model, dataset: &[Sample]) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::Input("cannot evaluate on an empty dataset".into()));
    }
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    for sample in dataset {
        let p = model.predict(&sample.image)?;
        total_loss += bce(sample.label(), p)?.0;
        if predicts_fire(p) == sample.fire {
            correct += 1;
        }
    }
    Ok(Metrics {
        loss: total_loss / dataset.len() as f64,
        accuracy: correct as f64 / dataset.len() as f64,
    })
}

/// Seeded shuffle followed by a cut at `round(len * train_fraction)`.
pub fn split_dataset(mut samples: Vec<Sample>, train_fraction: f64, seed: u64) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::Domain(format!("train fraction must lie in [0, 1], got {train_fraction}")));
    }
    samples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (samples.len() as f64 * train_fraction).round() as usize;
    let held_out = samples.split_off(cut);
    Ok((samples, held_out))
}
