//! Seeded mini-batch training loop.

use alloc::vec::Vec;

use num_traits::Float;

use crate::rng::{seeded, shuffle};
use crate::tensor::Tensor;

use super::model::{batch_gradients, Grads, ModelSpec, Params};
use super::optim::{adam_step, sgd_step, AdamState, Optimizer};
use super::NnError;

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    /// Seeds weight init, epoch shuffling, and dropout draws.
    pub seed: u64,
    pub dropout_enabled: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            epochs: 20,
            learning_rate: 1e-3,
            optimizer: Optimizer::Adam,
            seed: 42,
            dropout_enabled: true,
        }
    }
}

/// Per-epoch mean loss and accuracy over the training batches as seen during
/// the epoch (dropout included when enabled).
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub train_accuracy: f64,
}

/// Trains the model on `(inputs, labels)` and returns the final parameters
/// with the per-epoch history.
///
/// One ChaCha stream seeded by `config.seed` drives initialization, the
/// per-epoch shuffles, and dropout, so a fixed seed reproduces the history
/// bit-for-bit. Divergence (NaN/Inf loss) aborts with the epoch and batch
/// where it appeared.
pub fn train<F: Float>(
    spec: &ModelSpec,
    inputs: &[Tensor<F>],
    labels: &[u8],
    config: &TrainConfig,
) -> Result<(Params<F>, Vec<EpochStats>), NnError> {
    spec.validate()?;
    if inputs.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    if inputs.len() != labels.len() {
        return Err(NnError::ShapeMismatch(alloc::format!(
            "{} inputs vs {} labels",
            inputs.len(),
            labels.len()
        )));
    }
    assert!(config.batch_size >= 1 && config.epochs >= 1, "degenerate train config");

    let mut rng = seeded(config.seed);
    let mut params = Params::init(spec, &mut rng);
    let mut grads = Grads::zeros_like(spec);
    let mut adam = match config.optimizer {
        Optimizer::Adam => Some(AdamState::new(spec)),
        Optimizer::Sgd => None,
    };

    let n = inputs.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        shuffle(&mut rng, &mut order);
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;

        for (batch_idx, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch_inputs: Vec<&Tensor<F>> = chunk.iter().map(|&i| &inputs[i]).collect();
            let batch_labels: Vec<u8> = chunk.iter().map(|&i| labels[i]).collect();
            let stats = batch_gradients(
                spec,
                &params,
                &batch_inputs,
                &batch_labels,
                config.dropout_enabled,
                &mut rng,
                &mut grads,
            )?;
            if !stats.loss.is_finite() {
                return Err(NnError::NonFiniteLoss { epoch, batch: batch_idx });
            }
            loss_sum += stats.loss * chunk.len() as f64;
            correct += stats.correct;

            match (&config.optimizer, adam.as_mut()) {
                (Optimizer::Adam, Some(state)) => {
                    adam_step(&mut params, &grads, state, config.learning_rate)
                }
                _ => sgd_step(&mut params, &grads, config.learning_rate),
            }
        }

        history.push(EpochStats {
            epoch,
            loss: loss_sum / n as f64,
            train_accuracy: correct as f64 / n as f64,
        });
    }
    Ok((params, history))
}
