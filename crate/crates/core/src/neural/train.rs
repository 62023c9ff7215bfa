use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::model::{mse_loss, Model, ModelInput};
use crate::corpus::DatasetSplit;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 2048,
            batch_size: 16,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: ModelInput,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    /// Mean of the mini-batch losses seen during the epoch, weighted by batch
    /// size.
    pub train_mse: f64,
    /// Loss over the validation examples after the epoch's last update.
    pub validation_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: Vec<EpochLoss>,
    /// Zero-based epoch with the lowest validation loss (earliest on ties).
    pub best_epoch: usize,
    pub best: Model,
    pub last: Model,
}

fn mean_loss(model: &Model, examples: &[Example], indices: &[usize]) -> Result<f64> {
    let mut sum = 0.0;
    for &i in indices {
        let ex = &examples[i];
        sum += mse_loss(&model.forward(&ex.input)?, &ex.target)?;
    }
    Ok(sum / indices.len() as f64)
}

/// Mini-batch Adam on the training indices of `split`, shuffled every epoch
/// with a generator seeded from `config.seed`. Single-threaded; gradients are
/// summed in batch order.
pub fn train(mut model: Model, examples: &[Example], split: &DatasetSplit, config: &TrainingConfig) -> Result<TrainOutcome> {
    if split.train.is_empty() || split.validation.is_empty() {
        return Err(Error::Empty("training or validation partition"));
    }
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::invalid("epochs and batch_size must be at least 1"));
    }
    if let Some(&bad) = split.train.iter().chain(&split.validation).find(|&&i| i >= examples.len()) {
        return Err(Error::invalid(alloc::format!("split index {bad} out of range")));
    }
    let out_dim = model.spec().output_dim;
    if let Some(ex) = examples.iter().find(|e| e.target.len() != out_dim) {
        return Err(Error::DimensionMismatch {
            context: "training target",
            expected: out_dim,
            actual: ex.target.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdamState::new(model.params().len());
    let mut grads = vec![0.0; model.params().len()];
    let mut order = split.train.clone();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best = (f64::INFINITY, 0usize, model.clone());

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let ex = &examples[i];
                loss_sum += model.accumulate_gradients(&ex.input, &ex.target, scale, &mut grads)?;
            }
            adam_step(model.params_mut(), &grads, &mut state, &config.adam)?;
        }
        let train_mse = loss_sum / order.len() as f64;
        let validation_mse = mean_loss(&model, examples, &split.validation)?;
        if validation_mse < best.0 {
            best = (validation_mse, epoch, model.clone());
        }
        history.push(EpochLoss {
            train_mse,
            validation_mse,
        });
    }
    Ok(TrainOutcome {
        history,
        best_epoch: best.1,
        best: best.2,
        last: model,
    })
}
