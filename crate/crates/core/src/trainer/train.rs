use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamSettings, AdamState};
use super::classifier::{mix_seed, Classifier, Sample};
use crate::error::{Result, ScfError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Fraction of the training data held out for early stopping.
    pub validation_fraction: f64,
    /// Probability threshold for a positive decision.
    pub threshold: f64,
    /// Not read from config files; derived from the run seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamSettings::default();
        Self {
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            batch_size: 32,
            max_epochs: 30,
            patience: 5,
            validation_fraction: 0.1,
            threshold: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamSettings {
        AdamSettings {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.adam().validate()?;
        if self.patience == 0 {
            return Err(ScfError::config("patience must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(ScfError::config("batch_size must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(ScfError::config(format!(
                "validation_fraction must be in [0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
}

impl History {
    /// Plain-text table, one row per epoch; the best epoch is starred.
    pub fn to_table(&self) -> String {
        let mut out = String::from("epoch  train_loss  train_acc  val_loss  val_acc\n");
        for r in &self.epochs {
            let mark = if r.epoch == self.best_epoch { " *" } else { "" };
            writeln!(
                out,
                "{:>5}  {:>10.6}  {:>9.4}  {:>8.6}  {:>7.4}{mark}",
                r.epoch, r.train_loss, r.train_accuracy, r.val_loss, r.val_accuracy
            )
            .unwrap();
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopVerdict {
    Improved,
    Continue,
    Stop,
}

/// Tracks the best validation loss and counts epochs without improvement.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, loss: f64) -> StopVerdict {
        if loss < self.best {
            self.best = loss;
            self.best_epoch = epoch;
            self.stale = 0;
            StopVerdict::Improved
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                StopVerdict::Stop
            } else {
                StopVerdict::Continue
            }
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation loss.
    pub classifier: Classifier,
    pub history: History,
    /// Optimizer state at the end of the run.
    pub optimizer: AdamState,
}

/// Splits off the early-stopping validation set.
fn split_validation(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut held = (fraction * n as f64).round() as usize;
    if fraction > 0.0 && n >= 2 {
        held = held.clamp(1, n - 1);
    }
    let val = order.split_off(n - held);
    (order, val)
}

/// Minibatch Adam with early stopping on the validation loss.
pub fn train(mut classifier: Classifier, samples: &[Sample], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if samples.is_empty() {
        return Err(ScfError::input("cannot train on an empty dataset"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (train_idx, val_idx) = split_validation(samples.len(), config.validation_fraction, &mut rng);
    let positives = train_idx.iter().filter(|&&i| samples[i].label >= 0.5).count();
    if positives == 0 || positives == train_idx.len() {
        return Err(ScfError::input(format!(
            "training split of {} instances contains a single class",
            train_idx.len()
        )));
    }
    let val: Vec<Sample> = val_idx.iter().map(|&i| samples[i].clone()).collect();

    let adam = config.adam();
    let mut optimizer = AdamState::new(classifier.trainable_len());
    let mut params = classifier.flatten_trainable();
    let mut best = classifier.clone();
    let mut stopper = EarlyStopping::new(config.patience);
    let mut history = History::default();
    let mut order = train_idx;
    let mut step = 0u64;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct_sum) = (0.0, 0.0);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Sample> = chunk.iter().map(|&i| samples[i].clone()).collect();
            let grads = classifier.gradients(&batch, Some(mix_seed(config.seed, step)))?;
            step += 1;
            loss_sum += grads.loss * batch.len() as f64;
            correct_sum += grads.accuracy * batch.len() as f64;
            optimizer.update(&mut params, &grads.flatten(), &adam);
            classifier.assign_trainable(&params)?;
            // parameter projection may have moved values
            params = classifier.flatten_trainable();
        }
        let n = order.len() as f64;
        let (train_loss, train_accuracy) = (loss_sum / n, correct_sum / n);
        let (val_loss, val_accuracy) = if val.is_empty() {
            (train_loss, train_accuracy)
        } else {
            classifier.evaluate(&val, config.threshold)?
        };
        if !val_loss.is_finite() {
            return Err(ScfError::Training(format!("validation loss became {val_loss} at epoch {epoch}")));
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        });
        match stopper.observe(epoch, val_loss) {
            StopVerdict::Improved => best = classifier.clone(),
            StopVerdict::Continue => {}
            StopVerdict::Stop => break,
        }
    }
    history.best_epoch = stopper.best_epoch();
    Ok(TrainOutcome {
        classifier: best,
        history,
        optimizer,
    })
}
