use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::network::{Cnn, NnError};
use super::params::Params;
use super::spec::NetworkSpec;
use crate::rng::{derive_index, derive_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation-accuracy improvement before stopping.
    pub patience: usize,
    /// Share of each class held out for validation by [`train_cnn`].
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            max_epochs: 100,
            patience: 10,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("training data holds fewer than two classes")]
    DegenerateLabels,
    #[error("{examples} examples but {labels} labels")]
    LabelCount { examples: usize, labels: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("validation split left an empty side")]
    EmptySplit,
    #[error(transparent)]
    Network(#[from] NnError),
}

/// One line of the training history.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedCnn {
    /// Parameters from the epoch with the best validation accuracy.
    pub cnn: Cnn,
    pub history: Vec<EpochRecord>,
    /// `None` when no epoch ran.
    pub best_epoch: Option<usize>,
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    pub fn new(n_params: usize, cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
        }
    }

    pub fn step(&mut self, params: &mut Params, grads: &Params) {
        self.step += 1;
        let c1 = 1.0 - libm::pow(self.beta1, f64::from(self.step));
        let c2 = 1.0 - libm::pow(self.beta2, f64::from(self.step));
        let mut offset = 0;
        for (p, g) in params.tensors_mut().into_iter().zip(grads.tensors()) {
            for (i, (w, &gi)) in p.data.iter_mut().zip(&g.data).enumerate() {
                let m = &mut self.m[offset + i];
                let v = &mut self.v[offset + i];
                *m = self.beta1 * *m + (1.0 - self.beta1) * gi;
                *v = self.beta2 * *v + (1.0 - self.beta2) * gi * gi;
                *w -= self.lr * (*m / c1) / (libm::sqrt(*v / c2) + self.eps);
            }
            offset += p.data.len();
        }
    }
}

fn check_config(cfg: &TrainConfig) -> Result<(), TrainError> {
    if !(cfg.learning_rate > 0.0) {
        return Err(TrainError::InvalidConfig("learning_rate must be positive"));
    }
    if !(0.0..1.0).contains(&cfg.beta1) || !(0.0..1.0).contains(&cfg.beta2) {
        return Err(TrainError::InvalidConfig("betas must lie in [0, 1)"));
    }
    if !(cfg.epsilon > 0.0) {
        return Err(TrainError::InvalidConfig("epsilon must be positive"));
    }
    if cfg.batch_size == 0 {
        return Err(TrainError::InvalidConfig("batch_size must be positive"));
    }
    if cfg.patience == 0 {
        return Err(TrainError::InvalidConfig("patience must be positive"));
    }
    if !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) {
        return Err(TrainError::InvalidConfig("validation_fraction must lie in (0, 1)"));
    }
    Ok(())
}

fn check_labels(xs: &[&[f64]], labels: &[usize], classes: usize) -> Result<(), TrainError> {
    if xs.len() != labels.len() {
        return Err(TrainError::LabelCount { examples: xs.len(), labels: labels.len() });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(NnError::BadLabel { label, classes }.into());
    }
    Ok(())
}

/// Holds out `fraction` of every class (rounded down, at least one when the
/// class has two or more examples) for validation, in a seeded order.
pub(crate) fn stratified_holdout(labels: &[usize], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = seeded(seed);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let n = members.len();
        let mut n_val = libm::floor(fraction * n as f64 + 1e-9) as usize;
        if n_val == 0 && n >= 2 {
            n_val = 1;
        }
        val.extend_from_slice(&members[..n_val]);
        train.extend_from_slice(&members[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// Splits off a stratified validation set, then trains.
pub fn train_cnn(
    spec: NetworkSpec,
    xs: &[&[f64]],
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainedCnn, TrainError> {
    check_config(cfg)?;
    check_labels(xs, labels, spec.classes)?;
    let (train, val) = stratified_holdout(labels, cfg.validation_fraction, derive_seed(cfg.seed, "holdout"));
    let pick = |idx: &[usize]| -> (Vec<&[f64]>, Vec<usize>) { (idx.iter().map(|&i| xs[i]).collect(), idx.iter().map(|&i| labels[i]).collect()) };
    let (tx, ty) = pick(&train);
    let (vx, vy) = pick(&val);
    train_cnn_with_validation(spec, &tx, &ty, &vx, &vy, cfg)
}

fn evaluate(cnn: &Cnn, xs: &[&[f64]], labels: &[usize]) -> Result<(f64, f64), NnError> {
    let batch: Vec<(&[f64], usize)> = xs.iter().copied().zip(labels.iter().copied()).collect();
    let loss = cnn.loss(&batch, None)?;
    let correct = cnn.predict_many(xs)?.iter().zip(labels).filter(|((p, _), l)| p == *l).count();
    Ok((loss, correct as f64 / labels.len() as f64))
}

/// Minibatch Adam on `train`, early stopping on accuracy over `val`.
pub fn train_cnn_with_validation(
    spec: NetworkSpec,
    train_x: &[&[f64]],
    train_y: &[usize],
    val_x: &[&[f64]],
    val_y: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainedCnn, TrainError> {
    check_config(cfg)?;
    check_labels(train_x, train_y, spec.classes)?;
    check_labels(val_x, val_y, spec.classes)?;
    let first = train_y.first().ok_or(TrainError::EmptySplit)?;
    if train_y.iter().all(|l| l == first) {
        return Err(TrainError::DegenerateLabels);
    }
    if val_y.is_empty() {
        return Err(TrainError::EmptySplit);
    }

    let order_for = |epoch: usize| {
        let mut order: Vec<usize> = (0..train_x.len()).collect();
        order.shuffle(&mut seeded(derive_index(derive_seed(cfg.seed, "shuffle"), epoch as u64)));
        order
    };
    let calibration: Vec<&[f64]> = order_for(0).iter().take(cfg.batch_size).map(|&i| train_x[i]).collect();
    let mut cnn = Cnn::initialize(spec, derive_seed(cfg.seed, "init"), &calibration)?;
    let mut best = cnn.params.clone();
    let mut best_epoch = None;
    let mut best_acc = f64::NEG_INFINITY;
    let mut history = Vec::new();
    let mut adam = Adam::new(cnn.params.count(), cfg);
    let dropout_root = derive_seed(cfg.seed, "dropout");
    let mut draws = 0u64;
    let mut stale = 0;

    for epoch in 0..cfg.max_epochs {
        let order = order_for(epoch);
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], usize)> = chunk.iter().map(|&i| (train_x[i], train_y[i])).collect();
            let seeds: Vec<u64> = (0..chunk.len() as u64).map(|k| derive_index(dropout_root, draws + k)).collect();
            draws += chunk.len() as u64;
            let result = cnn.batch_gradients(&batch, Some(&seeds))?;
            loss_sum += result.loss * chunk.len() as f64;
            correct += result.correct;
            adam.step(&mut cnn.params, &result.grads);
        }
        let (val_loss, val_accuracy) = evaluate(&cnn, val_x, val_y)?;
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_x.len() as f64,
            train_accuracy: correct as f64 / train_x.len() as f64,
            val_loss,
            val_accuracy,
        });
        if val_accuracy > best_acc {
            best_acc = val_accuracy;
            best = cnn.params.clone();
            best_epoch = Some(epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    cnn.params = best;
    Ok(TrainedCnn { cnn, history, best_epoch })
}
