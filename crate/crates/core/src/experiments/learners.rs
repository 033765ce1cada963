use alloc::vec;
use alloc::vec::Vec;

use super::Classifier;
use crate::dsp::Epoch;
use crate::matrix::Matrix;
use crate::montage::{Channel, Difficulty};
use crate::nn::{train_cnn, NetworkSpec, TrainConfig, TrainError};
use crate::selection::{rfe_stable, RfeConfig, RfeError};
use crate::svm::{train_multiclass, SvmConfig, SvmError};

/// Which feature columns the SVM sees.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSubset {
    All,
    /// A selection made beforehand, e.g. by a separate selection stage.
    Fixed(Vec<usize>),
    /// Stable RFE rerun on every training set; the seed comes from the fold.
    PerFold(RfeConfig),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmLearnerError {
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Selection(#[from] RfeError),
}

/// One-vs-rest SVM over rows of a feature matrix.
#[derive(Debug, Clone)]
pub struct SvmLearner<'a> {
    pub features: &'a Matrix,
    pub labels: &'a [Difficulty],
    pub subset: FeatureSubset,
    pub config: SvmConfig,
    /// Survival counts summed over every per-fold selection so far.
    pub selection_counts: Vec<usize>,
}

impl<'a> SvmLearner<'a> {
    pub fn new(features: &'a Matrix, labels: &'a [Difficulty], subset: FeatureSubset, config: SvmConfig) -> Self {
        Self { features, labels, subset, config, selection_counts: vec![0; features.n_cols()] }
    }
}

impl Classifier for SvmLearner<'_> {
    type Error = SvmLearnerError;

    fn fit_predict(&mut self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<Difficulty>, SvmLearnerError> {
        let labels: Vec<Difficulty> = train.iter().map(|&i| self.labels[i]).collect();
        let train_rows = self.features.select_rows(train);
        let columns = match &self.subset {
            FeatureSubset::All => None,
            FeatureSubset::Fixed(cols) => Some(cols.clone()),
            FeatureSubset::PerFold(cfg) => {
                let cfg = RfeConfig { seed, ..*cfg };
                let result = rfe_stable(&train_rows, &labels, &cfg)?;
                for &f in &result.selected {
                    self.selection_counts[f] += 1;
                }
                Some(result.selected)
            }
        };
        let pick = |m: Matrix| match &columns {
            Some(cols) => m.select_cols(cols),
            None => m,
        };
        let model = train_multiclass(&pick(train_rows), &labels, &self.config)?;
        let test_rows = pick(self.features.select_rows(test));
        Ok(test_rows.rows().map(|row| model.predict(row).map(|(d, _)| d)).collect::<Result<_, _>>()?)
    }
}

/// The convolutional network over raw epochs. Each fit holds out part of
/// its training indices for early stopping and reseeds from the fold seed.
#[derive(Debug, Clone)]
pub struct CnnLearner<'a> {
    pub inputs: &'a [Vec<f64>],
    pub labels: &'a [Difficulty],
    pub spec: NetworkSpec,
    pub config: TrainConfig,
}

impl Classifier for CnnLearner<'_> {
    type Error = TrainError;

    fn fit_predict(&mut self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<Difficulty>, TrainError> {
        let xs: Vec<&[f64]> = train.iter().map(|&i| self.inputs[i].as_slice()).collect();
        let ys: Vec<usize> = train.iter().map(|&i| self.labels[i].index()).collect();
        let cfg = TrainConfig { seed, ..self.config };
        let trained = train_cnn(self.spec, &xs, &ys, &cfg)?;
        let tx: Vec<&[f64]> = test.iter().map(|&i| self.inputs[i].as_slice()).collect();
        Ok(trained
            .cnn
            .predict_many(&tx)?
            .into_iter()
            .map(|(p, _)| Difficulty::from_index(p).expect("three classes"))
            .collect())
    }
}

/// Flattens an epoch into network input, channels in `order`.
pub fn cnn_input(epoch: &Epoch, order: &[Channel]) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(order.len() * epoch.channel(0).len());
    for &c in order {
        out.extend(epoch.channel(epoch.channel_index(c)?).iter().map(|&v| f64::from(v)));
    }
    Some(out)
}
