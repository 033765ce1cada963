use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{balance_classes, split_loso, split_subject_independent, ExperimentError, SplitPlan};
use crate::montage::Difficulty;
use crate::rng::{derive_index, derive_seed};

/// Something that can be trained on one index set and asked about another.
/// Indices refer to the dataset the implementor wraps.
pub trait Classifier {
    type Error;

    fn fit_predict(&mut self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<Difficulty>, Self::Error>;
}

/// How each repeat obtains its folds.
#[derive(Debug, Clone, Copy)]
pub enum Protocol<'a, S> {
    /// Balance, then a fresh stratified split every repeat.
    SubjectIndependent { train_fraction: f64 },
    /// Fixed leave-one-subject-out folds; repeats only reseed the model.
    LeaveOneSubjectOut { subjects: &'a [S] },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError<E> {
    Protocol(ExperimentError),
    Classifier(E),
    PredictionCount { expected: usize, actual: usize },
    NoRepeats,
}

impl<E: fmt::Display> fmt::Display for EvalError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Protocol(e) => write!(f, "{e}"),
            Self::Classifier(e) => write!(f, "{e}"),
            Self::PredictionCount { expected, actual } => {
                write!(f, "classifier returned {actual} predictions for {expected} test epochs")
            }
            Self::NoRepeats => write!(f, "at least one repeat is required"),
        }
    }
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for EvalError<E> {}

impl<E> From<ExperimentError> for EvalError<E> {
    fn from(e: ExperimentError) -> Self {
        Self::Protocol(e)
    }
}

/// Accuracy of every repeat plus the confusion matrix pooled over all of
/// them (rows true class, columns prediction).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub accuracies: Vec<f64>,
    pub confusion: [[u64; 3]; 3],
}

impl EvalOutcome {
    pub fn mean(&self) -> f64 {
        self.accuracies.iter().sum::<f64>() / self.accuracies.len() as f64
    }

    /// Population standard deviation over repeats.
    pub fn std(&self) -> f64 {
        let m = self.mean();
        libm::sqrt(self.accuracies.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / self.accuracies.len() as f64)
    }
}

fn plan_for<S: AsRef<str>>(
    labels: &[Difficulty],
    protocol: &Protocol<'_, S>,
    repeat_seed: u64,
    fixed: &Option<SplitPlan>,
) -> Result<SplitPlan, ExperimentError> {
    match protocol {
        Protocol::SubjectIndependent { train_fraction } => {
            let kept = balance_classes(labels, derive_seed(repeat_seed, "balance"))?;
            let sub: Vec<Difficulty> = kept.iter().map(|&i| labels[i]).collect();
            let mut plan = split_subject_independent(&sub, *train_fraction, derive_seed(repeat_seed, "split"))?;
            for fold in &mut plan.folds {
                fold.train.iter_mut().for_each(|i| *i = kept[*i]);
                fold.test.iter_mut().for_each(|i| *i = kept[*i]);
            }
            Ok(plan)
        }
        Protocol::LeaveOneSubjectOut { .. } => Ok(fixed.clone().expect("fixed plan")),
    }
}

/// Runs `n_repeats` rounds of training and testing under `protocol`.
/// A round's accuracy is pooled over its folds.
pub fn evaluate<C: Classifier, S: AsRef<str>>(
    classifier: &mut C,
    labels: &[Difficulty],
    protocol: Protocol<'_, S>,
    n_repeats: usize,
    seed: u64,
) -> Result<EvalOutcome, EvalError<C::Error>> {
    if n_repeats == 0 {
        return Err(EvalError::NoRepeats);
    }
    let fixed = match &protocol {
        Protocol::LeaveOneSubjectOut { subjects } => Some(split_loso(labels, subjects, derive_seed(seed, "loso"))?),
        Protocol::SubjectIndependent { .. } => None,
    };
    let mut confusion = [[0u64; 3]; 3];
    let mut accuracies = Vec::with_capacity(n_repeats);
    for r in 0..n_repeats {
        let repeat_seed = derive_index(seed, r as u64);
        let plan = plan_for(labels, &protocol, repeat_seed, &fixed)?;
        let (mut correct, mut total) = (0usize, 0usize);
        for (k, fold) in plan.folds.iter().enumerate() {
            let model_seed = derive_index(derive_seed(repeat_seed, "model"), k as u64);
            let predicted = classifier.fit_predict(&fold.train, &fold.test, model_seed).map_err(EvalError::Classifier)?;
            if predicted.len() != fold.test.len() {
                return Err(EvalError::PredictionCount { expected: fold.test.len(), actual: predicted.len() });
            }
            for (&i, p) in fold.test.iter().zip(&predicted) {
                confusion[labels[i].index()][p.index()] += 1;
                correct += usize::from(labels[i] == *p);
            }
            total += fold.test.len();
        }
        accuracies.push(if total == 0 { 0.0 } else { correct as f64 / total as f64 });
    }
    Ok(EvalOutcome { accuracies, confusion })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Scheme {
    SubjectIndependent,
    SubjectDependent,
    Expert,
    Novice,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::SubjectIndependent, Scheme::SubjectDependent, Scheme::Expert, Scheme::Novice];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SubjectIndependent => "subject-independent",
            Scheme::SubjectDependent => "subject-dependent",
            Scheme::Expert => "expert",
            Scheme::Novice => "novice",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ClassifierKind {
    Svm,
    Cnn,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Cnn => "CNN",
        }
    }
}

/// One row of the significant-features table.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectedFeature {
    /// Electrode pair such as `Pz-O2`.
    pub pair: String,
    /// Band range such as `8-10 Hz`.
    pub band: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub scheme: Scheme,
    pub classifier: ClassifierKind,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub accuracies: Vec<f64>,
    pub confusion: [[u64; 3]; 3],
    pub selected_features: Vec<SelectedFeature>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("report covers no test epochs")]
    ZeroTestSet,
    #[error("accuracy {0} outside [0, 1]")]
    AccuracyRange(f64),
}

impl EvalReport {
    pub fn new(
        scheme: Scheme,
        classifier: ClassifierKind,
        outcome: &EvalOutcome,
        selected_features: Vec<SelectedFeature>,
    ) -> Self {
        Self {
            scheme,
            classifier,
            accuracy_mean: outcome.mean(),
            accuracy_std: outcome.std(),
            accuracies: outcome.accuracies.clone(),
            confusion: outcome.confusion,
            selected_features,
        }
    }

    pub fn test_count(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.test_count() == 0 {
            return Err(ReportError::ZeroTestSet);
        }
        for a in [self.accuracy_mean, self.accuracy_std].into_iter().chain(self.accuracies.iter().copied()) {
            if !(0.0..=1.0).contains(&a) {
                return Err(ReportError::AccuracyRange(a));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use alloc::format;
    use alloc::vec;
    use rand::Rng as _;

    struct Oracle<'a>(&'a [Difficulty]);

    impl Classifier for Oracle<'_> {
        type Error = ();
        fn fit_predict(&mut self, _: &[usize], test: &[usize], _: u64) -> Result<Vec<Difficulty>, ()> {
            Ok(test.iter().map(|&i| self.0[i]).collect())
        }
    }

    struct Coin;

    impl Classifier for Coin {
        type Error = ();
        fn fit_predict(&mut self, _: &[usize], test: &[usize], seed: u64) -> Result<Vec<Difficulty>, ()> {
            let mut rng = seeded(seed);
            Ok(test.iter().map(|_| Difficulty::ALL[rng.random_range(0..3)]).collect())
        }
    }

    fn labels(n: usize) -> Vec<Difficulty> {
        (0..n).map(|i| Difficulty::ALL[i % 3]).collect()
    }

    #[test]
    fn perfect_classifier_scores_one() {
        let l = labels(90);
        let subjects: Vec<String> = (0..90).map(|i| format!("S{}", i / 15)).collect();
        let out = evaluate(&mut Oracle(&l), &l, Protocol::<&str>::SubjectIndependent { train_fraction: 0.66 }, 5, 1).unwrap();
        assert_eq!((out.mean(), out.std()), (1.0, 0.0));
        let out = evaluate(&mut Oracle(&l), &l, Protocol::LeaveOneSubjectOut { subjects: &subjects }, 2, 1).unwrap();
        assert_eq!((out.mean(), out.std()), (1.0, 0.0));
        assert_eq!(out.confusion.iter().flatten().sum::<u64>(), 180);
    }

    #[test]
    fn random_classifier_is_at_chance() {
        let l = labels(3000);
        let out = evaluate(&mut Coin, &l, Protocol::<&str>::SubjectIndependent { train_fraction: 0.66 }, 10, 3).unwrap();
        assert!((out.mean() - 1.0 / 3.0).abs() < 0.05, "{}", out.mean());
        let per_repeat = 3 * (1000 - 660);
        let total: u64 = out.confusion.iter().flatten().sum();
        assert_eq!(total, 10 * per_repeat as u64);
    }

    #[test]
    fn empty_report_is_invalid() {
        let report = EvalReport::new(Scheme::Expert, ClassifierKind::Svm, &EvalOutcome { accuracies: vec![0.0], confusion: [[0; 3]; 3] }, vec![]);
        assert_eq!(report.validate(), Err(ReportError::ZeroTestSet));
    }
}
