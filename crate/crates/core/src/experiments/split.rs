use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{balance_classes, ExperimentError};
use crate::montage::Difficulty;
use crate::rng::{derive_index, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SplitScheme {
    SubjectIndependent,
    SubjectDependent,
    ExpertiseGroup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// The held-out subject of a leave-one-subject-out fold.
    pub test_subject: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitPlan {
    pub scheme: SplitScheme,
    pub folds: Vec<Fold>,
}

impl SplitPlan {
    pub fn is_disjoint(&self) -> bool {
        self.folds.iter().all(|f| f.train.iter().all(|i| f.test.binary_search(i).is_err()))
    }
}

/// Stratified random split: each class sends ⌊train_fraction · n_c⌋ of its
/// epochs to training and the rest to test.
pub fn split_subject_independent(
    labels: &[Difficulty],
    train_fraction: f64,
    seed: u64,
) -> Result<SplitPlan, ExperimentError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ExperimentError::BadTrainFraction(train_fraction));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, &d) in Difficulty::ALL.iter().enumerate() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == d).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(ExperimentError::TooFewEpochs(d));
        }
        members.shuffle(&mut seeded(derive_index(seed, class as u64)));
        let n_train = libm::floor(train_fraction * members.len() as f64 + 1e-9) as usize;
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    if train.is_empty() && test.is_empty() {
        return Err(ExperimentError::EmptyClass);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { scheme: SplitScheme::SubjectIndependent, folds: alloc::vec![Fold { train, test, test_subject: None }] })
}

/// One fold per subject, in order of first appearance. The training side of
/// each fold is class-balanced; the test side keeps every epoch.
pub fn split_loso<S: AsRef<str>>(labels: &[Difficulty], subjects: &[S], seed: u64) -> Result<SplitPlan, ExperimentError> {
    if labels.len() != subjects.len() {
        return Err(ExperimentError::SubjectCount { labels: labels.len(), subjects: subjects.len() });
    }
    let mut order: Vec<&str> = Vec::new();
    for s in subjects {
        if !order.contains(&s.as_ref()) {
            order.push(s.as_ref());
        }
    }
    if order.len() < 2 {
        return Err(ExperimentError::SingleSubject);
    }
    let mut folds = Vec::with_capacity(order.len());
    for (k, subject) in order.iter().enumerate() {
        let (test, rest): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| subjects[i].as_ref() == *subject);
        let rest_labels: Vec<Difficulty> = rest.iter().map(|&i| labels[i]).collect();
        let train = balance_classes(&rest_labels, derive_index(seed, k as u64))?.into_iter().map(|j| rest[j]).collect();
        folds.push(Fold { train, test, test_subject: Some(subject.to_string()) });
    }
    Ok(SplitPlan { scheme: SplitScheme::SubjectDependent, folds })
}
