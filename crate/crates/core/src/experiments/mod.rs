//! Evaluation protocols and the synthetic cohort generator: class
//! balancing, subject-independent and leave-one-subject-out splits, the
//! expert/novice partition, repeated evaluation with mean ± std accuracy, and
//! recordings with planted coherence.

mod balance;
mod evaluate;
mod expertise;
mod learners;
mod split;
mod synth;

pub use balance::balance_classes;
pub use evaluate::{
    evaluate, Classifier, ClassifierKind, EvalError, EvalOutcome, EvalReport, Protocol, ReportError, Scheme,
    SelectedFeature,
};
pub use learners::{cnn_input, CnnLearner, FeatureSubset, SvmLearner, SvmLearnerError};
pub use expertise::{label_expertise, ExpertisePartition, ExpertiseRule, SubjectScores};
pub use split::{split_loso, split_subject_independent, Fold, SplitPlan, SplitScheme};
pub use synth::{synth_generate, PlantTarget, SynthConfig, SynthError};

use crate::montage::Difficulty;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("no epochs to balance")]
    EmptyClass,
    #[error("class {0:?} has fewer than two epochs")]
    TooFewEpochs(Difficulty),
    #[error("leave-one-subject-out needs at least two subjects")]
    SingleSubject,
    #[error("{labels} labels but {subjects} subject ids")]
    SubjectCount { labels: usize, subjects: usize },
    #[error("train fraction {0} must lie in (0, 1)")]
    BadTrainFraction(f64),
}
