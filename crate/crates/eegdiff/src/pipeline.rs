//! The pipeline stages behind the command line. Every stage reads its inputs
//! from the configured directories, writes only into the output directory,
//! and takes its randomness from the global seed hashed with the stage name.

use std::fmt;
use std::path::PathBuf;

use eegdiff_core::dsp::{bandpass_filter, epoch_signal, reject_artifacts};
use eegdiff_core::experiments::{
    balance_classes, cnn_input, evaluate, label_expertise, synth_generate, Classifier, ClassifierKind, CnnLearner,
    EvalReport, ExpertiseRule, FeatureSubset, Protocol, Scheme, SelectedFeature, SubjectScores, SvmLearner,
};
use eegdiff_core::matrix::Matrix;
use eegdiff_core::nn::train_cnn;
use eegdiff_core::rng::derive_seed;
use eegdiff_core::selection::{rfe_stable, tally, RfeConfig};
use eegdiff_core::spectral::FeatureExtractor;
use eegdiff_core::svm::train_multiclass;
use eegdiff_core::{Channel, Difficulty};

use crate::config::PipelineConfig;
use crate::epochs::EpochStore;
use crate::features::FeatureTable;
use crate::models::{render_history, CnnCheckpoint, SvmCheckpoint};
use crate::recording::{load_dataset, save_dataset, RecordingIoError};
use crate::report::{write_report, write_selection, SelectionFile};
use crate::ArtifactError;

pub const EPOCHS_FILE: &str = "epochs.bin";
pub const SUBJECTS_FILE: &str = "subjects.json";
pub const FEATURES_FILE: &str = "features.bin";
pub const SELECTION_FILE: &str = "selection.txt";
pub const SVM_FILE: &str = "svm_model.json";
pub const CNN_FILE: &str = "cnn_model.bin";
pub const HISTORY_FILE: &str = "cnn_history.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Svm,
    Cnn,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Svm => "svm",
            Model::Cnn => "cnn",
        }
    }

    pub fn checkpoint(self) -> &'static str {
        match self {
            Model::Svm => SVM_FILE,
            Model::Cnn => CNN_FILE,
        }
    }
}

pub fn scheme_slug(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::SubjectIndependent => "independent",
        Scheme::SubjectDependent => "loso",
        Scheme::Expert => "expert",
        Scheme::Novice => "novice",
    }
}

pub fn report_name(scheme: Scheme, model: Model) -> String {
    format!("report_{}_{}.txt", scheme_slug(scheme), model.name())
}

/// Validation failures mean the inputs or configuration are wrong; runtime
/// failures happened while computing or writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Validation,
    Runtime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageError {
    pub stage: &'static str,
    pub kind: FailureKind,
    pub message: String,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for StageError {}

impl StageError {
    fn validation(stage: &'static str, message: impl fmt::Display) -> Self {
        Self { stage, kind: FailureKind::Validation, message: message.to_string() }
    }

    fn runtime(stage: &'static str, message: impl fmt::Display) -> Self {
        Self { stage, kind: FailureKind::Runtime, message: message.to_string() }
    }

    fn artifact(stage: &'static str, e: ArtifactError) -> Self {
        match e {
            ArtifactError::Io(_) => Self::runtime(stage, e),
            _ => Self::validation(stage, e),
        }
    }

    fn recording(stage: &'static str, e: RecordingIoError) -> Self {
        match e {
            RecordingIoError::Io(_) => Self::runtime(stage, e),
            _ => Self::validation(stage, e),
        }
    }
}

type StageResult<T> = Result<T, StageError>;

fn out(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn ensure_output_dir(stage: &'static str, cfg: &PipelineConfig) -> StageResult<()> {
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| StageError::runtime(stage, format!("cannot create {}: {e}", cfg.output_dir.display())))
}

/// Writes the synthetic cohort into the dataset directory.
pub fn cmd_synth(cfg: &PipelineConfig) -> StageResult<Vec<PathBuf>> {
    const STAGE: &str = "synth";
    let synth = eegdiff_core::experiments::SynthConfig { seed: derive_seed(cfg.seed, STAGE), ..cfg.synth.clone() };
    let recordings = synth_generate(&synth).map_err(|e| StageError::validation(STAGE, e))?;
    save_dataset(&recordings, &cfg.dataset_dir).map_err(|e| StageError::recording(STAGE, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessSummary {
    pub kept: usize,
    pub dropped: usize,
}

/// Filter, epoch and artifact-reject every recording of the dataset.
pub fn cmd_preprocess(cfg: &PipelineConfig) -> StageResult<PreprocessSummary> {
    const STAGE: &str = "preprocess";
    let recordings = load_dataset(&cfg.dataset_dir).map_err(|e| StageError::recording(STAGE, e))?;
    let channels = recordings[0].channels.clone();
    let mut epochs = Vec::new();
    let mut dropped = 0;
    let mut subjects = Vec::new();
    for r in &recordings {
        if r.channels != channels {
            return Err(StageError::validation(
                STAGE,
                format!("subject {} has a different channel layout from {}", r.subject_id, recordings[0].subject_id),
            ));
        }
        let filtered = bandpass_filter(r, &cfg.filter)
            .map_err(|e| StageError::validation(STAGE, format!("subject {}: {e}", r.subject_id)))?;
        let cut = epoch_signal(&filtered).map_err(|e| StageError::validation(STAGE, format!("subject {}: {e}", r.subject_id)))?;
        let (kept, n) = reject_artifacts(cut, cfg.reject_uv);
        dropped += n;
        epochs.extend(kept);
        subjects.push(SubjectScores::from_recording(r));
    }
    ensure_output_dir(STAGE, cfg)?;
    let store = EpochStore { channels, epochs, subjects };
    store.save(&out(cfg, EPOCHS_FILE)).map_err(|e| StageError::artifact(STAGE, e))?;
    crate::write_json(&out(cfg, SUBJECTS_FILE), &store.subjects).map_err(|e| StageError::runtime(STAGE, e))?;
    Ok(PreprocessSummary { kept: store.epochs.len(), dropped })
}

fn extractor(stage: &'static str, cfg: &PipelineConfig) -> StageResult<FeatureExtractor> {
    FeatureExtractor::new(&cfg.electrodes, &cfg.bands, cfg.welch).map_err(|e| StageError::validation(stage, e))
}

/// Coherence features of every stored epoch.
pub fn cmd_features(cfg: &PipelineConfig) -> StageResult<FeatureTable> {
    const STAGE: &str = "features";
    let store = EpochStore::load(&out(cfg, EPOCHS_FILE)).map_err(|e| StageError::artifact(STAGE, e))?;
    let ex = extractor(STAGE, cfg)?;
    let rows = store
        .epochs
        .iter()
        .map(|e| ex.extract(e))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| StageError::validation(STAGE, e))?;
    let features = Matrix::from_rows(&rows).unwrap_or_else(|| Matrix::zeros(0, ex.layout().len()));
    let table = FeatureTable {
        names: ex.layout().names(),
        features,
        labels: store.labels(),
        subjects: store.subject_ids().into_iter().map(String::from).collect(),
    };
    table.save(&out(cfg, FEATURES_FILE)).map_err(|e| StageError::artifact(STAGE, e))?;
    Ok(table)
}

fn band_label(cfg: &PipelineConfig, band: &str) -> String {
    cfg.bands.iter().find(|b| b.name == band).map_or_else(|| band.to_string(), |b| b.range_label())
}

/// `Pz-O2:low_alpha` becomes `("Pz-O2", "8-10 Hz")`.
fn table_row(cfg: &PipelineConfig, name: &str, count: usize) -> SelectedFeature {
    let (pair, band) = name.split_once(':').unwrap_or((name, ""));
    SelectedFeature { pair: pair.into(), band: band_label(cfg, band), count }
}

fn load_features(stage: &'static str, cfg: &PipelineConfig) -> StageResult<FeatureTable> {
    FeatureTable::load(&out(cfg, FEATURES_FILE)).map_err(|e| StageError::artifact(stage, e))
}

fn rfe_config(cfg: &PipelineConfig, seed: u64) -> RfeConfig {
    RfeConfig { seed, ..cfg.rfe }
}

/// Stable RFE over the whole feature matrix.
pub fn cmd_select(cfg: &PipelineConfig) -> StageResult<SelectionFile> {
    const STAGE: &str = "select";
    let table = load_features(STAGE, cfg)?;
    let result = rfe_stable(&table.features, &table.labels, &rfe_config(cfg, derive_seed(cfg.seed, STAGE)))
        .map_err(|e| StageError::validation(STAGE, e))?;
    let count = |f: usize| result.ranked.iter().find(|r| r.0 == f).map_or(0, |r| r.1);
    let sel = SelectionFile {
        n_repeats: cfg.rfe.n_repeats,
        selected: result.selected.clone(),
        names: result.selected.iter().map(|&f| table.names[f].clone()).collect(),
        table: result.selected.iter().map(|&f| table_row(cfg, &table.names[f], count(f))).collect(),
        ranked: result.ranked.iter().map(|&(f, c)| (table.names[f].clone(), c)).collect(),
    };
    write_selection(&sel, &out(cfg, SELECTION_FILE)).map_err(|e| StageError::runtime(STAGE, e))?;
    Ok(sel)
}

/// Trains the chosen model on the class-balanced full dataset.
pub fn cmd_train(cfg: &PipelineConfig, model: Model) -> StageResult<PathBuf> {
    const STAGE: &str = "train";
    let seed = derive_seed(cfg.seed, STAGE);
    match model {
        Model::Svm => {
            let table = load_features(STAGE, cfg)?;
            let sel = crate::report::read_selection(&out(cfg, SELECTION_FILE)).map_err(|e| StageError::artifact(STAGE, e))?;
            if let Some(&bad) = sel.selected.iter().find(|&&f| f >= table.names.len()) {
                return Err(StageError::validation(STAGE, format!("selected feature {bad} is not in {FEATURES_FILE}")));
            }
            let keep = balance_classes(&table.labels, seed).map_err(|e| StageError::validation(STAGE, e))?;
            let x = table.features.select_rows(&keep).select_cols(&sel.selected);
            let y: Vec<Difficulty> = keep.iter().map(|&i| table.labels[i]).collect();
            let fitted = train_multiclass(&x, &y, &cfg.svm).map_err(|e| StageError::runtime(STAGE, e))?;
            let ckpt = SvmCheckpoint { columns: sel.selected, names: sel.names, config: cfg.svm, model: fitted };
            let path = out(cfg, SVM_FILE);
            ckpt.save(&path).map_err(|e| StageError::runtime(STAGE, e))?;
            Ok(path)
        }
        Model::Cnn => {
            let store = EpochStore::load(&out(cfg, EPOCHS_FILE)).map_err(|e| StageError::artifact(STAGE, e))?;
            let inputs = network_inputs(STAGE, &store)?;
            let labels = store.labels();
            let keep = balance_classes(&labels, seed).map_err(|e| StageError::validation(STAGE, e))?;
            let xs: Vec<&[f64]> = keep.iter().map(|&i| inputs[i].as_slice()).collect();
            let ys: Vec<usize> = keep.iter().map(|&i| labels[i].index()).collect();
            let train = eegdiff_core::nn::TrainConfig { seed, ..cfg.train };
            let trained = train_cnn(cfg.network, &xs, &ys, &train).map_err(|e| StageError::runtime(STAGE, e))?;
            let ckpt = CnnCheckpoint { cnn: trained.cnn, train: cfg.train, best_epoch: trained.best_epoch };
            let path = out(cfg, CNN_FILE);
            ckpt.save(&path).map_err(|e| StageError::runtime(STAGE, e))?;
            crate::write_file(&out(cfg, HISTORY_FILE), render_history(&trained.history).as_bytes())
                .map_err(|e| StageError::runtime(STAGE, e))?;
            Ok(path)
        }
    }
}

/// Network inputs in montage order, whatever order the recordings used.
fn network_inputs(stage: &'static str, store: &EpochStore) -> StageResult<Vec<Vec<f64>>> {
    store
        .epochs
        .iter()
        .map(|e| {
            cnn_input(e, &Channel::ALL)
                .ok_or_else(|| StageError::validation(stage, "the network needs all 20 montage channels"))
        })
        .collect()
}

/// Restricts a classifier to a subset of its rows.
struct Restricted<'a, C> {
    inner: &'a mut C,
    rows: &'a [usize],
}

impl<C: Classifier> Classifier for Restricted<'_, C> {
    type Error = C::Error;

    fn fit_predict(&mut self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<Difficulty>, C::Error> {
        let map = |ix: &[usize]| ix.iter().map(|&i| self.rows[i]).collect::<Vec<_>>();
        let (train, test) = (map(train), map(test));
        self.inner.fit_predict(&train, &test, seed)
    }
}

fn expertise_rows(stage: &'static str, cfg: &PipelineConfig, subjects: &[String], scheme: Scheme) -> StageResult<Vec<usize>> {
    let path = out(cfg, SUBJECTS_FILE);
    let cohort: Vec<SubjectScores> = crate::read_json(&path).map_err(|e| StageError::artifact(stage, e))?;
    let rule = cfg.evaluation.expertise.unwrap_or_else(|| ExpertiseRule::median(&cohort));
    let partition = label_expertise(&cohort, &rule);
    let group = if scheme == Scheme::Expert { &partition.experts } else { &partition.novices };
    if group.is_empty() {
        return Err(StageError::validation(stage, format!("the cohort has no {} subjects", scheme.name())));
    }
    Ok((0..subjects.len()).filter(|&i| group.contains(&subjects[i])).collect())
}

fn run_protocol<C: Classifier>(
    stage: &'static str,
    cfg: &PipelineConfig,
    scheme: Scheme,
    classifier: &mut C,
    labels: &[Difficulty],
    subjects: &[String],
) -> StageResult<eegdiff_core::experiments::EvalOutcome>
where
    C::Error: fmt::Display,
{
    let seed = derive_seed(cfg.seed, "evaluate");
    let repeats = cfg.evaluation.n_repeats;
    let independent = Protocol::<&str>::SubjectIndependent { train_fraction: cfg.evaluation.train_fraction };
    let fail = |e: eegdiff_core::experiments::EvalError<C::Error>| match e {
        eegdiff_core::experiments::EvalError::Classifier(e) => StageError::runtime(stage, e),
        e => StageError::validation(stage, e),
    };
    match scheme {
        Scheme::SubjectIndependent => evaluate(classifier, labels, independent, repeats, seed).map_err(fail),
        Scheme::SubjectDependent => {
            evaluate(classifier, labels, Protocol::LeaveOneSubjectOut { subjects }, repeats, seed).map_err(fail)
        }
        Scheme::Expert | Scheme::Novice => {
            let rows = expertise_rows(stage, cfg, subjects, scheme)?;
            let sub: Vec<Difficulty> = rows.iter().map(|&i| labels[i]).collect();
            let mut restricted = Restricted { inner: classifier, rows: &rows };
            evaluate(&mut restricted, &sub, independent, repeats, derive_seed(seed, scheme.name())).map_err(fail)
        }
    }
}

/// Repeated evaluation under `scheme`; writes the text and JSON reports.
pub fn cmd_evaluate(cfg: &PipelineConfig, scheme: Scheme, model: Model) -> StageResult<(PathBuf, EvalReport)> {
    const STAGE: &str = "evaluate";
    let ckpt_path = out(cfg, model.checkpoint());
    if !ckpt_path.is_file() {
        return Err(StageError::validation(
            STAGE,
            format!("missing checkpoint {} (run `train {}` first)", ckpt_path.display(), model.name()),
        ));
    }
    let report = match model {
        Model::Svm => {
            let ckpt = SvmCheckpoint::load(&ckpt_path).map_err(|e| StageError::artifact(STAGE, e))?;
            let table = load_features(STAGE, cfg)?;
            if let Some(&bad) = ckpt.columns.iter().find(|&&f| f >= table.names.len()) {
                return Err(StageError::validation(STAGE, format!("checkpoint column {bad} is not in {FEATURES_FILE}")));
            }
            let subset = if cfg.evaluation.per_fold_selection {
                FeatureSubset::PerFold(cfg.rfe)
            } else {
                FeatureSubset::Fixed(ckpt.columns.clone())
            };
            let mut learner = SvmLearner::new(&table.features, &table.labels, subset, ckpt.config);
            let outcome = run_protocol(STAGE, cfg, scheme, &mut learner, &table.labels, &table.subjects)?;
            let features = if cfg.evaluation.per_fold_selection {
                let picked = tally(&learner.selection_counts, cfg.rfe.target_k);
                picked
                    .selected
                    .iter()
                    .map(|&f| table_row(cfg, &table.names[f], learner.selection_counts[f]))
                    .collect()
            } else {
                let sel = crate::report::read_selection(&out(cfg, SELECTION_FILE)).ok();
                ckpt.columns
                    .iter()
                    .map(|&f| {
                        let name = &table.names[f];
                        let count = sel
                            .as_ref()
                            .and_then(|s| s.ranked.iter().find(|r| &r.0 == name))
                            .map_or(0, |r| r.1);
                        table_row(cfg, name, count)
                    })
                    .collect()
            };
            EvalReport::new(scheme, ClassifierKind::Svm, &outcome, features)
        }
        Model::Cnn => {
            let ckpt = CnnCheckpoint::load(&ckpt_path).map_err(|e| StageError::artifact(STAGE, e))?;
            let store = EpochStore::load(&out(cfg, EPOCHS_FILE)).map_err(|e| StageError::artifact(STAGE, e))?;
            let inputs = network_inputs(STAGE, &store)?;
            let labels = store.labels();
            let subjects: Vec<String> = store.subject_ids().into_iter().map(String::from).collect();
            let mut learner = CnnLearner { inputs: &inputs, labels: &labels, spec: ckpt.cnn.spec, config: ckpt.train };
            let outcome = run_protocol(STAGE, cfg, scheme, &mut learner, &labels, &subjects)?;
            EvalReport::new(scheme, ClassifierKind::Cnn, &outcome, Vec::new())
        }
    };
    let path = out(cfg, &report_name(scheme, model));
    write_report(&report, &path).map_err(|e| match e {
        crate::report::ReportIoError::Invalid(e) => StageError::validation(STAGE, e),
        e => StageError::runtime(STAGE, e),
    })?;
    Ok((path, report))
}

pub fn checkpoint_path(cfg: &PipelineConfig, model: Model) -> PathBuf {
    out(cfg, model.checkpoint())
}

pub fn output_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    out(cfg, name)
}
