//! The pipeline configuration file and its command-line overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use eegdiff_core::dsp::{BandpassFilter, FilterSpec, EPOCH_LEN, EPOCH_SAMPLE_RATE};
use eegdiff_core::experiments::{ExpertiseRule, SynthConfig};
use eegdiff_core::nn::{NetworkSpec, TrainConfig};
use eegdiff_core::selection::RfeConfig;
use eegdiff_core::spectral::{BandSpec, FeatureExtractor, WelchSpec};
use eegdiff_core::svm::{KernelKind, SvmConfig};
use eegdiff_core::Channel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub n_repeats: usize,
    /// Share of each class used for training in subject-independent splits.
    pub train_fraction: f64,
    /// Rerun stable RFE inside every training fold instead of reusing the
    /// selection stage's features.
    pub per_fold_selection: bool,
    /// Fixed expert thresholds; cohort medians when absent.
    pub expertise: Option<ExpertiseRule>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { n_repeats: 10, train_fraction: 2.0 / 3.0, per_fold_selection: false, expertise: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Where `synth` writes recordings and `preprocess` reads them.
    pub dataset_dir: PathBuf,
    /// Destination of every other artifact.
    pub output_dir: PathBuf,
    /// The only seed; each stage derives its own from it.
    pub seed: u64,
    pub synth: SynthConfig,
    pub filter: FilterSpec,
    /// Peak-to-peak rejection threshold, µV.
    pub reject_uv: f32,
    pub welch: WelchSpec,
    pub bands: Vec<BandSpec>,
    /// Electrodes whose pairwise coherence forms the SVM features.
    pub electrodes: Vec<Channel>,
    pub rfe: RfeConfig,
    pub svm: SvmConfig,
    pub network: NetworkSpec,
    pub train: TrainConfig,
    pub evaluation: EvaluationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset_dir: "data".into(),
            output_dir: "out".into(),
            seed: 0,
            synth: SynthConfig::default(),
            filter: FilterSpec::default(),
            reject_uv: 200.0,
            welch: WelchSpec::default(),
            bands: BandSpec::defaults(),
            electrodes: Channel::COHERENCE_SUBSET.to_vec(),
            rfe: RfeConfig::default(),
            svm: SvmConfig::default(),
            network: NetworkSpec::default(),
            train: TrainConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        serde_json::from_slice(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        for (stage, seed) in [("synth", self.synth.seed), ("rfe", self.rfe.seed), ("train", self.train.seed)] {
            if seed != 0 {
                return bad(format!("{stage}.seed is derived from the global seed; set `seed` instead"));
            }
        }
        if !(self.reject_uv > 0.0) {
            return bad(format!("reject_uv must be positive, got {}", self.reject_uv));
        }
        BandpassFilter::design(&self.filter, f64::from(EPOCH_SAMPLE_RATE)).map_err(|e| ConfigError::Invalid(format!("filter: {e}")))?;
        self.welch.check(EPOCH_LEN).map_err(|e| ConfigError::Invalid(format!("welch: {e}")))?;
        FeatureExtractor::new(&self.electrodes, &self.bands, self.welch)
            .map_err(|e| ConfigError::Invalid(format!("features: {e}")))?;
        self.network.validate().map_err(|e| ConfigError::Invalid(format!("network: {e}")))?;
        if self.network.channels != Channel::ALL.len() || self.network.samples != EPOCH_LEN {
            return bad(format!(
                "network input must be {} x {} (channels x samples)",
                Channel::ALL.len(),
                EPOCH_LEN
            ));
        }
        let e = &self.evaluation;
        if e.n_repeats == 0 {
            return bad("evaluation.n_repeats must be at least 1".into());
        }
        if !(e.train_fraction > 0.0 && e.train_fraction < 1.0) {
            return bad(format!("evaluation.train_fraction must lie in (0, 1), got {}", e.train_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelArg {
    Linear,
    Rbf,
}

/// Flags that replace single config values; applied after the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Pipeline config file (JSON); built-in defaults when omitted
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed every stage derives its randomness from
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory of recording manifests and sample files
    #[arg(long, global = true)]
    pub dataset_dir: Option<PathBuf>,
    /// Directory for every derived artifact and report
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Synthetic cohort size
    #[arg(long, global = true)]
    pub n_subjects: Option<usize>,
    /// Synthetic subjects given expert-level scores
    #[arg(long, global = true)]
    pub n_experts: Option<usize>,
    /// Synthetic epochs per class per subject
    #[arg(long, global = true)]
    pub epochs_per_class: Option<usize>,
    /// Planted component amplitude over the noise level
    #[arg(long, global = true)]
    pub snr: Option<f64>,
    /// Peak-to-peak artifact threshold in µV
    #[arg(long, global = true)]
    pub reject_uv: Option<f32>,
    /// Number of features RFE keeps
    #[arg(long, global = true)]
    pub target_k: Option<usize>,
    /// Bootstrap repeats of RFE
    #[arg(long, global = true)]
    pub rfe_repeats: Option<usize>,
    /// SVM box constraint
    #[arg(long, global = true)]
    pub svm_c: Option<f64>,
    /// SVM kernel
    #[arg(long, global = true, value_enum)]
    pub kernel: Option<KernelArg>,
    /// Network training: maximum epochs
    #[arg(long, global = true)]
    pub max_epochs: Option<usize>,
    /// Network training: minibatch size
    #[arg(long, global = true)]
    pub batch_size: Option<usize>,
    /// Network training: Adam learning rate
    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    /// Network training: early-stopping patience in epochs
    #[arg(long, global = true)]
    pub patience: Option<usize>,
    /// Evaluation repeats
    #[arg(long, global = true)]
    pub n_repeats: Option<usize>,
    /// Training share of subject-independent splits
    #[arg(long, global = true)]
    pub train_fraction: Option<f64>,
    /// Rerun feature selection inside each training fold
    #[arg(long, global = true)]
    pub per_fold_selection: bool,
}

impl Overrides {
    pub fn resolve(&self) -> Result<PipelineConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+;)*) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$($field).+ = v; })*
            };
        }
        set! {
            seed => seed;
            dataset_dir => dataset_dir;
            output_dir => output_dir;
            n_subjects => synth.n_subjects;
            epochs_per_class => synth.epochs_per_class_per_subject;
            snr => synth.snr;
            reject_uv => reject_uv;
            target_k => rfe.target_k;
            rfe_repeats => rfe.n_repeats;
            svm_c => svm.c;
            max_epochs => train.max_epochs;
            batch_size => train.batch_size;
            learning_rate => train.learning_rate;
            patience => train.patience;
            n_repeats => evaluation.n_repeats;
            train_fraction => evaluation.train_fraction;
        }
        if let Some(n) = self.n_experts {
            cfg.synth.n_experts = Some(n);
        }
        if let Some(k) = self.kernel {
            cfg.svm.kernel.kind = match k {
                KernelArg::Linear => KernelKind::Linear,
                KernelArg::Rbf => KernelKind::Rbf,
            };
        }
        if self.per_fold_selection {
            cfg.evaluation.per_fold_selection = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_validate() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sed": 4}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"welch": {"segment_length": 128}}"#).is_err());
        let cfg: PipelineConfig = serde_json::from_str(r#"{"seed": 4, "rfe": {"target_k": 3}}"#).unwrap();
        assert_eq!((cfg.seed, cfg.rfe.target_k, cfg.rfe.n_repeats), (4, 3, 10));
    }

    #[test]
    fn stage_seeds_must_come_from_the_global_seed() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"train": {"seed": 9}}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(m)) if m.contains("train.seed")));
    }
}
