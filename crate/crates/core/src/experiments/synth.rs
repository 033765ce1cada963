use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::dsp::{BandpassFilter, FilterError, FilterSpec, EPOCH_LEN, EPOCH_SAMPLE_RATE};
use crate::montage::{Channel, Difficulty};
use crate::recording::{Event, Recording};
use crate::rng::{derive_index, derive_seed, seeded, standard_normal};
use crate::spectral::BandSpec;

/// Epochs of `class` carry a shared sinusoid on channels `a` and `b` at the
/// centre of `band` (a name from [`BandSpec::defaults`]).
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PlantTarget {
    pub class: Difficulty,
    pub a: Channel,
    pub b: Channel,
    pub band: String,
}

impl PlantTarget {
    pub fn new(class: Difficulty, a: Channel, b: Channel, band: &str) -> Self {
        Self { class, a, b, band: band.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub epochs_per_class_per_subject: usize,
    /// Amplitude of the planted sinusoid over the background noise level.
    pub snr: f64,
    /// Standard deviation of the background noise, µV.
    pub noise_uv: f64,
    pub noise_low_hz: f64,
    pub noise_high_hz: f64,
    pub planted: Vec<PlantTarget>,
    /// Subjects given high MOT and VS scores; `None` means ⌈n_subjects / 2⌉.
    pub n_experts: Option<usize>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subjects: 6,
            epochs_per_class_per_subject: 60,
            snr: 3.0,
            noise_uv: 10.0,
            noise_low_hz: 1.0,
            noise_high_hz: 45.0,
            planted: vec![
                PlantTarget::new(Difficulty::None, Channel::Pz, Channel::O2, "low_alpha"),
                PlantTarget::new(Difficulty::Static, Channel::F3, Channel::C3, "low_beta"),
                PlantTarget::new(Difficulty::Dynamic, Channel::O1, Channel::P4, "gamma"),
            ],
            n_experts: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid plant target for class {class:?}: {reason}")]
    InvalidPlantTarget { class: Difficulty, reason: &'static str },
    #[error("invalid synthetic configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Filter(#[from] FilterError),
}

impl SynthConfig {
    fn expert_count(&self) -> usize {
        self.n_experts.unwrap_or(self.n_subjects.div_ceil(2))
    }

    /// Planted frequency per class, if any.
    fn plants(&self) -> Result<[Option<(usize, usize, f64)>; 3], SynthError> {
        let bands = BandSpec::defaults();
        let mut out = [None; 3];
        for t in &self.planted {
            let invalid = |reason| SynthError::InvalidPlantTarget { class: t.class, reason };
            let band = bands.iter().find(|b| b.name == t.band).ok_or(invalid("unknown band"))?;
            if t.a == t.b {
                return Err(invalid("both channels are the same"));
            }
            if band.centre_hz() >= f64::from(EPOCH_SAMPLE_RATE) / 2.0 {
                return Err(invalid("band centre above Nyquist"));
            }
            let slot = &mut out[t.class.index()];
            if slot.is_some() {
                return Err(invalid("class planted twice"));
            }
            *slot = Some((t.a as usize, t.b as usize, band.centre_hz()));
        }
        Ok(out)
    }

    fn check(&self) -> Result<(), SynthError> {
        if self.n_subjects == 0 || self.epochs_per_class_per_subject == 0 {
            return Err(SynthError::InvalidConfig("subject and epoch counts must be positive"));
        }
        if !(self.snr >= 0.0) || !(self.noise_uv > 0.0) {
            return Err(SynthError::InvalidConfig("snr must be non-negative and noise_uv positive"));
        }
        if self.expert_count() > self.n_subjects {
            return Err(SynthError::InvalidConfig("more experts than subjects"));
        }
        Ok(())
    }
}

/// Experts score in [0.55, 1) on both tests and novices in [0, 0.45), so
/// both the 0.5 threshold and, when experts are ⌈n/2⌉, the median rule
/// recover the planted group.
fn scores(cfg: &SynthConfig) -> Vec<(f64, f64)> {
    let mut rng = seeded(derive_seed(cfg.seed, "scores"));
    let mut is_expert: Vec<bool> = (0..cfg.n_subjects).map(|i| i < cfg.expert_count()).collect();
    is_expert.shuffle(&mut rng);
    is_expert
        .into_iter()
        .map(|e| {
            let (lo, hi) = if e { (0.55, 1.0) } else { (0.0, 0.45) };
            (rng.random_range(lo..hi), rng.random_range(lo..hi))
        })
        .collect()
}

/// One recording per subject over all 20 montage channels at 256 Hz. Each
/// class occupies one contiguous event of whole epochs, in class order.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Vec<Recording>, SynthError> {
    cfg.check()?;
    let plants = cfg.plants()?;
    let fs = f64::from(EPOCH_SAMPLE_RATE);
    let noise_filter = BandpassFilter::design(
        &FilterSpec { low_hz: cfg.noise_low_hz, high_hz: cfg.noise_high_hz, order: 4, zero_phase: true },
        fs,
    )?;
    let event_len = cfg.epochs_per_class_per_subject * EPOCH_LEN;
    let n_samples = event_len * Difficulty::COUNT;
    let n_channels = Channel::ALL.len();
    let root = derive_seed(cfg.seed, "synth");
    let scores = scores(cfg);

    let mut out = Vec::with_capacity(cfg.n_subjects);
    for (s, &(mot, vs)) in scores.iter().enumerate() {
        let mut rng = seeded(derive_index(root, s as u64));
        let mut samples = Vec::with_capacity(n_channels * n_samples);
        for _ in 0..n_channels {
            let white: Vec<f64> = (0..n_samples).map(|_| standard_normal(&mut rng)).collect();
            let band = noise_filter.apply(&white)?;
            let mean = band.iter().sum::<f64>() / n_samples as f64;
            let sd = libm::sqrt(band.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_samples as f64);
            samples.extend(band.iter().map(|v| ((v - mean) / sd * cfg.noise_uv) as f32));
        }
        let amplitude = cfg.snr * cfg.noise_uv;
        let mut events = Vec::with_capacity(Difficulty::COUNT);
        for class in Difficulty::ALL {
            let onset = class.index() * event_len;
            events.push(Event::new(onset, onset + event_len, class));
            let Some((a, b, hz)) = plants[class.index()] else { continue };
            for e in 0..cfg.epochs_per_class_per_subject {
                let phase = rng.random_range(0.0..2.0 * PI);
                let start = onset + e * EPOCH_LEN;
                for t in 0..EPOCH_LEN {
                    let v = amplitude * libm::sin(2.0 * PI * hz * t as f64 / fs + phase);
                    samples[a * n_samples + start + t] += v as f32;
                    samples[b * n_samples + start + t] += v as f32;
                }
            }
        }
        out.push(Recording {
            subject_id: format!("S{:02}", s + 1),
            sample_rate_hz: EPOCH_SAMPLE_RATE,
            channels: Channel::ALL.to_vec(),
            n_samples,
            samples,
            events,
            mot_score: mot,
            vs_score: vs,
        });
    }
    Ok(out)
}
