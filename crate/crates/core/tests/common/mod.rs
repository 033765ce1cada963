#![allow(dead_code)]

use eegdiff_core::dsp::{Epoch, EPOCH_LEN};
use eegdiff_core::rng::{seeded, standard_normal};
use eegdiff_core::{Channel, Difficulty};

/// Mean magnitude coherence (bins 1..127) of independent white-noise pairs
/// with three 256-sample Hann segments, from `tests/oracles/noise_coherence.py`
/// (10^4 epochs, standard error 2.2e-4).
pub const NOISE_COHERENCE_BASELINE: f64 = 0.539854;

pub fn white(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n).map(|_| standard_normal(&mut rng)).collect()
}

pub fn noise_epoch(channels: &[Channel], sd: f64, seed: u64) -> Epoch {
    let samples = white(channels.len() * EPOCH_LEN, seed).into_iter().map(|v| (sd * v) as f32).collect();
    Epoch { subject_id: "T".into(), channels: channels.to_vec(), samples, difficulty: Difficulty::None }
}

pub fn sine(hz: f64, amplitude: f64, phase: f64, n: usize, fs: f64) -> Vec<f64> {
    (0..n).map(|t| amplitude * (2.0 * std::f64::consts::PI * hz * t as f64 / fs + phase).sin()).collect()
}
