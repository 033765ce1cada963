use alloc::string::String;
use alloc::vec::Vec;

use crate::montage::{Channel, Difficulty};
use crate::recording::Recording;

/// Samples per epoch: two seconds at 256 Hz.
pub const EPOCH_LEN: usize = 512;
pub const EPOCH_SAMPLE_RATE: u32 = 256;

/// A two-second multichannel window carrying one difficulty label.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub subject_id: String,
    pub channels: Vec<Channel>,
    /// Row-major `[channel][EPOCH_LEN]`, microvolts.
    pub samples: Vec<f32>,
    pub difficulty: Difficulty,
}

impl Epoch {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, index: usize) -> &[f32] {
        &self.samples[index * EPOCH_LEN..(index + 1) * EPOCH_LEN]
    }

    pub fn channel_index(&self, channel: Channel) -> Option<usize> {
        self.channels.iter().position(|&c| c == channel)
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Largest per-channel peak-to-peak amplitude.
    pub fn max_peak_to_peak(&self) -> f32 {
        (0..self.n_channels())
            .map(|c| {
                let (lo, hi) = self
                    .channel(c)
                    .iter()
                    .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                hi - lo
            })
            .fold(0.0, f32::max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EpochError {
    #[error("recording {0} has no labeled events")]
    NoEvents(String),
    #[error("recording sampled at {0} Hz; epoching expects {EPOCH_SAMPLE_RATE} Hz")]
    UnsupportedSampleRate(u32),
}

/// Cuts every labeled event into consecutive non-overlapping windows of
/// [`EPOCH_LEN`] samples, in onset order. A trailing remainder shorter than one
/// window is discarded.
pub fn epoch_signal(r: &Recording) -> Result<Vec<Epoch>, EpochError> {
    if r.sample_rate_hz != EPOCH_SAMPLE_RATE {
        return Err(EpochError::UnsupportedSampleRate(r.sample_rate_hz));
    }
    if r.events.is_empty() {
        return Err(EpochError::NoEvents(r.subject_id.clone()));
    }
    let mut epochs = Vec::new();
    for event in r.sorted_events() {
        for w in 0..event.len() / EPOCH_LEN {
            let start = event.onset + w * EPOCH_LEN;
            let mut samples = Vec::with_capacity(r.n_channels() * EPOCH_LEN);
            for ch in 0..r.n_channels() {
                samples.extend_from_slice(&r.channel(ch)[start..start + EPOCH_LEN]);
            }
            epochs.push(Epoch {
                subject_id: r.subject_id.clone(),
                channels: r.channels.clone(),
                samples,
                difficulty: event.difficulty,
            });
        }
    }
    Ok(epochs)
}

/// Drops every epoch whose peak-to-peak amplitude exceeds `ptp_threshold_uv`
/// on any channel, or that holds a non-finite sample. Kept epochs keep their order.
pub fn reject_artifacts(epochs: Vec<Epoch>, ptp_threshold_uv: f32) -> (Vec<Epoch>, usize) {
    let before = epochs.len();
    let kept: Vec<Epoch> = epochs
        .into_iter()
        .filter(|e| e.is_finite() && e.max_peak_to_peak() <= ptp_threshold_uv)
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}
