//! Continuous multichannel recordings with labeled task segments.

use alloc::string::String;
use alloc::vec::Vec;

use crate::montage::{Channel, Difficulty};

/// A labeled task segment `[onset, offset)` in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub onset: usize,
    pub offset: usize,
    pub difficulty: Difficulty,
}

impl Event {
    pub fn new(onset: usize, offset: usize, difficulty: Difficulty) -> Self {
        Self { onset, offset, difficulty }
    }

    pub fn len(&self) -> usize {
        self.offset.saturating_sub(self.onset)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordingError {
    #[error("sample buffer holds {actual} values, expected {expected} ({channels} channels x {n_samples} samples)")]
    LengthMismatch { expected: usize, actual: usize, channels: usize, n_samples: usize },
    #[error("channel {0} appears more than once")]
    DuplicateChannel(Channel),
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("event [{onset}, {offset}) is empty or reversed")]
    EmptyEvent { onset: usize, offset: usize },
    #[error("event [{onset}, {offset}) extends past the recording ({n_samples} samples)")]
    EventOutOfRange { onset: usize, offset: usize, n_samples: usize },
    #[error("events starting at samples {first} and {second} overlap")]
    OverlappingEvents { first: usize, second: usize },
    #[error("{name} score {value} is outside [0, 1]")]
    ScoreOutOfRange { name: &'static str, value: f64 },
}

/// Multichannel EEG in microvolts, stored row-major `[channel][sample]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub sample_rate_hz: u32,
    pub channels: Vec<Channel>,
    pub n_samples: usize,
    pub samples: Vec<f32>,
    pub events: Vec<Event>,
    pub mot_score: f64,
    pub vs_score: f64,
}

impl Recording {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, index: usize) -> &[f32] {
        &self.samples[index * self.n_samples..(index + 1) * self.n_samples]
    }

    pub fn channel_mut(&mut self, index: usize) -> &mut [f32] {
        &mut self.samples[index * self.n_samples..(index + 1) * self.n_samples]
    }

    pub fn channel_index(&self, channel: Channel) -> Option<usize> {
        self.channels.iter().position(|&c| c == channel)
    }

    /// Events in onset order.
    pub fn sorted_events(&self) -> Vec<Event> {
        let mut events = self.events.clone();
        events.sort_by_key(|e| e.onset);
        events
    }

    /// Checks every structural invariant of a recording.
    pub fn validate(&self) -> Result<(), RecordingError> {
        if self.sample_rate_hz == 0 {
            return Err(RecordingError::ZeroSampleRate);
        }
        let expected = self.channels.len() * self.n_samples;
        if self.samples.len() != expected {
            return Err(RecordingError::LengthMismatch {
                expected,
                actual: self.samples.len(),
                channels: self.channels.len(),
                n_samples: self.n_samples,
            });
        }
        for (i, c) in self.channels.iter().enumerate() {
            if self.channels[..i].contains(c) {
                return Err(RecordingError::DuplicateChannel(*c));
            }
        }
        for e in &self.events {
            if e.onset >= e.offset {
                return Err(RecordingError::EmptyEvent { onset: e.onset, offset: e.offset });
            }
            if e.offset > self.n_samples {
                return Err(RecordingError::EventOutOfRange {
                    onset: e.onset,
                    offset: e.offset,
                    n_samples: self.n_samples,
                });
            }
        }
        let sorted = self.sorted_events();
        for pair in sorted.windows(2) {
            if pair[1].onset < pair[0].offset {
                return Err(RecordingError::OverlappingEvents { first: pair[0].onset, second: pair[1].onset });
            }
        }
        for (name, value) in [("MOT", self.mot_score), ("VS", self.vs_score)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(RecordingError::ScoreOutOfRange { name, value });
            }
        }
        Ok(())
    }
}
