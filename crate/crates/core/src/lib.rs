//! Algorithmic core of the EEG task-difficulty toolkit.
//!
//! Everything here is pure computation over in-memory data: Butterworth
//! band-pass filtering and epoching, Welch spectra and magnitude coherence,
//! an SMO-trained kernel SVM with one-vs-rest extension, recursive feature
//! elimination with bootstrap stability voting, a from-scratch shift/scale
//! convolutional network, and the evaluation protocols (class balancing,
//! subject-independent / leave-one-subject-out / expertise splits) together
//! with a synthetic EEG generator whose coherence structure is known.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line live in the `eegdiff` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dsp;
pub mod experiments;
pub mod matrix;
pub mod montage;
pub mod nn;
pub mod recording;
pub mod rng;
pub mod selection;
pub mod spectral;
pub mod svm;

pub use montage::{Channel, Difficulty};
pub use recording::{Event, Recording, RecordingError};
