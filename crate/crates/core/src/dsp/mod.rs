//! Band-pass filtering, fixed-length epoching and peak-to-peak artifact rejection.

mod epoch;
mod filter;

pub use epoch::{epoch_signal, reject_artifacts, Epoch, EpochError, EPOCH_LEN, EPOCH_SAMPLE_RATE};
pub use filter::{bandpass_filter, BandpassFilter, FilterError, FilterSpec, Section};
