//! Welch cross-spectral estimation and magnitude coherence features.
//!
//! Coherence of two channels at bin `f` is
//! `|E[Sxy(f)]| / sqrt(E[Sxx(f)] * E[Syy(f)])`, where the expectation is the
//! average over Welch segments. With a single segment this ratio is 1 for any
//! pair, so [`WelchSpec`] insists on at least two.

mod features;
mod fft;
mod welch;

pub use features::{extract_features, BandSpec, FeatureError, FeatureExtractor, FeatureLayout, FeatureVector};
pub use fft::Fft;
pub use welch::{coherence, welch_spectra, CrossSpectra, SpectralError, WelchSpec, Window};
