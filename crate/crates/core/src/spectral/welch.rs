use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::fft::Fft;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Window {
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct WelchSpec {
    pub segment_len: usize,
    /// Fraction of a segment shared with the next one, in `[0, 1)`.
    pub overlap: f64,
    pub window: Window,
}

impl Default for WelchSpec {
    fn default() -> Self {
        Self { segment_len: 256, overlap: 0.5, window: Window::Hann }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("segment length {segment_len} with overlap {overlap} is not a valid Welch configuration")]
    InvalidSpec { segment_len: usize, overlap: f64 },
    #[error("{len} samples give {segments} Welch segment(s) of {segment_len}; at least 2 are required")]
    TooShort { len: usize, segment_len: usize, segments: usize },
    #[error("channels have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

impl WelchSpec {
    /// Hop between segment starts.
    pub fn step(&self) -> usize {
        let shared = libm::round(self.overlap * self.segment_len as f64) as usize;
        (self.segment_len - shared.min(self.segment_len - 1)).max(1)
    }

    pub fn n_segments(&self, len: usize) -> usize {
        if len < self.segment_len || self.segment_len == 0 {
            0
        } else {
            (len - self.segment_len) / self.step() + 1
        }
    }

    pub fn n_bins(&self) -> usize {
        self.segment_len / 2 + 1
    }

    /// Validates the configuration against a signal length and returns the segment count.
    pub fn check(&self, len: usize) -> Result<usize, SpectralError> {
        if self.segment_len < 2 || !(0.0..1.0).contains(&self.overlap) {
            return Err(SpectralError::InvalidSpec { segment_len: self.segment_len, overlap: self.overlap });
        }
        let segments = self.n_segments(len);
        if segments < 2 {
            return Err(SpectralError::TooShort { len, segment_len: self.segment_len, segments });
        }
        Ok(segments)
    }

    pub fn window_coefficients(&self) -> Vec<f64> {
        let n = self.segment_len as f64;
        match self.window {
            // periodic Hann: bin-centred tones leak only into the two neighbouring bins
            Window::Hann => (0..self.segment_len)
                .map(|i| 0.5 - 0.5 * libm::cos(2.0 * PI * i as f64 / n))
                .collect(),
        }
    }
}

/// Per-segment one-sided spectra of a signal: mean-removed, windowed, transformed.
pub(crate) fn segment_spectra(x: &[f64], spec: &WelchSpec, window: &[f64], fft: &Fft) -> Vec<Vec<Complex64>> {
    let seg = spec.segment_len;
    let step = spec.step();
    let bins = spec.n_bins();
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    (0..spec.n_segments(x.len()))
        .map(|s| {
            let chunk = &x[s * step..s * step + seg];
            let mean = chunk.iter().sum::<f64>() / seg as f64;
            for ((b, &v), &w) in buf.iter_mut().zip(chunk).zip(window) {
                *b = Complex64::new((v - mean) * w, 0.0);
            }
            fft.forward(&mut buf);
            buf[..bins].to_vec()
        })
        .collect()
}

/// Segment-averaged auto- and cross-spectra of a channel pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSpectra {
    pub sxx: Vec<f64>,
    pub syy: Vec<f64>,
    /// Mean of `conj(X) * Y`; a delay of `y` behind `x` gives a negative phase slope.
    pub sxy: Vec<Complex64>,
    pub bin_hz: f64,
    pub n_segments: usize,
}

impl CrossSpectra {
    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }

    pub fn coherence(&self) -> Vec<f64> {
        coherence(&self.sxx, &self.syy, &self.sxy)
    }

    pub(crate) fn from_segments(xs: &[Vec<Complex64>], ys: &[Vec<Complex64>], bin_hz: f64) -> Self {
        let bins = xs[0].len();
        let k = xs.len() as f64;
        let mut sxx = vec![0.0; bins];
        let mut syy = vec![0.0; bins];
        let mut sxy = vec![Complex64::new(0.0, 0.0); bins];
        for (a, b) in xs.iter().zip(ys) {
            for f in 0..bins {
                sxx[f] += a[f].norm_sqr();
                syy[f] += b[f].norm_sqr();
                sxy[f] += a[f].conj() * b[f];
            }
        }
        for f in 0..bins {
            sxx[f] /= k;
            syy[f] /= k;
            sxy[f] /= k;
        }
        Self { sxx, syy, sxy, bin_hz, n_segments: xs.len() }
    }
}

pub fn welch_spectra(x: &[f64], y: &[f64], spec: &WelchSpec, sample_rate_hz: f64) -> Result<CrossSpectra, SpectralError> {
    if x.len() != y.len() {
        return Err(SpectralError::LengthMismatch(x.len(), y.len()));
    }
    spec.check(x.len())?;
    let window = spec.window_coefficients();
    let fft = Fft::new(spec.segment_len);
    let xs = segment_spectra(x, spec, &window, &fft);
    let ys = segment_spectra(y, spec, &window, &fft);
    Ok(CrossSpectra::from_segments(&xs, &ys, sample_rate_hz / spec.segment_len as f64))
}

/// Auto-spectra below this are treated as empty bins with zero coherence.
const POWER_FLOOR: f64 = 1e-30;

/// Magnitude coherence per bin, in `[0, 1]`.
pub fn coherence(sxx: &[f64], syy: &[f64], sxy: &[Complex64]) -> Vec<f64> {
    sxx.iter()
        .zip(syy)
        .zip(sxy)
        .map(|((&pxx, &pyy), cxy)| {
            if pxx < POWER_FLOOR || pyy < POWER_FLOOR {
                0.0
            } else {
                (cxy.norm() / libm::sqrt(pxx * pyy)).min(1.0)
            }
        })
        .collect()
}
