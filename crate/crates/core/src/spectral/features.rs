use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::fft::Fft;
use super::welch::{segment_spectra, CrossSpectra, SpectralError, WelchSpec};
use crate::dsp::{Epoch, EPOCH_LEN, EPOCH_SAMPLE_RATE};
use crate::montage::Channel;

/// A frequency band `[lo_hz, hi_hz)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct BandSpec {
    pub name: String,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl BandSpec {
    pub fn new(name: &str, lo_hz: f64, hi_hz: f64) -> Self {
        Self { name: name.into(), lo_hz, hi_hz }
    }

    /// The six analysis bands. 4-8 Hz is named "delta" as in the original
    /// study, and 10-11, 13-14, 22-23 and 35-36 Hz fall between bands.
    pub fn defaults() -> Vec<BandSpec> {
        Vec::from([
            BandSpec::new("delta", 4.0, 8.0),
            BandSpec::new("low_alpha", 8.0, 10.0),
            BandSpec::new("high_alpha", 11.0, 13.0),
            BandSpec::new("low_beta", 14.0, 22.0),
            BandSpec::new("high_beta", 23.0, 35.0),
            BandSpec::new("gamma", 36.0, 44.0),
        ])
    }

    pub fn contains(&self, hz: f64) -> bool {
        self.lo_hz <= hz && hz < self.hi_hz
    }

    pub fn centre_hz(&self) -> f64 {
        0.5 * (self.lo_hz + self.hi_hz)
    }

    /// Range label such as `8-10 Hz`.
    pub fn range_label(&self) -> String {
        format!("{}-{} Hz", self.lo_hz, self.hi_hz)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("electrode {0} is not present in the epoch")]
    MissingElectrode(Channel),
    #[error("electrode {0} is listed twice")]
    DuplicateElectrode(Channel),
    #[error("at least two electrodes are needed for coherence features")]
    TooFewElectrodes,
    #[error("band {name:?} [{lo_hz}, {hi_hz}) is empty or covers no frequency bin")]
    EmptyBand { name: String, lo_hz: f64, hi_hz: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Names the entries of a feature vector: pair-major, band-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLayout {
    /// Electrode pairs `(a, b)` with `a` before `b` in the configured electrode order.
    pub pairs: Vec<(Channel, Channel)>,
    pub bands: Vec<BandSpec>,
}

/// Position of one feature in the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureKey {
    pub a: Channel,
    pub b: Channel,
    pub band: usize,
}

impl FeatureLayout {
    pub fn new(electrodes: &[Channel], bands: &[BandSpec]) -> Self {
        let mut pairs = Vec::new();
        for (i, &a) in electrodes.iter().enumerate() {
            for &b in &electrodes[i + 1..] {
                pairs.push((a, b));
            }
        }
        Self { pairs, bands: bands.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len() * self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn key(&self, index: usize) -> FeatureKey {
        let (a, b) = self.pairs[index / self.bands.len()];
        FeatureKey { a, b, band: index % self.bands.len() }
    }

    /// Index of the feature for an unordered pair and a band name.
    pub fn position(&self, a: Channel, b: Channel, band: &str) -> Option<usize> {
        let pair = self.pairs.iter().position(|&p| p == (a, b) || p == (b, a))?;
        let band = self.bands.iter().position(|s| s.name == band)?;
        Some(pair * self.bands.len() + band)
    }

    pub fn pair_label(&self, index: usize) -> String {
        let key = self.key(index);
        format!("{}-{}", key.a, key.b)
    }

    /// Column name such as `Pz-O2:low_alpha`.
    pub fn name(&self, index: usize) -> String {
        let key = self.key(index);
        format!("{}-{}:{}", key.a, key.b, self.bands[key.band].name)
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.name(i)).collect()
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}#{}", self.a, self.b, self.band)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: FeatureLayout,
}

/// Band-averaged coherence for every electrode pair of an epoch.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    electrodes: Vec<Channel>,
    layout: FeatureLayout,
    spec: WelchSpec,
    window: Vec<f64>,
    fft: Fft,
    bin_hz: f64,
    /// Bins `[start, end)` averaged for each band.
    band_bins: Vec<(usize, usize)>,
}

impl FeatureExtractor {
    pub fn new(electrodes: &[Channel], bands: &[BandSpec], spec: WelchSpec) -> Result<Self, FeatureError> {
        if electrodes.len() < 2 {
            return Err(FeatureError::TooFewElectrodes);
        }
        for (i, c) in electrodes.iter().enumerate() {
            if electrodes[..i].contains(c) {
                return Err(FeatureError::DuplicateElectrode(*c));
            }
        }
        spec.check(EPOCH_LEN)?;
        let bin_hz = f64::from(EPOCH_SAMPLE_RATE) / spec.segment_len as f64;
        let n_bins = spec.n_bins();
        let mut band_bins = Vec::with_capacity(bands.len());
        for band in bands {
            let start = (0..n_bins).find(|&k| band.contains(k as f64 * bin_hz));
            let end = (0..n_bins).rev().find(|&k| band.contains(k as f64 * bin_hz));
            match (start, end) {
                (Some(s), Some(e)) if band.lo_hz < band.hi_hz => band_bins.push((s, e + 1)),
                _ => {
                    return Err(FeatureError::EmptyBand {
                        name: band.name.clone(),
                        lo_hz: band.lo_hz,
                        hi_hz: band.hi_hz,
                    })
                }
            }
        }
        Ok(Self {
            electrodes: electrodes.to_vec(),
            layout: FeatureLayout::new(electrodes, bands),
            spec,
            window: spec.window_coefficients(),
            fft: Fft::new(spec.segment_len),
            bin_hz,
            band_bins,
        })
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn extract(&self, epoch: &Epoch) -> Result<Vec<f64>, FeatureError> {
        let spectra = self
            .electrodes
            .iter()
            .map(|&c| {
                let idx = epoch.channel_index(c).ok_or(FeatureError::MissingElectrode(c))?;
                let x: Vec<f64> = epoch.channel(idx).iter().map(|&v| f64::from(v)).collect();
                Ok(segment_spectra(&x, &self.spec, &self.window, &self.fft))
            })
            .collect::<Result<Vec<_>, FeatureError>>()?;

        let mut values = Vec::with_capacity(self.layout.len());
        for (i, a) in spectra.iter().enumerate() {
            for b in &spectra[i + 1..] {
                let coh = CrossSpectra::from_segments(a, b, self.bin_hz).coherence();
                for &(start, end) in &self.band_bins {
                    let band = &coh[start..end];
                    values.push(band.iter().sum::<f64>() / band.len() as f64);
                }
            }
        }
        Ok(values)
    }
}

pub fn extract_features(
    epoch: &Epoch,
    electrodes: &[Channel],
    bands: &[BandSpec],
    spec: &WelchSpec,
) -> Result<FeatureVector, FeatureError> {
    let extractor = FeatureExtractor::new(electrodes, bands, *spec)?;
    let values = extractor.extract(epoch)?;
    Ok(FeatureVector { values, layout: extractor.layout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montage::Difficulty;
    use crate::rng::{seeded, standard_normal};
    use alloc::vec;

    fn noise_epoch(channels: &[Channel], seed: u64) -> Epoch {
        let mut rng = seeded(seed);
        Epoch {
            subject_id: "S".into(),
            channels: channels.to_vec(),
            samples: (0..channels.len() * EPOCH_LEN).map(|_| (10.0 * standard_normal(&mut rng)) as f32).collect(),
            difficulty: Difficulty::None,
        }
    }

    #[test]
    fn subset_vector_has_468_entries() {
        let e = noise_epoch(&Channel::ALL, 1);
        let fv = extract_features(&e, &Channel::COHERENCE_SUBSET, &BandSpec::defaults(), &WelchSpec::default()).unwrap();
        assert_eq!(fv.values.len(), 78 * 6);
        assert_eq!(fv.layout.len(), 468);
        assert!(fv.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn full_montage_vector_has_1140_entries() {
        let e = noise_epoch(&Channel::ALL, 2);
        let fv = extract_features(&e, &Channel::ALL, &BandSpec::defaults(), &WelchSpec::default()).unwrap();
        assert_eq!(fv.values.len(), 190 * 6);
    }

    #[test]
    fn table_pairs_are_named_in_subset_order() {
        let layout = FeatureLayout::new(&Channel::COHERENCE_SUBSET, &BandSpec::defaults());
        let i = layout.position(Channel::O2, Channel::Pz, "low_alpha").unwrap();
        assert_eq!(layout.name(i), "Pz-O2:low_alpha");
        assert_eq!(layout.pair_label(i), "Pz-O2");
        assert_eq!(layout.bands[layout.key(i).band].range_label(), "8-10 Hz");
        assert_eq!(layout.name(0), "T4-T3:delta");
        assert_eq!(layout.name(7), "T4-O1:low_alpha");
    }

    #[test]
    fn band_bins_are_half_open() {
        let ex = FeatureExtractor::new(&Channel::COHERENCE_SUBSET, &BandSpec::defaults(), WelchSpec::default()).unwrap();
        assert_eq!(ex.band_bins, vec![(4, 8), (8, 10), (11, 13), (14, 22), (23, 35), (36, 44)]);
    }

    #[test]
    fn missing_electrode_is_reported() {
        let e = noise_epoch(&[Channel::O1, Channel::O2], 3);
        let err = extract_features(&e, &[Channel::O1, Channel::Pz], &BandSpec::defaults(), &WelchSpec::default());
        assert_eq!(err.unwrap_err(), FeatureError::MissingElectrode(Channel::Pz));
    }

    #[test]
    fn band_without_bins_is_rejected() {
        let bands = vec![BandSpec::new("narrow", 10.2, 10.8)];
        assert!(matches!(
            FeatureExtractor::new(&Channel::COHERENCE_SUBSET, &bands, WelchSpec::default()),
            Err(FeatureError::EmptyBand { .. })
        ));
    }

    #[test]
    fn shared_tone_dominates_its_pair_and_band() {
        let channels = Channel::COHERENCE_SUBSET;
        let mut e = noise_epoch(&channels, 4);
        let pz = e.channel_index(Channel::Pz).unwrap();
        let o2 = e.channel_index(Channel::O2).unwrap();
        for t in 0..EPOCH_LEN {
            let v = (30.0 * libm::sin(2.0 * core::f64::consts::PI * 9.0 * t as f64 / 256.0 + 0.4)) as f32;
            e.samples[pz * EPOCH_LEN + t] += v;
            e.samples[o2 * EPOCH_LEN + t] += v;
        }
        let fv = extract_features(&e, &channels, &BandSpec::defaults(), &WelchSpec::default()).unwrap();
        let target = fv.layout.position(Channel::Pz, Channel::O2, "low_alpha").unwrap();
        let argmax = (0..fv.values.len()).max_by(|&a, &b| fv.values[a].total_cmp(&fv.values[b])).unwrap();
        assert_eq!(argmax, target);
        assert!(fv.values[target] > 0.9);
    }
}
