use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::recording::Recording;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct FilterSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Order of the low-pass prototype; the band-pass has twice as many poles.
    pub order: usize,
    pub zero_phase: bool,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self { low_hz: 0.1, high_hz: 70.0, order: 4, zero_phase: true }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("band [{low_hz}, {high_hz}] Hz with order {order} is invalid for a {sample_rate_hz} Hz signal")]
    BandOutOfRange { low_hz: f64, high_hz: f64, order: usize, sample_rate_hz: f64 },
    #[error("designed filter has a pole of magnitude {0} (must be < 1)")]
    UnstableFilter(f64),
    #[error("signal of {len} samples is too short for {pad} samples of edge padding")]
    TooShort { len: usize, pad: usize },
}

/// One second-order section in transposed direct form II, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Section {
    fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        (self.b[0] + z1 * self.b[1] + z2 * self.b[2]) / (self.a[0] + z1 * self.a[1] + z2 * self.a[2])
    }
}

/// A designed Butterworth band-pass filter, ready to run over channels.
#[derive(Debug, Clone)]
pub struct BandpassFilter {
    sections: Vec<Section>,
    /// Per-section state that makes the cascade start at steady state for a unit step.
    step_state: Vec<[f64; 2]>,
    pad: usize,
    zero_phase: bool,
}

impl BandpassFilter {
    /// Butterworth band-pass via the analog prototype, the low-pass to
    /// band-pass transform and the bilinear transform with pre-warping.
    pub fn design(spec: &FilterSpec, sample_rate_hz: f64) -> Result<Self, FilterError> {
        let nyquist = sample_rate_hz / 2.0;
        if spec.order == 0
            || !(spec.low_hz > 0.0 && spec.low_hz < spec.high_hz && spec.high_hz < nyquist)
        {
            return Err(FilterError::BandOutOfRange {
                low_hz: spec.low_hz,
                high_hz: spec.high_hz,
                order: spec.order,
                sample_rate_hz,
            });
        }
        let n = spec.order;
        let fs2 = 2.0 * sample_rate_hz;
        let w1 = fs2 * libm::tan(PI * spec.low_hz / sample_rate_hz);
        let w2 = fs2 * libm::tan(PI * spec.high_hz / sample_rate_hz);
        let bw = w2 - w1;
        let w0_sq = w1 * w2;

        let mut poles = Vec::with_capacity(2 * n);
        for k in 0..n {
            let theta = PI * (2 * k + 1) as f64 / (2 * n) as f64;
            let proto = Complex64::new(-libm::sin(theta), libm::cos(theta));
            let half = proto * (bw / 2.0);
            let disc = (half * half - w0_sq).sqrt();
            for s in [half + disc, half - disc] {
                poles.push((fs2 + s) / (fs2 - s));
            }
        }
        for p in &poles {
            if p.norm() >= 1.0 {
                return Err(FilterError::UnstableFilter(p.norm()));
            }
        }

        let scale = poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let is_real = |p: &Complex64| libm::fabs(p.im) <= 1e-12 * scale;
        let mut denominators: Vec<[f64; 3]> = poles
            .iter()
            .filter(|p| !is_real(p) && p.im > 0.0)
            .map(|p| [1.0, -2.0 * p.re, p.norm_sqr()])
            .collect();
        let mut reals: Vec<f64> = poles.iter().filter(|p| is_real(p)).map(|p| p.re).collect();
        reals.sort_by(f64::total_cmp);
        for pair in reals.chunks(2) {
            match *pair {
                [r1, r2] => denominators.push([1.0, -(r1 + r2), r1 * r2]),
                [r] => denominators.push([1.0, -r, 0.0]),
                _ => unreachable!(),
            }
        }

        // Unit gain at the (warped) geometric band centre, section by section.
        let centre_hz = sample_rate_hz / PI * libm::atan(libm::sqrt(w0_sq) / fs2);
        let omega0 = 2.0 * PI * centre_hz / sample_rate_hz;
        let sections: Vec<Section> = denominators
            .into_iter()
            .map(|a| {
                let mut s = Section { b: [1.0, 0.0, -1.0], a };
                let g = s.response(omega0).norm();
                for b in &mut s.b {
                    *b /= g;
                }
                s
            })
            .collect();

        let mut step_state = Vec::with_capacity(sections.len());
        let mut gain_in = 1.0;
        for s in &sections {
            let h = s.b.iter().sum::<f64>() / s.a.iter().sum::<f64>();
            let z2 = s.b[2] - s.a[2] * h;
            let z1 = s.b[1] - s.a[1] * h + z2;
            step_state.push([z1 * gain_in, z2 * gain_in]);
            gain_in *= h;
        }

        Ok(Self { sections, step_state, pad: 3 * n, zero_phase: spec.zero_phase })
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    /// Magnitude response at `freq_hz`, for a single pass.
    pub fn magnitude(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        let omega = 2.0 * PI * freq_hz / sample_rate_hz;
        self.sections.iter().map(|s| s.response(omega).norm()).product()
    }

    pub fn min_len(&self) -> usize {
        self.pad + 1
    }

    fn run(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        for (s, zi) in self.sections.iter().zip(&self.step_state) {
            let mut s1 = zi[0] * x0;
            let mut s2 = zi[1] * x0;
            for v in x.iter_mut() {
                let input = *v;
                let y = s.b[0] * input + s1;
                s1 = s.b[1] * input - s.a[1] * y + s2;
                s2 = s.b[2] * input - s.a[2] * y;
                *v = y;
            }
        }
    }

    /// Forward pass then backward pass over the odd-reflection padded signal.
    fn forward_backward(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let pad = self.pad;
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));
        self.run(&mut ext);
        ext.reverse();
        self.run(&mut ext);
        ext.reverse();
        ext.truncate(pad + n);
        ext.drain(..pad);
        ext
    }

    /// Filters one channel. In zero-phase mode this is the average of the
    /// forward-backward and backward-forward passes, which makes the result
    /// commute exactly with time reversal.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, FilterError> {
        if x.len() <= self.pad {
            return Err(FilterError::TooShort { len: x.len(), pad: self.pad });
        }
        if !self.zero_phase {
            let mut y = x.to_vec();
            self.run(&mut y);
            return Ok(y);
        }
        let fb = self.forward_backward(x);
        let mut reversed = x.to_vec();
        reversed.reverse();
        let mut bf = self.forward_backward(&reversed);
        bf.reverse();
        Ok(fb.iter().zip(&bf).map(|(a, b)| 0.5 * (a + b)).collect())
    }
}

/// Filters every channel of `r` independently.
pub fn bandpass_filter(r: &Recording, spec: &FilterSpec) -> Result<Recording, FilterError> {
    let filter = BandpassFilter::design(spec, f64::from(r.sample_rate_hz))?;
    let mut out = r.clone();
    for ch in 0..r.n_channels() {
        let x: Vec<f64> = r.channel(ch).iter().map(|&v| f64::from(v)).collect();
        let y = filter.apply(&x)?;
        for (dst, v) in out.channel_mut(ch).iter_mut().zip(y) {
            *dst = v as f32;
        }
    }
    Ok(out)
}
