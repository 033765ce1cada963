use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::params::Params;
use super::spec::{NetworkSpec, SpecError};
use super::tensor::Tensor;
use crate::matrix::{axpy, dot};
use crate::rng::seeded;

/// Inputs of the log layer are clamped at this value.
pub const LOG_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("input holds {actual} values, network expects {expected}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("label {label} outside 0..{classes}")]
    BadLabel { label: usize, classes: usize },
    #[error("parameter tensors do not match the network spec")]
    ParamShape,
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Eval,
    /// Dropout active, mask drawn from `seed`.
    Train { seed: u64 },
}

/// `x' = (x − W_sh·x̄) ⊙ (W_sc·σ̃)` on a `[channels × samples]` epoch, where
/// `x̄` is the per-channel mean and `σ̃` the per-channel population standard
/// deviation of the shifted signal. Both vectors broadcast over time.
pub fn shift_scale_forward(x: &[f64], channels: usize, shift: &Tensor, scale: &Tensor) -> Vec<f64> {
    shift_scale(x, channels, shift, scale).out
}

struct ShiftScaleTrace {
    mean: Vec<f64>,
    std: Vec<f64>,
    gain: Vec<f64>,
    shifted: Vec<f64>,
    out: Vec<f64>,
}

fn matvec(m: &Tensor, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|r| dot(&m.data[r * n..(r + 1) * n], v)).collect()
}

fn shift_scale(x: &[f64], channels: usize, shift: &Tensor, scale: &Tensor) -> ShiftScaleTrace {
    let t = x.len() / channels;
    let mean: Vec<f64> = x.chunks_exact(t).map(|row| row.iter().sum::<f64>() / t as f64).collect();
    let offset = matvec(shift, &mean);
    let mut shifted = vec![0.0; x.len()];
    let mut std = vec![0.0; channels];
    for c in 0..channels {
        let row = &mut shifted[c * t..(c + 1) * t];
        for (s, v) in row.iter_mut().zip(&x[c * t..(c + 1) * t]) {
            *s = v - offset[c];
        }
        let m = row.iter().sum::<f64>() / t as f64;
        std[c] = libm::sqrt(row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / t as f64);
    }
    let gain = matvec(scale, &std);
    let out = shifted
        .chunks_exact(t)
        .zip(&gain)
        .flat_map(|(row, g)| row.iter().map(move |v| v * g))
        .collect();
    ShiftScaleTrace { mean, std, gain, shifted, out }
}

/// Temporal and spatial convolutions collapsed into one kernel
/// `[spatial_filters, channels, fused_kernel]` plus bias.
struct Fused {
    weight: Vec<f64>,
    bias: Vec<f64>,
}

struct Trace {
    ss: ShiftScaleTrace,
    conv: Vec<f64>,
    pooled: Vec<f64>,
    /// Dropout multipliers: 0 or 1/(1−p) in training, 1 in evaluation.
    mask: Vec<f64>,
    dropped: Vec<f64>,
    logits: Vec<f64>,
    probs: Vec<f64>,
}

/// Gradient accumulators in fused form.
struct FusedGrad {
    shift: Vec<f64>,
    scale: Vec<f64>,
    weight: Vec<f64>,
    bias: Vec<f64>,
    classifier_w: Vec<f64>,
    classifier_b: Vec<f64>,
}

/// The network: an architecture plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Cnn {
    pub spec: NetworkSpec,
    pub params: Params,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + libm::log(logits.iter().map(|v| libm::exp(v - max)).sum::<f64>());
    lse - logits[target]
}

impl Cnn {
    /// All-zero parameters; fails if the layer sizes are inconsistent.
    pub fn new(spec: NetworkSpec) -> Result<Self, NnError> {
        spec.validate()?;
        Ok(Self { spec, params: Params::zeros(&spec) })
    }

    pub fn from_params(spec: NetworkSpec, params: Params) -> Result<Self, NnError> {
        spec.validate()?;
        let reference = Params::zeros(&spec);
        if reference.tensors().iter().zip(params.tensors()).any(|(a, b)| a.shape != b.shape || a.len() != b.len()) {
            return Err(NnError::ParamShape);
        }
        Ok(Self { spec, params })
    }

    /// Shift = identity, scale = diag(1 / (σ̂_c² + 1e-6)) with σ̂_c the
    /// per-channel standard deviation over `calibration`, convolutions
    /// uniform in ±sqrt(6 / (fan_in + fan_out)), biases zero.
    pub fn initialize(spec: NetworkSpec, seed: u64, calibration: &[&[f64]]) -> Result<Self, NnError> {
        let mut net = Self::new(spec)?;
        let (c, t) = (spec.channels, spec.samples);
        for x in calibration {
            net.check_input(x)?;
        }
        let count = (calibration.len() * t).max(1) as f64;
        for ch in 0..c {
            let values = || calibration.iter().flat_map(|x| x[ch * t..(ch + 1) * t].iter().copied());
            let mean = values().sum::<f64>() / count;
            let var = values().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
            net.params.shift.data[ch * c + ch] = 1.0;
            net.params.scale.data[ch * c + ch] = 1.0 / (var + 1e-6);
        }
        let mut rng = seeded(seed);
        let mut uniform = |tensor: &mut Tensor, fan_in: usize, fan_out: usize| {
            let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            for v in &mut tensor.data {
                *v = rng.random_range(-limit..limit);
            }
        };
        let s = spec;
        uniform(&mut net.params.temporal_w, s.temporal_kernel, s.temporal_filters * s.temporal_kernel);
        let area = c * s.spatial_kernel;
        uniform(&mut net.params.spatial_w, s.temporal_filters * area, s.spatial_filters * area);
        uniform(
            &mut net.params.classifier_w,
            s.spatial_filters * s.classifier_kernel,
            s.classes * s.classifier_kernel,
        );
        Ok(net)
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NnError> {
        let expected = self.spec.channels * self.spec.samples;
        if x.len() != expected {
            return Err(NnError::ShapeMismatch { expected, actual: x.len() });
        }
        Ok(())
    }

    fn fused(&self) -> Fused {
        let s = &self.spec;
        let (c, f1, f2, k1, k2, kw) =
            (s.channels, s.temporal_filters, s.spatial_filters, s.temporal_kernel, s.spatial_kernel, s.fused_kernel());
        let w1 = &self.params.temporal_w.data;
        let b1 = &self.params.temporal_b.data;
        let w2 = &self.params.spatial_w.data;
        let mut weight = vec![0.0; f2 * c * kw];
        let mut bias = self.params.spatial_b.data.clone();
        for o in 0..f2 {
            for f in 0..f1 {
                let taps = &w1[f * k1..(f + 1) * k1];
                for ch in 0..c {
                    let base = (o * c + ch) * kw;
                    for j in 0..k2 {
                        let w = w2[((o * f1 + f) * c + ch) * k2 + j];
                        bias[o] += w * b1[f];
                        axpy(w, taps, &mut weight[base + j..base + j + k1]);
                    }
                }
            }
        }
        Fused { weight, bias }
    }

    fn forward_trace(&self, fused: &Fused, x: &[f64], dropout_seed: Option<u64>) -> Trace {
        let s = &self.spec;
        let (c, t, f2, kw, t2, p) = (s.channels, s.samples, s.spatial_filters, s.fused_kernel(), s.spatial_len(), s.pooled_len());
        let ss = shift_scale(x, c, &self.params.shift, &self.params.scale);
        let u = &ss.out;

        let mut conv = vec![0.0; f2 * t2];
        for o in 0..f2 {
            let out = &mut conv[o * t2..(o + 1) * t2];
            out.iter_mut().for_each(|v| *v = fused.bias[o]);
            for ch in 0..c {
                let row = &u[ch * t..(ch + 1) * t];
                let taps = &fused.weight[(o * c + ch) * kw..(o * c + ch + 1) * kw];
                for (tau, &w) in taps.iter().enumerate() {
                    axpy(w, &row[tau..tau + t2], out);
                }
            }
        }

        let mut pooled = vec![0.0; f2 * p];
        for o in 0..f2 {
            let row = &conv[o * t2..(o + 1) * t2];
            for i in 0..p {
                let window = &row[i * s.pool_stride..i * s.pool_stride + s.pool_kernel];
                pooled[o * p + i] = window.iter().map(|v| v * v).sum::<f64>() / s.pool_kernel as f64;
            }
        }

        let mask = match dropout_seed {
            None => vec![1.0; f2 * p],
            Some(seed) => {
                let rate = s.dropout();
                let keep = 1.0 / (1.0 - rate);
                let mut rng = seeded(seed);
                (0..f2 * p).map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep }).collect()
            }
        };
        let dropped: Vec<f64> = pooled.iter().zip(&mask).map(|(v, m)| libm::log(v.max(LOG_EPS)) * m).collect();

        let k3 = s.classifier_kernel;
        let logits: Vec<f64> = (0..s.classes)
            .map(|q| {
                self.params.classifier_b.data[q]
                    + dot(&self.params.classifier_w.data[q * f2 * k3..(q + 1) * f2 * k3], &dropped)
            })
            .collect();
        let probs = softmax(&logits);
        Trace { ss, conv, pooled, mask, dropped, logits, probs }
    }

    /// Class probabilities for one `[channels × samples]` epoch.
    pub fn forward(&self, x: &[f64], mode: Mode) -> Result<Vec<f64>, NnError> {
        self.check_input(x)?;
        let seed = match mode {
            Mode::Eval => None,
            Mode::Train { seed } => Some(seed),
        };
        Ok(self.forward_trace(&self.fused(), x, seed).probs)
    }

    /// Evaluation-mode prediction for many epochs, sharing the fused kernel.
    pub fn predict_many(&self, xs: &[&[f64]]) -> Result<Vec<(usize, Vec<f64>)>, NnError> {
        let fused = self.fused();
        xs.iter()
            .map(|x| {
                self.check_input(x)?;
                let probs = self.forward_trace(&fused, x, None).probs;
                Ok((argmax(&probs), probs))
            })
            .collect()
    }

    fn backward(&self, fused: &Fused, trace: &Trace, target: usize, g: &mut FusedGrad) {
        let s = &self.spec;
        let (c, t, f2, kw, t2, p, k3) =
            (s.channels, s.samples, s.spatial_filters, s.fused_kernel(), s.spatial_len(), s.pooled_len(), s.classifier_kernel);

        let mut dlogits = trace.probs.clone();
        dlogits[target] -= 1.0;

        let mut ddropped = vec![0.0; f2 * p];
        for (q, &dq) in dlogits.iter().enumerate() {
            g.classifier_b[q] += dq;
            let w = &self.params.classifier_w.data[q * f2 * k3..(q + 1) * f2 * k3];
            axpy(dq, &trace.dropped, &mut g.classifier_w[q * f2 * k3..(q + 1) * f2 * k3]);
            axpy(dq, w, &mut ddropped);
        }

        let mut dconv = vec![0.0; f2 * t2];
        let inv_k = 1.0 / s.pool_kernel as f64;
        for o in 0..f2 {
            for i in 0..p {
                let idx = o * p + i;
                let pooled = trace.pooled[idx];
                if pooled <= LOG_EPS {
                    continue;
                }
                let d = ddropped[idx] * trace.mask[idx] / pooled * inv_k;
                let start = o * t2 + i * s.pool_stride;
                for tt in start..start + s.pool_kernel {
                    dconv[tt] += d * 2.0 * trace.conv[tt];
                }
            }
        }

        let u = &trace.ss.out;
        let mut du = vec![0.0; c * t];
        for o in 0..f2 {
            let d = &dconv[o * t2..(o + 1) * t2];
            g.bias[o] += d.iter().sum::<f64>();
            for ch in 0..c {
                let base = (o * c + ch) * kw;
                let row = &u[ch * t..(ch + 1) * t];
                let drow = &mut du[ch * t..(ch + 1) * t];
                for tau in 0..kw {
                    g.weight[base + tau] += dot(d, &row[tau..tau + t2]);
                    axpy(fused.weight[base + tau], d, &mut drow[tau..tau + t2]);
                }
            }
        }

        let ss = &trace.ss;
        for ch in 0..c {
            let drow = &du[ch * t..(ch + 1) * t];
            let dgain = dot(drow, &ss.shifted[ch * t..(ch + 1) * t]);
            let doffset = -ss.gain[ch] * drow.iter().sum::<f64>();
            axpy(dgain, &ss.std, &mut g.scale[ch * c..(ch + 1) * c]);
            axpy(doffset, &ss.mean, &mut g.shift[ch * c..(ch + 1) * c]);
        }
    }

    /// Mean cross-entropy over `batch` and its gradient. `dropout_seeds`
    /// gives one mask seed per example (training mode); `None` disables dropout.
    pub fn batch_gradients(
        &self,
        batch: &[(&[f64], usize)],
        dropout_seeds: Option<&[u64]>,
    ) -> Result<BatchResult, NnError> {
        let s = &self.spec;
        for (x, label) in batch {
            self.check_input(x)?;
            if *label >= s.classes {
                return Err(NnError::BadLabel { label: *label, classes: s.classes });
            }
        }
        let fused = self.fused();
        let c = s.channels;
        let mut g = FusedGrad {
            shift: vec![0.0; c * c],
            scale: vec![0.0; c * c],
            weight: vec![0.0; fused.weight.len()],
            bias: vec![0.0; fused.bias.len()],
            classifier_w: vec![0.0; self.params.classifier_w.len()],
            classifier_b: vec![0.0; s.classes],
        };
        let mut loss = 0.0;
        let mut correct = 0;
        for (n, (x, label)) in batch.iter().enumerate() {
            let seed = dropout_seeds.map(|seeds| seeds[n]);
            let trace = self.forward_trace(&fused, x, seed);
            loss += cross_entropy(&trace.logits, *label);
            if argmax(&trace.probs) == *label {
                correct += 1;
            }
            self.backward(&fused, &trace, *label, &mut g);
        }
        let inv = 1.0 / batch.len().max(1) as f64;
        let mut grads = self.unfuse(g);
        grads.scale_all(inv);
        Ok(BatchResult { loss: loss * inv, correct, grads })
    }

    /// Mean cross-entropy without gradients.
    pub fn loss(&self, batch: &[(&[f64], usize)], dropout_seeds: Option<&[u64]>) -> Result<f64, NnError> {
        let fused = self.fused();
        let mut total = 0.0;
        for (n, (x, label)) in batch.iter().enumerate() {
            self.check_input(x)?;
            let trace = self.forward_trace(&fused, x, dropout_seeds.map(|s| s[n]));
            total += cross_entropy(&trace.logits, *label);
        }
        Ok(total / batch.len().max(1) as f64)
    }

    /// Chains fused-kernel gradients back to the temporal and spatial factors.
    fn unfuse(&self, g: FusedGrad) -> Params {
        let s = &self.spec;
        let (c, f1, f2, k1, k2, kw) =
            (s.channels, s.temporal_filters, s.spatial_filters, s.temporal_kernel, s.spatial_kernel, s.fused_kernel());
        let w1 = &self.params.temporal_w.data;
        let b1 = &self.params.temporal_b.data;
        let w2 = &self.params.spatial_w.data;
        let mut out = Params::zeros(s);
        out.shift.data = g.shift;
        out.scale.data = g.scale;
        out.classifier_w.data = g.classifier_w;
        out.classifier_b.data = g.classifier_b;
        for o in 0..f2 {
            for f in 0..f1 {
                let taps = &w1[f * k1..(f + 1) * k1];
                for ch in 0..c {
                    let base = (o * c + ch) * kw;
                    for j in 0..k2 {
                        let idx = ((o * f1 + f) * c + ch) * k2 + j;
                        let window = &g.weight[base + j..base + j + k1];
                        out.spatial_w.data[idx] = dot(window, taps) + g.bias[o] * b1[f];
                        axpy(w2[idx], window, &mut out.temporal_w.data[f * k1..(f + 1) * k1]);
                        out.temporal_b.data[f] += g.bias[o] * w2[idx];
                    }
                }
            }
        }
        out.spatial_b.data = g.bias;
        out
    }
}

/// Output of [`Cnn::batch_gradients`].
#[derive(Debug, Clone)]
pub struct BatchResult {
    pub loss: f64,
    /// Examples whose most probable class matched the label.
    pub correct: usize,
    pub grads: Params,
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::standard_normal;

    fn random_input(spec: &NetworkSpec, seed: u64) -> Vec<f64> {
        let mut rng = seeded(seed);
        (0..spec.channels * spec.samples).map(|_| 5.0 * standard_normal(&mut rng) + 1.0).collect()
    }

    fn identity(c: usize) -> Tensor {
        let mut t = Tensor::zeros(&[c, c]);
        for i in 0..c {
            t.data[i * c + i] = 1.0;
        }
        t
    }

    #[test]
    fn identity_shift_centres_channels() {
        let x = random_input(&NetworkSpec::reduced(), 1);
        let out = shift_scale_forward(&x, 4, &identity(4), &identity(4));
        for row in out.chunks_exact(64) {
            assert!((row.iter().sum::<f64>() / 64.0).abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_inverse_variance_gives_z_scores() {
        let x = random_input(&NetworkSpec::reduced(), 2);
        let (c, t) = (4, 64);
        let mut scale = Tensor::zeros(&[c, c]);
        let mut zscore = vec![0.0; c * t];
        for ch in 0..c {
            let row = &x[ch * t..(ch + 1) * t];
            let m = row.iter().sum::<f64>() / t as f64;
            let var = row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / t as f64;
            scale.data[ch * c + ch] = 1.0 / var;
            for (z, v) in zscore[ch * t..(ch + 1) * t].iter_mut().zip(row) {
                *z = (v - m) / libm::sqrt(var);
            }
        }
        let out = shift_scale_forward(&x, c, &identity(c), &scale);
        for (a, b) in out.iter().zip(&zscore) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_channels_give_zero_output() {
        let x: Vec<f64> = (0..4 * 64).map(|i| (i / 64) as f64 * 3.0 + 1.0).collect();
        let out = shift_scale_forward(&x, 4, &identity(4), &identity(4));
        assert!(out.iter().all(|&v| v == 0.0));
    }

    fn net(seed: u64) -> Cnn {
        let spec = NetworkSpec::reduced();
        let calib = [random_input(&spec, 100)];
        let refs: Vec<&[f64]> = calib.iter().map(|v| v.as_slice()).collect();
        Cnn::initialize(spec, seed, &refs).unwrap()
    }

    #[test]
    fn probabilities_are_normalized_and_deterministic() {
        let n = net(3);
        let x = random_input(&n.spec, 4);
        let p1 = n.forward(&x, Mode::Eval).unwrap();
        let p2 = n.forward(&x, Mode::Eval).unwrap();
        assert_eq!(p1, p2);
        assert!((p1.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        assert!(p1.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn wrong_input_size_is_rejected() {
        let n = net(5);
        assert_eq!(n.forward(&[0.0; 10], Mode::Eval), Err(NnError::ShapeMismatch { expected: 256, actual: 10 }));
    }

    #[test]
    fn saturated_softmax_gives_zero_bias_gradient() {
        let mut n = net(6);
        n.params.classifier_w.fill(0.0);
        n.params.classifier_b.data = vec![1000.0, 0.0, 0.0];
        let x = random_input(&n.spec, 7);
        let r = n.batch_gradients(&[(&x, 0)], None).unwrap();
        assert_eq!(r.grads.classifier_b.data, vec![0.0; 3]);
    }

    #[test]
    fn batch_gradient_is_the_mean() {
        let n = net(8);
        let a = random_input(&n.spec, 9);
        let b = random_input(&n.spec, 10);
        let ga = n.batch_gradients(&[(&a, 1)], None).unwrap().grads.flatten();
        let gb = n.batch_gradients(&[(&b, 2)], None).unwrap().grads.flatten();
        let gab = n.batch_gradients(&[(&a, 1), (&a, 1), (&b, 2)], None).unwrap().grads.flatten();
        for i in 0..ga.len() {
            let expected = 2.0 * ga[i] + gb[i];
            assert!((3.0 * gab[i] - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn dropout_scales_survivors() {
        let n = net(11);
        let x = random_input(&n.spec, 12);
        let trace = n.forward_trace(&n.fused(), &x, Some(99));
        let keep = 1.0 / 0.8;
        assert!(trace.mask.iter().all(|&m| m == 0.0 || m == keep));
        assert!(trace.mask.iter().any(|&m| m == 0.0));
    }
}
