
use alloc::vec::Vec;

use super::network::{shift_scale_forward, NnError, LOG_EPS};
use super::params::Params;
use super::spec::NetworkSpec;
use super::tensor::Tensor;

/// Every intermediate tensor of an evaluation-mode pass, shaped `[d, h, w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    pub shift_scale: Tensor,
    pub temporal: Tensor,
    pub spatial: Tensor,
    pub squared: Tensor,
    pub pooled: Tensor,
    pub logged: Tensor,
    pub logits: Tensor,
    pub probs: Vec<f64>,
}

impl LayerTrace {
    /// Shapes in layer order, from the input through the logits.
    pub fn shapes(&self) -> Vec<Vec<usize>> {
        [&self.shift_scale, &self.temporal, &self.spatial, &self.squared, &self.pooled, &self.logged, &self.logits]
            .iter()
            .map(|t| t.shape.clone())
            .collect()
    }
}

/// Straightforward layer-by-layer evaluation with no fusion, dropout off.
pub fn reference_forward(spec: &NetworkSpec, params: &Params, x: &[f64]) -> Result<LayerTrace, NnError> {
    spec.validate()?;
    let (c, t) = (spec.channels, spec.samples);
    if x.len() != c * t {
        return Err(NnError::ShapeMismatch { expected: c * t, actual: x.len() });
    }
    let (f1, k1, t1) = (spec.temporal_filters, spec.temporal_kernel, spec.temporal_len());
    let (f2, k2, t2) = (spec.spatial_filters, spec.spatial_kernel, spec.spatial_len());
    let (p, k3, q) = (spec.pooled_len(), spec.classifier_kernel, spec.classes);

    let u = shift_scale_forward(x, c, &params.shift, &params.scale);
    let shift_scale = Tensor::from_vec(&[1, c, t], u.clone()).expect("shape");

    let mut temporal = Tensor::zeros(&[f1, c, t1]);
    for f in 0..f1 {
        for ch in 0..c {
            for i in 0..t1 {
                let mut acc = params.temporal_b.data[f];
                for k in 0..k1 {
                    acc += params.temporal_w.data[f * k1 + k] * u[ch * t + i + k];
                }
                temporal.data[(f * c + ch) * t1 + i] = acc;
            }
        }
    }

    let mut spatial = Tensor::zeros(&[f2, 1, t2]);
    for o in 0..f2 {
        for i in 0..t2 {
            let mut acc = params.spatial_b.data[o];
            for f in 0..f1 {
                for ch in 0..c {
                    for j in 0..k2 {
                        acc += params.spatial_w.data[((o * f1 + f) * c + ch) * k2 + j]
                            * temporal.data[(f * c + ch) * t1 + i + j];
                    }
                }
            }
            spatial.data[o * t2 + i] = acc;
        }
    }

    let mut squared = spatial.clone();
    squared.data.iter_mut().for_each(|v| *v *= *v);

    let mut pooled = Tensor::zeros(&[f2, 1, p]);
    for o in 0..f2 {
        for i in 0..p {
            let start = o * t2 + i * spec.pool_stride;
            let sum: f64 = squared.data[start..start + spec.pool_kernel].iter().sum();
            pooled.data[o * p + i] = sum / spec.pool_kernel as f64;
        }
    }

    let mut logged = pooled.clone();
    logged.data.iter_mut().for_each(|v| *v = libm::log(v.max(LOG_EPS)));

    let out_w = p - k3 + 1;
    let mut logits = Tensor::zeros(&[q, 1, out_w]);
    for qq in 0..q {
        for i in 0..out_w {
            let mut acc = params.classifier_b.data[qq];
            for o in 0..f2 {
                for k in 0..k3 {
                    acc += params.classifier_w.data[(qq * f2 + o) * k3 + k] * logged.data[o * p + i + k];
                }
            }
            logits.data[qq * out_w + i] = acc;
        }
    }

    let max = logits.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.data.iter().map(|v| libm::exp(v - max)).collect();
    let total: f64 = exps.iter().sum();
    let probs = exps.iter().map(|e| e / total).collect();
    Ok(LayerTrace { shift_scale, temporal, spatial, squared, pooled, logged, logits, probs })
}
