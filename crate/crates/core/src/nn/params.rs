use alloc::vec::Vec;

use super::spec::NetworkSpec;
use super::tensor::Tensor;

/// Trainable parameters; also used to hold their gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// `[channels, channels]`
    pub shift: Tensor,
    /// `[channels, channels]`
    pub scale: Tensor,
    /// `[temporal_filters, temporal_kernel]`
    pub temporal_w: Tensor,
    pub temporal_b: Tensor,
    /// `[spatial_filters, temporal_filters, channels, spatial_kernel]`
    pub spatial_w: Tensor,
    pub spatial_b: Tensor,
    /// `[classes, spatial_filters, classifier_kernel]`
    pub classifier_w: Tensor,
    pub classifier_b: Tensor,
}

impl Params {
    pub const NAMES: [&'static str; 8] = [
        "shift",
        "scale",
        "temporal_w",
        "temporal_b",
        "spatial_w",
        "spatial_b",
        "classifier_w",
        "classifier_b",
    ];

    pub fn zeros(spec: &NetworkSpec) -> Self {
        let c = spec.channels;
        Self {
            shift: Tensor::zeros(&[c, c]),
            scale: Tensor::zeros(&[c, c]),
            temporal_w: Tensor::zeros(&[spec.temporal_filters, spec.temporal_kernel]),
            temporal_b: Tensor::zeros(&[spec.temporal_filters]),
            spatial_w: Tensor::zeros(&[spec.spatial_filters, spec.temporal_filters, c, spec.spatial_kernel]),
            spatial_b: Tensor::zeros(&[spec.spatial_filters]),
            classifier_w: Tensor::zeros(&[spec.classes, spec.spatial_filters, spec.classifier_kernel]),
            classifier_b: Tensor::zeros(&[spec.classes]),
        }
    }

    pub fn tensors(&self) -> [&Tensor; 8] {
        [
            &self.shift,
            &self.scale,
            &self.temporal_w,
            &self.temporal_b,
            &self.spatial_w,
            &self.spatial_b,
            &self.classifier_w,
            &self.classifier_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 8] {
        [
            &mut self.shift,
            &mut self.scale,
            &mut self.temporal_w,
            &mut self.temporal_b,
            &mut self.spatial_w,
            &mut self.spatial_b,
            &mut self.classifier_w,
            &mut self.classifier_b,
        ]
    }

    pub fn count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// All values in declaration order.
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    /// Inverse of [`Params::flatten`]; `false` if the length is wrong.
    pub fn assign(&mut self, values: &[f64]) -> bool {
        if values.len() != self.count() {
            return false;
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.data.copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        true
    }

    pub fn scale_all(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn add_assign(&mut self, other: &Params) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += y;
            }
        }
    }
}
