use alloc::vec;
use alloc::vec::Vec;

/// Layer sizes of the network. [`NetworkSpec::default`] is the published
/// architecture on 20 × 512 epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct NetworkSpec {
    pub channels: usize,
    pub samples: usize,
    /// Temporal convolution: `temporal_filters` kernels of `1 × temporal_kernel`.
    pub temporal_filters: usize,
    pub temporal_kernel: usize,
    /// Spatial convolution: `spatial_filters` kernels of `channels × spatial_kernel`.
    pub spatial_filters: usize,
    pub spatial_kernel: usize,
    pub pool_kernel: usize,
    pub pool_stride: usize,
    /// Width of the final convolution; must equal the pooled length.
    pub classifier_kernel: usize,
    pub classes: usize,
    /// Dropout rate in per-mille (200 = 20 %), kept integral so the spec is `Eq`.
    pub dropout_permille: u32,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            channels: 20,
            samples: 512,
            temporal_filters: 10,
            temporal_kernel: 30,
            spatial_filters: 10,
            spatial_kernel: 40,
            pool_kernel: 150,
            pool_stride: 30,
            classifier_kernel: 10,
            classes: 3,
            dropout_permille: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("layer {layer} does not fit its input ({detail})")]
    DoesNotFit { layer: &'static str, detail: &'static str },
    #[error("classifier kernel {kernel} must span the pooled length {pooled}")]
    ClassifierWidth { kernel: usize, pooled: usize },
    #[error("dropout rate must be below 100%")]
    Dropout,
}

impl NetworkSpec {
    /// A small network with the same layer types, for gradient checks.
    pub fn reduced() -> Self {
        Self {
            channels: 4,
            samples: 64,
            temporal_filters: 3,
            temporal_kernel: 5,
            spatial_filters: 3,
            spatial_kernel: 8,
            pool_kernel: 20,
            pool_stride: 5,
            classifier_kernel: 7,
            classes: 3,
            dropout_permille: 200,
        }
    }

    pub fn dropout(&self) -> f64 {
        f64::from(self.dropout_permille) / 1000.0
    }

    pub fn temporal_len(&self) -> usize {
        self.samples + 1 - self.temporal_kernel
    }

    pub fn spatial_len(&self) -> usize {
        self.temporal_len() + 1 - self.spatial_kernel
    }

    pub fn pooled_len(&self) -> usize {
        (self.spatial_len() - self.pool_kernel) / self.pool_stride + 1
    }

    /// Width of the fused temporal-then-spatial kernel.
    pub fn fused_kernel(&self) -> usize {
        self.temporal_kernel + self.spatial_kernel - 1
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let fits = |layer, ok: bool, detail| if ok { Ok(()) } else { Err(SpecError::DoesNotFit { layer, detail }) };
        fits("input", self.channels > 0 && self.samples > 0 && self.classes > 1, "empty input or fewer than two classes")?;
        fits("temporal conv", self.temporal_kernel >= 1 && self.temporal_kernel <= self.samples && self.temporal_filters > 0, "kernel wider than the epoch")?;
        fits("spatial conv", self.spatial_kernel >= 1 && self.spatial_kernel <= self.temporal_len() && self.spatial_filters > 0, "kernel wider than its input")?;
        fits("average pool", self.pool_stride >= 1 && self.pool_kernel >= 1 && self.pool_kernel <= self.spatial_len(), "window wider than its input")?;
        if self.classifier_kernel != self.pooled_len() {
            return Err(SpecError::ClassifierWidth { kernel: self.classifier_kernel, pooled: self.pooled_len() });
        }
        if self.dropout_permille >= 1000 {
            return Err(SpecError::Dropout);
        }
        Ok(())
    }

    /// Output shape of every layer as `[depth, height, width]`, input first:
    /// input, shift/scale, temporal conv, spatial conv, square, pool, log,
    /// dropout, classifier conv.
    pub fn shape_chain(&self) -> Result<Vec<[usize; 3]>, SpecError> {
        self.validate()?;
        let (c, t) = (self.channels, self.samples);
        Ok(vec![
            [1, c, t],
            [1, c, t],
            [self.temporal_filters, c, self.temporal_len()],
            [self.spatial_filters, 1, self.spatial_len()],
            [self.spatial_filters, 1, self.spatial_len()],
            [self.spatial_filters, 1, self.pooled_len()],
            [self.spatial_filters, 1, self.pooled_len()],
            [self.spatial_filters, 1, self.pooled_len()],
            [self.classes, 1, self.pooled_len() + 1 - self.classifier_kernel],
        ])
    }

    pub fn parameter_count(&self) -> usize {
        let c = self.channels;
        2 * c * c
            + self.temporal_filters * self.temporal_kernel
            + self.temporal_filters
            + self.spatial_filters * self.temporal_filters * c * self.spatial_kernel
            + self.spatial_filters
            + self.classes * self.spatial_filters * self.classifier_kernel
            + self.classes
    }
}
