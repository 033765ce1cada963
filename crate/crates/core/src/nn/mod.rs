//! The shift/scale convolutional network on raw epochs: learned per-channel
//! shift and scale, a temporal then a spatial convolution, squaring, average
//! pooling, log, dropout and a final convolution onto the class axis.
//!
//! The two convolutions are linear and adjacent, so training runs them as a
//! single effective kernel and chains the gradient back to both factors.
//! [`reference_forward`] evaluates the layers one by one and exposes every
//! intermediate tensor.

mod network;
mod params;
mod reference;
mod spec;
mod tensor;
mod train;

pub use network::{shift_scale_forward, BatchResult, Cnn, Mode, NnError, LOG_EPS};
pub use params::Params;
pub use reference::{reference_forward, LayerTrace};
pub use spec::{NetworkSpec, SpecError};
pub use tensor::Tensor;
pub use train::{train_cnn, train_cnn_with_validation, Adam, EpochRecord, TrainConfig, TrainError, TrainedCnn};
