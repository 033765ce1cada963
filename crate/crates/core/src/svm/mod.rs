//! Kernel support vector machines trained by sequential minimal optimization,
//! extended to the three difficulty classes by one-vs-rest.

mod kernel;
mod model;
mod scaler;
mod smo;

pub use kernel::{Kernel, KernelKind, KernelSpec};
pub use model::{
    train_multiclass, train_smo, MulticlassSvm, SvmConfig, SvmError, SvmFit, SvmModel,
};
pub use scaler::Scaler;
pub use smo::{solve_dual, DualSolution, SmoParams};
