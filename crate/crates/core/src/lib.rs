//! Two-stream memory-augmented vision transformer at desk scale.

pub mod error;
pub mod tensor;

pub use error::{Result, VittmError};
pub use tensor::{DType, Parameter, Tensor, Var};
#[doc(hidden)]
pub use tensor::bench_matmul_f32;
