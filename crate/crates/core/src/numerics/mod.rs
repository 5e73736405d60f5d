//! Dense tensors, convolution, pooling and seeded sampling.

mod conv;
mod rng;
mod sampling;
mod tensor;

pub use conv::{col2im_accumulate, conv2d_valid, im2col, maxpool2d, ConvGeometry, PoolGeometry};
pub(crate) use conv::{conv_from_cols, maxpool_slice, outer_from_cols};
pub use rng::{derive_seed, Concern, Rng};
pub use sampling::{sample_normal, sample_uniform_sym};
pub use tensor::{gemm, Tensor};
