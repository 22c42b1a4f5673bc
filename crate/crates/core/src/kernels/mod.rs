//! Forward-only reference kernels: rotational convolution, dual-resolution
//! cross-attention fusion and the multi-task detection loss.
//!
//! Everything here is a pure function of its inputs and runs in `f64`.

mod conv;
mod fusion;
pub mod io;
mod loss;
mod tensor;
mod verify;

pub use conv::{conv2d, rot_conv_forward, rotate_kernel90, rotate_map90, RotConvKernel};
pub use fusion::{
    attention_weights, cross_attention, flatten_with_pe, fuse_scale, global_avg_pool, multi_scale_fuse,
    sinusoidal_pe, FusionWeights, Linear, ScaleInput, SpatialMask, FUSION_SCALES,
};
pub use loss::{
    balanced_bce, smooth_l1, total_loss, LossBreakdown, LossTerm, MultiTaskOutput, MultiTaskTargets,
    DEFAULT_SMOOTH_L1_BETA,
};
pub use tensor::Tensor;
pub use verify::{verify_bundle, CheckOutcome, VerifyReport, VERIFY_TOLERANCE};

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("shape {shape:?} needs {} values, got {len}", shape.iter().product::<usize>())]
    DataLength { shape: Vec<usize>, len: usize },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("{op}: expected rank {expected}, got shape {shape:?}")]
    Rank { op: &'static str, expected: usize, shape: Vec<usize> },
    #[error("{op}: shape mismatch: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("{op}: {detail}")]
    InvalidParameter { op: &'static str, detail: String },
    #[error("attention needs at least one key")]
    EmptyKeys,
    #[error("multi-scale fusion needs {FUSION_SCALES} scales, got {found}")]
    MissingScale { found: usize },
    #[error("labels must be 0 or 1, got {value} at index {index}")]
    InvalidLabel { index: usize, value: f64 },
    #[error("loss weight {index} is negative ({value})")]
    NegativeLambda { index: usize, value: f64 },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bundle format: {0}")]
    Format(String),
}
