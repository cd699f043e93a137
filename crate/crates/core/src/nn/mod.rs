//! A small sequential network engine: 1-D convolution, max-pooling, dropout,
//! a unidirectional LSTM and dense layers, all in `f64` with hand-derived
//! backward passes. Adam and a finite-difference gradient checker complete it.

mod checkpoint;
mod gradcheck;
mod layers;
mod loss;
mod optim;
mod params;
mod tensor;

pub use checkpoint::{Checkpoint, MAGIC as CHECKPOINT_MAGIC};
pub use gradcheck::{gradient_check, gradients_with_loss, max_relative_error, STEP as GRADCHECK_STEP};
pub use layers::{backward, forward, shape_trace, sliding_len, DropoutMasks, ForwardCache, LayerSpec, Mode};
pub use loss::{softmax, softmax_cross_entropy};
pub use optim::{adam_step, AdamConfig, AdamState};
pub use params::{GradientBundle, ModelParams, Param, ParamSet};
pub use tensor::Tensor;
